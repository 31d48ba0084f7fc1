//! Swap isometries between black boxes and trusted registers.
//!
//! A per-party swap is an operator `S = Σ_w w ⊗ M_w` acting on the box (words
//! `w` of the operator algebra) and on a small trusted register (dense real
//! matrices `M_w`). Tracing out the boxes after applying `S_A ⊗ S_B` to the
//! unknown state and a trusted product state leaves a `d² × d²` state whose
//! entries are real linear combinations of moments.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::algebra::{Monomial, Party, Polynomial, Scenario};
use crate::error::{Error, Result};
use crate::moments::{LinearFunctional, MomentIndex};

/// Numerical threshold below which trusted-register coefficients are dropped.
const TRUSTED_EPSILON: f64 = 1e-14;

/// `Σ_w w ⊗ M_w` on one party's box and trusted register.
#[derive(Clone, Debug)]
pub struct LocalOperator {
    dim: usize,
    terms: BTreeMap<Monomial, Mat<f64>>,
}

impl LocalOperator {
    pub fn zero(dim: usize) -> Self {
        LocalOperator {
            dim,
            terms: BTreeMap::new(),
        }
    }

    /// `1 ⊗ M`.
    pub fn trusted(m: Mat<f64>) -> Self {
        Self::from_terms(m.nrows(), [(Polynomial::identity(), m)])
    }

    /// `p ⊗ 1`.
    pub fn boxed(dim: usize, p: &Polynomial) -> Self {
        Self::from_terms(dim, [(p.clone(), Mat::identity(dim, dim))])
    }

    pub fn from_terms<I: IntoIterator<Item = (Polynomial, Mat<f64>)>>(dim: usize, terms: I) -> Self {
        let mut op = LocalOperator::zero(dim);
        for (p, m) in terms {
            assert_eq!((m.nrows(), m.ncols()), (dim, dim), "trusted matrix shape");
            for (w, c) in p.terms() {
                op.add(w.clone(), &m, c);
            }
        }
        op
    }

    fn add(&mut self, w: Monomial, m: &Mat<f64>, c: f64) {
        let dim = self.dim;
        let slot = self.terms.entry(w.clone()).or_insert_with(|| Mat::zeros(dim, dim));
        *slot += m * faer::Scale(c);
        if max_abs(slot) <= TRUSTED_EPSILON {
            self.terms.remove(&w);
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Mat<f64>)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn mul(&self, other: &LocalOperator) -> LocalOperator {
        assert_eq!(self.dim, other.dim);
        let mut out = LocalOperator::zero(self.dim);
        for (w, m) in &self.terms {
            for (v, n) in &other.terms {
                if let Some(wv) = w.mul(v) {
                    out.add(wv, &(m * n), 1.0);
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> LocalOperator {
        let mut out = LocalOperator::zero(self.dim);
        for (w, m) in &self.terms {
            out.add(w.adjoint(), &m.transpose().to_owned(), 1.0);
        }
        out
    }

    /// Pairs `(w, M_w v)` with nonzero trusted column.
    pub fn apply(&self, v: &[f64]) -> Vec<(Monomial, Vec<f64>)> {
        let mut out = Vec::new();
        for (w, m) in &self.terms {
            let col: Vec<f64> = (0..self.dim)
                .map(|r| (0..self.dim).map(|c| m[(r, c)] * v[c]).sum())
                .collect();
            if col.iter().any(|x| x.abs() > TRUSTED_EPSILON) {
                out.push((w.clone(), col));
            }
        }
        out
    }

    /// Box polynomial `Σ_w <φ|M_w|φ> w`.
    pub fn expectation(&self, phi: &[f64]) -> Polynomial {
        let mut p = Polynomial::zero();
        for (w, m) in &self.terms {
            let mut e = 0.0;
            for r in 0..self.dim {
                for c in 0..self.dim {
                    e += phi[r] * m[(r, c)] * phi[c];
                }
            }
            p.add_term(w.clone(), e);
        }
        p
    }

    /// Words whose trusted column on `v` is nonzero, i.e. the box operators
    /// `S` actually applies to the initial trusted state.
    pub fn active_words(&self, v: &[f64]) -> Vec<Monomial> {
        self.apply(v).into_iter().map(|(w, _)| w).collect()
    }
}

fn max_abs(m: &Mat<f64>) -> f64 {
    let mut out: f64 = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            out = out.max(m[(i, j)].abs());
        }
    }
    out
}

/// A pair of local swaps with their trusted initial states.
#[derive(Clone, Debug)]
pub struct SwapSpec {
    pub scenario: Scenario,
    pub dim: usize,
    pub parties: [LocalOperator; 2],
    pub initial: [Vec<f64>; 2],
}

impl SwapSpec {
    pub fn new(
        scenario: Scenario,
        a: LocalOperator,
        b: LocalOperator,
        initial: Vec<f64>,
    ) -> Result<Self> {
        let dim = a.dim();
        if b.dim() != dim || initial.len() != dim {
            return Err(Error::Dimension(
                "swap operators and initial state must share one trusted dimension".into(),
            ));
        }
        let norm: f64 = initial.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "trusted initial state has norm {norm}"
            )));
        }
        for op in [&a, &b] {
            for (w, _) in op.terms() {
                scenario.validate(&Polynomial::monomial(w.clone()))?;
            }
        }
        Ok(SwapSpec {
            scenario,
            dim,
            parties: [a, b],
            initial: [initial.clone(), initial],
        })
    }

    pub fn party(&self, party: Party) -> &LocalOperator {
        &self.parties[party.index()]
    }

    /// Replaces the operator of one party (used by mutation checks).
    pub fn with_party(mut self, party: Party, op: LocalOperator) -> Self {
        self.parties[party.index()] = op;
        self
    }

    /// Single-party block `L[r][c] = Σ_{w,w'} a_w[r] a_w'[c] w'* w`.
    fn local_state(&self, party: Party) -> Vec<Polynomial> {
        let d = self.dim;
        let cols = self.party(party).apply(&self.initial[party.index()]);
        let mut out = vec![Polynomial::zero(); d * d];
        for (w, aw) in &cols {
            for (v, av) in &cols {
                let Some(word) = v.adjoint().mul(w) else {
                    continue;
                };
                for r in 0..d {
                    for c in 0..d {
                        let coef = aw[r] * av[c];
                        if coef.abs() > TRUSTED_EPSILON {
                            out[r * d + c].add_term(word.clone(), coef);
                        }
                    }
                }
            }
        }
        out
    }

    /// Entries of the swapped state as polynomials, row-major over
    /// `(r_A d + r_B, c_A d + c_B)`.
    pub fn state_polynomials(&self) -> Vec<Polynomial> {
        let d = self.dim;
        let la = self.local_state(Party::A);
        let lb = self.local_state(Party::B);
        let n = d * d;
        let mut out = vec![Polynomial::zero(); n * n];
        for ra in 0..d {
            for rb in 0..d {
                for ca in 0..d {
                    for cb in 0..d {
                        out[(ra * d + rb) * n + ca * d + cb] =
                            la[ra * d + ca].multiply(&lb[rb * d + cb]);
                    }
                }
            }
        }
        out
    }

    /// `<ψ|ρ_swap|ψ>` as a polynomial.
    pub fn fidelity_polynomial(&self, reference: &ReferenceState) -> Result<Polynomial> {
        let n = self.dim * self.dim;
        if reference.amplitudes.len() != n {
            return Err(Error::Dimension(format!(
                "reference state has {} amplitudes, swap register needs {n}",
                reference.amplitudes.len()
            )));
        }
        let rho = self.state_polynomials();
        let psi = &reference.amplitudes;
        let mut p = Polynomial::zero();
        for r in 0..n {
            for c in 0..n {
                let w = psi[r] * psi[c];
                if w != 0.0 {
                    p = &p + &rho[r * n + c].scale(w);
                }
            }
        }
        Ok(p)
    }

    pub fn state_functional(&self, index: &mut MomentIndex) -> SwapFunctional {
        let polys = self.state_polynomials();
        SwapFunctional {
            dim: self.dim * self.dim,
            entries: polys.iter().map(|p| index.moment_of(p)).collect(),
        }
    }
}

/// Entries of the swapped state as functionals of the moments.
#[derive(Clone, Debug)]
pub struct SwapFunctional {
    dim: usize,
    entries: Vec<LinearFunctional>,
}

impl SwapFunctional {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, r: usize, c: usize) -> &LinearFunctional {
        &self.entries[r * self.dim + c]
    }

    pub fn entries(&self) -> &[LinearFunctional] {
        &self.entries
    }

    pub fn trace(&self) -> LinearFunctional {
        let mut t = LinearFunctional::zero();
        for r in 0..self.dim {
            t.add_scaled(self.entry(r, r), 1.0);
        }
        t
    }

    pub fn fidelity(&self, reference: &ReferenceState) -> LinearFunctional {
        let psi = &reference.amplitudes;
        let mut f = LinearFunctional::zero();
        for r in 0..self.dim {
            for c in 0..self.dim {
                let w = psi[r] * psi[c];
                if w != 0.0 {
                    f.add_scaled(self.entry(r, c), w);
                }
            }
        }
        f
    }

    pub fn evaluate(&self, values: &[f64]) -> Vec<f64> {
        self.entries.iter().map(|f| f.evaluate(values)).collect()
    }
}

/// Normalized real reference state on the trusted registers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceState {
    /// Local dimension of each trusted register.
    pub local_dim: usize,
    /// Amplitudes over `|a b>`, index `a · local_dim + b`.
    pub amplitudes: Vec<f64>,
}

impl ReferenceState {
    pub fn new(local_dim: usize, amplitudes: Vec<f64>) -> Result<Self> {
        if amplitudes.len() != local_dim * local_dim {
            return Err(Error::Dimension(format!(
                "{} amplitudes for local dimension {local_dim}",
                amplitudes.len()
            )));
        }
        let norm = amplitudes.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidParameter("reference state has zero norm".into()));
        }
        Ok(ReferenceState {
            local_dim,
            amplitudes: amplitudes.into_iter().map(|x| x / norm).collect(),
        })
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn overlap(&self, other: &[f64]) -> f64 {
        self.amplitudes.iter().zip(other).map(|(a, b)| a * b).sum()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ReferenceState = serde_json::from_str(text)?;
        ReferenceState::new(raw.local_dim, raw.amplitudes)
    }
}

fn basis_projector(d: usize, k: usize) -> Mat<f64> {
    Mat::from_fn(d, d, |r, c| if r == k && c == k { 1.0 } else { 0.0 })
}

fn pauli_x() -> Mat<f64> {
    Mat::from_fn(2, 2, |r, c| if r != c { 1.0 } else { 0.0 })
}

fn expect_scenario(scenario: &Scenario, cglmp: bool) -> Result<()> {
    let ok = if cglmp {
        scenario.is_cglmp()
    } else {
        scenario.is_chsh()
    };
    if ok {
        Ok(())
    } else {
        Err(Error::WrongScenario {
            expected: if cglmp { "CGLMP" } else { "CHSH" },
        })
    }
}

/// `S = U V U` with `U = 1⊗|0><0| + A_1⊗|1><1|` and
/// `V = (1+A_0)/2 ⊗ 1 + (1-A_0)/2 ⊗ σ_x`.
pub fn chsh_party_swap(scenario: &Scenario, party: Party) -> Result<LocalOperator> {
    expect_scenario(scenario, false)?;
    let one = Polynomial::identity();
    let a0 = scenario.dichotomic(party, 0)?;
    let a1 = scenario.dichotomic(party, 1)?;
    let u = LocalOperator::from_terms(
        2,
        [
            (one.clone(), basis_projector(2, 0)),
            (a1, basis_projector(2, 1)),
        ],
    );
    let v = LocalOperator::from_terms(
        2,
        [
            ((&one + &a0).scale(0.5), Mat::identity(2, 2)),
            ((&one - &a0).scale(0.5), pauli_x()),
        ],
    );
    Ok(u.mul(&v).mul(&u))
}

pub fn chsh_swap() -> SwapSpec {
    let sc = Scenario::chsh();
    let a = chsh_party_swap(&sc, Party::A).expect("CHSH scenario");
    let b = chsh_party_swap(&sc, Party::B).expect("CHSH scenario");
    SwapSpec::new(sc, a, b, vec![1.0, 0.0]).expect("valid CHSH swap")
}

/// `cos(π/8)|φ-> + sin(π/8)|ψ+>`, maximally entangled and reaching 2√2
/// with `A_0 = B_0 = σ_z`, `A_1 = B_1 = σ_x`.
pub fn chsh_reference() -> ReferenceState {
    let (c, s) = ((PI / 8.0).cos(), (PI / 8.0).sin());
    let k = std::f64::consts::FRAC_1_SQRT_2;
    ReferenceState {
        local_dim: 2,
        amplitudes: vec![c * k, s * k, s * k, -c * k],
    }
}

/// `γ = (√11 − √3)/2`.
pub fn cglmp_gamma() -> f64 {
    (11f64.sqrt() - 3f64.sqrt()) / 2.0
}

/// `(12 − √33)/9`, the smallest CGLMP value reachable by qutrits.
pub fn cglmp_quantum_minimum() -> f64 {
    (12.0 - 33f64.sqrt()) / 9.0
}

/// Polynomial in one party's projectors that acts as the cyclic shift
/// `|k> -> |k+1>` on the optimal qutrit measurements.
pub fn cglmp_translation_polynomial(scenario: &Scenario, party: Party) -> Result<Polynomial> {
    expect_scenario(scenario, true)?;
    let e = |x: usize, a: usize| scenario.projector(party, x, a);
    let (e00, e01, e02) = (e(0, 0)?, e(0, 1)?, e(0, 2)?);
    let (e11, e12) = (e(1, 1)?, e(1, 2)?);
    let mut p = &(&e01 - &e00.scale(0.5)) - &e02.scale(2.0);
    p = &p + &e00.multiply(&(&e12 - &e11)).scale(1.5);
    p = &p - &e01.multiply(&(&e11 + &e12.scale(2.0))).scale(1.5);
    p = &p + &e02.multiply(&(&e11.scale(2.0) + &e12)).scale(1.5);
    Ok(p)
}

/// The combination `E0 + 2E2 + E1/2 − 3/2 E0(2E'1 + E'2) − 3/2 E1(E'1 − E'2)
/// − 3/2 E2(E'1 + 2E'2)`. On the optimal measurements it is the signed
/// backward shift `diag(1, −1, −1) · Σ_k |k><k+1|`, not `|k> -> |k+1>`.
pub fn cglmp_printed_translation_polynomial(
    scenario: &Scenario,
    party: Party,
) -> Result<Polynomial> {
    expect_scenario(scenario, true)?;
    let e = |x: usize, a: usize| scenario.projector(party, x, a);
    let (e00, e01, e02) = (e(0, 0)?, e(0, 1)?, e(0, 2)?);
    let (e11, e12) = (e(1, 1)?, e(1, 2)?);
    let mut p = &(&e00 + &e02.scale(2.0)) + &e01.scale(0.5);
    p = &p - &e00.multiply(&(&e11.scale(2.0) + &e12)).scale(1.5);
    p = &p - &e01.multiply(&(&e11 - &e12)).scale(1.5);
    p = &p - &e02.multiply(&(&e11 + &e12.scale(2.0))).scale(1.5);
    Ok(p)
}

/// Trusted cyclic shift `Σ_k |k+1><k|` raised to `power` (may be negative).
pub fn cyclic_shift(d: usize, power: i64) -> Mat<f64> {
    let s = power.rem_euclid(d as i64) as usize;
    Mat::from_fn(d, d, |r, c| if r == (c + s) % d { 1.0 } else { 0.0 })
}

/// `S = T U V U` with `U = Σ_k P̂^k ⊗ |k><k|`, `V = Σ_k E^0_k ⊗ P^{-k}` and
/// `T = 1 ⊗ Σ_k |-k><k|`, where `P̂` is the party's auxiliary unitary.
pub fn cglmp_party_swap(scenario: &Scenario, party: Party) -> Result<LocalOperator> {
    expect_scenario(scenario, true)?;
    let d = 3;
    let aux = scenario.aux(party, 0)?;
    let u = LocalOperator::from_terms(d, (0..d).map(|k| (aux.pow(k), basis_projector(d, k))));
    let mut v_terms = Vec::new();
    for k in 0..d {
        v_terms.push((scenario.projector(party, 0, k)?, cyclic_shift(d, -(k as i64))));
    }
    let v = LocalOperator::from_terms(d, v_terms);
    let negate = Mat::from_fn(d, d, |r, c| if r == (d - c) % d { 1.0 } else { 0.0 });
    let t = LocalOperator::trusted(negate);
    Ok(t.mul(&u).mul(&v).mul(&u))
}

pub fn cglmp_swap() -> SwapSpec {
    let sc = Scenario::cglmp();
    let a = cglmp_party_swap(&sc, Party::A).expect("CGLMP scenario");
    let b = cglmp_party_swap(&sc, Party::B).expect("CGLMP scenario");
    SwapSpec::new(sc, a, b, vec![1.0, 0.0, 0.0]).expect("valid CGLMP swap")
}

/// The optimal qutrit state in the measurement frame of the swap.
pub fn cglmp_reference() -> ReferenceState {
    let g = cglmp_gamma();
    let s3 = 3f64.sqrt();
    let norm = 3.0 * (2.0 + g * g).sqrt();
    let mut amps = vec![0.0; 9];
    for a in 0..3 {
        for b in 0..3 {
            amps[a * 3 + b] = match (b + 3 - a) % 3 {
                0 => g + s3,
                1 => g,
                _ => g - s3,
            } / norm;
        }
    }
    ReferenceState {
        local_dim: 3,
        amplitudes: amps,
    }
}

/// A localizing constraint `Γ(Q) ⪰ 0` with the basis it should be built on.
#[derive(Clone, Debug)]
pub struct LocalizingConstraint {
    pub label: String,
    pub weight: Polynomial,
    pub basis_level: usize,
}

/// `Q_A = P̂_A* P_A(E)` and `Q_B = P̂_B* P_B(F)`.
pub fn localizing_constraints_cglmp(scenario: &Scenario) -> Result<Vec<LocalizingConstraint>> {
    expect_scenario(scenario, true)?;
    let mut out = Vec::new();
    for party in Party::BOTH {
        let p = cglmp_translation_polynomial(scenario, party)?;
        let q = scenario.aux_adjoint(party, 0)?.multiply(&p);
        out.push(LocalizingConstraint {
            label: format!("localizing-{party}"),
            weight: q,
            basis_level: 1,
        });
    }
    Ok(out)
}

/// Trusted qubit preparations used to probe Bob's measurements.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Preparation {
    Zero,
    One,
    Plus,
    Minus,
}

impl Preparation {
    pub fn vector(self) -> [f64; 2] {
        let k = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            Preparation::Zero => [1.0, 0.0],
            Preparation::One => [0.0, 1.0],
            Preparation::Plus => [k, k],
            Preparation::Minus => [k, -k],
        }
    }
}

/// Label `(b, y, φ)` of one probability entering τ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TauLabel {
    pub outcome: usize,
    pub setting: usize,
    pub preparation: Preparation,
}

/// The four probe terms of τ, in order.
pub const TAU_TERMS: [TauLabel; 4] = [
    TauLabel {
        outcome: 0,
        setting: 0,
        preparation: Preparation::Zero,
    },
    TauLabel {
        outcome: 1,
        setting: 0,
        preparation: Preparation::One,
    },
    TauLabel {
        outcome: 0,
        setting: 1,
        preparation: Preparation::Plus,
    },
    TauLabel {
        outcome: 1,
        setting: 1,
        preparation: Preparation::Minus,
    },
];

/// Probabilities `P(b|y,φ) = <S_B* (Π^y_b ⊗ 1) S_B>` on `ρ ⊗ |φ><φ|` as Bob-only
/// polynomials, followed by `τ = (ΣP)/2 − 1`.
pub fn measurement_tau_polynomials(
    scenario: &Scenario,
) -> Result<(Vec<(TauLabel, Polynomial)>, Polynomial)> {
    expect_scenario(scenario, false)?;
    let s = chsh_party_swap(scenario, Party::B)?;
    let s_adj = s.adjoint();
    let mut probs = Vec::new();
    let mut tau = Polynomial::constant(-1.0);
    for label in TAU_TERMS {
        let pi = scenario.projector(Party::B, label.setting, label.outcome)?;
        let sandwich = s_adj.mul(&LocalOperator::boxed(2, &pi)).mul(&s);
        let p = sandwich.expectation(&label.preparation.vector());
        tau = &tau + &p.scale(0.5);
        probs.push((label, p));
    }
    Ok((probs, tau))
}

/// [`measurement_tau_polynomials`] as functionals; the last entry is τ.
pub fn measurement_tau_functionals(
    scenario: &Scenario,
    index: &mut MomentIndex,
) -> Result<(Vec<(TauLabel, LinearFunctional)>, LinearFunctional)> {
    let (probs, tau) = measurement_tau_polynomials(scenario)?;
    let probs = probs
        .into_iter()
        .map(|(l, p)| (l, index.moment_of(&p)))
        .collect();
    Ok((probs, index.moment_of(&tau)))
}
