//! Dense simulation of explicit finite-dimensional strategies.
//!
//! Everything here works directly with matrices and never goes through the
//! rewrite system, so it can serve as ground truth for the symbolic side:
//! moments, Bell values and swapped states of a concrete state and
//! measurements are computed by brute force.

use std::collections::HashMap;

use faer::{c64, Mat, Side};
use serde::{Deserialize, Serialize};

use crate::algebra::{Monomial, Party, PartySpec, Polynomial, Scenario, Symbol, SymbolKind};
use crate::error::{Error, Result};
use crate::moments::MomentIndex;
use crate::swap::{cglmp_reference, cglmp_translation_polynomial, chsh_reference, ReferenceState, SwapSpec};

/// Tolerance for the defining identities of a strategy.
pub const STRATEGY_TOLERANCE: f64 = 1e-12;

/// State and measurements of two boxes.
#[derive(Clone, Debug)]
pub struct Strategy {
    dims: [usize; 2],
    state: Mat<c64>,
    measurements: [Vec<Vec<Mat<c64>>>; 2],
    aux: [Vec<Mat<c64>>; 2],
}

fn cmax_abs(m: &Mat<c64>) -> f64 {
    let mut out: f64 = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            out = out.max(m[(i, j)].norm());
        }
    }
    out
}

fn complexify(m: &Mat<f64>) -> Mat<c64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| c64::new(m[(i, j)], 0.0))
}

fn projector_onto(v: &[c64]) -> Mat<c64> {
    let n = v.len();
    Mat::from_fn(n, n, |i, j| v[i] * v[j].conj())
}

fn real_vec(v: &[f64]) -> Vec<c64> {
    v.iter().map(|&x| c64::new(x, 0.0)).collect()
}

pub fn trace(m: &Mat<c64>) -> c64 {
    (0..m.nrows()).map(|i| m[(i, i)]).sum()
}

/// Smallest eigenvalue of a hermitian matrix.
pub fn min_eigenvalue(m: &Mat<c64>) -> f64 {
    let h = Mat::from_fn(m.nrows(), m.ncols(), |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
    h.self_adjoint_eigenvalues(Side::Lower)
        .expect("eigenvalues of a hermitian matrix")
        .first()
        .copied()
        .unwrap_or(0.0)
}

/// Smallest eigenvalue of a real symmetric matrix given row-major.
pub fn min_eigenvalue_real(dim: usize, entries: &[f64]) -> f64 {
    let m = Mat::from_fn(dim, dim, |i, j| 0.5 * (entries[i * dim + j] + entries[j * dim + i]));
    m.self_adjoint_eigenvalues(Side::Lower)
        .expect("eigenvalues of a symmetric matrix")
        .first()
        .copied()
        .unwrap_or(0.0)
}

impl Strategy {
    pub fn new(
        dims: [usize; 2],
        state: Mat<c64>,
        measurements: [Vec<Vec<Mat<c64>>>; 2],
        aux: [Vec<Mat<c64>>; 2],
    ) -> Result<Self> {
        let n = dims[0] * dims[1];
        if state.nrows() != n || state.ncols() != n {
            return Err(Error::Dimension(format!(
                "state is {}x{}, boxes need {n}x{n}",
                state.nrows(),
                state.ncols()
            )));
        }
        let herm = Mat::from_fn(n, n, |i, j| state[(i, j)] - state[(j, i)].conj());
        if cmax_abs(&herm) > STRATEGY_TOLERANCE {
            return Err(Error::InvalidStrategy("state is not hermitian".into()));
        }
        let tr = trace(&state);
        if (tr.re - 1.0).abs() > STRATEGY_TOLERANCE || tr.im.abs() > STRATEGY_TOLERANCE {
            return Err(Error::InvalidStrategy(format!("state has trace {tr}")));
        }
        if min_eigenvalue(&state) < -STRATEGY_TOLERANCE {
            return Err(Error::InvalidStrategy("state is not positive semidefinite".into()));
        }
        for party in Party::BOTH {
            let d = dims[party.index()];
            let settings = &measurements[party.index()];
            if settings.is_empty() {
                return Err(Error::InvalidStrategy(format!("party {party} has no settings")));
            }
            let outcomes = settings[0].len();
            for (x, projs) in settings.iter().enumerate() {
                if projs.len() != outcomes || outcomes < 2 {
                    return Err(Error::InvalidStrategy(format!(
                        "party {party} setting {x}: every setting needs the same number (≥ 2) of outcomes"
                    )));
                }
                let mut sum = Mat::<c64>::zeros(d, d);
                for (a, p) in projs.iter().enumerate() {
                    if p.nrows() != d || p.ncols() != d {
                        return Err(Error::Dimension(format!(
                            "party {party} projector ({x},{a}) is not {d}x{d}"
                        )));
                    }
                    if cmax_abs(&(p * p - p)) > STRATEGY_TOLERANCE {
                        return Err(Error::InvalidStrategy(format!(
                            "party {party} operator ({x},{a}) is not idempotent"
                        )));
                    }
                    let adj = p.adjoint().to_owned();
                    if cmax_abs(&(&adj - p)) > STRATEGY_TOLERANCE {
                        return Err(Error::InvalidStrategy(format!(
                            "party {party} operator ({x},{a}) is not hermitian"
                        )));
                    }
                    for q in &projs[a + 1..] {
                        if cmax_abs(&(p * q)) > STRATEGY_TOLERANCE {
                            return Err(Error::InvalidStrategy(format!(
                                "party {party} setting {x}: projectors are not orthogonal"
                            )));
                        }
                    }
                    sum += p;
                }
                if cmax_abs(&(&sum - Mat::<c64>::identity(d, d))) > STRATEGY_TOLERANCE {
                    return Err(Error::InvalidStrategy(format!(
                        "party {party} setting {x}: projectors do not sum to identity"
                    )));
                }
            }
            for (i, u) in aux[party.index()].iter().enumerate() {
                if u.nrows() != d || u.ncols() != d {
                    return Err(Error::Dimension(format!("party {party} aux {i} is not {d}x{d}")));
                }
                let uu = u * u.adjoint();
                if cmax_abs(&(&uu - Mat::<c64>::identity(d, d))) > STRATEGY_TOLERANCE {
                    return Err(Error::InvalidStrategy(format!(
                        "party {party} aux {i} is not unitary"
                    )));
                }
            }
        }
        Ok(Strategy {
            dims,
            state,
            measurements,
            aux,
        })
    }

    /// Pure state on `d_A ⊗ d_B` with real amplitudes.
    pub fn pure_state(amplitudes: &[f64]) -> Mat<c64> {
        projector_onto(&real_vec(amplitudes))
    }

    pub fn dims(&self) -> [usize; 2] {
        self.dims
    }

    pub fn state(&self) -> &Mat<c64> {
        &self.state
    }

    pub fn projector(&self, party: Party, setting: usize, outcome: usize) -> &Mat<c64> {
        &self.measurements[party.index()][setting][outcome]
    }

    pub fn aux(&self, party: Party) -> &[Mat<c64>] {
        &self.aux[party.index()]
    }

    pub fn scenario(&self) -> Result<Scenario> {
        let spec = |p: Party| PartySpec {
            settings: self.measurements[p.index()].len(),
            outcomes: self.measurements[p.index()][0].len(),
            aux_unitaries: self.aux[p.index()].len(),
        };
        Scenario::new(spec(Party::A), spec(Party::B))
    }

    pub fn with_state(&self, state: Mat<c64>) -> Result<Self> {
        Strategy::new(self.dims, state, self.measurements.clone(), self.aux.clone())
    }

    pub fn with_aux(&self, party: Party, aux: Vec<Mat<c64>>) -> Result<Self> {
        let mut all = self.aux.clone();
        all[party.index()] = aux;
        Strategy::new(self.dims, self.state.clone(), self.measurements.clone(), all)
    }

    /// Applies local unitaries: `ρ -> (U_A⊗U_B) ρ (U_A⊗U_B)*`, `Π -> U Π U*`.
    pub fn conjugated(&self, ua: &Mat<c64>, ub: &Mat<c64>) -> Result<Self> {
        let u = ua.kron(ub);
        let state = &u * &self.state * u.adjoint();
        let rot = |m: &Mat<c64>, v: &Mat<c64>| v * m * v.adjoint();
        let measurements = [
            self.measurements[0]
                .iter()
                .map(|s| s.iter().map(|p| rot(p, ua)).collect())
                .collect(),
            self.measurements[1]
                .iter()
                .map(|s| s.iter().map(|p| rot(p, ub)).collect())
                .collect(),
        ];
        let aux = [
            self.aux[0].iter().map(|p| rot(p, ua)).collect(),
            self.aux[1].iter().map(|p| rot(p, ub)).collect(),
        ];
        Strategy::new(self.dims, state, measurements, aux)
    }

    /// Matrix of a generator on its own box. Eliminated outcomes are real
    /// projectors here.
    pub fn local_symbol_matrix(&self, s: Symbol) -> Result<Mat<c64>> {
        let p = s.party.index();
        match s.kind {
            SymbolKind::Projector { setting, outcome } => self.measurements[p]
                .get(setting as usize)
                .and_then(|set| set.get(outcome as usize))
                .cloned()
                .ok_or(Error::IndexOutOfRange {
                    party: s.party,
                    setting: setting as usize,
                    outcome: outcome as usize,
                }),
            SymbolKind::Aux(i) | SymbolKind::AuxAdjoint(i) => {
                let u = self.aux[p].get(i as usize).ok_or_else(|| {
                    Error::InvalidStrategy(format!("missing matrix for auxiliary unitary {s}"))
                })?;
                Ok(if matches!(s.kind, SymbolKind::Aux(_)) {
                    u.clone()
                } else {
                    u.adjoint().to_owned()
                })
            }
        }
    }

    /// Product of one party's symbols as a matrix on that party's box.
    pub fn local_word_matrix(&self, party: Party, word: &[Symbol]) -> Result<Mat<c64>> {
        let d = self.dims[party.index()];
        let mut m = Mat::<c64>::identity(d, d);
        for &s in word {
            if s.party != party {
                return Err(Error::InvalidParameter(format!("{s} does not act on party {party}")));
            }
            m = &m * self.local_symbol_matrix(s)?;
        }
        Ok(m)
    }

    pub fn local_polynomial_matrix(&self, party: Party, p: &Polynomial) -> Result<Mat<c64>> {
        let d = self.dims[party.index()];
        let mut out = Mat::<c64>::zeros(d, d);
        for (m, c) in p.terms() {
            if m.party_len(party) != m.len() {
                return Err(Error::InvalidParameter(format!("{m} is not local to party {party}")));
            }
            out += self.local_word_matrix(party, m.symbols())? * faer::Scale(c64::new(c, 0.0));
        }
        Ok(out)
    }

    /// Raw word of arbitrary symbols on the joint space, without any rewriting.
    pub fn word_matrix(&self, word: &[Symbol]) -> Result<Mat<c64>> {
        let [da, db] = self.dims;
        let mut m = Mat::<c64>::identity(da * db, da * db);
        for &s in word {
            let local = self.local_symbol_matrix(s)?;
            let full = match s.party {
                Party::A => local.kron(Mat::<c64>::identity(db, db)),
                Party::B => Mat::<c64>::identity(da, da).kron(&local),
            };
            m = &m * &full;
        }
        Ok(m)
    }

    pub fn polynomial_matrix(&self, p: &Polynomial) -> Result<Mat<c64>> {
        let [da, db] = self.dims;
        let mut out = Mat::<c64>::zeros(da * db, da * db);
        for (m, c) in p.terms() {
            out += self.word_matrix(m.symbols())? * faer::Scale(c64::new(c, 0.0));
        }
        Ok(out)
    }

    /// `tr(ρ X)` for an arbitrary operator on the boxes.
    pub fn trace_with(&self, x: &Mat<c64>) -> c64 {
        trace(&(&self.state * x))
    }

    /// `tr(ρ p)`, complex in general.
    pub fn expectation_complex(&self, p: &Polynomial) -> Result<c64> {
        Ok(self.trace_with(&self.polynomial_matrix(p)?))
    }

    /// Real part of `tr(ρ p)`.
    pub fn expectation(&self, p: &Polynomial) -> Result<f64> {
        Ok(self.expectation_complex(p)?.re)
    }
}

/// `c_m = Re tr(ρ m)` for each monomial.
pub fn evaluate_moments(strategy: &Strategy, monomials: &[Monomial]) -> Result<Vec<f64>> {
    let mut cache: HashMap<&Monomial, f64> = HashMap::new();
    let mut out = Vec::with_capacity(monomials.len());
    for m in monomials {
        if let Some(&v) = cache.get(m) {
            out.push(v);
            continue;
        }
        let v = strategy.trace_with(&strategy.word_matrix(m.symbols())?).re;
        cache.insert(m, v);
        out.push(v);
    }
    Ok(out)
}

/// Values of every registered moment, indexed by variable id.
pub fn moment_assignment(strategy: &Strategy, index: &MomentIndex) -> Result<Vec<f64>> {
    let mut values = evaluate_moments(strategy, index.monomials())?;
    values[MomentIndex::IDENTITY] = 1.0;
    Ok(values)
}

/// Swapped state computed densely from `S (ρ ⊗ |i><i| ⊗ |i><i|) S*`.
#[derive(Clone, Debug)]
pub struct SwapOutcome {
    pub rho: Mat<c64>,
}

impl SwapOutcome {
    pub fn fidelity(&self, reference: &ReferenceState) -> f64 {
        let psi = real_vec(&reference.amplitudes);
        let n = psi.len();
        let mut f = c64::new(0.0, 0.0);
        for r in 0..n {
            for c in 0..n {
                f += psi[r].conj() * self.rho[(r, c)] * psi[c];
            }
        }
        f.re
    }

    pub fn trace(&self) -> c64 {
        trace(&self.rho)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.rho)
    }

    pub fn real_part(&self) -> Vec<f64> {
        let n = self.rho.nrows();
        (0..n * n).map(|k| self.rho[(k / n, k % n)].re).collect()
    }
}

/// One party's swap as a dense operator on `box ⊗ trusted`.
pub fn local_swap_matrix(strategy: &Strategy, spec: &SwapSpec, party: Party) -> Result<Mat<c64>> {
    let d = spec.dim;
    let db = strategy.dims[party.index()];
    let mut s = Mat::<c64>::zeros(db * d, db * d);
    for (w, m) in spec.party(party).terms() {
        let box_op = strategy.local_word_matrix(party, w.symbols())?;
        s += box_op.kron(complexify(m));
    }
    Ok(s)
}

/// Largest entry of `S S* − 1` over both parties.
pub fn swap_unitarity_defect(strategy: &Strategy, spec: &SwapSpec) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for party in Party::BOTH {
        let s = local_swap_matrix(strategy, spec, party)?;
        let n = s.nrows();
        let ss = &s * s.adjoint();
        worst = worst.max(cmax_abs(&(&ss - Mat::<c64>::identity(n, n))));
    }
    Ok(worst)
}

/// Dense `tr_AB[S (ρ_AB ⊗ |i i><i i|) S*]`, trusted registers ordered `A' B'`.
pub fn exact_swap_state(strategy: &Strategy, spec: &SwapSpec) -> Result<SwapOutcome> {
    let [da, db] = strategy.dims;
    let d = spec.dim;
    let sa = local_swap_matrix(strategy, spec, Party::A)?;
    let sb = local_swap_matrix(strategy, spec, Party::B)?;
    let s = sa.kron(&sb);
    let (ia, ib) = (&spec.initial[0], &spec.initial[1]);
    // embedding (A ⊗ B) -> (A ⊗ A' ⊗ B ⊗ B')
    let rows = da * d * db * d;
    let mut j = Mat::<c64>::zeros(rows, da * db);
    for a in 0..da {
        for b in 0..db {
            for t in 0..d {
                for u in 0..d {
                    let r = ((a * d + t) * db + b) * d + u;
                    j[(r, a * db + b)] = c64::new(ia[t] * ib[u], 0.0);
                }
            }
        }
    }
    let k = &s * &j;
    let full = &k * &strategy.state * k.adjoint();
    let mut rho = Mat::<c64>::zeros(d * d, d * d);
    for t in 0..d {
        for u in 0..d {
            for t2 in 0..d {
                for u2 in 0..d {
                    let mut acc = c64::new(0.0, 0.0);
                    for a in 0..da {
                        for b in 0..db {
                            let r = ((a * d + t) * db + b) * d + u;
                            let c = ((a * d + t2) * db + b) * d + u2;
                            acc += full[(r, c)];
                        }
                    }
                    rho[(t * d + u, t2 * d + u2)] = acc;
                }
            }
        }
    }
    Ok(SwapOutcome { rho })
}

/// Depolarizing noise applied to the state only.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NoiseModel {
    /// `ρ_v = v ρ + (1 − v) 1/D`.
    Depolarizing,
}

pub fn noisy_family(strategy: &Strategy, model: NoiseModel, grid: &[f64]) -> Result<Vec<Strategy>> {
    let NoiseModel::Depolarizing = model;
    let n = strategy.state.nrows();
    grid.iter()
        .map(|&v| {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!(
                    "visibility {v} outside [0, 1]"
                )));
            }
            let state = Mat::from_fn(n, n, |i, j| {
                let mixed = if i == j { 1.0 / n as f64 } else { 0.0 };
                strategy.state[(i, j)] * v + c64::new((1.0 - v) * mixed, 0.0)
            });
            strategy.with_state(state)
        })
        .collect()
}

fn qubit_projectors(theta: f64) -> Vec<Mat<c64>> {
    // eigenprojectors of cos θ σ_z + sin θ σ_x
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    vec![
        projector_onto(&real_vec(&[c, s])),
        projector_onto(&real_vec(&[-s, c])),
    ]
}

/// `|ψ̄>` with `A_0 = B_0 = σ_z`, `A_1 = B_1 = σ_x`.
pub fn ideal_chsh_strategy() -> Strategy {
    let z = qubit_projectors(0.0);
    let x = qubit_projectors(std::f64::consts::FRAC_PI_2);
    let meas = vec![z, x];
    Strategy::new(
        [2, 2],
        Strategy::pure_state(&chsh_reference().amplitudes),
        [meas.clone(), meas],
        [Vec::new(), Vec::new()],
    )
    .expect("ideal CHSH strategy is valid")
}

/// Deterministic boxes `A_x = B_y = 1` on a qubit pair in state `|00>`.
pub fn deterministic_chsh_strategy() -> Strategy {
    let one = vec![
        Mat::<c64>::identity(2, 2),
        Mat::<c64>::zeros(2, 2),
    ];
    let meas = vec![one.clone(), one];
    Strategy::new(
        [2, 2],
        Strategy::pure_state(&[1.0, 0.0, 0.0, 0.0]),
        [meas.clone(), meas],
        [Vec::new(), Vec::new()],
    )
    .expect("deterministic strategy is valid")
}

/// `|ω_k> = (2|k> + 2|k+1> − |k+2>)/3`.
pub fn omega(k: usize) -> [f64; 3] {
    let mut v = [0.0; 3];
    v[k % 3] += 2.0 / 3.0;
    v[(k + 1) % 3] += 2.0 / 3.0;
    v[(k + 2) % 3] -= 1.0 / 3.0;
    v
}

/// Computational-basis and `|ω_k>` measurements on the optimal qutrit state,
/// with each auxiliary unitary set to the translation polynomial.
pub fn ideal_cglmp_strategy() -> Strategy {
    let z: Vec<Mat<c64>> = (0..3)
        .map(|a| {
            let mut e = [0.0; 3];
            e[a] = 1.0;
            projector_onto(&real_vec(&e))
        })
        .collect();
    let w: Vec<Mat<c64>> = (0..3).map(|a| projector_onto(&real_vec(&omega(a)))).collect();
    let meas = vec![z, w];
    let base = Strategy::new(
        [3, 3],
        Strategy::pure_state(&cglmp_reference().amplitudes),
        [meas.clone(), meas],
        [Vec::new(), Vec::new()],
    )
    .expect("ideal CGLMP strategy is valid");
    let sc = Scenario::cglmp();
    let mut aux = [Vec::new(), Vec::new()];
    for party in Party::BOTH {
        let p = cglmp_translation_polynomial(&sc, party).expect("CGLMP scenario");
        aux[party.index()] = vec![base
            .local_polynomial_matrix(party, &p)
            .expect("translation polynomial is local")];
    }
    Strategy::new(base.dims, base.state, base.measurements, aux)
        .expect("translation polynomial is unitary on the optimal strategy")
}

/// Sets each auxiliary unitary to the unitary polar factor of the party's
/// translation polynomial, so that `P̂* P(E) ⪰ 0` holds exactly.
pub fn with_polar_aux(strategy: &Strategy) -> Result<Strategy> {
    let sc = strategy.scenario()?;
    if Party::BOTH
        .iter()
        .any(|&p| (sc.party(p).settings, sc.party(p).outcomes) != (2, 3))
    {
        return Err(Error::WrongScenario { expected: "CGLMP" });
    }
    let cglmp = Scenario::cglmp();
    let mut out = strategy.clone();
    for party in Party::BOTH {
        let p = cglmp_translation_polynomial(&cglmp, party)?;
        let m = strategy.local_polynomial_matrix(party, &p)?;
        let svd = m
            .svd()
            .map_err(|e| Error::InvalidStrategy(format!("polar decomposition failed: {e:?}")))?;
        let u = svd.U() * svd.V().adjoint();
        out = out.with_aux(party, vec![u])?;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// JSON interchange

/// Dense matrix, row-major, with an optional imaginary part.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<f64>>,
}

impl MatrixJson {
    fn from_mat(m: &Mat<c64>) -> Self {
        let (r, c) = (m.nrows(), m.ncols());
        let re: Vec<f64> = (0..r * c).map(|k| m[(k / c, k % c)].re).collect();
        let im: Vec<f64> = (0..r * c).map(|k| m[(k / c, k % c)].im).collect();
        MatrixJson {
            rows: r,
            cols: c,
            re,
            im: if im.iter().any(|&x| x != 0.0) { Some(im) } else { None },
        }
    }

    fn to_mat(&self) -> Result<Mat<c64>> {
        let n = self.rows * self.cols;
        if self.re.len() != n || self.im.as_ref().is_some_and(|im| im.len() != n) {
            return Err(Error::Dimension(format!(
                "matrix data does not match {}x{}",
                self.rows, self.cols
            )));
        }
        Ok(Mat::from_fn(self.rows, self.cols, |i, j| {
            let k = i * self.cols + j;
            c64::new(self.re[k], self.im.as_ref().map_or(0.0, |im| im[k]))
        }))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PartyJson {
    /// `measurements[x][a]` is the projector of outcome `a` for setting `x`.
    pub measurements: Vec<Vec<MatrixJson>>,
    #[serde(default)]
    pub aux: Vec<MatrixJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StrategyJson {
    pub dims: [usize; 2],
    pub state: MatrixJson,
    pub alice: PartyJson,
    pub bob: PartyJson,
}

impl Strategy {
    pub fn to_json_value(&self) -> StrategyJson {
        let party = |p: usize| PartyJson {
            measurements: self.measurements[p]
                .iter()
                .map(|s| s.iter().map(MatrixJson::from_mat).collect())
                .collect(),
            aux: self.aux[p].iter().map(MatrixJson::from_mat).collect(),
        };
        StrategyJson {
            dims: self.dims,
            state: MatrixJson::from_mat(&self.state),
            alice: party(0),
            bob: party(1),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_json_value())?)
    }

    pub fn from_json_value(v: &StrategyJson) -> Result<Self> {
        let party = |p: &PartyJson| -> Result<(Vec<Vec<Mat<c64>>>, Vec<Mat<c64>>)> {
            let meas = p
                .measurements
                .iter()
                .map(|s| s.iter().map(MatrixJson::to_mat).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            let aux = p.aux.iter().map(MatrixJson::to_mat).collect::<Result<Vec<_>>>()?;
            Ok((meas, aux))
        };
        let (ma, ua) = party(&v.alice)?;
        let (mb, ub) = party(&v.bob)?;
        Strategy::new(v.dims, v.state.to_mat()?, [ma, mb], [ua, ub])
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: StrategyJson = serde_json::from_str(text)?;
        Strategy::from_json_value(&v)
    }
}
