//! Self-tests shared by the command line and the acceptance binary: algebra
//! properties on random words, oracle consistency, and the sandwich between
//! SDP bounds and exact fidelities of concrete strategies.

use std::fmt;

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{Monomial, Party, Polynomial, Scenario, Symbol};
use crate::error::Result;
use crate::moments::{build_basis, build_moment_matrix, LevelSpec, MomentIndex};
use crate::oracle::{
    self, deterministic_chsh_strategy, exact_swap_state, ideal_chsh_strategy,
    ideal_cglmp_strategy, moment_assignment, noisy_family, NoiseModel, Strategy,
};
use crate::sdp::{BellFunctional, Flags, SolverOptions, Target, Template};
use crate::swap::{
    chsh_reference, chsh_swap, cglmp_reference, cglmp_swap, cglmp_translation_polynomial,
    cyclic_shift, LocalOperator, SwapSpec,
};

pub const WERNER_VISIBILITIES: [f64; 4] = [1.0, 0.95, 0.9, 0.8];
pub const SANDWICH_SLACK: f64 = 1e-6;
pub const ORACLE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct CheckRow {
    pub suite: &'static str,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckRow {
    fn new(suite: &'static str, name: impl Into<String>, passed: bool, detail: String) -> Self {
        CheckRow {
            suite,
            name: name.into(),
            passed,
            detail,
        }
    }
}

impl fmt::Display for CheckRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<4} {:<9} {:<44} {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.suite,
            self.name,
            self.detail
        )
    }
}

/// Every generator of the scenario including the eliminated outcomes.
fn raw_alphabet(scenario: &Scenario) -> Vec<Symbol> {
    let mut out = Vec::new();
    for party in Party::BOTH {
        let spec = scenario.party(party);
        for x in 0..spec.settings {
            for a in 0..spec.outcomes {
                out.push(Symbol::projector(party, x, a));
            }
        }
        for i in 0..spec.aux_unitaries {
            out.push(Symbol::aux(party, i));
            out.push(Symbol::aux_adjoint(party, i));
        }
    }
    out
}

/// `count` words of length 1..=`max_len` over the raw alphabet.
pub fn random_words(scenario: &Scenario, count: usize, max_len: usize, seed: u64) -> Vec<Vec<Symbol>> {
    let alphabet = raw_alphabet(scenario);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let len = rng.random_range(1..=max_len);
            (0..len)
                .map(|_| alphabet[rng.random_range(0..alphabet.len())])
                .collect()
        })
        .collect()
}

fn canonical_product(scenario: &Scenario, p: &Polynomial) -> Result<Polynomial> {
    let mut out = Polynomial::zero();
    for (m, c) in p.terms() {
        out = &out + &scenario.canonicalize(m.symbols())?.scale(c);
    }
    Ok(out)
}

fn adjoint_word(word: &[Symbol]) -> Vec<Symbol> {
    word.iter().rev().map(|s| s.adjoint()).collect()
}

/// Idempotence, adjoint anti-homomorphism and oracle evaluation of raw words
/// against their normal forms, on the CGLMP scenario with auxiliary
/// unitaries (the richest rewrite system) and on CHSH.
pub fn algebra_suite(words: usize, seed: u64) -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    for (label, scenario, strategy) in [
        ("CHSH", Scenario::chsh(), ideal_chsh_strategy()),
        ("CGLMP", Scenario::cglmp(), ideal_cglmp_strategy()),
    ] {
        let sample = random_words(&scenario, words, 6, seed);
        let partner = random_words(&scenario, words, 6, seed.wrapping_add(1));
        let (mut idem, mut anti, mut eval) = (0.0f64, 0.0f64, 0.0f64);
        for (w, v) in sample.iter().zip(&partner) {
            let c = scenario.canonicalize(w)?;
            idem = idem.max(canonical_product(&scenario, &c)?.max_abs_diff(&c));

            let mut wv = w.clone();
            wv.extend_from_slice(v);
            let lhs = scenario.canonicalize(&wv)?.adjoint();
            let mut rev = adjoint_word(v);
            rev.extend(adjoint_word(w));
            let rhs = scenario.canonicalize(&rev)?;
            anti = anti.max(lhs.max_abs_diff(&rhs));

            let raw = strategy.trace_with(&strategy.word_matrix(w)?);
            let normal = strategy.expectation_complex(&c)?;
            eval = eval.max((raw - normal).norm());
        }
        rows.push(CheckRow::new(
            "algebra",
            format!("{label} canonicalization idempotent"),
            idem <= ORACLE_TOL,
            format!("{words} words, max deviation {idem:.1e}"),
        ));
        rows.push(CheckRow::new(
            "algebra",
            format!("{label} adjoint anti-homomorphism"),
            anti <= ORACLE_TOL,
            format!("{words} pairs, max deviation {anti:.1e}"),
        ));
        rows.push(CheckRow::new(
            "algebra",
            format!("{label} evaluation commutes with normal form"),
            eval <= ORACLE_TOL,
            format!("{words} words, max deviation {eval:.1e}"),
        ));
    }
    Ok(rows)
}

/// Strategies used by the oracle suite, with display names.
pub fn oracle_strategies() -> Result<Vec<(String, Strategy)>> {
    let mut out = vec![
        ("ideal CHSH".to_string(), ideal_chsh_strategy()),
        ("deterministic CHSH".to_string(), deterministic_chsh_strategy()),
        ("ideal CGLMP".to_string(), ideal_cglmp_strategy()),
    ];
    let werner = noisy_family(&ideal_chsh_strategy(), NoiseModel::Depolarizing, &WERNER_VISIBILITIES)?;
    for (v, s) in WERNER_VISIBILITIES.iter().zip(werner) {
        out.push((format!("Werner v={v}"), s));
    }
    let noisy = noisy_family(&ideal_cglmp_strategy(), NoiseModel::Depolarizing, &[0.9])?;
    out.push(("noisy CGLMP v=0.9".to_string(), oracle::with_polar_aux(&noisy[0])?));
    Ok(out)
}

fn gamma_min_eigenvalue(strategy: &Strategy, level: &LevelSpec) -> Result<f64> {
    let scenario = strategy.scenario()?;
    let basis = build_basis(&scenario, level)?;
    let mut index = MomentIndex::new();
    let gamma = build_moment_matrix(&basis, &Polynomial::identity(), &mut index);
    let values = moment_assignment(strategy, &index)?;
    Ok(oracle::min_eigenvalue_real(gamma.dim(), &gamma.evaluate(&values)))
}

fn matrix_distance(a: &Mat<faer::c64>, b: &Mat<f64>) -> f64 {
    let mut d = 0.0f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            d = d.max((a[(i, j)] - faer::c64::new(b[(i, j)], 0.0)).norm());
        }
    }
    d
}

/// Analytic Bell values, Γ positivity, the translation operator, and the
/// swap functional against the dense swapped state.
pub fn oracle_suite() -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    let chsh = Scenario::chsh();
    let cglmp = Scenario::cglmp();

    let b = BellFunctional::chsh(&chsh)?;
    let v = ideal_chsh_strategy().expectation(&b.polynomial)?;
    let want = 2.0 * std::f64::consts::SQRT_2;
    rows.push(CheckRow::new(
        "oracle",
        "ideal CHSH value is 2√2",
        (v - want).abs() <= ORACLE_TOL,
        format!("{v:.12}"),
    ));
    let b = BellFunctional::cglmp(&cglmp)?;
    let v = ideal_cglmp_strategy().expectation(&b.polynomial)?;
    let want = (12.0 - 33f64.sqrt()) / 9.0;
    rows.push(CheckRow::new(
        "oracle",
        "ideal CGLMP value is (12-√33)/9",
        (v - want).abs() <= ORACLE_TOL,
        format!("{v:.12}"),
    ));

    for (name, s) in oracle_strategies()? {
        let level = if s.scenario()?.is_chsh() {
            LevelSpec::LocalProduct(2)
        } else {
            LevelSpec::Npa(2)
        };
        let e = gamma_min_eigenvalue(&s, &level)?;
        rows.push(CheckRow::new(
            "oracle",
            format!("Γ of {name} is PSD"),
            e >= -ORACLE_TOL,
            format!("min eigenvalue {e:.2e}"),
        ));
    }

    let ideal = ideal_cglmp_strategy();
    let shift = cyclic_shift(3, 1);
    for party in Party::BOTH {
        let p = cglmp_translation_polynomial(&cglmp, party)?;
        let m = ideal.local_polynomial_matrix(party, &p)?;
        let d_shift = matrix_distance(&m, &shift);
        let cube = &(&m * &m) * &m;
        let d_cube = matrix_distance(&cube, &Mat::<f64>::identity(3, 3));
        rows.push(CheckRow::new(
            "oracle",
            format!("translation operator of {party} is the shift"),
            d_shift <= ORACLE_TOL && d_cube <= ORACLE_TOL,
            format!("|P - S| {d_shift:.1e}, |P³ - 1| {d_cube:.1e}"),
        ));
    }

    let cases: Vec<(&str, Strategy, SwapSpec, crate::swap::ReferenceState)> = vec![
        ("ideal CHSH", ideal_chsh_strategy(), chsh_swap(), chsh_reference()),
        (
            "Werner v=0.9",
            noisy_family(&ideal_chsh_strategy(), NoiseModel::Depolarizing, &[0.9])?.remove(0),
            chsh_swap(),
            chsh_reference(),
        ),
        ("ideal CGLMP", ideal_cglmp_strategy(), cglmp_swap(), cglmp_reference()),
    ];
    for (name, s, swap, reference) in cases {
        let mut index = MomentIndex::new();
        let rho = swap.state_functional(&mut index);
        let values = moment_assignment(&s, &index)?;
        let from_moments = rho.evaluate(&values);
        let dense = exact_swap_state(&s, &swap)?;
        let d = from_moments
            .iter()
            .zip(dense.real_part())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        rows.push(CheckRow::new(
            "oracle",
            format!("swap functional of {name} matches dense"),
            d <= ORACLE_TOL,
            format!("max deviation {d:.1e}"),
        ));
        if name.starts_with("ideal") {
            let f = dense.fidelity(&reference);
            rows.push(CheckRow::new(
                "oracle",
                format!("ideal swap of {name} gives fidelity 1"),
                (f - 1.0).abs() <= ORACLE_TOL,
                format!("{f:.12}"),
            ));
        }
    }
    Ok(rows)
}

/// CHSH swap with Alice's operator scaled by `factor`; for the mutation
/// check of the sandwich suite.
pub fn perturbed_chsh_swap(factor: f64) -> SwapSpec {
    let spec = chsh_swap();
    let a = spec.party(Party::A);
    let terms: Vec<(Polynomial, Mat<f64>)> = a
        .terms()
        .map(|(m, c): (&Monomial, &Mat<f64>)| (Polynomial::monomial(m.clone()), c * faer::Scale(factor)))
        .collect();
    let scaled = LocalOperator::from_terms(a.dim(), terms);
    spec.with_party(Party::A, scaled)
}

/// SDP fidelity bound built from `swap`, against the exact fidelity of
/// Werner strategies under the genuine swap, at each strategy's CHSH value.
pub fn sandwich_suite(swap: &SwapSpec, options: &SolverOptions) -> Result<Vec<CheckRow>> {
    let scenario = Scenario::chsh();
    let bell = BellFunctional::chsh(&scenario)?;
    let reference = chsh_reference();
    let target = Target::Fidelity {
        swap: swap.clone(),
        reference: reference.clone(),
    };
    let template = Template::new(&scenario, &target, bell.clone(), Flags::defaults_for(&scenario), None)?;
    let genuine = chsh_swap();
    let family = noisy_family(&ideal_chsh_strategy(), NoiseModel::Depolarizing, &WERNER_VISIBILITIES)?;
    let mut rows = Vec::new();
    for (v, s) in WERNER_VISIBILITIES.iter().zip(family) {
        let beta = s.expectation(&bell.polynomial)?;
        let exact = exact_swap_state(&s, &genuine)?.fidelity(&reference);
        let row = match template.solve_at(beta, options) {
            Ok(sol) if sol.status.is_solved() => CheckRow::new(
                "sandwich",
                format!("Werner v={v}"),
                sol.value <= exact + SANDWICH_SLACK,
                format!("β {beta:.6}  bound {:.6} ≤ exact {exact:.6}", sol.value),
            ),
            Ok(sol) => CheckRow::new(
                "sandwich",
                format!("Werner v={v}"),
                false,
                format!("β {beta:.6}  solver status {}", sol.status),
            ),
            Err(e) => CheckRow::new("sandwich", format!("Werner v={v}"), false, e.to_string()),
        };
        rows.push(row);
    }
    Ok(rows)
}
