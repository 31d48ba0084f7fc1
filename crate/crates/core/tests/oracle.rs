use approx::assert_abs_diff_eq;
use faer::{c64, Mat};
use proptest::prelude::*;

use boxcert::algebra::{Party, Scenario};
use boxcert::checks::oracle_strategies;
use boxcert::moments::{build_basis, build_moment_matrix, LevelSpec, MomentIndex};
use boxcert::oracle::{
    exact_swap_state, ideal_cglmp_strategy, ideal_chsh_strategy, min_eigenvalue_real,
    moment_assignment, noisy_family, swap_unitarity_defect, with_polar_aux, NoiseModel, Strategy,
};
use boxcert::sdp::BellFunctional;
use boxcert::swap::{
    chsh_reference, chsh_swap, cglmp_printed_translation_polynomial, cglmp_reference, cglmp_swap,
    cglmp_translation_polynomial, cyclic_shift, measurement_tau_polynomials,
};

fn su2(a: f64, b: f64, t: f64) -> Mat<c64> {
    let (c, s) = (t.cos(), t.sin());
    let e = |phi: f64| c64::new(phi.cos(), phi.sin());
    let mut u = Mat::<c64>::zeros(2, 2);
    u[(0, 0)] = e(a) * c;
    u[(0, 1)] = -e(b) * s;
    u[(1, 0)] = e(-b) * s;
    u[(1, 1)] = e(-a) * c;
    u
}

fn distance(a: &Mat<c64>, b: &Mat<f64>) -> f64 {
    let mut d = 0.0f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            d = d.max((a[(i, j)] - c64::new(b[(i, j)], 0.0)).norm());
        }
    }
    d
}

fn gamma_min_eig(s: &Strategy, level: &LevelSpec) -> f64 {
    let basis = build_basis(&s.scenario().unwrap(), level).unwrap();
    let mut index = MomentIndex::new();
    let g = build_moment_matrix(&basis, &boxcert::algebra::Polynomial::identity(), &mut index);
    let v = moment_assignment(s, &index).unwrap();
    min_eigenvalue_real(g.dim(), &g.evaluate(&v))
}

#[test]
fn moment_matrices_of_strategies_are_psd() {
    for (name, s) in oracle_strategies().unwrap() {
        for level in [LevelSpec::Npa(1), LevelSpec::Npa(2), LevelSpec::LocalProduct(1)] {
            let e = gamma_min_eig(&s, &level);
            assert!(e >= -1e-9, "{name} at {level:?}: {e}");
        }
    }
}

#[test]
fn werner_bell_value_is_linear_in_visibility() {
    let sc = Scenario::chsh();
    let bell = BellFunctional::chsh(&sc).unwrap();
    let grid = [1.0, 0.9, 0.75, 0.5];
    for (v, s) in grid.iter().zip(noisy_family(&ideal_chsh_strategy(), NoiseModel::Depolarizing, &grid).unwrap()) {
        let b = s.expectation(&bell.polynomial).unwrap();
        assert_abs_diff_eq!(b, v * 2.0 * std::f64::consts::SQRT_2, epsilon = 1e-12);
    }
}

#[test]
fn ideal_swaps_extract_the_reference() {
    let f = exact_swap_state(&ideal_chsh_strategy(), &chsh_swap())
        .unwrap()
        .fidelity(&chsh_reference());
    assert_abs_diff_eq!(f, 1.0, epsilon = 1e-12);
    let out = exact_swap_state(&ideal_cglmp_strategy(), &cglmp_swap()).unwrap();
    assert_abs_diff_eq!(out.fidelity(&cglmp_reference()), 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(out.trace().re, 1.0, epsilon = 1e-12);
}

#[test]
fn swap_functional_matches_dense_swapped_state() {
    let werner = noisy_family(&ideal_chsh_strategy(), NoiseModel::Depolarizing, &[0.85]).unwrap();
    let cases = [
        (werner[0].clone(), chsh_swap()),
        (ideal_cglmp_strategy(), cglmp_swap()),
    ];
    for (s, spec) in cases {
        let mut index = MomentIndex::new();
        let rho = spec.state_functional(&mut index);
        let v = moment_assignment(&s, &index).unwrap();
        let dense = exact_swap_state(&s, &spec).unwrap().real_part();
        for (a, b) in rho.evaluate(&v).iter().zip(&dense) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn clever_swap_ignores_local_unitaries(
        a in 0.0..6.3f64, b in 0.0..6.3f64, t in 0.0..3.2f64,
        c in 0.0..6.3f64, d in 0.0..6.3f64, u in 0.0..3.2f64,
    ) {
        let s = ideal_chsh_strategy().conjugated(&su2(a, b, t), &su2(c, d, u)).unwrap();
        prop_assert!(swap_unitarity_defect(&s, &chsh_swap()).unwrap() < 1e-9);
        let f = exact_swap_state(&s, &chsh_swap()).unwrap().fidelity(&chsh_reference());
        prop_assert!((f - 1.0).abs() < 1e-9);
        prop_assert!(gamma_min_eig(&s, &LevelSpec::LocalProduct(1)) >= -1e-9);
    }
}

#[test]
fn translation_polynomial_is_the_cyclic_shift() {
    let sc = Scenario::cglmp();
    let s = ideal_cglmp_strategy();
    for party in Party::BOTH {
        let p = cglmp_translation_polynomial(&sc, party).unwrap();
        let m = s.local_polynomial_matrix(party, &p).unwrap();
        assert!(distance(&m, &cyclic_shift(3, 1)) < 1e-9);
        let cube = &(&m * &m) * &m;
        assert!(distance(&cube, &Mat::<f64>::identity(3, 3)) < 1e-9);
    }
}

#[test]
fn printed_translation_polynomial_is_a_signed_backward_shift() {
    let sc = Scenario::cglmp();
    let s = ideal_cglmp_strategy();
    let p = cglmp_printed_translation_polynomial(&sc, Party::A).unwrap();
    let m = s.local_polynomial_matrix(Party::A, &p).unwrap();
    let back = cyclic_shift(3, -1);
    let signed = Mat::from_fn(3, 3, |i, j| if i == 0 { back[(i, j)] } else { -back[(i, j)] });
    assert!(distance(&m, &signed) < 1e-9);
    assert!(distance(&m, &cyclic_shift(3, 1)) > 0.5);
}

#[test]
fn polar_aux_recovers_the_shift_on_the_ideal_strategy() {
    let s = ideal_cglmp_strategy();
    let p = with_polar_aux(&s).unwrap();
    for party in Party::BOTH {
        assert!(distance(&p.aux(party)[0], &cyclic_shift(3, 1)) < 1e-9);
    }
}

#[test]
fn cglmp_ideal_value() {
    let bell = BellFunctional::cglmp(&Scenario::cglmp()).unwrap();
    let v = ideal_cglmp_strategy().expectation(&bell.polynomial).unwrap();
    assert_abs_diff_eq!(v, (12.0 - 33f64.sqrt()) / 9.0, epsilon = 1e-12);
}

#[test]
fn tau_detects_tilted_measurements() {
    let sc = Scenario::chsh();
    let (_, tau) = measurement_tau_polynomials(&sc).unwrap();
    let ideal = ideal_chsh_strategy();
    assert_abs_diff_eq!(ideal.expectation(&tau).unwrap(), 1.0, epsilon = 1e-12);

    // B_1 = (σ_z + σ_x)/√2 instead of σ_x
    let half = std::f64::consts::FRAC_PI_8;
    let ray = |v: [f64; 2]| Mat::from_fn(2, 2, |i, j| c64::new(v[i] * v[j], 0.0));
    let tilted = vec![ray([half.cos(), half.sin()]), ray([-half.sin(), half.cos()])];
    let setting = |p: Party, x: usize| vec![ideal.projector(p, x, 0).clone(), ideal.projector(p, x, 1).clone()];
    let s = Strategy::new(
        [2, 2],
        ideal.state().clone(),
        [
            vec![setting(Party::A, 0), setting(Party::A, 1)],
            vec![setting(Party::B, 0), tilted],
        ],
        [Vec::new(), Vec::new()],
    )
    .unwrap();
    assert!(s.expectation(&tau).unwrap() < 1.0 - 1e-3);
}

#[test]
fn strategy_json_round_trip() {
    let s = ideal_cglmp_strategy();
    let back = Strategy::from_json(&s.to_json().unwrap()).unwrap();
    let bell = BellFunctional::cglmp(&Scenario::cglmp()).unwrap();
    assert_abs_diff_eq!(
        back.expectation(&bell.polynomial).unwrap(),
        s.expectation(&bell.polynomial).unwrap(),
        epsilon = 1e-12
    );
    assert!(Strategy::from_json("{\"dims\": [2]}").is_err());
}
