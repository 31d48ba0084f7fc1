use std::f64::consts::SQRT_2;

use boxcert::algebra::Scenario;
use boxcert::checks::{perturbed_chsh_swap, sandwich_suite};
use boxcert::moments::{LevelSpec, LinearFunctional};
use boxcert::oracle::{ideal_cglmp_strategy, moment_assignment};
use boxcert::sdp::sweep::{sweep, SweepResult};
use boxcert::sdp::{
    bell_extremum, BellFunctional, Flags, SolveStatus, SolverOptions, Target, Template,
};
use boxcert::swap::{chsh_reference, chsh_swap, cglmp_reference, cglmp_swap};

fn chsh_template(flags: Flags) -> Template {
    let sc = Scenario::chsh();
    let target = Target::Fidelity {
        swap: chsh_swap(),
        reference: chsh_reference(),
    };
    Template::new(&sc, &target, BellFunctional::chsh(&sc).unwrap(), flags, None).unwrap()
}

fn generic() -> Flags {
    Flags::defaults_for(&Scenario::chsh())
}

#[test]
fn sandwich_holds_for_werner_strategies() {
    for row in sandwich_suite(&chsh_swap(), &SolverOptions::default()).unwrap() {
        assert!(row.passed, "{row}");
    }
}

#[test]
fn inflated_swap_breaks_the_sandwich() {
    let rows = sandwich_suite(&perturbed_chsh_swap(1.05), &SolverOptions::default()).unwrap();
    assert!(rows.iter().any(|r| !r.passed));
}

#[test]
fn solves_are_deterministic() {
    let t = chsh_template(generic());
    let opts = SolverOptions::default();
    let a = t.solve_at(2.6, &opts).unwrap();
    let b = t.solve_at(2.6, &opts).unwrap();
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    assert_eq!(a.iterations, b.iterations);
}

#[test]
fn beyond_tsirelson_is_infeasible() {
    let t = chsh_template(generic());
    let p = t.with_objective(2.0 * SQRT_2 + 0.01, LinearFunctional::zero());
    let s = p.solve(&SolverOptions::default()).unwrap();
    assert_eq!(s.status, SolveStatus::Infeasible);
}

#[test]
fn tsirelson_bound_from_the_moment_matrix() {
    let sc = Scenario::chsh();
    let bell = BellFunctional::chsh(&sc).unwrap();
    let (v, status) =
        bell_extremum(&sc, &bell, &LevelSpec::LocalProduct(1), &SolverOptions::default()).unwrap();
    assert!(status.is_solved());
    assert!((v - 2.0 * SQRT_2).abs() < 1e-6, "{v}");
}

#[test]
fn tau_is_a_number_in_range_at_the_classical_bound() {
    let sc = Scenario::chsh();
    let flags = Flags {
        rho_psd: false,
        localizing: false,
        isotropic: false,
    };
    let t = Template::new(&sc, &Target::Tau, BellFunctional::chsh(&sc).unwrap(), flags, None).unwrap();
    let s = t.solve_at(2.0, &SolverOptions::default()).unwrap();
    assert!(s.status.is_solved());
    assert!((-1.0 - 1e-6..=1.0 + 1e-6).contains(&s.value), "{}", s.value);
}

#[test]
fn single_point_sweep_equals_direct_solve() {
    let t = chsh_template(generic());
    let opts = SolverOptions::default();
    let direct = t.solve_at(2.5, &opts).unwrap();
    let r = sweep(&t, &[2.5], &opts, 1).unwrap();
    assert_eq!(r.points.len(), 1);
    assert_eq!(r.points[0].bound, direct.value);
    assert_eq!(r.points[0].status, direct.status);
}

#[test]
fn parallel_sweep_matches_serial() {
    let t = chsh_template(generic());
    let opts = SolverOptions::default();
    let values = [2.1, 2.3, 2.5, 2.7];
    let a = sweep(&t, &values, &opts, 1).unwrap();
    let b = sweep(&t, &values, &opts, 3).unwrap();
    for (p, q) in a.points.iter().zip(&b.points) {
        assert_eq!(p.bell_value, q.bell_value);
        assert_eq!(p.bound.to_bits(), q.bound.to_bits());
    }
    let mut x = Vec::new();
    let mut y = Vec::new();
    a.write_csv(&mut x, false).unwrap();
    b.write_csv(&mut y, false).unwrap();
    assert_eq!(x, y);
    let rows = SweepResult::read_csv(std::str::from_utf8(&x).unwrap()).unwrap();
    assert_eq!(rows.len(), 4);
}

#[test]
fn sweep_records_points_outside_the_quantum_set() {
    let t = chsh_template(generic());
    let r = sweep(&t, &[2.5, 2.9], &SolverOptions::default(), 1).unwrap();
    assert!(r.points[0].status.is_solved());
    assert!(!r.points[1].status.is_solved());
    assert!(!r.all_failed());
}

#[test]
fn cglmp_assembly_is_exact_on_the_ideal_strategy() {
    let sc = Scenario::cglmp();
    let target = Target::Fidelity {
        swap: cglmp_swap(),
        reference: cglmp_reference(),
    };
    let bell = BellFunctional::cglmp(&sc).unwrap();
    let t = Template::new(&sc, &target, bell.clone(), Flags::defaults_for(&sc), None).unwrap();
    let values = moment_assignment(&ideal_cglmp_strategy(), t.index()).unwrap();
    let report = t.at(bell.quantum_extremum).evaluate(&values);
    assert!((report.objective - 1.0).abs() < 1e-9, "{}", report.objective);
    assert!(report.max_equality_residual < 1e-9);
    for e in report.min_eigenvalues {
        assert!(e > -1e-9, "{e}");
    }
}
