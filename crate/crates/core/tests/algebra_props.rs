use boxcert::algebra::{Party, Polynomial, Scenario, Symbol};
use boxcert::checks::algebra_suite;
use boxcert::moments::MomentIndex;
use boxcert::oracle::{ideal_cglmp_strategy, ideal_chsh_strategy, Strategy};
use proptest::prelude::*;

fn symbols(scenario: &Scenario) -> Vec<Symbol> {
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

fn word(scenario: &Scenario, picks: &[usize]) -> Vec<Symbol> {
    let alphabet = symbols(scenario);
    picks.iter().map(|&i| alphabet[i % alphabet.len()]).collect()
}

fn recanonicalize(scenario: &Scenario, p: &Polynomial) -> Polynomial {
    let mut out = Polynomial::zero();
    for (m, c) in p.terms() {
        out = &out + &scenario.canonicalize(m.symbols()).unwrap().scale(c);
    }
    out
}

fn adjoint(w: &[Symbol]) -> Vec<Symbol> {
    w.iter().rev().map(|s| s.adjoint()).collect()
}

fn cases() -> Vec<(Scenario, Strategy)> {
    vec![
        (Scenario::chsh(), ideal_chsh_strategy()),
        (Scenario::cglmp(), ideal_cglmp_strategy()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn canonicalization_is_idempotent(picks in prop::collection::vec(0usize..64, 0..7)) {
        for (sc, _) in cases() {
            let p = sc.canonicalize(&word(&sc, &picks)).unwrap();
            prop_assert!(recanonicalize(&sc, &p).max_abs_diff(&p) < 1e-12);
        }
    }

    #[test]
    fn adjoint_reverses_products(
        u in prop::collection::vec(0usize..64, 0..5),
        v in prop::collection::vec(0usize..64, 0..5),
    ) {
        for (sc, _) in cases() {
            let (u, v) = (word(&sc, &u), word(&sc, &v));
            let mut uv = u.clone();
            uv.extend_from_slice(&v);
            let mut rev = adjoint(&v);
            rev.extend(adjoint(&u));
            let lhs = sc.canonicalize(&uv).unwrap().adjoint();
            let rhs = sc.canonicalize(&rev).unwrap();
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }
    }

    #[test]
    fn evaluation_commutes_with_canonicalization(picks in prop::collection::vec(0usize..64, 1..7)) {
        for (sc, s) in cases() {
            let w = word(&sc, &picks);
            let raw = s.trace_with(&s.word_matrix(&w).unwrap());
            let normal = s.expectation_complex(&sc.canonicalize(&w).unwrap()).unwrap();
            prop_assert!((raw - normal).norm() < 1e-9);
        }
    }

    #[test]
    fn moment_keys_identify_adjoints(picks in prop::collection::vec(0usize..64, 1..7)) {
        let sc = Scenario::cglmp();
        let p = sc.canonicalize(&word(&sc, &picks)).unwrap();
        let mut index = MomentIndex::new();
        for (m, _) in p.terms() {
            let a = index.register(m);
            let b = index.register(&m.adjoint());
            prop_assert_eq!(a, b);
        }
    }
}

#[test]
fn aux_unitaries_cancel() {
    let sc = Scenario::cglmp();
    for party in Party::BOTH {
        let w = [Symbol::aux(party, 0), Symbol::aux_adjoint(party, 0)];
        assert_eq!(sc.canonicalize(&w).unwrap(), Polynomial::identity());
        let w = [Symbol::aux_adjoint(party, 0), Symbol::aux(party, 0)];
        assert_eq!(sc.canonicalize(&w).unwrap(), Polynomial::identity());
    }
}

#[test]
fn thousand_word_suite() {
    for row in algebra_suite(1000, 11).unwrap() {
        assert!(row.passed, "{row}");
    }
}
