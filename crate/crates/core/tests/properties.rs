//! Property tests over random graphs, strategies and seeds.

use graphproof::mbqc::exact_acceptance;
use graphproof::protocol::{exact_test_acceptance, FamilyTag};
use graphproof::selftest::{audit, AUDIT_TOL};
use graphproof::stats::trial_seed;
use graphproof::{
    build_settings, build_triangular_lattice, builtin_pattern, classical_strategy, hoeffding_trials,
    honest_strategy, make_graph_state, noisy_strategy, ClassicalAssignment, Graph, Protocol, QuerySymbol,
};
use proptest::prelude::*;

fn arb_graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (1..=max_n).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        let m = pairs.len();
        proptest::collection::vec(any::<bool>(), m).prop_map(move |keep| {
            let edges: Vec<_> = pairs.iter().zip(&keep).filter(|(_, k)| **k).map(|(p, _)| *p).collect();
            Graph::from_edges(n, &edges).unwrap()
        })
    })
}

fn arb_coverable() -> impl Strategy<Value = Graph> {
    prop_oneof![
        (1usize..=3, 2usize..=4).prop_filter_map("lattice", |(r, c)| build_triangular_lattice(r, c).ok()),
        arb_graph(6).prop_filter("has a cover", |g| g.has_triangle_cover()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn graph_state_is_normalised_and_stabilized(g in arb_graph(7)) {
        let psi = make_graph_state(&g).unwrap();
        prop_assert!((psi.norm_sqr() - 1.0).abs() < 1e-12);
        let h = honest_strategy(&g).unwrap();
        for v in 0..g.n() {
            let mut symbols = vec![QuerySymbol::Identity; g.n()];
            symbols[v] = QuerySymbol::X;
            for w in g.adjacency_row(v).support() {
                symbols[w] = QuerySymbol::Z;
            }
            let e = h.exact_expectation(&symbols, graphproof::Sign::Plus).unwrap();
            prop_assert!((e - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn honest_settings_match_table(g in arb_coverable()) {
        let h = honest_strategy(&g).unwrap();
        let settings = build_settings(&g).unwrap();
        prop_assert_eq!(settings.len(), 5 * g.n() + g.triangle_cover().unwrap().len());
        for s in &settings {
            let e = h.exact_expectation(s.symbols(), s.sign).unwrap();
            prop_assert!((e - s.honest_expectation).abs() < 1e-10, "{}: {}", s, e);
        }
    }

    #[test]
    fn every_vertex_symbol_is_tested(g in arb_coverable()) {
        let settings = build_settings(&g).unwrap();
        for v in 0..g.n() {
            for sym in QuerySymbol::MEASURED {
                prop_assert!(settings.iter().any(|s| s.symbol(v) == sym));
            }
        }
    }

    #[test]
    fn classical_expectations_are_signs(bits in 0u64..1 << 12) {
        let g = Graph::complete(3);
        let s = classical_strategy(ClassicalAssignment::from_bits(3, bits));
        for m in build_settings(&g).unwrap() {
            let e = s.exact_expectation(m.symbols(), m.sign).unwrap();
            prop_assert!(e == 1.0 || e == -1.0);
            let mut sess = s.session(bits);
            let prod = graphproof::Sign::product((0..3).map(|v| sess.query(v, m.symbol(v)).unwrap()));
            prop_assert_eq!((prod * m.sign).as_f64(), e);
        }
    }

    #[test]
    fn honest_audit_passes_on_random_graphs(g in arb_coverable().prop_filter("small", |g| g.n() <= 6)) {
        let r = audit(&g, &honest_strategy(&g).unwrap(), AUDIT_TOL).unwrap();
        prop_assert!(r.passed);
        prop_assert!(r.settings.iter().all(|d| d.deviation >= 0.0));
    }

    #[test]
    fn noise_never_raises_test_acceptance(e1 in 0.0f64..0.5, e2 in 0.0f64..0.5) {
        let g = Graph::complete(3);
        let settings = build_settings(&g).unwrap();
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let a = exact_test_acceptance(&noisy_strategy(&g, lo).unwrap(), &settings).unwrap();
        let b = exact_test_acceptance(&noisy_strategy(&g, hi).unwrap(), &settings).unwrap();
        prop_assert!(b <= a + 1e-12);
    }

    #[test]
    fn acceptance_is_linear_in_q(q in 0.0f64..=1.0, eps in 0.0f64..0.3) {
        let g = Graph::complete(3);
        let p = Protocol::new(g.clone(), builtin_pattern(&g, "adaptive-demo").unwrap()).unwrap();
        let s = noisy_strategy(&g, eps).unwrap();
        let calc = exact_acceptance(p.pattern(), &s).unwrap();
        let test = p.test_acceptance(&s).unwrap();
        prop_assert!((p.acceptance(&s, q).unwrap() - (q * calc + (1.0 - q) * test)).abs() < 1e-12);
    }

    #[test]
    fn trials_are_seed_deterministic(master in any::<u64>(), index in 0u64..1000) {
        let g = Graph::complete(3);
        let p = Protocol::new(g.clone(), builtin_pattern(&g, "triangle-parity").unwrap()).unwrap();
        let s = noisy_strategy(&g, 0.1).unwrap();
        let a = p.run_trial(&s, 0.5, master, index).unwrap();
        let b = p.run_trial(&s, 0.5, master, index).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.seed, trial_seed(master, index));
    }

    #[test]
    fn hoeffding_is_minimal(gap in 0.01f64..1.0, conf in 0.05f64..0.99) {
        let n = hoeffding_trials(gap, conf).unwrap();
        let bound = |n: u64| 2.0 * (-(n as f64) * gap * gap / 2.0).exp();
        prop_assert!(bound(n) <= 1.0 - conf);
        prop_assert!(n == 1 || bound(n - 1) > 1.0 - conf);
    }
}

#[test]
fn lattice_families_have_expected_sizes() {
    for (r, c) in [(2, 2), (2, 3), (3, 3), (3, 4)] {
        let g = build_triangular_lattice(r, c).unwrap();
        let settings = build_settings(&g).unwrap();
        let tri = settings.iter().filter(|s| matches!(s.family, FamilyTag::Triangle { .. })).count();
        assert_eq!(tri, g.triangle_cover().unwrap().len());
    }
}
