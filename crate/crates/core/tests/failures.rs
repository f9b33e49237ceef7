use percolade_core::experiments::{sample_graph, SystemSize};
use percolade_core::failure::{
    apply_degree_dependent_link_failures, apply_iid_link_failures, apply_iid_node_failures, DegreeFailureRule,
    Monotonicity,
};
use percolade_core::geometry::Boundary;
use percolade_core::stats::Summary;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn monotone_coupling(
        low in prop::collection::vec(0.0f64..1.0, 1..12),
        bump in prop::collection::vec(0.0f64..1.0, 12),
        tail in 0.0f64..1.0,
        seed in any::<u64>(),
    ) {
        let g = sample_graph(2.0, SystemSize::Area(100.0), Boundary::Torus, seed ^ 0x5eed).unwrap();
        let high: Vec<f64> = low.iter().zip(&bump).map(|(q, b)| q + (1.0 - q) * b).collect();
        let tail_high = tail + (1.0 - tail) * bump[11];
        let r1 = DegreeFailureRule::new(low, tail, Monotonicity::None).unwrap();
        let r2 = DegreeFailureRule::new(high, tail_high, Monotonicity::None).unwrap();
        let s1 = apply_degree_dependent_link_failures(&g, &r1, seed);
        let s2 = apply_degree_dependent_link_failures(&g, &r2, seed);
        for e in 0..g.edge_count() {
            prop_assert!(!s2.edge_alive()[e] || s1.edge_alive()[e]);
        }
    }
}

#[test]
fn failure_probability_uses_original_link_degree() {
    // q(k) = 1 for k >= 4, else 0: exactly the links of original degree >= 4 go.
    let rule = DegreeFailureRule::new(vec![0.0; 4], 1.0, Monotonicity::NonDecreasing).unwrap();
    let g = sample_graph(1.5, SystemSize::Area(400.0), Boundary::Torus, 8).unwrap();
    let s = apply_degree_dependent_link_failures(&g, &rule, 1);
    for e in 0..g.edge_count() {
        assert_eq!(s.edge_alive()[e], g.link_degree_of(e) < 4, "edge {e}");
    }
}

#[test]
fn link_failures_hurt_less_than_node_failures() {
    for p in [0.3, 0.5] {
        let (mut links, mut nodes) = (Vec::new(), Vec::new());
        for t in 0..60u64 {
            let g = sample_graph(3.0, SystemSize::Nodes(2000), Boundary::Torus, t).unwrap();
            links.push(apply_iid_link_failures(&g, p, t).unwrap().largest_fraction());
            nodes.push(apply_iid_node_failures(&g, p, t).unwrap().largest_fraction());
        }
        let (l, n) = (Summary::of(&links), Summary::of(&nodes));
        assert!(l.mean >= n.mean, "p = {p}: links {} < nodes {}", l.mean, n.mean);
    }
}

#[test]
fn degree_fn_rule_defaults_isolated_links_to_degree_one() {
    let rule = DegreeFailureRule::from_degree_fn(10, 0.0, Monotonicity::NonIncreasing, |k| 1.0 / k as f64).unwrap();
    assert_eq!(rule.q(0), rule.q(1));
    assert_eq!(rule.q(4), 0.25);
    assert_eq!(rule.q(1000), 0.0);
}
