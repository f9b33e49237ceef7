use percolade_core::covering::{build_covering, covering_degree_check, covering_density, covering_is_subgraph_of_rgg};
use percolade_core::experiments::{sample_graph, SystemSize};
use percolade_core::geometry::Boundary;

#[test]
fn covering_nodes_are_links_and_degrees_agree() {
    for (i, lambda) in [0.7, 1.5, 2.5].into_iter().enumerate() {
        for t in 0..10u64 {
            let g = sample_graph(lambda, SystemSize::Area(150.0), Boundary::Torus, 1000 * i as u64 + t).unwrap();
            let c = build_covering(&g);
            assert_eq!(c.nodes.len(), g.edge_count());
            assert!(covering_degree_check(&g, &c).unwrap());
            assert!(covering_is_subgraph_of_rgg(&c));
        }
    }
}

#[test]
fn covering_on_hard_wall_box() {
    let g = sample_graph(2.0, SystemSize::Area(100.0), Boundary::HardWall, 4).unwrap();
    let c = build_covering(&g);
    assert!(covering_degree_check(&g, &c).unwrap());
    assert!(covering_is_subgraph_of_rgg(&c));
    for (k, &(u, v)) in c.origin.iter().enumerate() {
        let (a, b) = (g.points()[u], g.points()[v]);
        assert!((c.nodes[k].x - (a.x + b.x) / 2.0).abs() < 1e-12);
        assert!((c.nodes[k].y - (a.y + b.y) / 2.0).abs() < 1e-12);
    }
}

#[test]
fn covering_density_formula() {
    assert!((covering_density(1.5) - 3.534_291_735_288_517).abs() < 1e-12);
    assert!((covering_density(3.0) - 9.0 * std::f64::consts::PI / 2.0).abs() < 1e-12);
}
