use congest_core::apps::{low_diameter_decomposition, max_independent_set, mis::is_independent, LddConfig, Solution};
use congest_core::expander::{decompose_with, verify_decomposition, DecomposeConfig};
use congest_core::framework::FrameworkConfig;
use congest_core::generators::{generate, with_random_weights, Family};
use congest_core::graph::load_graph;
use congest_core::{Graph, GraphFormat};

#[test]
fn edge_list_and_json_round_trip() {
    let g = with_random_weights(generate(&Family::RandomPlanar { n: 30 }, 4).unwrap(), 16, 9);
    let a = load_graph(g.to_edge_list().as_bytes(), GraphFormat::EdgeList).unwrap();
    let b = load_graph(g.to_json().as_bytes(), GraphFormat::Json).unwrap();
    for h in [&a, &b] {
        assert_eq!(h.n(), g.n());
        assert_eq!(h.edges(), g.edges());
        assert_eq!(
            (0..g.m()).map(|e| h.weight(e)).collect::<Vec<_>>(),
            (0..g.m()).map(|e| g.weight(e)).collect::<Vec<_>>()
        );
    }
}

#[test]
fn zero_weight_is_rejected() {
    assert!(Graph::from_weighted_edges(2, &[(0, 1, 0)]).is_err());
}

#[test]
fn decomposition_verifies_on_planar_inputs() {
    for seed in 0..5 {
        let g = generate(&Family::RandomPlanar { n: 200 }, seed).unwrap();
        let d = decompose_with(&g, 0.25, seed, &DecomposeConfig::default()).unwrap();
        let mut seen = vec![false; g.n()];
        for c in &d.clusters {
            for &v in c {
                assert!(!seen[v]);
                seen[v] = true;
            }
        }
        assert!(seen.iter().all(|&x| x));
        assert!(verify_decomposition(&g, &d).ok());
    }
}

#[test]
fn mis_pipeline_returns_independent_set() {
    let g = generate(&Family::Grid { w: 5, h: 6 }, 0).unwrap();
    let r = max_independent_set(&g, 0.25, 3, &FrameworkConfig::default()).unwrap();
    let Solution::Vertices(s) = &r.solution else { panic!("expected a vertex set") };
    assert!(is_independent(&g, s));
    assert_eq!(r.objective as usize, s.len());
}

#[test]
fn ldd_is_seed_deterministic() {
    let g = generate(&Family::Cycle { n: 300 }, 0).unwrap();
    let cfg = FrameworkConfig::default();
    let a = low_diameter_decomposition(&g, 0.25, 11, &LddConfig::default(), &cfg).unwrap();
    let b = low_diameter_decomposition(&g, 0.25, 11, &LddConfig::default(), &cfg).unwrap();
    assert_eq!(a.to_json(), b.to_json());
}
