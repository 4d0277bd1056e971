use netclust_core::edgelist::{parse_edge_list, write_edge_list, write_multilayer_edge_list, ParsedGraph};
use netclust_core::graph::{Graph, MultilayerGraph};
use netclust_core::laplacian::{build_laplacian, build_supra_laplacian, LaplacianKind};
use netclust_core::sbm::{generate_sbm_graph, SbmConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_multilayer(seed: u64) -> MultilayerGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = MultilayerGraph::builder();
    for layer in ["t1", "t2"] {
        // a spanning path keeps every layer connected
        for i in 1..20 {
            b.edge(&format!("n{}", i - 1), &format!("n{i}"), rng.random_range(0.5..3.0), layer).unwrap();
        }
        for _ in 0..25 {
            let (u, v) = (rng.random_range(0..20), rng.random_range(0..20));
            if u != v {
                b.edge(&format!("n{u}"), &format!("n{v}"), rng.random_range(0.5..3.0), layer).unwrap();
            }
        }
    }
    b.build()
}

/// D - A of the supra-graph, with couplings built here rather than by the
/// library.
fn degree_minus_adjacency(mg: &MultilayerGraph, omega: f64) -> Vec<f64> {
    let nodes = mg.supra_nodes();
    let n = nodes.len();
    let idx = |base: usize, layer: usize| nodes.iter().position(|s| s.base == base && s.layer == layer).unwrap();
    let mut a = vec![0.0; n * n];
    for e in mg.edges() {
        let (i, j) = (idx(e.u, e.layer), idx(e.v, e.layer));
        a[i * n + j] += e.weight;
        a[j * n + i] += e.weight;
    }
    for i in 0..n {
        for j in 0..n {
            if i != j && nodes[i].base == nodes[j].base {
                a[i * n + j] += omega;
            }
        }
    }
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        let deg: f64 = (0..n).map(|j| a[i * n + j]).sum();
        for j in 0..n {
            l[i * n + j] = if i == j { deg } else { -a[i * n + j] };
        }
    }
    l
}

#[test]
fn incidence_form_equals_degree_minus_adjacency() {
    for seed in 0..5 {
        let mg = random_multilayer(seed);
        for omega in [1.0, 0.25, 3.5] {
            let supra = build_supra_laplacian(&mg, omega).unwrap();
            assert_eq!(supra.kind(), LaplacianKind::Supra);
            assert_eq!(supra.dim(), 40);
            let want = degree_minus_adjacency(&mg, omega);
            for (x, y) in supra.to_dense().iter().zip(&want) {
                assert!((x - y).abs() <= 1e-12, "{x} vs {y}");
            }
            assert!(supra.max_abs_row_sum() <= 1e-12);
        }
    }
}

#[test]
fn single_layer_supra_equals_plain_laplacian() {
    let cfg = SbmConfig { seed: 4, ..Default::default() };
    let (g, _) = generate_sbm_graph(&cfg).unwrap();
    let mut b = MultilayerGraph::builder();
    for id in g.node_ids() {
        b.node(id, "only");
    }
    for e in g.edges() {
        b.edge(&g.node_ids()[e.u], &g.node_ids()[e.v], e.weight, "only").unwrap();
    }
    let mg = b.build();
    let supra = build_supra_laplacian(&mg, 1.0).unwrap().to_dense();
    let plain = build_laplacian(&g).unwrap().to_dense();
    for (x, y) in supra.iter().zip(&plain) {
        assert!((x - y).abs() <= 1e-15);
    }
}

#[test]
fn sbm_laplacians_are_balanced_and_symmetric() {
    for seed in 0..5 {
        let (g, _) = generate_sbm_graph(&SbmConfig { seed, ..Default::default() }).unwrap();
        let l = build_laplacian(&g).unwrap();
        assert!(l.max_abs_row_sum() <= 1e-12);
        let n = l.dim();
        let dense = l.to_dense();
        for i in 0..n {
            for j in 0..n {
                assert_eq!(dense[i * n + j], dense[j * n + i]);
            }
        }
    }
}

#[test]
fn spec_edge_list_examples() {
    let g = parse_edge_list("a b\nb c", false, false).unwrap().into_single().unwrap();
    assert_eq!((g.node_count(), g.edge_count()), (3, 2));
    assert!(g.edges().iter().all(|e| e.weight == 1.0));
    let g = parse_edge_list("a b 2\na b 3", true, false).unwrap().into_single().unwrap();
    assert_eq!(g.edge_count(), 1);
    assert_eq!(g.edges()[0].weight, 5.0);
    assert!(parse_edge_list("a a 1", true, false).is_err());
}

#[test]
fn multilayer_text_round_trip() {
    let mg = random_multilayer(9);
    let text = write_multilayer_edge_list(&mg);
    match parse_edge_list(&text, true, true).unwrap() {
        ParsedGraph::Multilayer(back) => assert_eq!(back, mg),
        other => panic!("expected multilayer, got {other:?}"),
    }
}

proptest! {
    #[test]
    fn edge_list_round_trip(edges in prop::collection::vec((0usize..12, 0usize..12, 0.01f64..100.0), 1..40)) {
        let edges: Vec<_> = edges.into_iter().filter(|(u, v, _)| u != v).collect();
        prop_assume!(!edges.is_empty());
        let mut b = Graph::builder();
        for (u, v, w) in &edges {
            b.edge(&format!("x{u}"), &format!("x{v}"), *w).unwrap();
        }
        let g = b.build();
        let back = parse_edge_list(&write_edge_list(&g), true, false).unwrap().into_single().unwrap();
        prop_assert_eq!(back, g);
    }
}
