mod common;

use common::{brute_auc, brute_f1, random_graph};
use danrl::eval::{auc, macro_f1, micro_f1, split_link_prediction};
use danrl::graph::{export_edge_list, load_edge_list, AttributeMatrix, AttributedGraph, NodeLabelSet};
use danrl::preprocess::ReconstructedAdjacency;
use danrl::walks::{build_negative_sampler, context_pairs, generate_walks, generate_walks_seq};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn graph_strategy() -> impl Strategy<Value = AttributedGraph> {
    (4usize..14, 0.05f64..0.6, any::<u64>()).prop_map(|(n, p, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        random_graph(n, p, 5, &mut rng)
    })
}

/// A graph that may have several components and isolated nodes.
fn loose_graph_strategy() -> impl Strategy<Value = AttributedGraph> {
    (3usize..16)
        .prop_flat_map(|n| (Just(n), prop::collection::vec((0..n, 0..n), 1..30)))
        .prop_map(|(n, pairs)| {
            let edges: Vec<_> = pairs.into_iter().filter(|(u, v)| u != v).collect();
            let attrs = AttributeMatrix::from_dense_rows(&vec![vec![1.0]; n]).unwrap();
            AttributedGraph::new(n, edges, attrs, None).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn degree_sum_is_twice_edge_count(g in loose_graph_strategy()) {
        prop_assert_eq!(g.degrees().iter().sum::<usize>(), 2 * g.edge_count());
    }

    #[test]
    fn identical_rows_give_matching_r_rows(g in graph_strategy(), eta in 0.1f64..2.0, psi in 0.1f64..2.0) {
        // make node 1 a twin of node 0: same attributes, same neighbours
        let n = g.node_count();
        let twin_of = |v: usize| if v == 1 { 0 } else { v };
        let edges: Vec<_> = g.edges().iter()
            .map(|&(u, v)| (twin_of(u), twin_of(v)))
            .filter(|(u, v)| u != v)
            .flat_map(|(u, v)| if u == 0 { vec![(0, v), (1, v)] } else if v == 0 { vec![(u, 0), (u, 1)] } else { vec![(u, v)] })
            .collect();
        let mut rows: Vec<Vec<f64>> = (0..n).map(|i| g.attributes().dense_row(i)).collect();
        rows[1] = rows[0].clone();
        let twin = AttributedGraph::new(n, edges, AttributeMatrix::from_dense_rows(&rows).unwrap(), None).unwrap();
        let r = ReconstructedAdjacency::from_graph(&twin, eta, psi, None).unwrap();
        let m = r.matrix();
        // rows agree everywhere except the mutual entries, which swap because the diagonal is 0
        for j in 2..n {
            prop_assert_eq!(m[[0, j]], m[[1, j]]);
        }
        prop_assert_eq!(m[[0, 1]], m[[1, 0]]);
        prop_assert_eq!(m[[0, 0]], m[[1, 1]]);
    }

    #[test]
    fn isolated_node_with_attributes_has_nonzero_r_row(g in graph_strategy(), psi in 0.01f64..2.0) {
        let n = g.node_count();
        let mut rows: Vec<Vec<f64>> = (0..n).map(|i| g.attributes().dense_row(i)).collect();
        rows.push(rows[0].clone());
        rows[0][0] = 1.0;
        rows[n][0] = 1.0;
        let attrs = AttributeMatrix::from_dense_rows(&rows).unwrap();
        let with_isolated = AttributedGraph::new(n + 1, g.edges().iter().copied(), attrs, None).unwrap();
        let r = ReconstructedAdjacency::from_graph(&with_isolated, 1.0, psi, None).unwrap();
        prop_assert!(r.matrix().row(n).iter().any(|&v| v > 0.0));
    }

    #[test]
    fn sampler_is_normalized_and_monotone(degrees in prop::collection::vec(0usize..50, 1..40)) {
        prop_assume!(degrees.iter().any(|&d| d > 0));
        let s = build_negative_sampler(&degrees).unwrap();
        let p = s.probabilities();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for i in 0..degrees.len() {
            for j in 0..degrees.len() {
                if degrees[i] > degrees[j] {
                    prop_assert!(p[i] > p[j]);
                }
            }
        }
    }

    #[test]
    fn context_pairs_co_occur_within_window(g in graph_strategy(), window in 1usize..5, seed in any::<u64>()) {
        let corpus = generate_walks(&g, 2, 8, seed).unwrap();
        let pairs = context_pairs(corpus.walks(), window);
        let near = |u: usize, w: usize| corpus.walks().iter().any(|walk| {
            (0..walk.len()).any(|i| walk[i] == u
                && (i.saturating_sub(window)..(i + window + 1).min(walk.len())).any(|j| j != i && walk[j] == w))
        });
        for &(u, w) in pairs.iter().step_by(7) {
            prop_assert!(near(u, w));
        }
        let seq = generate_walks_seq(&g, 2, 8, seed).unwrap();
        prop_assert_eq!(corpus.walks(), seq.walks());
    }

    #[test]
    fn split_never_leaks_and_keeps_components(g in loose_graph_strategy(), seed in any::<u64>()) {
        let n = g.node_count();
        prop_assume!(g.edge_count() > 0 && n * (n - 1) / 2 >= 2 * g.edge_count());
        let s = split_link_prediction(&g, 0.5, seed).unwrap();
        prop_assert_eq!(s.positives.len(), s.negatives.len());
        prop_assert_eq!(s.positives.len() + s.shortfall, s.requested);
        prop_assert_eq!(s.train_graph.component_count(), g.component_count());
        prop_assert_eq!(s.train_graph.edge_count() + s.positives.len(), g.edge_count());
        for &(u, v) in &s.positives {
            prop_assert!(g.has_edge(u, v) && !s.train_graph.has_edge(u, v));
        }
        for &(u, v) in &s.negatives {
            prop_assert!(u != v && !g.has_edge(u, v));
        }
    }

    #[test]
    fn auc_matches_pairwise_count(
        pos in prop::collection::vec(0u8..20, 1..30),
        neg in prop::collection::vec(0u8..20, 1..30),
    ) {
        // small integer scores force plenty of ties
        let pos: Vec<f64> = pos.into_iter().map(f64::from).collect();
        let neg: Vec<f64> = neg.into_iter().map(f64::from).collect();
        prop_assert!((auc(&pos, &neg).unwrap() - brute_auc(&pos, &neg)).abs() < 1e-12);
    }

    #[test]
    fn f1_matches_confusion_matrix(pairs in prop::collection::vec((0usize..5, 0usize..5), 1..60)) {
        let (pred, truth): (Vec<usize>, Vec<usize>) = pairs.into_iter().unzip();
        let (micro, macro_) = brute_f1(&pred, &truth);
        prop_assert!((micro_f1(&pred, &truth).unwrap() - micro).abs() < 1e-12);
        prop_assert!((macro_f1(&pred, &truth).unwrap() - macro_).abs() < 1e-12);
    }
}

#[test]
fn export_then_load_restores_the_graph() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let g = random_graph(12, 0.3, 4, &mut rng);
    let labels = NodeLabelSet::from_ids(&(0..12).map(|i| i % 3).collect::<Vec<_>>());
    let g = AttributedGraph::new(12, g.edges().iter().copied(), g.attributes().clone(), Some(labels)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (e, a, l) = (dir.path().join("e"), dir.path().join("a"), dir.path().join("l"));
    export_edge_list(&g, &e, &a, Some(&l)).unwrap();
    let (back, _) = load_edge_list(&e, &a, Some(&l)).unwrap();
    assert_eq!(back.edges(), g.edges());
    assert_eq!(back.attributes().to_dense(), g.attributes().to_dense());
    assert_eq!(back.labels().unwrap().assignment(), g.labels().unwrap().assignment());
}
