#![allow(dead_code)]

use std::collections::BTreeSet;

use danrl::graph::{
    generate_sbm_attributed, sample_block_attributes, AttributeMatrix, AttributedGraph,
    NodeLabelSet, SbmParams,
};
use danrl::model::{Activation, BatchBundle, LossWeights, ModelParams, Objective};
use danrl::preprocess::ReconstructedAdjacency;
use danrl::walks::{build_negative_sampler, context_pairs, generate_walks};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Denominator floor for relative gradient error; only guards components
/// that are exactly zero.
pub const REL_ERR_FLOOR: f64 = 1e-8;

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(REL_ERR_FLOOR)
}

/// Everything needed to evaluate the objective on a small random graph.
pub struct GradFixture {
    pub r: ReconstructedAdjacency,
    pub params: ModelParams,
    pub bundle: BatchBundle,
    pub weights: LossWeights,
    pub chi: f64,
}

impl GradFixture {
    pub fn objective(&self) -> Objective<'_> {
        Objective {
            r: &self.r,
            activation: Activation::Tanh,
            chi: self.chi,
            weights: self.weights,
        }
    }
}

pub fn random_graph(n: usize, p: f64, attr_dim: usize, rng: &mut impl Rng) -> AttributedGraph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    // a ring keeps every node on some edge
    edges.extend((0..n).map(|v| (v, (v + 1) % n)));
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..attr_dim).map(|_| if rng.random_bool(0.4) { 1.0 } else { 0.0 }).collect())
        .collect();
    let attrs = AttributeMatrix::from_dense_rows(&rows).unwrap();
    AttributedGraph::new(n, edges, attrs, None).unwrap()
}

/// 10 nodes, input width 10, one hidden layer of 6, embedding width 4,
/// every loss weight non-zero.
pub fn gradient_fixture(seed: u64) -> GradFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 10;
    let graph = random_graph(n, 0.25, 6, &mut rng);
    let r = ReconstructedAdjacency::from_graph(&graph, 1.0, 0.7, None).unwrap();
    let mut params = ModelParams::init(&[n, 6, 4], seed).unwrap();
    // non-zero biases so their gradients are exercised away from the origin
    for (_, t) in params.tensors_mut() {
        for v in t.iter_mut() {
            *v += rng.random_range(-0.1..0.1);
        }
    }
    let walks = generate_walks(&graph, 1, 5, seed).unwrap();
    let pairs = context_pairs(walks.walks(), 2);
    let sampler = build_negative_sampler(&graph.degrees()).unwrap();
    let neg = 3;
    let negatives = (0..pairs.len() * neg).map(|_| sampler.sample(&mut rng)).collect();
    GradFixture {
        r,
        params,
        bundle: BatchBundle {
            rows: vec![0, 2, 3, 5, 7, 9],
            edges: graph.edges().to_vec(),
            pairs,
            negatives,
            neg_per_pair: neg,
        },
        weights: LossWeights {
            sg: 1.0,
            ae: 0.8,
            fop: 1.3,
            reg: 0.05,
        },
        chi: 3.0,
    }
}

pub struct GradCheck {
    pub checked: usize,
    pub max_rel_err: f64,
    pub worst: String,
}

/// Compare every analytic gradient component with a central difference.
pub fn check_gradients(f: &GradFixture, h: f64) -> GradCheck {
    let obj = f.objective();
    let (_, grads) = obj.gradients(&f.params, &f.bundle).unwrap();
    let analytic: Vec<(String, Vec<f64>)> = grads
        .tensors()
        .into_iter()
        .map(|(name, _, g)| (name, g.to_vec()))
        .collect();
    let mut out = GradCheck {
        checked: 0,
        max_rel_err: 0.0,
        worst: String::new(),
    };
    for (t, (name, g)) in analytic.iter().enumerate() {
        for (e, &a) in g.iter().enumerate() {
            let eval = |delta: f64| {
                let mut p = f.params.clone();
                p.tensors_mut()[t].1[e] += delta;
                obj.total_loss(&p, &f.bundle).unwrap()
            };
            let numeric = (eval(h) - eval(-h)) / (2.0 * h);
            let err = rel_err(a, numeric);
            out.checked += 1;
            if err > out.max_rel_err {
                out.max_rel_err = err;
                out.worst = format!("{name}[{e}]: analytic {a:e}, numeric {numeric:e}");
            }
        }
    }
    out
}

/// The default SBM fixture with `extra` attribute-bearing isolated nodes
/// appended; their block alternates 0, 1, 0, … and is also their label.
pub fn sbm_with_isolated(seed: u64, extra: usize) -> (AttributedGraph, Vec<usize>) {
    let params = SbmParams {
        seed,
        ..SbmParams::default()
    };
    let base = generate_sbm_attributed(&params).unwrap();
    let n = base.node_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x15_0A7E);
    let mut rows: Vec<Vec<f64>> = (0..n).map(|i| base.attributes().dense_row(i)).collect();
    let mut labels: Vec<usize> = (0..n).map(|i| base.labels().unwrap().get(i).unwrap()).collect();
    for k in 0..extra {
        let block = k % params.n_blocks;
        rows.push(sample_block_attributes(
            block,
            params.n_blocks,
            params.attr_dim,
            params.attr_noise,
            &mut rng,
        ));
        labels.push(block);
    }
    let attrs = AttributeMatrix::from_dense_rows(&rows).unwrap();
    let graph = AttributedGraph::new(
        n + extra,
        base.edges().iter().copied(),
        attrs,
        Some(NodeLabelSet::from_ids(&labels)),
    )
    .unwrap();
    (graph, (n..n + extra).collect())
}

/// O(P·N) pairwise AUC with ties worth one half.
pub fn brute_auc(pos: &[f64], neg: &[f64]) -> f64 {
    let mut wins = 0.0;
    for &p in pos {
        for &q in neg {
            wins += if p > q {
                1.0
            } else if p == q {
                0.5
            } else {
                0.0
            };
        }
    }
    wins / (pos.len() * neg.len()) as f64
}

/// Micro and macro F1 from an explicit confusion matrix over the classes
/// present in either vector.
pub fn brute_f1(pred: &[usize], truth: &[usize]) -> (f64, f64) {
    let classes: Vec<usize> = pred.iter().chain(truth).copied().collect::<BTreeSet<_>>().into_iter().collect();
    let k = classes.len();
    let pos = |c: usize| classes.iter().position(|&x| x == c).unwrap();
    let mut confusion = vec![vec![0usize; k]; k];
    for (&p, &t) in pred.iter().zip(truth) {
        confusion[pos(t)][pos(p)] += 1;
    }
    let (mut tp_sum, mut fp_sum, mut fn_sum, mut f1_sum) = (0, 0, 0, 0.0);
    for c in 0..k {
        let tp = confusion[c][c];
        let fp: usize = (0..k).filter(|&t| t != c).map(|t| confusion[t][c]).sum();
        let fn_: usize = (0..k).filter(|&p| p != c).map(|p| confusion[c][p]).sum();
        tp_sum += tp;
        fp_sum += fp;
        fn_sum += fn_;
        let precision = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
        let recall = if tp + fn_ == 0 { 0.0 } else { tp as f64 / (tp + fn_) as f64 };
        f1_sum += if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
    }
    let p = tp_sum as f64 / (tp_sum + fp_sum) as f64;
    let r = tp_sum as f64 / (tp_sum + fn_sum) as f64;
    let micro = if tp_sum == 0 { 0.0 } else { 2.0 * p * r / (p + r) };
    (micro, f1_sum / k as f64)
}
