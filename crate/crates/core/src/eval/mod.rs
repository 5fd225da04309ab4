//! Link prediction and node classification on learned embeddings.

mod classifier;
mod metrics;
mod report;
mod split;

use ndarray::{Array2, ArrayView2};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, NodeLabelSet};
use crate::model::{train, ModelConfig};
use crate::par;

pub use classifier::{train_linear_classifier, LinearClassifier};
pub use metrics::{auc, cosine, macro_f1, macro_f1_over, micro_f1};
pub use report::{EvalReport, TaskMetrics};
pub use split::{split_link_prediction, LinkSplit};

/// Fraction of edges held out for link prediction.
pub const HOLDOUT_FRACTION: f64 = 0.5;

/// Cosine score of nodes `i` and `j` under embeddings `y`.
pub fn score_pair(y: ArrayView2<'_, f64>, i: usize, j: usize) -> f64 {
    cosine(y.row(i), y.row(j))
}

/// AUC of cosine scores on a split's held-out edges against its non-edges.
pub fn split_auc(y: ArrayView2<'_, f64>, split: &LinkSplit) -> Result<f64> {
    let score = |pairs: &[(usize, usize)]| -> Vec<f64> {
        pairs.iter().map(|&(i, j)| score_pair(y, i, j)).collect()
    };
    auc(&score(&split.positives), &score(&split.negatives))
}

/// Hold out half the edges, train on the residual graph and report the AUC.
pub fn link_prediction_eval(graph: &AttributedGraph, config: &ModelConfig) -> Result<EvalReport> {
    link_prediction_eval_with(graph, config, HOLDOUT_FRACTION)
}

pub fn link_prediction_eval_with(
    graph: &AttributedGraph,
    config: &ModelConfig,
    fraction: f64,
) -> Result<EvalReport> {
    config.validate()?;
    let split = split_link_prediction(graph, fraction, config.seed)?;
    log::info!(
        "link prediction: {} held-out edges, {} residual edges",
        split.positives.len(),
        split.train_graph.edge_count()
    );
    let out = train(&split.train_graph, config)?;
    let auc = split_auc(out.embeddings.matrix().view(), &split)?;
    Ok(EvalReport {
        metrics: TaskMetrics::LinkPrediction {
            auc,
            held_out: split.positives.len(),
            shortfall: split.shortfall,
        },
        seed: config.seed,
        config: config.key_values(),
    })
}

/// Settings of the linear classifier used for node classification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifierSettings {
    pub l2: f64,
    pub epochs: usize,
}

impl Default for ClassifierSettings {
    fn default() -> Self {
        ClassifierSettings {
            l2: 1e-4,
            epochs: 100,
        }
    }
}

const MAX_RESAMPLES: usize = 100;

/// Train on a random `train_frac` of the labeled nodes and test on the
/// rest, `repeats` times.
pub fn node_classification_eval(
    y: ArrayView2<'_, f64>,
    labels: &NodeLabelSet,
    train_frac: f64,
    repeats: usize,
    seed: u64,
) -> Result<EvalReport> {
    node_classification_eval_with(y, labels, train_frac, repeats, seed, ClassifierSettings::default())
}

pub fn node_classification_eval_with(
    y: ArrayView2<'_, f64>,
    labels: &NodeLabelSet,
    train_frac: f64,
    repeats: usize,
    seed: u64,
    settings: ClassifierSettings,
) -> Result<EvalReport> {
    if !(train_frac > 0.0 && train_frac < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "train fraction {train_frac} must be in (0, 1)"
        )));
    }
    if repeats == 0 {
        return Err(Error::InvalidParameter("repeats must be positive".into()));
    }
    if labels.assignment().len() != y.nrows() {
        return Err(Error::Dimension(format!(
            "{} labels for {} embeddings",
            labels.assignment().len(),
            y.nrows()
        )));
    }
    let labeled = labels.labeled();
    if labeled.len() < 2 {
        return Err(Error::Empty("node classification needs at least two labeled nodes".into()));
    }
    let first = labeled[0].1;
    if labeled.iter().all(|&(_, c)| c == first) {
        return Err(Error::InvalidParameter("all labeled nodes share one class".into()));
    }
    let n_train = ((train_frac * labeled.len() as f64).round() as usize).clamp(1, labeled.len() - 1);

    let runs = par::map_range(repeats, |k| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let mut order = labeled.clone();
        for _ in 0..MAX_RESAMPLES {
            order.shuffle(&mut rng);
            let (train_set, test_set) = order.split_at(n_train);
            if train_set.iter().all(|&(_, c)| c == train_set[0].1) {
                continue;
            }
            let features = gather(y, train_set);
            let targets: Vec<usize> = train_set.iter().map(|&(_, c)| c).collect();
            let clf = train_linear_classifier(
                features.view(),
                &targets,
                settings.l2,
                settings.epochs,
                seed.wrapping_add(k as u64),
            )?;
            let pred = clf.predict(gather(y, test_set).view())?;
            let truth: Vec<usize> = test_set.iter().map(|&(_, c)| c).collect();
            return Ok((micro_f1(&pred, &truth)?, macro_f1(&pred, &truth)?));
        }
        Err(Error::InvalidParameter(format!(
            "repeat {k}: no training split with two classes after {MAX_RESAMPLES} draws"
        )))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let micro: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let macro_: Vec<f64> = runs.iter().map(|r| r.1).collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    Ok(EvalReport {
        metrics: TaskMetrics::NodeClassification {
            micro_f1_mean: mean(&micro),
            macro_f1_mean: mean(&macro_),
            micro_f1: micro,
            macro_f1: macro_,
        },
        seed,
        config: vec![
            ("train_frac".into(), train_frac.to_string()),
            ("classifier_l2".into(), settings.l2.to_string()),
            ("classifier_epochs".into(), settings.epochs.to_string()),
        ],
    })
}

fn gather(y: ArrayView2<'_, f64>, rows: &[(usize, usize)]) -> Array2<f64> {
    let mut out = Array2::zeros((rows.len(), y.ncols()));
    for (mut dst, &(v, _)) in out.rows_mut().into_iter().zip(rows) {
        dst.assign(&y.row(v));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_sbm_attributed, SbmParams};

    fn one_hot(classes: &[usize], k: usize) -> Array2<f64> {
        let mut y = Array2::zeros((classes.len(), k));
        for (i, &c) in classes.iter().enumerate() {
            y[[i, c]] = 1.0;
        }
        y
    }

    #[test]
    fn one_hot_embeddings_classify_perfectly() {
        let classes: Vec<usize> = (0..90).map(|i| i % 3).collect();
        let labels = NodeLabelSet::from_ids(&classes);
        let r = node_classification_eval(one_hot(&classes, 3).view(), &labels, 0.5, 4, 1).unwrap();
        match r.metrics {
            TaskMetrics::NodeClassification {
                micro_f1_mean,
                ref micro_f1,
                ref macro_f1,
                ..
            } => {
                assert_eq!(micro_f1_mean, 1.0);
                assert_eq!((micro_f1.len(), macro_f1.len()), (4, 4));
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn single_repeat_is_reproducible() {
        let classes: Vec<usize> = (0..20).map(|i| i % 2).collect();
        let labels = NodeLabelSet::from_ids(&classes);
        let y = Array2::from_shape_fn((20, 3), |(i, j)| ((i * 7 + j * 3) % 5) as f64);
        let a = node_classification_eval(y.view(), &labels, 0.5, 1, 8).unwrap();
        let b = node_classification_eval(y.view(), &labels, 0.5, 1, 8).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unlabeled_graph_is_rejected() {
        let labels = NodeLabelSet::new(vec![None; 4], vec!["a".into()]).unwrap();
        let y = Array2::zeros((4, 2));
        assert!(node_classification_eval(y.view(), &labels, 0.5, 1, 0).is_err());
    }

    #[test]
    fn oracle_scores_give_unit_auc() {
        assert_eq!(auc(&[1.0; 5], &[0.0; 5]).unwrap(), 1.0);
    }

    #[test]
    fn random_embeddings_are_near_chance() {
        use rand::Rng;
        let g = generate_sbm_attributed(&SbmParams {
            n_per_block: 30,
            seed: 5,
            ..SbmParams::default()
        })
        .unwrap();
        let split = split_link_prediction(&g, HOLDOUT_FRACTION, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let y = Array2::from_shape_simple_fn((g.node_count(), 16), || rng.random_range(-1.0..1.0));
        let a = split_auc(y.view(), &split).unwrap();
        assert!((a - 0.5).abs() <= 0.1, "auc {a}");
    }
}
