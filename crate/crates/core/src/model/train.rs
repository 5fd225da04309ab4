//! The alternating mini-batch training loop.

use std::fmt;

use log::{debug, warn};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{ModelConfig, UpdateMode, EARLY_STOP_TOLERANCE, EARLY_STOP_WINDOW};
use super::io::Embeddings;
use super::objective::{encode_all, BatchBundle, LossBreakdown, LossWeights, Objective};
use super::optim::Optimizer;
use super::params::{ModelParams, TensorGroup};
use crate::error::{Error, Result};
use crate::graph::AttributedGraph;
use crate::preprocess::ReconstructedAdjacency;
use crate::walks::{
    build_negative_sampler, contexts_by_center, generate_walks, NegativeSampler, WalkCorpus,
};

// Offsets that decorrelate the seeded streams used by one run.
const INIT_SEED_OFFSET: u64 = 0x5851_F42D_4C95_7F2D;
const BATCH_SEED_OFFSET: u64 = 0x9E37_79B9_7F4A_7C15;

/// Epoch-mean loss values. `total` is the weighted objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    pub total: f64,
    pub losses: LossBreakdown,
}

impl fmt::Display for EpochLog {
    /// `epoch,L_total,L_sg,L_ae,L_fop,L_reg`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = &self.losses;
        write!(
            f,
            "{},{},{},{},{},{}",
            self.epoch, self.total, l.sg, l.ae, l.fop, l.reg
        )
    }
}

/// Result of a training run.
#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub embeddings: Embeddings,
    pub params: ModelParams,
    pub log: Vec<EpochLog>,
    /// Epoch after which the early-stop rule fired, if it did.
    pub stopped_at: Option<usize>,
}

/// Everything a run needs that is derived from the graph once.
pub struct TrainingSetup {
    pub r: ReconstructedAdjacency,
    pub contexts_per_round: Vec<Vec<Vec<usize>>>,
    pub sampler: Option<NegativeSampler>,
}

impl TrainingSetup {
    pub fn new(graph: &AttributedGraph, config: &ModelConfig) -> Result<Self> {
        config.validate()?;
        let r = ReconstructedAdjacency::from_graph(
            graph,
            config.eta,
            config.psi,
            config.similarity_top_k,
        )?;
        let corpus = generate_walks(graph, config.walks_per_node, config.walk_length, config.seed)?;
        Self::from_parts(graph, config, r, &corpus)
    }

    /// Assemble from a precomputed `R` (e.g. read from a cache) and corpus.
    pub fn from_parts(
        graph: &AttributedGraph,
        config: &ModelConfig,
        r: ReconstructedAdjacency,
        corpus: &WalkCorpus,
    ) -> Result<Self> {
        let n = graph.node_count();
        if r.n() != n || corpus.walks().len() != config.walks_per_node * n {
            return Err(Error::Dimension(format!(
                "R or corpus does not match a graph of {n} nodes with {} walks per node",
                config.walks_per_node
            )));
        }
        let contexts_per_round = (0..config.walks_per_node)
            .map(|k| contexts_by_center(corpus.round(k), config.window, n))
            .collect();
        let sampler = if graph.edge_count() == 0 {
            warn!("graph has no edges; skip-gram branch is disabled");
            None
        } else {
            Some(build_negative_sampler(&graph.degrees())?)
        };
        Ok(TrainingSetup {
            r,
            contexts_per_round,
            sampler,
        })
    }
}

/// Train embeddings for `graph`.
pub fn train(graph: &AttributedGraph, config: &ModelConfig) -> Result<TrainOutput> {
    let setup = TrainingSetup::new(graph, config)?;
    train_from(graph, config, &setup, initial_params(graph, config)?)
}

/// The seeded starting point used by [`train`].
pub fn initial_params(graph: &AttributedGraph, config: &ModelConfig) -> Result<ModelParams> {
    ModelParams::init(
        &config.layer_dims(graph.node_count()),
        config.seed ^ INIT_SEED_OFFSET,
    )
}

/// Continue training from `params` (e.g. a loaded checkpoint).
pub fn train_from(
    graph: &AttributedGraph,
    config: &ModelConfig,
    setup: &TrainingSetup,
    mut params: ModelParams,
) -> Result<TrainOutput> {
    config.validate()?;
    params.validate()?;
    if params.dims() != config.layer_dims(graph.node_count()) {
        return Err(Error::Dimension(format!(
            "parameters have widths {:?}, config asks for {:?}",
            params.dims(),
            config.layer_dims(graph.node_count())
        )));
    }
    let n = graph.node_count();
    let weights = LossWeights::from_config(config);
    let lr = config.learning_rate;
    let mut opt_fop = Optimizer::new(config.optimizer, lr, &params);
    let mut opt_ae = Optimizer::new(config.optimizer, lr, &params);
    let mut opt_sg = Optimizer::new(config.optimizer, lr, &params);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(BATCH_SEED_OFFSET));
    let mut order: Vec<usize> = (0..n).collect();
    let mut in_batch = vec![false; n];
    let mut log: Vec<EpochLog> = Vec::with_capacity(config.epochs);
    let mut stopped_at = None;

    let objective = |w: LossWeights| Objective {
        r: &setup.r,
        activation: config.activation,
        chi: config.chi,
        weights: w,
    };

    for epoch in 0..config.epochs {
        let contexts = &setup.contexts_per_round[epoch % setup.contexts_per_round.len()];
        order.shuffle(&mut rng);
        let mut sums = LossBreakdown::default();
        let mut counts = [0usize; 4];
        let mut total = 0.0;
        let mut batches = 0usize;

        for batch in order.chunks(config.batch_size) {
            let bundle = build_bundle(graph, batch, contexts, setup, config, &mut in_batch, &mut rng)?;
            let mut batch_loss = LossBreakdown::default();
            match config.update_mode {
                UpdateMode::Alternating => {
                    if weights.fop != 0.0 && !bundle.edges.is_empty() {
                        let (l, g) = objective(LossWeights::only_fop(weights.fop)).gradients(&params, &bundle)?;
                        batch_loss.fop = l.fop;
                        counts[2] += 1;
                        opt_fop.step(&mut params, &g, &[TensorGroup::Encoder]);
                    }
                    if weights.ae != 0.0 || weights.reg != 0.0 {
                        let w = LossWeights::only_ae(weights.ae, weights.reg);
                        let (l, g) = objective(w).gradients(&params, &bundle)?;
                        batch_loss.ae = l.ae;
                        batch_loss.reg = l.reg;
                        counts[1] += usize::from(weights.ae != 0.0);
                        counts[3] += usize::from(weights.reg != 0.0);
                        opt_ae.step(&mut params, &g, &[TensorGroup::Encoder, TensorGroup::Decoder]);
                    }
                    if !bundle.pairs.is_empty() {
                        let (l, g) = objective(LossWeights::only_sg()).gradients(&params, &bundle)?;
                        batch_loss.sg = l.sg;
                        counts[0] += 1;
                        opt_sg.step(&mut params, &g, &[TensorGroup::Encoder, TensorGroup::Context]);
                    }
                }
                UpdateMode::Combined => {
                    let w = LossWeights {
                        sg: if bundle.pairs.is_empty() { 0.0 } else { weights.sg },
                        fop: if bundle.edges.is_empty() { 0.0 } else { weights.fop },
                        ..weights
                    };
                    let (l, g) = objective(w).gradients(&params, &bundle)?;
                    batch_loss = l;
                    counts[0] += usize::from(w.sg != 0.0);
                    counts[1] += usize::from(w.ae != 0.0);
                    counts[2] += usize::from(w.fop != 0.0);
                    counts[3] += usize::from(w.reg != 0.0);
                    opt_sg.step(
                        &mut params,
                        &g,
                        &[TensorGroup::Encoder, TensorGroup::Decoder, TensorGroup::Context],
                    );
                }
            }
            sums.sg += batch_loss.sg;
            sums.ae += batch_loss.ae;
            sums.fop += batch_loss.fop;
            sums.reg += batch_loss.reg;
            total += batch_loss.weighted_total(&weights);
            batches += 1;
        }

        let mean = |s: f64, c: usize| if c == 0 { 0.0 } else { s / c as f64 };
        let entry = EpochLog {
            epoch: epoch + 1,
            total: total / batches.max(1) as f64,
            losses: LossBreakdown {
                sg: mean(sums.sg, counts[0]),
                ae: mean(sums.ae, counts[1]),
                fop: mean(sums.fop, counts[2]),
                reg: mean(sums.reg, counts[3]),
            },
        };
        if !entry.total.is_finite() {
            return Err(Error::Diverged(format!("epoch {}: loss {entry}", epoch + 1)));
        }
        debug!("{entry}");
        log.push(entry);

        if config.early_stop && log.len() > EARLY_STOP_WINDOW {
            let then = log[log.len() - 1 - EARLY_STOP_WINDOW].total;
            if ((entry.total - then) / then.abs().max(f64::MIN_POSITIVE)).abs() < EARLY_STOP_TOLERANCE {
                stopped_at = Some(epoch + 1);
                break;
            }
        }
    }

    let embeddings = Embeddings(encode_all(&params, config.activation, setup.r.matrix().view())?);
    Ok(TrainOutput {
        embeddings,
        params,
        log,
        stopped_at,
    })
}

/// Assemble the samples for one batch of center nodes: their rows of `R`,
/// the edges with both endpoints in the batch, and every context pair of
/// the current walk round with freshly drawn negatives.
fn build_bundle(
    graph: &AttributedGraph,
    batch: &[usize],
    contexts: &[Vec<usize>],
    setup: &TrainingSetup,
    config: &ModelConfig,
    in_batch: &mut [bool],
    rng: &mut ChaCha8Rng,
) -> Result<BatchBundle> {
    let mut rows = batch.to_vec();
    rows.sort_unstable();
    for &v in &rows {
        in_batch[v] = true;
    }
    let mut edges = Vec::new();
    for &u in &rows {
        for &v in graph.neighbors(u) {
            if v > u && in_batch[v] {
                edges.push((u, v));
            }
        }
    }
    for &v in &rows {
        in_batch[v] = false;
    }

    let mut pairs = Vec::new();
    let mut negatives = Vec::new();
    let neg = config.negatives;
    if let Some(sampler) = &setup.sampler {
        for &c in &rows {
            for &ctx in &contexts[c] {
                pairs.push((c, ctx));
                if config.exclude_center {
                    sampler.sample_into(neg, &[ctx, c], rng, &mut negatives)?;
                } else {
                    sampler.sample_into(neg, &[ctx], rng, &mut negatives)?;
                }
            }
        }
    }
    Ok(BatchBundle {
        rows,
        edges,
        pairs,
        negatives,
        neg_per_pair: neg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_sbm_attributed, SbmParams};

    fn small_config() -> ModelConfig {
        ModelConfig {
            hidden_dims: vec![16],
            embedding_dim: 8,
            walks_per_node: 2,
            walk_length: 10,
            window: 3,
            negatives: 2,
            batch_size: 8,
            epochs: 3,
            ..Default::default()
        }
    }

    fn sbm() -> AttributedGraph {
        generate_sbm_attributed(&SbmParams {
            n_per_block: 10,
            ..SbmParams::default()
        })
        .unwrap()
    }

    #[test]
    fn zero_epochs_returns_initial_embeddings() {
        let g = sbm();
        let config = ModelConfig { epochs: 0, ..small_config() };
        let out = train(&g, &config).unwrap();
        assert!(out.log.is_empty());
        let setup = TrainingSetup::new(&g, &config).unwrap();
        let init = ModelParams::init(&config.layer_dims(20), config.seed ^ INIT_SEED_OFFSET).unwrap();
        let expected = encode_all(&init, config.activation, setup.r.matrix().view()).unwrap();
        assert_eq!(out.embeddings.0, expected);
    }

    #[test]
    fn training_is_deterministic() {
        let g = sbm();
        let a = train(&g, &small_config()).unwrap();
        let b = train(&g, &small_config()).unwrap();
        assert_eq!(a.embeddings, b.embeddings);
        assert_eq!(a.log, b.log);
    }

    #[test]
    fn log_line_format() {
        let g = sbm();
        let out = train(&g, &small_config()).unwrap();
        let line = out.log[0].to_string();
        assert_eq!(line.split(',').count(), 6);
        assert!(line.starts_with("1,"));
    }

    #[test]
    fn combined_mode_trains() {
        let g = sbm();
        let config = ModelConfig {
            update_mode: UpdateMode::Combined,
            ..small_config()
        };
        let out = train(&g, &config).unwrap();
        assert_eq!(out.log.len(), 3);
    }

    #[test]
    fn edgeless_graph_still_trains_autoencoder() {
        let g = sbm().with_edges([]).unwrap();
        let out = train(&g, &small_config()).unwrap();
        assert!(out.log.iter().all(|e| e.losses.sg == 0.0 && e.losses.ae > 0.0));
    }
}
