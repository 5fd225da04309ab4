//! Uniform random walks, skip-gram context windows and the degree-biased
//! negative sampler.
//!
//! With return and in-out parameters both 1, a second-order node2vec walk
//! is a uniform walk, so the walker keeps no previous-node state.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::AttributedGraph;
use crate::par;

/// Exponent applied to degrees in the noise distribution.
pub const NOISE_EXPONENT: f64 = 0.75;

/// A walk corpus: `walks_per_node` rounds, each holding one walk per start
/// node in node order.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkCorpus {
    walks: Vec<Vec<usize>>,
    n: usize,
    walks_per_node: usize,
    walk_length: usize,
}

fn walk_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn uniform_walk(graph: &AttributedGraph, start: usize, length: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut walk = Vec::with_capacity(length);
    walk.push(start);
    let mut cur = start;
    while walk.len() < length {
        let nbrs = graph.neighbors(cur);
        if nbrs.is_empty() {
            break;
        }
        cur = nbrs[rng.random_range(0..nbrs.len())];
        walk.push(cur);
    }
    walk
}

fn check_walk_params(walks_per_node: usize, walk_length: usize) -> Result<()> {
    if walks_per_node == 0 || walk_length == 0 {
        return Err(Error::InvalidParameter(format!(
            "walks per node ({walks_per_node}) and walk length ({walk_length}) must be positive"
        )));
    }
    Ok(())
}

/// `walks_per_node` uniform walks of at most `walk_length` nodes from every
/// node. Walk `k` uses its own ChaCha stream, so the corpus does not depend
/// on the thread count.
pub fn generate_walks(
    graph: &AttributedGraph,
    walks_per_node: usize,
    walk_length: usize,
    seed: u64,
) -> Result<WalkCorpus> {
    check_walk_params(walks_per_node, walk_length)?;
    let n = graph.node_count();
    let walks = par::map_range(n * walks_per_node, |k| {
        uniform_walk(graph, k % n, walk_length, &mut walk_rng(seed, k))
    });
    Ok(WalkCorpus {
        walks,
        n,
        walks_per_node,
        walk_length,
    })
}

/// Single-threaded [`generate_walks`].
pub fn generate_walks_seq(
    graph: &AttributedGraph,
    walks_per_node: usize,
    walk_length: usize,
    seed: u64,
) -> Result<WalkCorpus> {
    check_walk_params(walks_per_node, walk_length)?;
    let n = graph.node_count();
    let walks = par::map_range_seq(n * walks_per_node, |k| {
        uniform_walk(graph, k % n, walk_length, &mut walk_rng(seed, k))
    });
    Ok(WalkCorpus {
        walks,
        n,
        walks_per_node,
        walk_length,
    })
}

impl WalkCorpus {
    pub fn walks(&self) -> &[Vec<usize>] {
        &self.walks
    }

    pub fn walks_per_node(&self) -> usize {
        self.walks_per_node
    }

    pub fn walk_length(&self) -> usize {
        self.walk_length
    }

    /// Round `k` (one walk from every start node). Training consumes one
    /// round per epoch, cycling.
    pub fn round(&self, k: usize) -> &[Vec<usize>] {
        let k = k % self.walks_per_node;
        &self.walks[k * self.n..(k + 1) * self.n]
    }

    /// One walk per line, space-separated node ids.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::graph::write_lines(path.as_ref(), |w| {
            for walk in &self.walks {
                let line: Vec<String> = walk.iter().map(usize::to_string).collect();
                writeln!(w, "{}", line.join(" "))?;
            }
            Ok(())
        })
    }
}

/// Every `(walk[i], walk[i + j])` with `1 <= |j| <= window`, clipped at the
/// walk ends, in walk then position order.
pub fn context_pairs(walks: &[Vec<usize>], window: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for walk in walks {
        for (i, &center) in walk.iter().enumerate() {
            let lo = i.saturating_sub(window);
            let hi = (i + window).min(walk.len() - 1);
            for (j, &ctx) in walk.iter().enumerate().take(hi + 1).skip(lo) {
                if j != i {
                    pairs.push((center, ctx));
                }
            }
        }
    }
    pairs
}

/// The same pairs as [`context_pairs`], grouped by center node.
pub fn contexts_by_center(walks: &[Vec<usize>], window: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); n];
    for (c, ctx) in context_pairs(walks, window) {
        out[c].push(ctx);
    }
    out
}

/// Draws nodes with probability proportional to `degree^0.75`.
#[derive(Debug, Clone, PartialEq)]
pub struct NegativeSampler {
    probs: Vec<f64>,
    cdf: Vec<f64>,
}

/// Build the noise distribution from node degrees. Zero-degree nodes get
/// probability 0; all-zero degrees are an error.
pub fn build_negative_sampler(degrees: &[usize]) -> Result<NegativeSampler> {
    let weights: Vec<f64> = degrees
        .iter()
        .map(|&d| (d as f64).powf(NOISE_EXPONENT))
        .collect();
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidParameter(
            "negative sampler needs at least one node with positive degree".into(),
        ));
    }
    let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let mut acc = 0.0;
    let mut cdf: Vec<f64> = weights
        .iter()
        .map(|w| {
            acc += w;
            acc / total
        })
        .collect();
    // pin the tail to exactly 1 so a uniform draw in [0, 1) always lands
    let last_positive = weights.iter().rposition(|&w| w > 0.0).unwrap();
    for c in &mut cdf[last_positive..] {
        *c = 1.0;
    }
    Ok(NegativeSampler { probs, cdf })
}

impl NegativeSampler {
    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    /// One draw.
    pub fn sample(&self, rng: &mut impl Rng) -> usize {
        let u: f64 = rng.random();
        self.cdf.partition_point(|&c| c <= u)
    }

    /// `count` draws, redrawing any that land in `exclude`. Errors when
    /// every node with positive probability is excluded.
    pub fn sample_negatives(
        &self,
        count: usize,
        exclude: &[usize],
        rng: &mut impl Rng,
    ) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(count);
        self.sample_into(count, exclude, rng, &mut out)?;
        Ok(out)
    }

    /// Append `count` draws to `out`; see [`sample_negatives`](Self::sample_negatives).
    pub fn sample_into(
        &self,
        count: usize,
        exclude: &[usize],
        rng: &mut impl Rng,
        out: &mut Vec<usize>,
    ) -> Result<()> {
        if count == 0 {
            return Ok(());
        }
        let excluded_mass: f64 = exclude
            .iter()
            .enumerate()
            .filter(|(i, v)| !exclude[..*i].contains(v))
            .map(|(_, &v)| self.probs.get(v).copied().unwrap_or(0.0))
            .sum();
        if excluded_mass >= 1.0 - 1e-12 {
            return Err(Error::InvalidParameter(
                "every node with positive sampling probability is excluded".into(),
            ));
        }
        let target = out.len() + count;
        while out.len() < target {
            let v = self.sample(rng);
            if !exclude.contains(&v) {
                out.push(v);
            }
        }
        Ok(())
    }
}
