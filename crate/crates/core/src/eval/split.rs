use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::AttributedGraph;

/// Held-out edges and sampled non-edges for link prediction.
#[derive(Debug, Clone)]
pub struct LinkSplit {
    /// The residual graph embeddings are trained on.
    pub train_graph: AttributedGraph,
    pub positives: Vec<(usize, usize)>,
    pub negatives: Vec<(usize, usize)>,
    /// Edges asked for (`⌊fraction·|E|⌋`).
    pub requested: usize,
    /// Edges that could not be removed without disconnecting a component.
    pub shortfall: usize,
}

/// Remove up to `⌊fraction·|E|⌋` edges in random order, skipping any edge
/// that is a bridge of the current residual graph, so every connected
/// component stays connected. Draws as many distinct non-edges of the
/// original graph as edges were removed.
pub fn split_link_prediction(graph: &AttributedGraph, fraction: f64, seed: u64) -> Result<LinkSplit> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "holdout fraction {fraction} must be in (0, 1)"
        )));
    }
    if graph.edge_count() == 0 {
        return Err(Error::Empty("link prediction needs at least one edge".into()));
    }
    let n = graph.node_count();
    let requested = (fraction * graph.edge_count() as f64).floor() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut candidates = graph.edges().to_vec();
    candidates.shuffle(&mut rng);

    let mut adj: Vec<Vec<usize>> = (0..n).map(|v| graph.neighbors(v).to_vec()).collect();
    let mut search = Reachability::new(n);
    let mut positives = Vec::with_capacity(requested);
    for &(u, v) in &candidates {
        if positives.len() == requested {
            break;
        }
        detach(&mut adj, u, v);
        if search.connected(&adj, u, v) {
            positives.push((u, v));
        } else {
            adj[u].push(v);
            adj[v].push(u);
        }
    }
    let shortfall = requested - positives.len();
    if shortfall > 0 {
        log::warn!("link split: only {} of {requested} edges removable", positives.len());
    }

    let non_edges = n * (n - 1) / 2 - graph.edge_count();
    if non_edges < positives.len() {
        return Err(Error::InvalidParameter(format!(
            "graph has {non_edges} non-edges, {} negatives needed",
            positives.len()
        )));
    }
    let mut chosen = HashSet::with_capacity(positives.len());
    let mut negatives = Vec::with_capacity(positives.len());
    while negatives.len() < positives.len() {
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        let pair = (a.min(b), a.max(b));
        if a != b && !graph.has_edge(a, b) && chosen.insert(pair) {
            negatives.push(pair);
        }
    }

    let held: HashSet<(usize, usize)> = positives.iter().copied().collect();
    let train_graph = graph.with_edges(graph.edges().iter().copied().filter(|e| !held.contains(e)))?;
    Ok(LinkSplit {
        train_graph,
        positives,
        negatives,
        requested,
        shortfall,
    })
}

fn detach(adj: &mut [Vec<usize>], u: usize, v: usize) {
    for (a, b) in [(u, v), (v, u)] {
        let pos = adj[a].iter().position(|&x| x == b).expect("edge present");
        adj[a].swap_remove(pos);
    }
}

/// Breadth-first reachability with a reusable visit stamp.
struct Reachability {
    stamp: Vec<u32>,
    round: u32,
    queue: std::collections::VecDeque<usize>,
}

impl Reachability {
    fn new(n: usize) -> Self {
        Reachability {
            stamp: vec![0; n],
            round: 0,
            queue: Default::default(),
        }
    }

    fn connected(&mut self, adj: &[Vec<usize>], from: usize, to: usize) -> bool {
        self.round += 1;
        self.queue.clear();
        self.stamp[from] = self.round;
        self.queue.push_back(from);
        while let Some(x) = self.queue.pop_front() {
            for &w in &adj[x] {
                if w == to {
                    return true;
                }
                if self.stamp[w] != self.round {
                    self.stamp[w] = self.round;
                    self.queue.push_back(w);
                }
            }
        }
        false
    }
}
