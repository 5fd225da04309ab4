use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{AttributeMatrix, AttributedGraph, NodeLabelSet};
use crate::error::{Error, Result};

/// Parameters of a planted-partition graph with block-patterned attributes.
#[derive(Debug, Clone, PartialEq)]
pub struct SbmParams {
    pub n_per_block: usize,
    pub n_blocks: usize,
    pub p_in: f64,
    pub p_out: f64,
    pub attr_dim: usize,
    pub attr_noise: f64,
    pub seed: u64,
}

impl Default for SbmParams {
    fn default() -> Self {
        SbmParams {
            n_per_block: 30,
            n_blocks: 2,
            p_in: 0.3,
            p_out: 0.02,
            attr_dim: 20,
            attr_noise: 0.1,
            seed: 0,
        }
    }
}

/// The noiseless attribute pattern of `block`: ones on its contiguous
/// share of the `attr_dim` columns.
pub(crate) fn block_pattern(block: usize, n_blocks: usize, attr_dim: usize) -> Vec<f64> {
    let lo = block * attr_dim / n_blocks;
    let hi = (block + 1) * attr_dim / n_blocks;
    (0..attr_dim)
        .map(|c| if (lo..hi).contains(&c) { 1.0 } else { 0.0 })
        .collect()
}

/// Draw one attribute row for `block`, flipping each bit with probability `noise`.
pub fn sample_block_attributes(
    block: usize,
    n_blocks: usize,
    attr_dim: usize,
    noise: f64,
    rng: &mut impl Rng,
) -> Vec<f64> {
    block_pattern(block, n_blocks, attr_dim)
        .into_iter()
        .map(|bit| {
            if rng.random_bool(noise) {
                1.0 - bit
            } else {
                bit
            }
        })
        .collect()
}

/// Generate a stochastic block model graph: nodes `b·n_per_block..` form
/// block `b`, each within-block pair is an edge with probability `p_in`
/// and each cross-block pair with `p_out`. Labels are block ids.
pub fn generate_sbm_attributed(params: &SbmParams) -> Result<AttributedGraph> {
    let SbmParams {
        n_per_block,
        n_blocks,
        p_in,
        p_out,
        attr_dim,
        attr_noise,
        seed,
    } = *params;
    let n = n_per_block * n_blocks;
    if n == 0 {
        return Err(Error::InvalidParameter(
            "block model needs at least one node".into(),
        ));
    }
    for (name, p) in [("p_in", p_in), ("p_out", p_out), ("attr_noise", attr_noise)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "{name} = {p} is not a probability"
            )));
        }
    }
    if attr_dim < n_blocks {
        return Err(Error::InvalidParameter(format!(
            "attr_dim {attr_dim} must be at least the block count {n_blocks}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let block = |v: usize| v / n_per_block;
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = if block(u) == block(v) { p_in } else { p_out };
            if rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|v| sample_block_attributes(block(v), n_blocks, attr_dim, attr_noise, &mut rng))
        .collect();
    let attributes = AttributeMatrix::from_dense_rows(&rows)?;
    let labels: Vec<usize> = (0..n).map(block).collect();
    AttributedGraph::new(n, edges, attributes, Some(NodeLabelSet::from_ids(&labels)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forced_topology_gives_two_triangles() {
        let g = generate_sbm_attributed(&SbmParams {
            n_per_block: 3,
            n_blocks: 2,
            p_in: 1.0,
            p_out: 0.0,
            attr_dim: 4,
            attr_noise: 0.0,
            seed: 3,
        })
        .unwrap();
        assert_eq!(g.edges(), &[(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)]);
        assert_eq!(g.component_count(), 2);
    }

    #[test]
    fn noiseless_attributes_match_within_block() {
        let g = generate_sbm_attributed(&SbmParams {
            attr_noise: 0.0,
            ..SbmParams::default()
        })
        .unwrap();
        let a = g.attributes();
        for v in 0..30 {
            assert_eq!(a.dense_row(v), a.dense_row(0));
            assert_eq!(a.dense_row(30 + v), a.dense_row(30));
        }
        assert_ne!(a.dense_row(0), a.dense_row(30));
    }

    #[test]
    fn same_seed_same_graph() {
        let p = SbmParams::default();
        assert_eq!(
            generate_sbm_attributed(&p).unwrap(),
            generate_sbm_attributed(&p).unwrap()
        );
        let other = generate_sbm_attributed(&SbmParams { seed: 1, ..p }).unwrap();
        assert_ne!(generate_sbm_attributed(&SbmParams::default()).unwrap(), other);
    }

    #[test]
    fn empty_model_errors() {
        let p = SbmParams {
            n_per_block: 0,
            ..SbmParams::default()
        };
        assert!(generate_sbm_attributed(&p).is_err());
    }
}
