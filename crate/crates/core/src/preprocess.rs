//! Attribute similarity and the reconstructed adjacency fed to the encoder.
//!
//! `R = eta·A + psi·S`, where `S` is the cosine similarity of attribute
//! rows with a zero diagonal. Reconstruction errors on non-zero entries of
//! `R` are weighted by `chi` during training (see [`ReconstructedAdjacency::penalty_rows`]).

use std::fs;
use std::io::Read;
use std::path::Path;

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::graph::{AttributeMatrix, AttributedGraph};
use crate::par;

/// Dot product of two sparse rows by merging their sorted column lists.
///
/// Products are accumulated in increasing column order, so
/// `sparse_dot(a, b) == sparse_dot(b, a)` exactly.
fn sparse_dot(a: (&[usize], &[f64]), b: (&[usize], &[f64])) -> f64 {
    let (ia, va) = a;
    let (ib, vb) = b;
    let (mut p, mut q, mut acc) = (0, 0, 0.0);
    while p < ia.len() && q < ib.len() {
        match ia[p].cmp(&ib[q]) {
            std::cmp::Ordering::Less => p += 1,
            std::cmp::Ordering::Greater => q += 1,
            std::cmp::Ordering::Equal => {
                acc += va[p] * vb[q];
                p += 1;
                q += 1;
            }
        }
    }
    acc
}

fn squared_norms(x: &AttributeMatrix) -> Vec<f64> {
    (0..x.n_rows())
        .map(|i| x.row(i).1.iter().map(|v| v * v).sum())
        .collect()
}

/// `norms` holds squared row norms, so identical rows give exactly 1.
fn similarity_row(x: &AttributeMatrix, norms: &[f64], i: usize) -> Vec<f64> {
    let n = x.n_rows();
    let mut row = vec![0.0; n];
    if norms[i] == 0.0 {
        return row;
    }
    for (j, out) in row.iter_mut().enumerate() {
        if j == i || norms[j] == 0.0 {
            continue;
        }
        *out = (sparse_dot(x.row(i), x.row(j)) / (norms[i] * norms[j]).sqrt()).min(1.0);
    }
    row
}

fn assemble(rows: Vec<Vec<f64>>) -> Array2<f64> {
    let n = rows.len();
    Array2::from_shape_vec((n, n), rows.into_iter().flatten().collect())
        .expect("square similarity matrix")
}

/// Cosine similarity between attribute rows, with a zero diagonal.
/// Rows with zero norm have similarity 0 to every node.
pub fn attribute_similarity(x: &AttributeMatrix) -> Array2<f64> {
    let norms = squared_norms(x);
    assemble(par::map_range(x.n_rows(), |i| similarity_row(x, &norms, i)))
}

/// Single-threaded [`attribute_similarity`].
pub fn attribute_similarity_seq(x: &AttributeMatrix) -> Array2<f64> {
    let norms = squared_norms(x);
    assemble(par::map_range_seq(x.n_rows(), |i| {
        similarity_row(x, &norms, i)
    }))
}

/// Keep the `top_k` largest entries of each row, zero the rest, then
/// restore symmetry with an elementwise max against the transpose.
/// Ties at the cut-off are broken by lower column index.
pub fn sparsify_similarity(s: ArrayView2<'_, f64>, top_k: usize) -> Array2<f64> {
    let n = s.nrows();
    let kept: Vec<Vec<f64>> = par::map_range(n, |i| {
        let row = s.row(i);
        let mut order: Vec<usize> = (0..row.len()).collect();
        order.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
        let mut out = vec![0.0; row.len()];
        for &j in order.iter().take(top_k) {
            out[j] = row[j];
        }
        out
    });
    let kept = Array2::from_shape_vec((n, s.ncols()), kept.into_iter().flatten().collect())
        .expect("row lengths match");
    let mut out = kept.clone();
    out.zip_mut_with(&kept.t(), |a, &b| *a = a.max(b));
    out
}

/// The encoder input `R = eta·A + psi·S`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructedAdjacency {
    r: Array2<f64>,
    eta: f64,
    psi: f64,
}

/// Elementwise `eta·A + psi·S`.
pub fn reconstructed_adjacency(
    a: ArrayView2<'_, f64>,
    s: ArrayView2<'_, f64>,
    eta: f64,
    psi: f64,
) -> Result<ReconstructedAdjacency> {
    if a.dim() != s.dim() || a.nrows() != a.ncols() {
        return Err(Error::Dimension(format!(
            "adjacency {:?} and similarity {:?} must be equal square shapes",
            a.dim(),
            s.dim()
        )));
    }
    validate_weights(eta, psi)?;
    let mut r = a.to_owned();
    r.zip_mut_with(&s, |x, &y| *x = eta * *x + psi * y);
    Ok(ReconstructedAdjacency { r, eta, psi })
}

fn validate_weights(eta: f64, psi: f64) -> Result<()> {
    if !(eta >= 0.0 && psi >= 0.0) || !eta.is_finite() || !psi.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "eta = {eta} and psi = {psi} must be finite and non-negative"
        )));
    }
    if eta == 0.0 && psi == 0.0 {
        return Err(Error::InvalidParameter(
            "eta and psi cannot both be zero".into(),
        ));
    }
    Ok(())
}

impl ReconstructedAdjacency {
    /// Build `R` for a graph; `top_k` optionally sparsifies the similarity first.
    pub fn from_graph(
        graph: &AttributedGraph,
        eta: f64,
        psi: f64,
        top_k: Option<usize>,
    ) -> Result<Self> {
        validate_weights(eta, psi)?;
        let mut s = attribute_similarity(graph.attributes());
        if let Some(k) = top_k {
            s = sparsify_similarity(s.view(), k);
        }
        reconstructed_adjacency(graph.adjacency_matrix().view(), s.view(), eta, psi)
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.r
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn psi(&self) -> f64 {
        self.psi
    }

    pub fn n(&self) -> usize {
        self.r.nrows()
    }

    /// Full penalty mask: `chi` where `R` is non-zero, 1 elsewhere.
    pub fn penalty_mask(&self, chi: f64) -> Array2<f64> {
        self.r.mapv(|x| if x != 0.0 { chi } else { 1.0 })
    }

    /// Rows of `R` and of the penalty mask for the given nodes.
    pub fn penalty_rows(&self, rows: &[usize], chi: f64) -> (Array2<f64>, Array2<f64>) {
        let r = self.r.select(ndarray::Axis(0), rows);
        let b = r.mapv(|x| if x != 0.0 { chi } else { 1.0 });
        (r, b)
    }

    /// Write `R` as: `n` (u64 LE), float width in bytes (u32 LE, always 8
    /// here), then `n·n` f64 LE values in row-major order.
    pub fn write_cache(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let n = self.n();
        let mut bytes = Vec::with_capacity(12 + 8 * n * n);
        bytes.extend_from_slice(&(n as u64).to_le_bytes());
        bytes.extend_from_slice(&8u32.to_le_bytes());
        for v in self.r.iter() {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }

    /// Read a cache written by [`write_cache`](Self::write_cache); width 4
    /// (f32) payloads are also accepted.
    pub fn read_cache(path: impl AsRef<Path>, eta: f64, psi: f64) -> Result<Self> {
        let path = path.as_ref();
        let mut bytes = Vec::new();
        fs::File::open(path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|e| Error::io(path, e))?;
        let bad = |msg: &str| Error::parse(path, 0, msg.to_string());
        if bytes.len() < 12 {
            return Err(bad("truncated header"));
        }
        let n = u64::from_le_bytes(bytes[0..8].try_into().unwrap()) as usize;
        let width = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        if width != 4 && width != 8 {
            return Err(bad("float width must be 4 or 8"));
        }
        let body = &bytes[12..];
        if body.len() != n * n * width {
            return Err(bad("payload length does not match header"));
        }
        let values: Vec<f64> = body
            .chunks_exact(width)
            .map(|c| match width {
                8 => f64::from_le_bytes(c.try_into().unwrap()),
                _ => f32::from_le_bytes(c.try_into().unwrap()) as f64,
            })
            .collect();
        let r = Array2::from_shape_vec((n, n), values).expect("length checked");
        Ok(ReconstructedAdjacency { r, eta, psi })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    fn matrix(rows: &[Vec<f64>]) -> AttributeMatrix {
        AttributeMatrix::from_dense_rows(rows).unwrap()
    }

    #[test]
    fn cosine_examples() {
        let s = attribute_similarity(&matrix(&[vec![1., 1., 0.], vec![1., 1., 0.]]));
        assert_eq!(s[[0, 1]], 1.0);
        let s = attribute_similarity(&matrix(&[vec![1., 0.], vec![0., 1.]]));
        assert_eq!(s[[0, 1]], 0.0);
        // dot = 1, norms sqrt(2)·sqrt(2) = 2
        let s = attribute_similarity(&matrix(&[vec![1., 1., 0.], vec![1., 0., 1.]]));
        assert!((s[[0, 1]] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn diagonal_is_zero_and_zero_rows_are_zero() {
        let s = attribute_similarity(&matrix(&[vec![1., 2.], vec![0., 0.], vec![3., 1.]]));
        assert!((0..3).all(|i| s[[i, i]] == 0.0));
        assert!(s.row(1).iter().all(|&v| v == 0.0));
        assert!(s.column(1).iter().all(|&v| v == 0.0));
        assert!(s.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn reconstruction_examples() {
        let a = array![[0., 1.], [1., 0.]];
        let s = array![[0., 0.5], [0.5, 0.]];
        assert_eq!(reconstructed_adjacency(a.view(), s.view(), 1., 0.).unwrap().matrix(), &a);
        assert_eq!(reconstructed_adjacency(a.view(), s.view(), 0., 1.).unwrap().matrix(), &s);
        let r = reconstructed_adjacency(a.view(), s.view(), 1., 2.).unwrap();
        assert_eq!(r.matrix(), &array![[0., 2.], [2., 0.]]);
    }

    #[test]
    fn reconstruction_rejects_bad_input() {
        let a = Array2::<f64>::zeros((2, 2));
        let s = Array2::<f64>::zeros((3, 3));
        assert!(matches!(
            reconstructed_adjacency(a.view(), s.view(), 1., 1.),
            Err(Error::Dimension(_))
        ));
        assert!(reconstructed_adjacency(a.view(), a.view(), 0., 0.).is_err());
        assert!(reconstructed_adjacency(a.view(), a.view(), -1., 1.).is_err());
    }

    #[test]
    fn penalty_mask_rule() {
        let a = array![[0., 1.], [1., 0.]];
        let r = reconstructed_adjacency(a.view(), a.view(), 1., 0.).unwrap();
        assert_eq!(r.penalty_mask(3.0), array![[1., 3.], [3., 1.]]);
    }

    #[test]
    fn sparsify_examples() {
        let s = array![[0.0, 0.9, 0.1], [0.9, 0.0, 0.5], [0.1, 0.5, 0.0]];
        assert_eq!(sparsify_similarity(s.view(), 2), s);
        let row = array![[0.9, 0.1, 0.5], [0., 0., 0.], [0., 0., 0.]];
        let out = sparsify_similarity(row.view(), 1);
        assert_eq!(out.row(0).to_vec(), vec![0.9, 0.0, 0.0]);
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::TempDir::new().unwrap();
        let path = dir.path().join("r.bin");
        let a = array![[0., 1.25], [1.25, 0.]];
        let r = reconstructed_adjacency(a.view(), a.view(), 1., 1.).unwrap();
        r.write_cache(&path).unwrap();
        assert_eq!(fs::metadata(&path).unwrap().len(), 12 + 4 * 8);
        assert_eq!(ReconstructedAdjacency::read_cache(&path, 1., 1.).unwrap(), r);
    }

    fn dense_rows() -> impl Strategy<Value = Vec<Vec<f64>>> {
        (1usize..6, 1usize..8).prop_flat_map(|(m, n)| {
            prop::collection::vec(prop::collection::vec(0.0f64..5.0, m), n)
        })
    }

    proptest! {
        #[test]
        fn similarity_symmetric_bounded_scale_invariant(rows in dense_rows(), c in 0.01f64..100.0) {
            let x = matrix(&rows);
            let s = attribute_similarity(&x);
            let sc = attribute_similarity(&x.scaled(c));
            for i in 0..rows.len() {
                for j in 0..rows.len() {
                    prop_assert_eq!(s[[i, j]], s[[j, i]]);
                    prop_assert!((0.0..=1.0 + 1e-12).contains(&s[[i, j]]));
                    prop_assert!((s[[i, j]] - sc[[i, j]]).abs() < 1e-12);
                }
            }
            prop_assert_eq!(s, attribute_similarity_seq(&x));
        }

        #[test]
        fn sparsified_matrix_is_symmetric(values in prop::collection::vec(0.0f64..1.0, 100), k in 1usize..10) {
            let s = Array2::from_shape_vec((10, 10), values).unwrap();
            let out = sparsify_similarity(s.view(), k);
            prop_assert_eq!(&out, &out.t());
        }
    }
}
