//! Attributed, undirected, unweighted graphs.

mod io;
mod sbm;

pub(crate) use io::write_lines;
pub use io::{export_edge_list, load_cora_format, load_edge_list, LoadReport};
pub use sbm::{generate_sbm_attributed, sample_block_attributes, SbmParams};

use std::collections::BTreeSet;

use ndarray::Array2;

use crate::error::{Error, Result};

/// Node attributes stored as compressed sparse rows of non-negative values.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeMatrix {
    n_cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl AttributeMatrix {
    /// Build from dense rows. All rows must share one length; zeros are not stored.
    pub fn from_dense_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut out = AttributeMatrix {
            n_cols,
            indptr: vec![0],
            indices: Vec::new(),
            values: Vec::new(),
        };
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_cols {
                return Err(Error::RowLengthMismatch {
                    row: i,
                    expected: n_cols,
                    found: row.len(),
                });
            }
            out.push_row(row.iter().copied().enumerate())?;
        }
        Ok(out)
    }

    /// Empty matrix with `n_cols` columns, to be filled with [`push_row`](Self::push_row).
    pub fn with_cols(n_cols: usize) -> Self {
        AttributeMatrix {
            n_cols,
            indptr: vec![0],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Append a row given as `(column, value)` pairs in increasing column order.
    pub fn push_row(&mut self, entries: impl IntoIterator<Item = (usize, f64)>) -> Result<()> {
        let row = self.n_rows();
        let mut last = None;
        for (col, value) in entries {
            if col >= self.n_cols {
                return Err(Error::Dimension(format!(
                    "attribute column {col} in row {row} exceeds width {}",
                    self.n_cols
                )));
            }
            if last.is_some_and(|l| l >= col) {
                return Err(Error::InvalidParameter(format!(
                    "attribute columns in row {row} not strictly increasing"
                )));
            }
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "attribute value {value} in row {row} must be finite and non-negative"
                )));
            }
            last = Some(col);
            if value != 0.0 {
                self.indices.push(col);
                self.values.push(value);
            }
        }
        self.indptr.push(self.indices.len());
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.indptr.len() - 1
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Non-zero entries of row `i` as `(column indices, values)`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.indptr[i], self.indptr[i + 1]);
        (&self.indices[lo..hi], &self.values[lo..hi])
    }

    pub fn dense_row(&self, i: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.n_cols];
        let (idx, val) = self.row(i);
        for (&c, &v) in idx.iter().zip(val) {
            out[c] = v;
        }
        out
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut out = Array2::zeros((self.n_rows(), self.n_cols));
        for i in 0..self.n_rows() {
            let (idx, val) = self.row(i);
            for (&c, &v) in idx.iter().zip(val) {
                out[[i, c]] = v;
            }
        }
        out
    }

    /// Euclidean norm of row `i`.
    pub fn row_norm(&self, i: usize) -> f64 {
        self.row(i).1.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Multiply every stored value by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= c);
        out
    }
}

/// An undirected, unweighted graph with one attribute row per node and
/// optional class labels.
///
/// Invariants enforced at construction: edges are stored once as `(u, v)`
/// with `u < v`, there are no self-loops, every endpoint is `< n`, and the
/// attribute matrix has exactly `n` rows.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributedGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
    attributes: AttributeMatrix,
    labels: Option<NodeLabelSet>,
    ids: Vec<String>,
}

/// Class assignments for (a subset of) nodes, with dense class ids `0..L`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeLabelSet {
    assignment: Vec<Option<usize>>,
    class_names: Vec<String>,
}

impl NodeLabelSet {
    /// `assignment[v]` is the class of node `v`, if labeled.
    pub fn new(assignment: Vec<Option<usize>>, class_names: Vec<String>) -> Result<Self> {
        if let Some(c) = assignment.iter().flatten().find(|&&c| c >= class_names.len()) {
            return Err(Error::InvalidParameter(format!(
                "class id {c} out of range for {} classes",
                class_names.len()
            )));
        }
        Ok(NodeLabelSet {
            assignment,
            class_names,
        })
    }

    /// Labels given as class ids `0..n_classes` for every node.
    pub fn from_ids(ids: &[usize]) -> Self {
        let n_classes = ids.iter().max().map_or(0, |m| m + 1);
        NodeLabelSet {
            assignment: ids.iter().map(|&c| Some(c)).collect(),
            class_names: (0..n_classes).map(|c| c.to_string()).collect(),
        }
    }

    pub fn get(&self, v: usize) -> Option<usize> {
        self.assignment.get(v).copied().flatten()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn assignment(&self) -> &[Option<usize>] {
        &self.assignment
    }

    /// `(node, class)` for every labeled node, in node order.
    pub fn labeled(&self) -> Vec<(usize, usize)> {
        self.assignment
            .iter()
            .enumerate()
            .filter_map(|(v, c)| c.map(|c| (v, c)))
            .collect()
    }
}

impl AttributedGraph {
    /// Build a graph, normalizing the edge set (reversed and duplicate pairs
    /// collapse). Self-loops are rejected; loaders drop them before calling this.
    pub fn new(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        attributes: AttributeMatrix,
        labels: Option<NodeLabelSet>,
    ) -> Result<Self> {
        if attributes.n_rows() != n {
            return Err(Error::Dimension(format!(
                "attribute matrix has {} rows for {n} nodes",
                attributes.n_rows()
            )));
        }
        if let Some(l) = &labels {
            if l.assignment.len() != n {
                return Err(Error::Dimension(format!(
                    "label assignment covers {} nodes, graph has {n}",
                    l.assignment.len()
                )));
            }
        }
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            for id in [u, v] {
                if id >= n {
                    return Err(Error::NodeOutOfRange { id, n });
                }
            }
            if u == v {
                return Err(Error::InvalidParameter(format!("self-loop on node {u}")));
            }
            set.insert((u.min(v), u.max(v)));
        }
        let edges: Vec<_> = set.into_iter().collect();
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        adjacency.iter_mut().for_each(|a| a.sort_unstable());
        Ok(AttributedGraph {
            n,
            edges,
            adjacency,
            attributes,
            labels,
            ids: (0..n).map(|i| i.to_string()).collect(),
        })
    }

    /// Replace the original-id side map used on export.
    pub fn with_ids(mut self, ids: Vec<String>) -> Result<Self> {
        if ids.len() != self.n {
            return Err(Error::Dimension(format!(
                "{} ids for {} nodes",
                ids.len(),
                self.n
            )));
        }
        self.ids = ids;
        Ok(self)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    pub fn attributes(&self) -> &AttributeMatrix {
        &self.attributes
    }

    pub fn labels(&self) -> Option<&NodeLabelSet> {
        self.labels.as_ref()
    }

    /// Original node ids, indexed by dense id.
    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    /// Same nodes, attributes and labels with a different edge set.
    pub fn with_edges(&self, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let g = AttributedGraph::new(
            self.n,
            edges,
            self.attributes.clone(),
            self.labels.clone(),
        )?;
        Ok(AttributedGraph {
            ids: self.ids.clone(),
            ..g
        })
    }

    /// Component id for every node (components numbered by smallest member).
    pub fn components(&self) -> Vec<usize> {
        let mut comp = vec![usize::MAX; self.n];
        let mut next = 0;
        let mut stack = Vec::new();
        for s in 0..self.n {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = next;
            stack.push(s);
            while let Some(u) = stack.pop() {
                for &w in &self.adjacency[u] {
                    if comp[w] == usize::MAX {
                        comp[w] = next;
                        stack.push(w);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    pub fn component_count(&self) -> usize {
        self.components().into_iter().max().map_or(0, |m| m + 1)
    }

    /// Dense symmetric 0/1 adjacency matrix.
    pub fn adjacency_matrix(&self) -> Array2<f64> {
        let mut a = Array2::zeros((self.n, self.n));
        for &(u, v) in &self.edges {
            a[[u, v]] = 1.0;
            a[[v, u]] = 1.0;
        }
        a
    }
}
