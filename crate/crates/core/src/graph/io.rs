use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use log::warn;

use super::{AttributeMatrix, AttributedGraph, NodeLabelSet};
use crate::error::{Error, Result};

/// Bookkeeping from a load: what was read and what was dropped.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadReport {
    /// Edge (or citation) lines read, before any dedup.
    pub raw_edge_lines: usize,
    pub self_loops_dropped: usize,
    /// Lines that repeated an edge already seen in either direction.
    pub duplicate_edges: usize,
    /// Citations naming an id absent from the content file.
    pub unknown_ids_dropped: usize,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Non-blank, non-comment lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Sort keys numerically when every key is an integer, else lexicographically.
fn natural_order(mut keys: Vec<String>) -> Vec<String> {
    if keys.iter().all(|k| k.parse::<i64>().is_ok()) {
        keys.sort_by_key(|k| k.parse::<i64>().unwrap());
    } else {
        keys.sort();
    }
    keys.dedup();
    keys
}

fn parse_attr_rows(path: &Path) -> Result<AttributeMatrix> {
    let text = read(path)?;
    let mut matrix: Option<AttributeMatrix> = None;
    for (row, (line_no, line)) in content_lines(&text).enumerate() {
        let values = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| Error::parse(path, line_no, format!("bad attribute value {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let m = matrix.get_or_insert_with(|| AttributeMatrix::with_cols(values.len()));
        if values.len() != m.n_cols() {
            return Err(Error::RowLengthMismatch {
                row,
                expected: m.n_cols(),
                found: values.len(),
            });
        }
        m.push_row(values.into_iter().enumerate())
            .map_err(|e| Error::parse(path, line_no, e.to_string()))?;
    }
    matrix.ok_or_else(|| Error::Empty(format!("attribute file {}", path.display())))
}

/// Collapse a raw pair list into unique undirected edges, counting
/// self-loops and duplicates.
fn dedup_edges(raw: Vec<(usize, usize)>, report: &mut LoadReport) -> Vec<(usize, usize)> {
    let mut seen = std::collections::BTreeSet::new();
    for (u, v) in raw {
        if u == v {
            report.self_loops_dropped += 1;
            continue;
        }
        if !seen.insert((u.min(v), u.max(v))) {
            report.duplicate_edges += 1;
        }
    }
    if report.self_loops_dropped > 0 {
        warn!("dropped {} self-loop line(s)", report.self_loops_dropped);
    }
    seen.into_iter().collect()
}

/// Load an edge list (`u v` per line), an attribute matrix (one row per
/// node; the row count defines `n`) and an optional `node class` label file.
pub fn load_edge_list(
    edge_path: impl AsRef<Path>,
    attr_path: impl AsRef<Path>,
    label_path: Option<&Path>,
) -> Result<(AttributedGraph, LoadReport)> {
    let edge_path = edge_path.as_ref();
    let attributes = parse_attr_rows(attr_path.as_ref())?;
    let n = attributes.n_rows();

    let mut report = LoadReport::default();
    let text = read(edge_path)?;
    let mut raw = Vec::new();
    for (line_no, line) in content_lines(&text) {
        let mut it = line.split_whitespace();
        let (Some(a), Some(b)) = (it.next(), it.next()) else {
            return Err(Error::parse(edge_path, line_no, "expected two node ids"));
        };
        let parse = |t: &str| {
            t.parse::<usize>()
                .map_err(|_| Error::parse(edge_path, line_no, format!("bad node id {t:?}")))
        };
        let (u, v) = (parse(a)?, parse(b)?);
        for id in [u, v] {
            if id >= n {
                return Err(Error::NodeOutOfRange { id, n });
            }
        }
        raw.push((u, v));
    }
    report.raw_edge_lines = raw.len();
    let edges = dedup_edges(raw, &mut report);

    let labels = match label_path {
        Some(p) => Some(load_labels(p, n)?),
        None => None,
    };
    let graph = AttributedGraph::new(n, edges, attributes, labels)?;
    Ok((graph, report))
}

fn load_labels(path: &Path, n: usize) -> Result<NodeLabelSet> {
    let text = read(path)?;
    let mut pairs = Vec::new();
    for (line_no, line) in content_lines(&text) {
        let mut it = line.split_whitespace();
        let (Some(node), Some(class)) = (it.next(), it.next()) else {
            return Err(Error::parse(path, line_no, "expected `node class`"));
        };
        let node = node
            .parse::<usize>()
            .map_err(|_| Error::parse(path, line_no, format!("bad node id {node:?}")))?;
        if node >= n {
            return Err(Error::NodeOutOfRange { id: node, n });
        }
        pairs.push((node, class.to_string()));
    }
    let names = natural_order(pairs.iter().map(|(_, c)| c.clone()).collect());
    let index: HashMap<&str, usize> = names
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let mut assignment = vec![None; n];
    for (node, class) in &pairs {
        assignment[*node] = Some(index[class.as_str()]);
    }
    NodeLabelSet::new(assignment, names)
}

/// Load the public Cora/Citeseer layout: `.content` lines are
/// `id attr_1 … attr_m label`, `.cites` lines are `cited citing`.
///
/// Ids are remapped to `0..n` in sorted order (numeric when all ids are
/// integers), labels to `0..L` in sorted order. Citations naming an
/// unknown id are dropped and counted.
pub fn load_cora_format(
    content_path: impl AsRef<Path>,
    cites_path: impl AsRef<Path>,
) -> Result<(AttributedGraph, LoadReport)> {
    let content_path = content_path.as_ref();
    let cites_path = cites_path.as_ref();
    let text = read(content_path)?;

    let mut rows: BTreeMap<String, (Vec<f64>, String)> = BTreeMap::new();
    let mut width = None;
    for (line_no, line) in content_lines(&text) {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() < 3 {
            return Err(Error::parse(
                content_path,
                line_no,
                "expected `id attributes… label`",
            ));
        }
        let m = tokens.len() - 2;
        let expected = *width.get_or_insert(m);
        if m != expected {
            return Err(Error::RowLengthMismatch {
                row: rows.len(),
                expected,
                found: m,
            });
        }
        let values = tokens[1..=m]
            .iter()
            .map(|t| {
                t.parse::<f64>().map_err(|_| {
                    Error::parse(content_path, line_no, format!("bad attribute value {t:?}"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let id = tokens[0].to_string();
        if rows
            .insert(id.clone(), (values, tokens[m + 1].to_string()))
            .is_some()
        {
            return Err(Error::parse(
                content_path,
                line_no,
                format!("duplicate node id {id:?}"),
            ));
        }
    }
    if rows.is_empty() {
        return Err(Error::Empty(format!(
            "content file {}",
            content_path.display()
        )));
    }

    let ids = natural_order(rows.keys().cloned().collect());
    let dense: HashMap<&str, usize> = ids
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let class_names = natural_order(rows.values().map(|(_, c)| c.clone()).collect());
    let class_index: HashMap<&str, usize> = class_names
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();

    let mut attributes = AttributeMatrix::with_cols(width.unwrap_or(0));
    let mut assignment = Vec::with_capacity(ids.len());
    for id in &ids {
        let (values, class) = &rows[id];
        attributes.push_row(values.iter().copied().enumerate())?;
        assignment.push(Some(class_index[class.as_str()]));
    }

    let mut report = LoadReport::default();
    let cites = read(cites_path)?;
    let mut raw = Vec::new();
    for (line_no, line) in content_lines(&cites) {
        let mut it = line.split_whitespace();
        let (Some(a), Some(b)) = (it.next(), it.next()) else {
            return Err(Error::parse(cites_path, line_no, "expected `cited citing`"));
        };
        report.raw_edge_lines += 1;
        match (dense.get(a), dense.get(b)) {
            (Some(&u), Some(&v)) => raw.push((u, v)),
            _ => report.unknown_ids_dropped += 1,
        }
    }
    if report.unknown_ids_dropped > 0 {
        warn!(
            "dropped {} citation(s) naming unknown ids",
            report.unknown_ids_dropped
        );
    }
    let edges = dedup_edges(raw, &mut report);
    let labels = NodeLabelSet::new(assignment, class_names)?;
    let graph = AttributedGraph::new(ids.len(), edges, attributes, Some(labels))?.with_ids(ids)?;
    Ok((graph, report))
}

/// Write a graph in the edge-list layout read by [`load_edge_list`].
/// The label file is written only when the graph has labels.
pub fn export_edge_list(
    graph: &AttributedGraph,
    edge_path: impl AsRef<Path>,
    attr_path: impl AsRef<Path>,
    label_path: Option<&Path>,
) -> Result<()> {
    let edge_path = edge_path.as_ref();
    write_lines(edge_path, |w| {
        for &(u, v) in graph.edges() {
            writeln!(w, "{u} {v}")?;
        }
        Ok(())
    })?;
    let attr_path = attr_path.as_ref();
    write_lines(attr_path, |w| {
        let attrs = graph.attributes();
        for i in 0..attrs.n_rows() {
            let row = attrs.dense_row(i);
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        Ok(())
    })?;
    if let (Some(path), Some(labels)) = (label_path, graph.labels()) {
        write_lines(path, |w| {
            for (v, c) in labels.labeled() {
                writeln!(w, "{v} {}", labels.class_names()[c])?;
            }
            Ok(())
        })?;
    }
    Ok(())
}

pub(crate) fn write_lines(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<fs::File>) -> std::io::Result<()>,
) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;
    use tempfile::TempDir;

    fn write(dir: &TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn reversed_pair_is_one_edge() {
        let dir = TempDir::new().unwrap();
        let e = write(&dir, "e", "0 1\n1 0\n");
        let a = write(&dir, "a", "1 0\n0 1\n");
        let (g, report) = load_edge_list(&e, &a, None).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(report.duplicate_edges, 1);
    }

    #[test]
    fn self_loop_dropped_with_count() {
        let dir = TempDir::new().unwrap();
        let e = write(&dir, "e", "0 0\n");
        let a = write(&dir, "a", "1\n1\n");
        let (g, report) = load_edge_list(&e, &a, None).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert_eq!(report.self_loops_dropped, 1);
    }

    #[test]
    fn ragged_attribute_file_errors() {
        let dir = TempDir::new().unwrap();
        let e = write(&dir, "e", "0 1\n");
        let a = write(&dir, "a", "1 0 1\n1 0 1 1\n");
        assert!(matches!(
            load_edge_list(&e, &a, None),
            Err(Error::RowLengthMismatch { .. })
        ));
    }

    #[test]
    fn out_of_range_node_errors() {
        let dir = TempDir::new().unwrap();
        let e = write(&dir, "e", "0 5\n");
        let a = write(&dir, "a", "1\n1\n");
        assert!(matches!(
            load_edge_list(&e, &a, None),
            Err(Error::NodeOutOfRange { id: 5, n: 2 })
        ));
    }

    #[test]
    fn missing_file_names_path() {
        let dir = TempDir::new().unwrap();
        let a = write(&dir, "a", "1\n");
        let err = load_edge_list(dir.path().join("nope.txt"), &a, None).unwrap_err();
        assert!(err.to_string().contains("nope.txt"));
    }

    #[test]
    fn labels_map_to_sorted_classes() {
        let dir = TempDir::new().unwrap();
        let e = write(&dir, "e", "0 1\n");
        let a = write(&dir, "a", "1\n1\n1\n");
        let l = write(&dir, "l", "0 beta\n2 alpha\n");
        let (g, _) = load_edge_list(&e, &a, Some(&l)).unwrap();
        let labels = g.labels().unwrap();
        assert_eq!(labels.class_names(), &["alpha", "beta"]);
        assert_eq!(labels.assignment(), &[Some(1), None, Some(0)]);
    }

    #[test]
    fn cora_layout_parses() {
        let dir = TempDir::new().unwrap();
        let c = write(
            &dir,
            "c",
            "35 0 1 0 Theory\n7 1 0 0 AI\n1033 1 1 0 Theory\n",
        );
        let k = write(&dir, "k", "35 7\n1033 35\n");
        let (g, report) = load_cora_format(&c, &k).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 2);
        // ids sorted numerically: 7, 35, 1033
        assert_eq!(g.ids(), &["7", "35", "1033"]);
        assert!(g.has_edge(0, 1) && g.has_edge(1, 2));
        assert_eq!(g.labels().unwrap().assignment(), &[Some(0), Some(1), Some(1)]);
        assert_eq!(report.raw_edge_lines, 2);
    }

    #[test]
    fn cora_unknown_cite_dropped() {
        let dir = TempDir::new().unwrap();
        let c = write(&dir, "c", "a 1 x\nb 1 y\n");
        let k = write(&dir, "k", "X b\na b\n");
        let (g, report) = load_cora_format(&c, &k).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(report.unknown_ids_dropped, 1);
    }

    #[test]
    fn cora_empty_content_errors() {
        let dir = TempDir::new().unwrap();
        let c = write(&dir, "c", "\n");
        let k = write(&dir, "k", "");
        assert!(matches!(load_cora_format(&c, &k), Err(Error::Empty(_))));
    }
}
