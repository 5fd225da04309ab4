use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::{Array1, Array2};

use super::params::{Dense, ModelParams};
use crate::error::{Error, Result};
use crate::graph::write_lines;

/// Learned node embeddings, one row per node.
#[derive(Debug, Clone, PartialEq)]
pub struct Embeddings(pub Array2<f64>);

impl Embeddings {
    pub fn matrix(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn dim(&self) -> usize {
        self.0.ncols()
    }
}

/// Write `n d`, then `id v1 … vd` per node. Values use the shortest
/// representation that parses back to the same f64.
pub fn export_embeddings(y: &Embeddings, ids: &[String], path: impl AsRef<Path>) -> Result<()> {
    if ids.len() != y.n() {
        return Err(Error::Dimension(format!(
            "{} ids for {} embeddings",
            ids.len(),
            y.n()
        )));
    }
    write_lines(path.as_ref(), |w| {
        writeln!(w, "{} {}", y.n(), y.dim())?;
        for (id, row) in ids.iter().zip(y.0.outer_iter()) {
            write!(w, "{id}")?;
            for v in row {
                write!(w, " {v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    })
}

/// Read a file written by [`export_embeddings`].
pub fn load_embeddings(path: impl AsRef<Path>) -> Result<(Vec<String>, Embeddings)> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "missing header"))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::parse(path, 1, "bad header")))
        .collect::<Result<_>>()?;
    let [n, d] = dims[..] else {
        return Err(Error::parse(path, 1, "header must be `n d`"));
    };
    let mut ids = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n * d);
    for (i, line) in lines.take(n) {
        let mut tokens = line.split_whitespace();
        ids.push(
            tokens
                .next()
                .ok_or_else(|| Error::parse(path, i + 1, "empty line"))?
                .to_string(),
        );
        let row: Vec<f64> = tokens
            .map(|t| t.parse().map_err(|_| Error::parse(path, i + 1, "bad value")))
            .collect::<Result<_>>()?;
        if row.len() != d {
            return Err(Error::RowLengthMismatch {
                row: ids.len() - 1,
                expected: d,
                found: row.len(),
            });
        }
        values.extend(row);
    }
    if ids.len() != n {
        return Err(Error::parse(path, ids.len() + 1, "fewer rows than header says"));
    }
    let y = Array2::from_shape_vec((n, d), values).expect("shape checked");
    Ok((ids, Embeddings(y)))
}

const CHECKPOINT_MAGIC: &str = "danrl-checkpoint 1";

fn write_matrix(w: &mut impl Write, name: &str, m: &Array2<f64>) -> std::io::Result<()> {
    writeln!(w, "{name} {} {}", m.nrows(), m.ncols())?;
    for row in m.outer_iter() {
        let line: Vec<String> = row.iter().map(f64::to_string).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok(())
}

/// Save every parameter matrix: a `name rows cols` header line followed by
/// the rows, in row-major order. Biases are stored as `1 × out` matrices.
pub fn save_checkpoint(params: &ModelParams, path: impl AsRef<Path>) -> Result<()> {
    write_lines(path.as_ref(), |w| {
        writeln!(w, "{CHECKPOINT_MAGIC}")?;
        writeln!(w, "layers {}", params.encoder.len())?;
        for (prefix, layers) in [("encoder", &params.encoder), ("decoder", &params.decoder)] {
            for (k, l) in layers.iter().enumerate() {
                write_matrix(w, &format!("{prefix}.{k}.weight"), &l.weight)?;
                let bias = l.bias.clone().insert_axis(ndarray::Axis(0));
                write_matrix(w, &format!("{prefix}.{k}.bias"), &bias)?;
            }
        }
        write_matrix(w, "context", &params.context)
    })
}

/// Load a checkpoint written by [`save_checkpoint`].
pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<ModelParams> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next = |what: &str| {
        lines
            .next()
            .ok_or_else(|| Error::parse(path, 0, format!("unexpected end of file, wanted {what}")))
    };
    let (no, magic) = next("header")?;
    if magic.trim() != CHECKPOINT_MAGIC {
        return Err(Error::parse(path, no, "not a checkpoint file"));
    }
    let (no, layers) = next("layer count")?;
    let layers: usize = layers
        .strip_prefix("layers ")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| Error::parse(path, no, "expected `layers K`"))?;

    let mut read_matrix = |expected: &str| -> Result<Array2<f64>> {
        let (no, header) = next(expected)?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        let [name, rows, cols] = parts[..] else {
            return Err(Error::parse(path, no, "expected `name rows cols`"));
        };
        if name != expected {
            return Err(Error::parse(path, no, format!("expected {expected}, found {name}")));
        }
        let parse = |t: &str| t.parse::<usize>().map_err(|_| Error::parse(path, no, "bad shape"));
        let (rows, cols) = (parse(rows)?, parse(cols)?);
        let mut values = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let (no, line) = next(expected)?;
            let row: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| Error::parse(path, no, "bad value")))
                .collect::<Result<_>>()?;
            if row.len() != cols {
                return Err(Error::parse(path, no, "row length does not match header"));
            }
            values.extend(row);
        }
        Ok(Array2::from_shape_vec((rows, cols), values).expect("shape checked"))
    };

    let stack = |prefix: &str, read: &mut dyn FnMut(&str) -> Result<Array2<f64>>| -> Result<Vec<Dense>> {
        (0..layers)
            .map(|k| {
                let weight = read(&format!("{prefix}.{k}.weight"))?;
                let bias: Array1<f64> = read(&format!("{prefix}.{k}.bias"))?.row(0).to_owned();
                Ok(Dense { weight, bias })
            })
            .collect()
    };
    let encoder = stack("encoder", &mut read_matrix)?;
    let decoder = stack("decoder", &mut read_matrix)?;
    let context = read_matrix("context")?;
    let params = ModelParams {
        encoder,
        decoder,
        context,
    };
    params.validate()?;
    Ok(params)
}
