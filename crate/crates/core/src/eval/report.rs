use std::fmt;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Metrics of one evaluation task.
#[derive(Debug, Clone, PartialEq)]
pub enum TaskMetrics {
    LinkPrediction {
        auc: f64,
        held_out: usize,
        shortfall: usize,
    },
    NodeClassification {
        micro_f1_mean: f64,
        macro_f1_mean: f64,
        /// One value per repeat.
        micro_f1: Vec<f64>,
        macro_f1: Vec<f64>,
    },
}

/// Outcome of an evaluation run together with the settings that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub metrics: TaskMetrics,
    pub seed: u64,
    pub config: Vec<(String, String)>,
}

fn join(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

impl EvalReport {
    pub fn task(&self) -> &'static str {
        match self.metrics {
            TaskMetrics::LinkPrediction { .. } => "link_prediction",
            TaskMetrics::NodeClassification { .. } => "node_classification",
        }
    }

    /// The headline number: AUC or mean micro-F1.
    pub fn score(&self) -> f64 {
        match self.metrics {
            TaskMetrics::LinkPrediction { auc, .. } => auc,
            TaskMetrics::NodeClassification { micro_f1_mean, .. } => micro_f1_mean,
        }
    }

    /// Flat `key=value` lines; config entries are prefixed with `config.`.
    pub fn to_key_values(&self) -> String {
        let mut lines = vec![format!("task={}", self.task()), format!("seed={}", self.seed)];
        match &self.metrics {
            TaskMetrics::LinkPrediction {
                auc,
                held_out,
                shortfall,
            } => {
                lines.push(format!("auc={auc}"));
                lines.push(format!("held_out={held_out}"));
                lines.push(format!("shortfall={shortfall}"));
            }
            TaskMetrics::NodeClassification {
                micro_f1_mean,
                macro_f1_mean,
                micro_f1,
                macro_f1,
            } => {
                lines.push(format!("repeats={}", micro_f1.len()));
                lines.push(format!("micro_f1_mean={micro_f1_mean}"));
                lines.push(format!("macro_f1_mean={macro_f1_mean}"));
                lines.push(format!("micro_f1_runs={}", join(micro_f1)));
                lines.push(format!("macro_f1_runs={}", join(macro_f1)));
            }
        }
        lines.extend(self.config.iter().map(|(k, v)| format!("config.{k}={v}")));
        let mut out = lines.join("\n");
        out.push('\n');
        out
    }

    /// Append the key=value block, followed by a blank separator line.
    pub fn append_to(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        writeln!(file, "{}", self.to_key_values()).map_err(|e| Error::io(path, e))
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<16} {}", "task", self.task())?;
        writeln!(f, "{:<16} {}", "seed", self.seed)?;
        match &self.metrics {
            TaskMetrics::LinkPrediction {
                auc,
                held_out,
                shortfall,
            } => {
                writeln!(f, "{:<16} {auc:.4}", "AUC")?;
                writeln!(f, "{:<16} {held_out}", "held-out edges")?;
                if *shortfall > 0 {
                    writeln!(f, "{:<16} {shortfall}", "shortfall")?;
                }
            }
            TaskMetrics::NodeClassification {
                micro_f1_mean,
                macro_f1_mean,
                micro_f1,
                ..
            } => {
                writeln!(f, "{:<16} {}", "repeats", micro_f1.len())?;
                writeln!(f, "{:<16} {micro_f1_mean:.4}", "Micro-F1")?;
                writeln!(f, "{:<16} {macro_f1_mean:.4}", "Macro-F1")?;
            }
        }
        Ok(())
    }
}
