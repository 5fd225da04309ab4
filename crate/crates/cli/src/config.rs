//! Flat `key = value` run configuration.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use danrl::eval::ClassifierSettings;
use danrl::graph::{load_cora_format, load_edge_list, AttributedGraph};
use danrl::model::ModelConfig;

/// A mistake in how the program was invoked or configured.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetFormat {
    /// Edge list, dense attribute rows and an optional `node class` label file.
    EdgeList,
    /// `<id> <attrs…> <label>` content file plus `<cited> <citing>` pairs.
    Cora,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    LinkPrediction,
    NodeClassification,
}

/// Everything one invocation needs: model hyperparameters, inputs, task
/// and output locations.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub format: DatasetFormat,
    pub edges: Option<PathBuf>,
    pub attributes: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub content: Option<PathBuf>,
    pub cites: Option<PathBuf>,
    pub task: Task,
    pub embeddings: PathBuf,
    pub train_log: PathBuf,
    pub results: PathBuf,
    pub grid_results: PathBuf,
    pub checkpoint: Option<PathBuf>,
    pub resume: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub r_cache: Option<PathBuf>,
    pub holdout: f64,
    pub train_frac: f64,
    pub repeats: usize,
    pub classifier: ClassifierSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: ModelConfig::default(),
            format: DatasetFormat::EdgeList,
            edges: None,
            attributes: None,
            labels: None,
            content: None,
            cites: None,
            task: Task::LinkPrediction,
            embeddings: "embeddings.txt".into(),
            train_log: "train_log.csv".into(),
            results: "results.log".into(),
            grid_results: "grid_results.tsv".into(),
            checkpoint: None,
            resume: None,
            corpus: None,
            r_cache: None,
            holdout: danrl::eval::HOLDOUT_FRACTION,
            train_frac: 0.3,
            repeats: 10,
            classifier: ClassifierSettings::default(),
        }
    }
}

/// Split `text` into `(line, key, value)` triples, skipping blanks and `#` comments.
pub fn parse_pairs(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("line {}: expected key = value, got {line:?}", i + 1)))?;
        out.push((i + 1, k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| usage(format!("{key}: cannot parse {value:?}")))
}

fn optional_path(value: &str) -> Option<PathBuf> {
    match value {
        "" | "none" => None,
        v => Some(PathBuf::from(v)),
    }
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if ModelConfig::is_key(key) {
            return self.model.set(key, value).map_err(|e| usage(e.to_string()));
        }
        match key {
            "format" => {
                self.format = match value {
                    "edgelist" => DatasetFormat::EdgeList,
                    "cora" => DatasetFormat::Cora,
                    _ => return Err(usage(format!("format: expected edgelist or cora, got {value:?}"))),
                }
            }
            "task" => {
                self.task = match value {
                    "lp" | "link_prediction" => Task::LinkPrediction,
                    "nc" | "node_classification" => Task::NodeClassification,
                    _ => return Err(usage(format!("task: expected lp or nc, got {value:?}"))),
                }
            }
            "edges" => self.edges = optional_path(value),
            "attributes" => self.attributes = optional_path(value),
            "labels" => self.labels = optional_path(value),
            "content" => self.content = optional_path(value),
            "cites" => self.cites = optional_path(value),
            "embeddings" => self.embeddings = value.into(),
            "train_log" => self.train_log = value.into(),
            "results" => self.results = value.into(),
            "grid_results" => self.grid_results = value.into(),
            "checkpoint" => self.checkpoint = optional_path(value),
            "resume" => self.resume = optional_path(value),
            "corpus" => self.corpus = optional_path(value),
            "r_cache" => self.r_cache = optional_path(value),
            "holdout" => self.holdout = parse_num(key, value)?,
            "train_frac" => self.train_frac = parse_num(key, value)?,
            "repeats" => self.repeats = parse_num(key, value)?,
            "classifier_l2" => self.classifier.l2 = parse_num(key, value)?,
            "classifier_epochs" => self.classifier.epochs = parse_num(key, value)?,
            _ => return Err(usage(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    /// Defaults, then the optional config file, then `key=value` overrides in order.
    pub fn load(file: Option<&Path>, overrides: &[String]) -> Result<RunConfig> {
        let mut config = RunConfig::default();
        if let Some(path) = file {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read config {}", path.display()))?;
            for (line, k, v) in parse_pairs(&text)? {
                config
                    .set(&k, &v)
                    .map_err(|e| usage(format!("{}:{line}: {e}", path.display())))?;
            }
        }
        for raw in overrides {
            let (k, v) = raw
                .split_once('=')
                .ok_or_else(|| usage(format!("override {raw:?} is not key=value")))?;
            config.set(k.trim(), v.trim())?;
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate().map_err(|e| usage(e.to_string()))?;
        let fraction = |name: &str, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(usage(format!("{name} = {v} must be in (0, 1)")))
            }
        };
        fraction("holdout", self.holdout)?;
        fraction("train_frac", self.train_frac)?;
        if self.repeats == 0 {
            return Err(usage("repeats must be positive"));
        }
        Ok(())
    }

    fn require<'a>(&self, path: &'a Option<PathBuf>, key: &str) -> Result<&'a Path> {
        path.as_deref()
            .ok_or_else(|| usage(format!("config key {key:?} is required for this dataset format")))
    }

    pub fn load_graph(&self) -> Result<AttributedGraph> {
        let graph = match self.format {
            DatasetFormat::EdgeList => {
                let edges = self.require(&self.edges, "edges")?;
                let attrs = self.require(&self.attributes, "attributes")?;
                let (graph, report) = load_edge_list(edges, attrs, self.labels.as_deref())?;
                if report.self_loops_dropped + report.duplicate_edges > 0 {
                    log::info!(
                        "dropped {} self-loops and {} duplicate edges",
                        report.self_loops_dropped,
                        report.duplicate_edges
                    );
                }
                graph
            }
            DatasetFormat::Cora => {
                let content = self.require(&self.content, "content")?;
                let cites = self.require(&self.cites, "cites")?;
                let (graph, report) = load_cora_format(content, cites)?;
                if report.unknown_ids_dropped > 0 {
                    log::warn!("dropped {} citations to unknown papers", report.unknown_ids_dropped);
                }
                graph
            }
        };
        log::info!(
            "loaded graph: {} nodes, {} edges, {} attributes",
            graph.node_count(),
            graph.edge_count(),
            graph.attributes().n_cols()
        );
        Ok(graph)
    }
}

/// Candidate values for the blend and loss weights.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub axes: Vec<(String, Vec<String>)>,
}

pub const GRID_KEYS: [&str; 6] = ["eta", "psi", "chi", "alpha", "beta", "gamma"];

impl GridSpec {
    /// Lines `key = v1, v2, …` for keys among `eta psi chi alpha beta gamma`.
    pub fn parse(text: &str) -> Result<GridSpec> {
        let mut axes: Vec<(String, Vec<String>)> = Vec::new();
        for (line, k, v) in parse_pairs(text)? {
            if !GRID_KEYS.contains(&k.as_str()) {
                return Err(usage(format!("grid line {line}: {k:?} is not one of {GRID_KEYS:?}")));
            }
            if axes.iter().any(|(name, _)| *name == k) {
                return Err(usage(format!("grid line {line}: {k:?} listed twice")));
            }
            let values: Vec<String> = v
                .split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect();
            if values.is_empty() {
                return Err(usage(format!("grid line {line}: {k:?} has no values")));
            }
            axes.push((k, values));
        }
        if axes.is_empty() {
            return Err(usage("grid is empty"));
        }
        Ok(GridSpec { axes })
    }

    /// Every combination, the last axis varying fastest.
    pub fn combinations(&self) -> Vec<Vec<(String, String)>> {
        let mut out: Vec<Vec<(String, String)>> = vec![Vec::new()];
        for (key, values) in &self.axes {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    values.iter().map(move |v| {
                        let mut combo = prefix.clone();
                        combo.push((key.clone(), v.clone()));
                        combo
                    })
                })
                .collect();
        }
        out
    }
}
