use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use danrl::eval::{link_prediction_eval_with, node_classification_eval_with, EvalReport};
use danrl::graph::{export_edge_list, generate_sbm_attributed, AttributedGraph, SbmParams};
use danrl::model::{
    export_embeddings, initial_params, load_checkpoint, save_checkpoint, train, train_from,
    TrainOutput, TrainingSetup,
};
use danrl::preprocess::ReconstructedAdjacency;
use danrl::walks::generate_walks;

use crate::config::{GridSpec, RunConfig, Task, UsageError, GRID_KEYS};

pub const TRAIN_LOG_HEADER: &str = "epoch,L_total,L_sg,L_ae,L_fop,L_reg";

fn setup(graph: &AttributedGraph, config: &RunConfig) -> Result<TrainingSetup> {
    let m = &config.model;
    let r = match &config.r_cache {
        Some(path) if path.exists() => {
            log::info!("reading R from {}", path.display());
            ReconstructedAdjacency::read_cache(path, m.eta, m.psi)?
        }
        cache => {
            let r = ReconstructedAdjacency::from_graph(graph, m.eta, m.psi, m.similarity_top_k)?;
            if let Some(path) = cache {
                r.write_cache(path)?;
            }
            r
        }
    };
    let corpus = generate_walks(graph, m.walks_per_node, m.walk_length, m.seed)?;
    if let Some(path) = &config.corpus {
        corpus.write(path)?;
    }
    Ok(TrainingSetup::from_parts(graph, m, r, &corpus)?)
}

fn write_train_log(out: &TrainOutput, path: &Path) -> Result<()> {
    let mut text = String::from(TRAIN_LOG_HEADER);
    text.push('\n');
    for entry in &out.log {
        text.push_str(&entry.to_string());
        text.push('\n');
    }
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

/// Train on the configured graph; write embeddings, the loss log and an
/// optional checkpoint.
pub fn cmd_train(config: &RunConfig) -> Result<()> {
    let graph = config.load_graph()?;
    let setup = setup(&graph, config)?;
    let params = match &config.resume {
        Some(path) => load_checkpoint(path)?,
        None => initial_params(&graph, &config.model)?,
    };
    let out = train_from(&graph, &config.model, &setup, params)?;
    export_embeddings(&out.embeddings, graph.ids(), &config.embeddings)?;
    write_train_log(&out, &config.train_log)?;
    if let Some(path) = &config.checkpoint {
        save_checkpoint(&out.params, path)?;
    }
    match out.stopped_at {
        Some(epoch) => println!("early stop after epoch {epoch}"),
        None => println!("trained {} epochs", out.log.len()),
    }
    println!("embeddings: {}", config.embeddings.display());
    Ok(())
}

/// Run the configured task and return its report.
pub fn evaluate(graph: &AttributedGraph, config: &RunConfig) -> Result<EvalReport> {
    match config.task {
        Task::LinkPrediction => Ok(link_prediction_eval_with(graph, &config.model, config.holdout)?),
        Task::NodeClassification => {
            let labels = match graph.labels() {
                Some(l) if !l.labeled().is_empty() => l,
                _ => bail!(UsageError(
                    "node classification needs labels, but the dataset has no labeled nodes".into()
                )),
            };
            let out = train(graph, &config.model)?;
            let mut report = node_classification_eval_with(
                out.embeddings.matrix().view(),
                labels,
                config.train_frac,
                config.repeats,
                config.model.seed,
                config.classifier,
            )?;
            let mut snapshot = config.model.key_values();
            snapshot.append(&mut report.config);
            report.config = snapshot;
            Ok(report)
        }
    }
}

pub fn cmd_eval(config: &RunConfig) -> Result<()> {
    let graph = config.load_graph()?;
    let report = evaluate(&graph, config)?;
    print!("{report}");
    report.append_to(&config.results)?;
    Ok(())
}

/// One evaluated grid combination.
#[derive(Debug, Clone)]
pub struct GridRow {
    pub values: Vec<(String, String)>,
    pub score: f64,
}

/// Evaluate every combination from scratch with the configured seed;
/// rows come back sorted best first, grid order breaking ties.
pub fn grid_search(config: &RunConfig, grid: &GridSpec) -> Result<Vec<GridRow>> {
    let graph = config.load_graph()?;
    let combos = grid.combinations();
    let total = combos.len();
    let mut rows = Vec::with_capacity(combos.len());
    for (i, combo) in combos.into_iter().enumerate() {
        let mut c = config.clone();
        for (k, v) in &combo {
            c.set(k, v)?;
        }
        c.validate()?;
        let report = evaluate(&graph, &c)?;
        log::info!("combination {} of {total}: {combo:?} -> {:.4}", i + 1, report.score());
        rows.push(GridRow {
            values: GRID_KEYS
                .iter()
                .map(|&k| (k.to_string(), current_value(&c, k)))
                .collect(),
            score: report.score(),
        });
    }
    rows.sort_by(|a, b| b.score.total_cmp(&a.score));
    Ok(rows)
}

fn current_value(config: &RunConfig, key: &str) -> String {
    config
        .model
        .key_values()
        .into_iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v)
        .unwrap_or_default()
}

pub fn format_grid_table(rows: &[GridRow], metric: &str) -> String {
    let mut out = String::from("rank");
    for k in GRID_KEYS {
        out.push('\t');
        out.push_str(k);
    }
    out.push('\t');
    out.push_str(metric);
    out.push('\n');
    for (i, row) in rows.iter().enumerate() {
        out.push_str(&(i + 1).to_string());
        for (_, v) in &row.values {
            out.push('\t');
            out.push_str(v);
        }
        out.push_str(&format!("\t{}\n", row.score));
    }
    out
}

pub fn cmd_grid(config: &RunConfig, grid_path: &Path) -> Result<()> {
    let text = fs::read_to_string(grid_path)
        .with_context(|| format!("cannot read grid {}", grid_path.display()))?;
    let grid = GridSpec::parse(&text)?;
    let rows = grid_search(config, &grid)?;
    let metric = match config.task {
        Task::LinkPrediction => "auc",
        Task::NodeClassification => "micro_f1",
    };
    let table = format_grid_table(&rows, metric);
    fs::write(&config.grid_results, &table)
        .with_context(|| format!("cannot write {}", config.grid_results.display()))?;
    print!("{table}");
    let best = &rows[0];
    let combo: Vec<String> = best.values.iter().map(|(k, v)| format!("{k}={v}")).collect();
    println!("best: {} {metric}={}", combo.join(" "), best.score);
    Ok(())
}

/// Write an SBM attributed graph as `edges.txt`, `attributes.txt` and `labels.txt`.
pub fn cmd_synth(params: &SbmParams, out_dir: &Path) -> Result<()> {
    let graph = generate_sbm_attributed(params)?;
    fs::create_dir_all(out_dir).with_context(|| format!("cannot create {}", out_dir.display()))?;
    let labels = out_dir.join("labels.txt");
    export_edge_list(
        &graph,
        out_dir.join("edges.txt"),
        out_dir.join("attributes.txt"),
        Some(&labels),
    )?;
    let mut stdout = std::io::stdout().lock();
    writeln!(
        stdout,
        "wrote {} nodes, {} edges to {}",
        graph.node_count(),
        graph.edge_count(),
        out_dir.display()
    )?;
    Ok(())
}
