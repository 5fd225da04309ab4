use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use danrl::graph::SbmParams;
use danrl_cli::{cmd_eval, cmd_grid, cmd_synth, cmd_train, RunConfig, UsageError};

#[derive(Parser)]
#[command(name = "danrl", version, about = "Attributed network embedding: train, evaluate, grid-search")]
struct Cli {
    /// Repeat for more log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Flat key = value config file.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// `key=value` overrides applied after the config file.
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Write a stochastic-block-model attributed graph.
    Synth {
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 30)]
        n_per_block: usize,
        #[arg(long, default_value_t = 2)]
        blocks: usize,
        #[arg(long, default_value_t = 0.3)]
        p_in: f64,
        #[arg(long, default_value_t = 0.02)]
        p_out: f64,
        #[arg(long, default_value_t = 20)]
        attr_dim: usize,
        #[arg(long, default_value_t = 0.1)]
        attr_noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Train embeddings and write them with the loss log.
    Train(ConfigArgs),
    /// Run link prediction or node classification and append the report.
    Eval(ConfigArgs),
    /// Evaluate every combination of a grid file and rank them.
    Grid {
        /// Lines `key = v1, v2, …` over eta, psi, chi, alpha, beta, gamma.
        #[arg(long)]
        grid: PathBuf,
        #[command(flatten)]
        args: ConfigArgs,
    },
}

fn run(command: Command) -> anyhow::Result<()> {
    let load = |a: &ConfigArgs| RunConfig::load(a.config.as_deref(), &a.overrides);
    match command {
        Command::Synth {
            out_dir,
            n_per_block,
            blocks,
            p_in,
            p_out,
            attr_dim,
            attr_noise,
            seed,
        } => {
            let params = SbmParams {
                n_per_block,
                n_blocks: blocks,
                p_in,
                p_out,
                attr_dim,
                attr_noise,
                seed,
            };
            cmd_synth(&params, &out_dir)
        }
        Command::Train(args) => cmd_train(&load(&args)?),
        Command::Eval(args) => cmd_eval(&load(&args)?),
        Command::Grid { grid, args } => cmd_grid(&load(&args)?, &grid),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
