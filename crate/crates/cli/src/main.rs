// SPDX-License-Identifier: MIT OR Apache-2.0

//! `whitebox`: build the hand-weighted networks, generate task data, classify,
//! attribute, run the experiment suites and render heatmaps.
//!
//! Exit codes: 0 on success, 1 on bad input data, 2 on bad flags or
//! configuration.

mod commands;
mod config;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::Config;

/// Environment variable naming the default root for experiment run directories.
pub const OUT_ROOT_ENV: &str = "WHITEBOX_OUT";

#[derive(Parser, Debug)]
#[command(name = "whitebox", version, about = "White-box LSTMs and attribution heatmaps")]
struct Cli {
    /// Flat TOML file whose keys mirror the long flags (`ig_steps = 512`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a model's weights as JSON.
    Build(BuildArgs),
    /// Generate task strings, one per line.
    Gen(GenArgs),
    /// Classify inputs and print the logits.
    Run(RunArgs),
    /// Attribute one input to its tokens.
    Attribute(AttributeArgs),
    /// Run one of the experiment suites.
    Experiment(ExperimentArgs),
    /// Render token scores as a heatmap.
    Render(RenderArgs),
}

#[derive(Args, Debug, Default)]
pub struct ModelArgs {
    /// counting, sp-counter, sp-fsa or pda.
    #[arg(long)]
    pub model: Option<String>,
    /// A model JSON file written by `build`.
    #[arg(long, conflicts_with = "model")]
    pub model_file: Option<PathBuf>,
    #[arg(long)]
    pub u: Option<f64>,
    #[arg(long)]
    pub m: Option<f64>,
    /// Stack bound of the bracket network.
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Args, Debug)]
pub struct BuildArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Run directory; prints to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    /// counting, sp or dyck.
    #[arg(long)]
    pub task: Option<String>,
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub min_len: Option<usize>,
    #[arg(long)]
    pub max_len: Option<usize>,
    /// Counting: keep strings with a balanced prefix.
    #[arg(long)]
    pub balanced_prefix: bool,
    /// SP: keep strings the oracle calls True.
    #[arg(long)]
    pub sp_true: bool,
    /// Dyck: probability of closing when both moves are legal.
    #[arg(long)]
    pub closing_prob: Option<f64>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// An input string; repeat for several.
    #[arg(long)]
    pub input: Vec<String>,
    /// A file of inputs, one per line.
    #[arg(long)]
    pub inputs: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct AttributeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub input: Option<String>,
    /// occlusion, saliency, gxi, ig or lrp.
    #[arg(long)]
    pub method: Option<String>,
    /// Class label or index; defaults to the predicted class.
    #[arg(long)]
    pub class: Option<String>,
    #[arg(long)]
    pub ig_steps: Option<usize>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// json, ansi, html or latex.
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ExperimentArgs {
    /// qualitative, saturation, lrp-saturation or ablation.
    #[arg(long)]
    pub suite: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Strings per setting (lrp-saturation, ablation).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub ig_steps: Option<usize>,
    /// Run directory; defaults to a fresh directory under $WHITEBOX_OUT or ./runs.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RenderArgs {
    /// JSON with `tokens` and `scores` arrays, as written by `attribute`.
    #[arg(long)]
    pub scores: Option<PathBuf>,
    /// ansi, html or latex.
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = cli.config.as_deref().map(Config::load).transpose().and_then(|config| {
        let config = config.unwrap_or_default();
        match cli.command {
            Command::Build(args) => commands::build(args, &config),
            Command::Gen(args) => commands::gen(args, &config),
            Command::Run(args) => commands::run(args, &config),
            Command::Attribute(args) => commands::attribute(args, &config),
            Command::Experiment(args) => commands::experiment(args, &config),
            Command::Render(args) => commands::render(args, &config),
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("whitebox: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
