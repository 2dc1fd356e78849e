//! `scenecut` command-line tool.

mod commands;
mod common;
mod error;
mod settings;

use clap::{Parser, Subcommand};

use commands::{condense::CondenseArgs, detect::DetectArgs, eval::EvalArgs, synth::SynthArgs, vq::VqArgs};

#[derive(Debug, Parser)]
#[command(name = "scenecut", version, about = "Change-point detection for two-state video score series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Detect change-points in score, label or histogram series.
    Detect(DetectArgs),
    /// Windowed precision and recall against ground truth.
    Eval(EvalArgs),
    /// Quantize descriptors into histograms, or build a codebook.
    Vq(VqArgs),
    /// Merge histogram bins by clustering codebook centroids.
    Condense(CondenseArgs),
    /// Generate seeded synthetic series with ground truth.
    Synth(SynthArgs),
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Detect(a) => commands::detect::run(a),
        Command::Eval(a) => commands::eval::run(a),
        Command::Vq(a) => commands::vq::run(a),
        Command::Condense(a) => commands::condense::run(a),
        Command::Synth(a) => commands::synth::run(a),
    };
    if let Err(e) = result {
        eprintln!("scenecut: {e}");
        std::process::exit(e.exit_code());
    }
}
