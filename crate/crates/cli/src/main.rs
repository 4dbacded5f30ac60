mod config;
mod error;
mod runs;
mod stages;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use error::Failure;

/// Coarse-mask box refinement, compositing and cross-domain Dice evaluation.
///
/// Exit codes: 0 ok, 1 invalid input or configuration, 2 I/O failure,
/// 3 segmenter output breaks the prediction contract.
#[derive(Debug, Parser)]
#[command(name = "maskprompt", version)]
struct Cli {
    /// JSON configuration; flags override its fields.
    #[arg(long, global = true, env = "MASKPROMPT_CONFIG")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Binarize a probability map.
    Threshold(stages::ThresholdArgs),
    /// Threshold a coarse map and keep its largest component; prints the refined box.
    Filter(stages::FilterArgs),
    /// Print the bounding box of a mask.
    Bbox(stages::BboxArgs),
    /// Pack up to four tiles into one 2x2 composite.
    Merge(stages::MergeArgs),
    /// Cut a composite back into its tiles.
    Split(stages::SplitArgs),
    /// Dice between two masks.
    Dice(stages::DiceArgs),
    /// Refine boxes, segment and score a dataset.
    Pipeline(Box<runs::PipelineArgs>),
    /// Score a grid of segmenter thresholds by source domain.
    Sweep(runs::SweepArgs),
    /// Render stored reports as a table.
    Report(runs::ReportArgs),
    /// Write a synthetic dataset.
    Synth(runs::SynthArgs),
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = || config::load(cli.config.as_deref());
    match &cli.command {
        Command::Threshold(a) => stages::threshold_cmd(cfg()?, a),
        Command::Filter(a) => stages::filter_cmd(cfg()?, a),
        Command::Bbox(a) => stages::bbox_cmd(cfg()?, a),
        Command::Merge(a) => stages::merge_cmd(a),
        Command::Split(a) => stages::split_cmd(a),
        Command::Dice(a) => stages::dice_cmd(a),
        Command::Pipeline(a) => runs::pipeline_cmd(cfg()?, a),
        Command::Sweep(a) => runs::sweep_cmd(cfg()?, a),
        Command::Report(a) => runs::report_cmd(a),
        Command::Synth(a) => runs::synth_cmd(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            e.exit()
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
