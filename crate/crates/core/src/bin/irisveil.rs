use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use irisveil::pipeline::{run_dataset, Mode, PipelineConfig};
use irisveil::Error;

/// Replace iris texture in segmented eye frames.
#[derive(Debug, Parser)]
#[command(name = "irisveil", version)]
struct Cli {
    /// JSON config; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    source_dir: Option<PathBuf>,
    #[arg(long)]
    mask_dir: Option<PathBuf>,
    /// Donor eye image.
    #[arg(long)]
    target: Option<PathBuf>,
    /// Segmentation mask of the donor eye.
    #[arg(long)]
    target_mask: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output mode; repeat for several (generated, blended, median).
    #[arg(long = "mode")]
    modes: Vec<String>,
    #[arg(long)]
    glint_threshold: Option<u8>,
    /// Compute iris-code Hamming distances for the report.
    #[arg(long)]
    metrics: bool,
    /// Generate N synthetic frames under <out>/corpus and process them.
    #[arg(long, value_name = "N")]
    seed_corpus: Option<usize>,
}

fn build_config(cli: Cli) -> Result<PipelineConfig, Error> {
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::from_json_file(path)?,
        None => PipelineConfig::default(),
    };
    cfg.source_dir = cli.source_dir.or(cfg.source_dir);
    cfg.mask_dir = cli.mask_dir.or(cfg.mask_dir);
    cfg.target_image = cli.target.or(cfg.target_image);
    cfg.target_mask = cli.target_mask.or(cfg.target_mask);
    if let Some(out) = cli.out {
        cfg.out_dir = out;
    }
    if !cli.modes.is_empty() {
        cfg.modes = cli
            .modes
            .iter()
            .map(|m| m.parse::<Mode>())
            .collect::<Result<_, _>>()?;
    }
    if let Some(t) = cli.glint_threshold {
        cfg.glint_threshold = t;
    }
    cfg.emit_metrics |= cli.metrics;
    cfg.seed_corpus = cli.seed_corpus.or(cfg.seed_corpus);
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = build_config(cli).and_then(|cfg| run_dataset(&cfg));
    match result {
        Ok(summary) => {
            let skipped = summary.frames.iter().filter(|f| !f.status.is_ok()).count();
            eprintln!(
                "processed {} frames ({skipped} skipped), reports in {}",
                summary.frames.len(),
                summary.out_dir.display()
            );
            ExitCode::SUCCESS
        }
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
