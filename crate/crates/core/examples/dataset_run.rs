//! Run the whole pipeline over a generated synthetic dataset and print the
//! per-mode summary that is also written to summary.json.
//!
//! cargo run --release --example dataset_run -- [out_dir]

use std::path::PathBuf;

use irisveil::pipeline::{run_dataset, PipelineConfig};
use irisveil::Result;

fn main() -> Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("irisveil_dataset_run"));
    let cfg = PipelineConfig {
        out_dir: out,
        seed_corpus: Some(20),
        emit_metrics: true,
        ..Default::default()
    };
    let run = run_dataset(&cfg)?;
    for (mode, s) in &run.modes {
        println!(
            "{mode:<9} n={:<3} skipped={} HD {:.3} ± {:.3}  center MSE x {:.2e} y {:.2e}",
            s.n,
            s.skipped,
            s.hd_mean.unwrap_or(f64::NAN),
            s.hd_std.unwrap_or(f64::NAN),
            s.mse_x.unwrap_or(f64::NAN),
            s.mse_y.unwrap_or(f64::NAN)
        );
    }
    println!(
        "reports: {} and {}",
        run.report_path().display(),
        run.summary_path().display()
    );
    Ok(())
}
