//! Compare the three output modes of one frame by how much iris identity
//! they leave behind (masked Hamming distance to the source iris code).
//!
//! cargo run --example privacy_modes -- [out_dir]

use std::path::PathBuf;

use irisveil::pipeline::{process_frame, Mode, PipelineConfig};
use irisveil::synth::{default_corpus, default_target, synth_eye};
use irisveil::synthesis::Donor;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(std::env::temp_dir);
    std::fs::create_dir_all(&out)?;
    let cfg = PipelineConfig {
        emit_metrics: true,
        ..Default::default()
    };
    let (source, mask) = synth_eye(&default_corpus(1, 11)[0])?;
    let (target, target_mask) = synth_eye(&default_target(11))?;
    let donor = Donor::prepare(&target, &target_mask, &cfg.template_params())?;

    let frame = process_frame("demo", &source, &mask, &donor, &cfg);
    for m in &frame.result.modes {
        println!(
            "{:<9} HD {:.3}  pupil center {:?}",
            m.mode,
            m.hd.unwrap_or(f64::NAN),
            m.pupil_center
        );
    }
    println!("reference pupil center {:?}", frame.result.reference_center);
    for mode in Mode::ALL {
        let path = out.join(format!("demo_{mode}.png"));
        frame.images[&mode].save_png(&path)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
