//! Replace the iris texture of one eye with a donor's, step by step: donor
//! template, inverse rendering, histogram matching, compositing and glint
//! restoration.
//!
//! cargo run --example replace_iris -- [out_dir]

use std::path::PathBuf;

use irisveil::geometry::{compute_radial_profile, fit_eye_ellipses};
use irisveil::glint::{detect_glints, restore_glints};
use irisveil::synth::{default_corpus, default_target, synth_eye};
use irisveil::synthesis::{
    composite, iris_histogram, ks_distance, layer_histogram, match_histogram, render_iris, Donor,
    TemplateParams,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(std::env::temp_dir);
    std::fs::create_dir_all(&out)?;
    let params = TemplateParams::default();
    let (source, mask) = synth_eye(&default_corpus(1, 3)[0])?;
    let (target, target_mask) = synth_eye(&default_target(3))?;

    let donor = Donor::prepare(&target, &target_mask, &params)?;
    let eye = fit_eye_ellipses(&mask)?;
    let profile = compute_radial_profile(&mask, &eye.pupil, &eye.iris, params.n_theta)?;
    let template = donor.template_for(&profile, &eye.iris)?;
    println!(
        "template {} rows x {} columns",
        template.n_r(),
        template.n_theta()
    );

    let glints = detect_glints(
        &source,
        Some(&mask),
        params.glint.threshold,
        params.glint.dilate,
    )?;
    let layer = render_iris(&template, &profile, &mask);
    let matched = match_histogram(&layer, &source, &mask, Some(&glints))?;
    let src_hist = iris_histogram(&source, &mask, Some(&glints))?;
    println!(
        "covered {} px; KS to source iris before {:.3}, after {:.3}",
        layer.covered_count(),
        ks_distance(&layer_histogram(&layer), &src_hist),
        ks_distance(&layer_histogram(&matched), &src_hist)
    );

    let generated = restore_glints(&composite(&source, &matched)?, &source, &glints)?;
    for (name, img) in [
        ("source", &source),
        ("donor", &target),
        ("generated", &generated),
    ] {
        let path = out.join(format!("{name}.png"));
        img.save_png(&path)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
