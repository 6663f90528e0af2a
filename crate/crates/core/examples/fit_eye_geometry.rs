//! Fit pupil and limbus ellipses to a segmentation mask and cast the
//! per-ray radial profile used for texture mapping.
//!
//! cargo run --example fit_eye_geometry

use irisveil::geometry::{compute_radial_profile, fit_eye_ellipses};
use irisveil::synth::{default_corpus, synth_eye};
use irisveil::Result;

fn main() -> Result<()> {
    let spec = &default_corpus(1, 7)[0];
    let (_, mask) = synth_eye(spec)?;
    let eye = fit_eye_ellipses(&mask)?;
    println!("pupil  fit {:?}", eye.pupil);
    println!("pupil true {:?}", spec.effective_pupil()?);
    println!("iris   fit {:?}", eye.iris);
    println!("iris  true {:?}", spec.iris);

    let profile = compute_radial_profile(&mask, &eye.pupil, &eye.iris, 8)?;
    println!("\nray  angle  pupil  iris  visible iris runs");
    for j in 0..profile.n_theta {
        println!(
            "{j:>3}  {:>5.1}  {:>5.1}  {:>4.1}  {:?}",
            profile.ray_angle(j).to_degrees(),
            profile.pupil_extent[j],
            profile.iris_extent[j],
            profile.visible_iris_runs[j]
        );
    }
    println!("R = {:.2}", profile.max_radius);
    Ok(())
}
