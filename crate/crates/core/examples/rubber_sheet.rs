//! Unwrap an iris into a rectangle, resample it radially, rotate it, and
//! write the strips as PNG files.
//!
//! cargo run --example rubber_sheet -- [out_dir]

use std::path::PathBuf;

use irisveil::geometry::fit_eye_ellipses;
use irisveil::rubbersheet::{radial_resample, rotate_columns, unwrap, UnwrappedIris};
use irisveil::synth::{default_corpus, synth_eye};
use irisveil::GrayImage;

fn to_image(u: &UnwrappedIris) -> irisveil::Result<GrayImage> {
    let data = u
        .values()
        .iter()
        .zip(u.valid())
        .map(|(&v, &ok)| {
            if ok {
                v.round().clamp(0.0, 255.0) as u8
            } else {
                0
            }
        })
        .collect();
    GrayImage::new(u.n_theta(), u.n_r(), data)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(std::env::temp_dir);
    std::fs::create_dir_all(&out)?;
    let (img, mask) = synth_eye(&default_corpus(2, 7)[1])?;
    let eye = fit_eye_ellipses(&mask)?;

    let strip = unwrap(&img, &eye.pupil, &eye.iris, 64, 360)?;
    let tall = radial_resample(&strip, 128)?;
    let turned = rotate_columns(&strip, 90);
    println!(
        "unwrapped {}x{}, {} valid samples",
        strip.n_r(),
        strip.n_theta(),
        strip.valid_count()
    );

    for (name, u) in [
        ("strip", &strip),
        ("strip_resampled", &tall),
        ("strip_rotated", &turned),
    ] {
        let path = out.join(format!("{name}.png"));
        to_image(u)?.save_png(&path)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
