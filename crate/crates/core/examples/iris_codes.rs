//! Encode irises into phase codes, dump one in the text exchange format, and
//! match genuine and impostor pairs.
//!
//! cargo run --example iris_codes

use irisveil::geometry::fit_eye_ellipses;
use irisveil::glint::detect_glints;
use irisveil::iriscode::{encode, hamming, EncodingParams, IrisCode};
use irisveil::synth::{default_corpus, synth_eye, SynthEyeSpec};
use irisveil::Result;

fn code(spec: &SynthEyeSpec, params: &EncodingParams) -> Result<IrisCode> {
    let (img, mask) = synth_eye(spec)?;
    let eye = fit_eye_ellipses(&mask)?;
    let glints = detect_glints(&img, Some(&mask), 250, 1)?;
    encode(&img, &mask, &eye.pupil, &eye.iris, params, &glints)
}

fn main() -> Result<()> {
    let params = EncodingParams::default();
    let specs = default_corpus(2, 42);
    let a = code(&specs[0], &params)?;
    println!(
        "code {}x{}, {:.1}% usable",
        a.rows(),
        a.cols(),
        100.0 * a.usable_fraction()
    );
    let dump = a.to_dump();
    println!(
        "dump header {:?}, {} lines",
        dump.lines().next().unwrap_or(""),
        dump.lines().count()
    );
    assert_eq!(IrisCode::from_dump(&dump)?, a);

    let (hd, shift) = hamming(&a, &a.rotated(5), params.shift_range)?;
    println!("self, rotated 5 columns: HD {hd:.3} at shift {shift}");

    // Same geometry, different texture seed: an impostor.
    let other = SynthEyeSpec {
        seed: specs[1].seed,
        ..specs[0].clone()
    };
    let (hd, shift) = hamming(&a, &code(&other, &params)?, params.shift_range)?;
    println!("impostor: HD {hd:.3} at shift {shift}");
    Ok(())
}
