//! Detect corneal reflections, inpaint them away, and put them back.
//!
//! cargo run --example glints

use irisveil::glint::{detect_glints, remove_glints, restore_glints, threshold_glints};
use irisveil::synth::{default_corpus, synth_eye};
use irisveil::Result;

fn main() -> Result<()> {
    let (img, mask) = synth_eye(&default_corpus(1, 5)[0])?;
    let raw = threshold_glints(&img, Some(&mask), 250)?;
    let glints = detect_glints(&img, Some(&mask), 250, 1)?;
    println!(
        "{} glint pixels, {} after 1 px dilation",
        raw.count(),
        glints.count()
    );

    let clean = remove_glints(&img, &glints)?;
    let brightest = clean
        .data()
        .iter()
        .zip(glints.bits())
        .filter(|(_, &g)| g)
        .map(|(&v, _)| v)
        .max();
    println!("brightest inpainted value {brightest:?}");

    let back = restore_glints(&clean, &img, &glints)?;
    println!("restored image equals original: {}", back == img);
    Ok(())
}
