//! Segmentation and pupil-center utility metrics.
//!
//! cargo run --example utility_metrics

use irisveil::metrics::{center_errors, iou, outlier_trimmed_mse};
use irisveil::{Label, Result, SegMask};

fn main() -> Result<()> {
    let gt = SegMask::from_fn(8, 8, |x, y| match (x, y) {
        (3..=4, 3..=4) => Label::Pupil,
        (2..=5, 2..=5) => Label::Iris,
        _ => Label::Sclera,
    });
    let mut pred = gt.clone();
    pred.set(2, 2, Label::Sclera);
    pred.set(4, 4, Label::Iris);
    let report = iou(&pred, &gt)?;
    for (class, v) in &report.per_class {
        println!("class {class}: IoU {v:.3}");
    }
    println!("mIoU {:.3}", report.miou);

    let truth = [(50.0, 40.0), (52.0, 41.0), (55.0, 43.5), (60.0, 45.0)];
    let predicted = [(50.2, 40.1), (51.9, 41.0), (55.1, 43.2), (60.4, 45.3)];
    let c = center_errors(&predicted, &truth)?;
    println!(
        "center MSE x {:.4} y {:.4}, R2 x {:.4} y {:.4}",
        c.mse_x, c.mse_y, c.r2_x, c.r2_y
    );

    let errors: Vec<f64> = predicted
        .iter()
        .zip(&truth)
        .map(|(p, t)| p.0 - t.0)
        .collect();
    println!(
        "x MSE after trimming 25%: {:.4}",
        outlier_trimmed_mse(&errors, 0.25)?
    );
    Ok(())
}
