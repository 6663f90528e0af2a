#![allow(dead_code)]

use irisveil::{Ellipse, Label, SegMask};

/// Rasterize pupil inside iris on a background frame by pixel-center tests.
pub fn eye_mask(pupil: &Ellipse, iris: &Ellipse, w: usize, h: usize) -> SegMask {
    SegMask::from_fn(w, h, |x, y| {
        let (fx, fy) = (x as f64, y as f64);
        if pupil.implicit(fx, fy) <= 1.0 {
            Label::Pupil
        } else if iris.implicit(fx, fy) <= 1.0 {
            Label::Iris
        } else {
            Label::Background
        }
    })
}

/// Smallest absolute difference between two axis angles, modulo pi.
pub fn axis_angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(std::f64::consts::PI);
    d.min(std::f64::consts::PI - d)
}
