//! Donor iris synthesis: build a rubber-sheet template from the target eye,
//! render it onto the source eye's geometry, match its intensity
//! distribution to the source iris and composite it into the frame.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{angle_of, fit_eye_ellipses, Ellipse, EyeEllipses, RadialProfile};
use crate::glint::{detect_glints, remove_glints, GlintMask, GlintParams};
use crate::raster::{check_dims, Dims, GrayImage, Label, SegMask};
use crate::rubbersheet::{radial_resample, rotate_columns, sample, unwrap, UnwrappedIris};

/// Synthesized iris pixels over a full frame; `coverage` marks pixels that
/// carry a value.
#[derive(Debug, Clone, PartialEq)]
pub struct IrisLayer {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
    pub coverage: Vec<bool>,
}

impl IrisLayer {
    pub fn covered_count(&self) -> usize {
        self.coverage.iter().filter(|&&c| c).count()
    }

    pub fn covered_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.values
            .iter()
            .zip(&self.coverage)
            .filter(|(_, &c)| c)
            .map(|(&v, _)| v)
    }
}

impl Dims for IrisLayer {
    fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemplateParams {
    /// Unwrap grid for the donor.
    pub n_r: usize,
    pub n_theta: usize,
    pub glint: GlintParams,
}

impl Default for TemplateParams {
    fn default() -> Self {
        Self {
            n_r: 64,
            n_theta: 360,
            glint: GlintParams::default(),
        }
    }
}

/// Whole-column shift aligning the donor's ellipse rotation with the
/// source's. Axis angles are pi-periodic, so the difference is taken in
/// `(-pi/2, pi/2]`.
pub fn rotation_shift(source_theta: f64, target_theta: f64, n_theta: usize) -> i64 {
    let mut d = (source_theta - target_theta).rem_euclid(PI);
    if d > FRAC_PI_2 {
        d -= PI;
    }
    (n_theta as f64 * d / TAU).round() as i64
}

/// A donor eye prepared once and reused across source frames: its fitted
/// ellipses and its glint-free rubber-sheet unwrap.
#[derive(Debug, Clone)]
pub struct Donor {
    pub eye: EyeEllipses,
    pub unwrapped: UnwrappedIris,
}

impl Donor {
    pub fn prepare(
        target_img: &GrayImage,
        target_mask: &SegMask,
        params: &TemplateParams,
    ) -> Result<Self> {
        check_dims(target_img, target_mask)?;
        let eye = fit_eye_ellipses(target_mask)?;
        let glints = detect_glints(
            target_img,
            Some(target_mask),
            params.glint.threshold,
            params.glint.dilate,
        )?;
        let clean = remove_glints(target_img, &glints)?;
        let unwrapped = unwrap(&clean, &eye.pupil, &eye.iris, params.n_r, params.n_theta)?;
        Ok(Self { eye, unwrapped })
    }

    /// Resample to one row per pixel of source radius and rotate to the
    /// source iris orientation.
    pub fn template_for(
        &self,
        source_profile: &RadialProfile,
        source_iris: &Ellipse,
    ) -> Result<UnwrappedIris> {
        let rows = (source_profile.max_radius.round() as usize).max(2);
        let resampled = radial_resample(&self.unwrapped, rows)?;
        let shift = rotation_shift(
            source_iris.theta,
            self.eye.iris.theta,
            self.unwrapped.n_theta(),
        );
        Ok(rotate_columns(&resampled, shift))
    }
}

/// Donor template: glints removed, unwrapped between the donor's own pupil
/// and limbus, resampled to one row per pixel of source radius, and rotated
/// to the source iris orientation.
pub fn build_template(
    target_img: &GrayImage,
    target_mask: &SegMask,
    source_profile: &RadialProfile,
    source_iris: &Ellipse,
    params: &TemplateParams,
) -> Result<UnwrappedIris> {
    Donor::prepare(target_img, target_mask, params)?.template_for(source_profile, source_iris)
}

/// Inverse-map every source iris pixel into the template. A pixel at angle
/// `phi` and distance `d` from the pupil center reads the template at
/// `rho = (d - pupil_extent) / (iris_extent - pupil_extent)`; pixels with
/// `rho` outside `[0, 1]` or an invalid sample stay uncovered.
pub fn render_iris(
    template: &UnwrappedIris,
    profile: &RadialProfile,
    source_mask: &SegMask,
) -> IrisLayer {
    let (w, h) = (source_mask.width(), source_mask.height());
    let (ox, oy) = profile.origin;
    let rows: Vec<(Vec<f64>, Vec<bool>)> = (0..h)
        .into_par_iter()
        .map(|y| {
            let mut vals = vec![0.0; w];
            let mut cov = vec![false; w];
            for x in 0..w {
                if source_mask.get(x, y) != Label::Iris {
                    continue;
                }
                let dx = x as f64 - ox;
                let dy = y as f64 - oy;
                let phi = angle_of(dx, dy);
                let d = dx.hypot(dy);
                let (pe, ie) = profile.extents_at(phi);
                let rho = (d - pe) / (ie - pe);
                if !(0.0..=1.0).contains(&rho) {
                    continue;
                }
                let (v, ok) = sample(template, rho, phi);
                if ok {
                    vals[x] = v;
                    cov[x] = true;
                }
            }
            (vals, cov)
        })
        .collect();
    let mut values = Vec::with_capacity(w * h);
    let mut coverage = Vec::with_capacity(w * h);
    for (v, c) in rows {
        values.extend(v);
        coverage.extend(c);
    }
    IrisLayer {
        width: w,
        height: h,
        values,
        coverage,
    }
}

/// Histogram of source iris digital counts, skipping `exclude`d pixels.
pub fn iris_histogram(
    source_img: &GrayImage,
    source_mask: &SegMask,
    exclude: Option<&GlintMask>,
) -> Result<[u64; 256]> {
    check_dims(source_img, source_mask)?;
    if let Some(g) = exclude {
        check_dims(source_img, g)?;
    }
    let mut hist = [0u64; 256];
    for (i, (&v, &l)) in source_img
        .data()
        .iter()
        .zip(source_mask.labels())
        .enumerate()
    {
        let skip = exclude.is_some_and(|g| g.bits()[i]);
        if l == Label::Iris && !skip {
            hist[v as usize] += 1;
        }
    }
    Ok(hist)
}

/// Histogram specification onto the source iris distribution: each covered
/// value `v` becomes the smallest source count `s` whose CDF reaches the
/// layer's CDF at `v`. Source pixels flagged in `exclude` (typically glints)
/// are left out of the reference distribution.
pub fn match_histogram(
    layer: &IrisLayer,
    source_img: &GrayImage,
    source_mask: &SegMask,
    exclude: Option<&GlintMask>,
) -> Result<IrisLayer> {
    check_dims(source_img, layer)?;
    let hist = iris_histogram(source_img, source_mask, exclude)?;
    let n_src: u64 = hist.iter().sum();
    if n_src == 0 {
        return Err(Error::EmptyRegion("no source iris pixels"));
    }
    let mut sorted: Vec<f64> = layer.covered_values().collect();
    if sorted.is_empty() {
        return Err(Error::EmptyRegion("layer has no covered pixels"));
    }
    sorted.sort_by(f64::total_cmp);
    let n_layer = sorted.len() as u64;
    let mut cum = [0u64; 256];
    let mut acc = 0;
    for (c, h) in cum.iter_mut().zip(hist) {
        acc += h;
        *c = acc;
    }
    let map = |v: f64| -> f64 {
        let le = sorted.partition_point(|&s| s <= v) as u64;
        // cum[s] / n_src >= le / n_layer, in exact integer arithmetic.
        let s = cum
            .partition_point(|&c| (c as u128) * (n_layer as u128) < (le as u128) * (n_src as u128));
        s.min(255) as f64
    };
    let values = layer
        .values
        .iter()
        .zip(&layer.coverage)
        .map(|(&v, &c)| if c { map(v) } else { v })
        .collect();
    Ok(IrisLayer {
        values,
        ..layer.clone()
    })
}

/// Kolmogorov-Smirnov distance between two 256-bin histograms.
pub fn ks_distance(a: &[u64; 256], b: &[u64; 256]) -> f64 {
    let na: u64 = a.iter().sum();
    let nb: u64 = b.iter().sum();
    if na == 0 || nb == 0 {
        return 1.0;
    }
    let (mut ca, mut cb, mut worst) = (0u64, 0u64, 0.0f64);
    for i in 0..256 {
        ca += a[i];
        cb += b[i];
        worst = worst.max((ca as f64 / na as f64 - cb as f64 / nb as f64).abs());
    }
    worst
}

/// Histogram of the covered layer values after rounding to digital counts.
pub fn layer_histogram(layer: &IrisLayer) -> [u64; 256] {
    let mut hist = [0u64; 256];
    for v in layer.covered_values() {
        hist[v.round().clamp(0.0, 255.0) as usize] += 1;
    }
    hist
}

/// Source frame with covered pixels replaced by the rounded layer values.
pub fn composite(source_img: &GrayImage, layer: &IrisLayer) -> Result<GrayImage> {
    check_dims(source_img, layer)?;
    let mut out = source_img.clone();
    for ((o, &v), &c) in out
        .data_mut()
        .iter_mut()
        .zip(&layer.values)
        .zip(&layer.coverage)
    {
        if c {
            *o = v.round().clamp(0.0, 255.0) as u8;
        }
    }
    Ok(out)
}
