//! Lighter de-identification variants: the elliptical-gradient blend of
//! source and generated iris, and the flat median iris.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Ellipse;
use crate::raster::{check_dims, GrayImage, Label, SegMask};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BlendParams {
    /// Width in pixels of the band around the pupil flattened to its median.
    pub ring_width: f64,
    /// Clamp the blend weight to 1 outside the iris ellipse.
    pub weight_clamp: bool,
}

impl Default for BlendParams {
    fn default() -> Self {
        Self {
            ring_width: 5.0,
            weight_clamp: true,
        }
    }
}

/// Weighted elliptical gradient: 0 at the center, 1 on the boundary,
/// growing quadratically outward.
pub fn elliptical_weight(x: f64, y: f64, e: &Ellipse) -> f64 {
    let (s, c) = e.theta.sin_cos();
    let u = (x - e.h) * c + (y - e.k) * s;
    let v = (y - e.k) * c - (x - e.h) * s;
    u * u / (e.a * e.a) + v * v / (e.b * e.b)
}

/// Median digital count; an even count takes the mean of the two middle
/// values rounded half away from zero. `None` when empty.
pub fn median_count(values: &mut [u8]) -> Option<u8> {
    if values.is_empty() {
        return None;
    }
    values.sort_unstable();
    let n = values.len();
    if n % 2 == 1 {
        Some(values[n / 2])
    } else {
        let lo = values[n / 2 - 1] as u16;
        let hi = values[n / 2] as u16;
        Some((lo + hi).div_ceil(2) as u8)
    }
}

/// Pixels just outside the pupil ellipse but inside the same ellipse grown
/// by `ring_width` on both semi-axes, and the median count over them.
pub fn pupil_ring_median(
    img: &GrayImage,
    pupil: &Ellipse,
    ring_width: f64,
) -> Result<(u8, Vec<(usize, usize)>)> {
    if !(ring_width > 0.0) {
        return Err(Error::InvalidParam(format!("ring width {ring_width}")));
    }
    let grown = pupil.grown(ring_width)?;
    let mut ring = Vec::new();
    let mut counts = Vec::new();
    for y in 0..img.height() {
        for x in 0..img.width() {
            let (fx, fy) = (x as f64, y as f64);
            if elliptical_weight(fx, fy, pupil) > 1.0 && elliptical_weight(fx, fy, &grown) <= 1.0 {
                ring.push((x, y));
                counts.push(img.get(x, y));
            }
        }
    }
    let median = median_count(&mut counts).ok_or(Error::EmptyRegion("pupil ring"))?;
    Ok((median, ring))
}

/// Flatten the pupil ring of `generated` to the source ring median, then mix
/// per iris pixel as `w * generated + (1 - w) * source` with `w` the
/// elliptical weight against the iris ellipse. Non-iris pixels keep the
/// source value.
pub fn blend(
    source: &GrayImage,
    generated: &GrayImage,
    source_mask: &SegMask,
    iris: &Ellipse,
    pupil: &Ellipse,
    params: &BlendParams,
) -> Result<GrayImage> {
    check_dims(source, generated)?;
    check_dims(source, source_mask)?;
    let mut gen = generated.clone();
    if params.ring_width > 0.0 {
        let (median, ring) = pupil_ring_median(source, pupil, params.ring_width)?;
        for (x, y) in ring {
            gen.set(x, y, median);
        }
    }
    let mut out = source.clone();
    for y in 0..source.height() {
        for x in 0..source.width() {
            if source_mask.get(x, y) != Label::Iris {
                continue;
            }
            let mut w = elliptical_weight(x as f64, y as f64, iris);
            if params.weight_clamp {
                w = w.min(1.0);
            }
            let v = w * gen.get(x, y) as f64 + (1.0 - w) * source.get(x, y) as f64;
            out.set(x, y, v.round().clamp(0.0, 255.0) as u8);
        }
    }
    Ok(out)
}

/// Every iris pixel set to the median iris count.
pub fn median_iris(source: &GrayImage, source_mask: &SegMask) -> Result<GrayImage> {
    check_dims(source, source_mask)?;
    let mut counts: Vec<u8> = source
        .data()
        .iter()
        .zip(source_mask.labels())
        .filter(|(_, &l)| l == Label::Iris)
        .map(|(&v, _)| v)
        .collect();
    let median = median_count(&mut counts).ok_or(Error::EmptyRegion("no iris pixels"))?;
    let mut out = source.clone();
    for (o, &l) in out.data_mut().iter_mut().zip(source_mask.labels()) {
        if l == Label::Iris {
            *o = median;
        }
    }
    Ok(out)
}
