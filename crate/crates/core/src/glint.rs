//! Corneal reflections: threshold detection, removal from a donor image by
//! iterative neighbor-mean fill, and verbatim restoration onto outputs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{check_dims, Dims, GrayImage, SegMask};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct GlintParams {
    pub threshold: u8,
    pub dilate: usize,
}

impl Default for GlintParams {
    fn default() -> Self {
        Self {
            threshold: 250,
            dilate: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlintMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl GlintMask {
    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn full(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![true; width * height],
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.bits[y * self.width + x] = v;
    }

    #[inline]
    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Glint flag at the nearest pixel; `false` outside the raster.
    pub fn nearest(&self, x: f64, y: f64) -> bool {
        let (xr, yr) = (x.round(), y.round());
        if xr < 0.0 || yr < 0.0 || xr >= self.width as f64 || yr >= self.height as f64 {
            return false;
        }
        self.get(xr as usize, yr as usize)
    }

    /// Square dilation with half-width `r`.
    pub fn dilated(&self, r: usize) -> GlintMask {
        if r == 0 {
            return self.clone();
        }
        let (w, h) = (self.width, self.height);
        let mut out = GlintMask::empty(w, h);
        for y in 0..h {
            for x in 0..w {
                if !self.get(x, y) {
                    continue;
                }
                for yy in y.saturating_sub(r)..=(y + r).min(h - 1) {
                    for xx in x.saturating_sub(r)..=(x + r).min(w - 1) {
                        out.set(xx, yy, true);
                    }
                }
            }
        }
        out
    }
}

impl Dims for GlintMask {
    fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }
}

/// Pixels at or above `threshold`, optionally limited to iris and pupil
/// labels of `region`, before dilation.
pub fn threshold_glints(
    img: &GrayImage,
    region: Option<&SegMask>,
    threshold: u8,
) -> Result<GlintMask> {
    if threshold == 0 {
        return Err(Error::InvalidParam(
            "glint threshold must be in 1..=255".into(),
        ));
    }
    if let Some(m) = region {
        check_dims(img, m)?;
    }
    let (w, h) = (img.width(), img.height());
    let mut mask = GlintMask::empty(w, h);
    for y in 0..h {
        for x in 0..w {
            let in_region = region.is_none_or(|m| m.get(x, y).is_eye_disk());
            if in_region && img.get(x, y) >= threshold {
                mask.set(x, y, true);
            }
        }
    }
    Ok(mask)
}

pub fn detect_glints(
    img: &GrayImage,
    region: Option<&SegMask>,
    threshold: u8,
    dilate: usize,
) -> Result<GlintMask> {
    Ok(threshold_glints(img, region, threshold)?.dilated(dilate))
}

/// Fill glint pixels from the outside in: each pass sets every unfilled
/// pixel that touches a known 8-neighbor to the mean of its known
/// neighbors, using only values known before the pass.
pub fn remove_glints(img: &GrayImage, glints: &GlintMask) -> Result<GrayImage> {
    check_dims(img, glints)?;
    let (w, h) = (img.width(), img.height());
    if glints.count() == 0 {
        return Ok(img.clone());
    }
    if glints.count() == w * h {
        return Err(Error::AllGlint);
    }
    let mut values: Vec<f64> = img.data().iter().map(|&v| v as f64).collect();
    let mut known: Vec<bool> = glints.bits().iter().map(|&g| !g).collect();
    let mut pending: Vec<usize> = (0..w * h).filter(|&i| !known[i]).collect();
    while !pending.is_empty() {
        let mut updates = Vec::new();
        let mut rest = Vec::new();
        for &i in &pending {
            let (x, y) = (i % w, i / w);
            let mut sum = 0.0;
            let mut n = 0usize;
            for yy in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                for xx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                    let j = yy * w + xx;
                    if j != i && known[j] {
                        sum += values[j];
                        n += 1;
                    }
                }
            }
            if n > 0 {
                updates.push((i, sum / n as f64));
            } else {
                rest.push(i);
            }
        }
        if updates.is_empty() {
            return Err(Error::AllGlint);
        }
        for (i, v) in updates {
            values[i] = v;
            known[i] = true;
        }
        pending = rest;
    }
    let data = values
        .iter()
        .map(|v| v.round().clamp(0.0, 255.0) as u8)
        .collect();
    GrayImage::new(w, h, data)
}

/// Copy glint pixels from `source` onto `generated`.
pub fn restore_glints(
    generated: &GrayImage,
    source: &GrayImage,
    glints: &GlintMask,
) -> Result<GrayImage> {
    check_dims(generated, source)?;
    check_dims(generated, glints)?;
    let mut out = generated.clone();
    for ((o, &s), &g) in out
        .data_mut()
        .iter_mut()
        .zip(source.data())
        .zip(glints.bits())
    {
        if g {
            *o = s;
        }
    }
    Ok(out)
}
