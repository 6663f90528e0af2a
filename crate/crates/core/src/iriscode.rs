//! Iris codes for privacy checks: 1D log-Gabor phase quantization of the
//! unwrapped iris and a masked Hamming distance searched over rotations.

use std::fmt::Write as _;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Ellipse;
use crate::glint::GlintMask;
use crate::raster::{check_dims, GrayImage, Label, SegMask};
use crate::rubbersheet::{sample_points, unwrap};

/// Responses with magnitude at or below this are treated as having no
/// phase and masked out.
pub const ZERO_RESPONSE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EncodingParams {
    pub enc_n_r: usize,
    pub enc_n_theta: usize,
    /// Center wavelength of the log-Gabor filter, in angular samples.
    pub wavelength: f64,
    pub sigma_over_f: f64,
    /// Matching searches shifts in `-shift_range..=shift_range` columns.
    pub shift_range: usize,
}

impl Default for EncodingParams {
    fn default() -> Self {
        Self {
            enc_n_r: 20,
            enc_n_theta: 240,
            wavelength: 18.0,
            sigma_over_f: 0.5,
            shift_range: 8,
        }
    }
}

impl EncodingParams {
    pub fn validate(&self) -> Result<()> {
        if self.enc_n_r < 2 || self.enc_n_theta < 16 {
            return Err(Error::InvalidParam(format!(
                "encoding grid {}x{}",
                self.enc_n_r, self.enc_n_theta
            )));
        }
        if !(self.wavelength > 2.0) {
            return Err(Error::InvalidParam(format!(
                "wavelength {}",
                self.wavelength
            )));
        }
        if !(self.sigma_over_f > 0.0 && self.sigma_over_f < 1.0) {
            return Err(Error::InvalidParam(format!(
                "sigma_over_f {}",
                self.sigma_over_f
            )));
        }
        Ok(())
    }
}

/// Two phase bits per `(row, col)` plus a usability mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IrisCode {
    rows: usize,
    cols: usize,
    /// Row-major; for each position the real-part bit then the imaginary-part bit.
    bits: Vec<bool>,
    mask: Vec<bool>,
}

impl IrisCode {
    pub fn new(rows: usize, cols: usize, bits: Vec<bool>, mask: Vec<bool>) -> Result<Self> {
        if rows < 1 || cols < 16 {
            return Err(Error::InvalidParam(format!("iris code {rows}x{cols}")));
        }
        if bits.len() != 2 * rows * cols || mask.len() != rows * cols {
            return Err(Error::InvalidParam("iris code bit/mask length".into()));
        }
        Ok(Self {
            rows,
            cols,
            bits,
            mask,
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn usable_fraction(&self) -> f64 {
        self.mask.iter().filter(|&&m| m).count() as f64 / self.mask.len() as f64
    }

    /// Output column `j` takes input column `(j - shift) mod cols`.
    pub fn rotated(&self, shift: i64) -> IrisCode {
        let n = self.cols;
        let s = shift.rem_euclid(n as i64) as usize;
        let mut bits = Vec::with_capacity(self.bits.len());
        let mut mask = Vec::with_capacity(self.mask.len());
        for r in 0..self.rows {
            for j in 0..n {
                let src = r * n + (j + n - s) % n;
                bits.push(self.bits[2 * src]);
                bits.push(self.bits[2 * src + 1]);
                mask.push(self.mask[src]);
            }
        }
        IrisCode {
            rows: self.rows,
            cols: n,
            bits,
            mask,
        }
    }

    /// Text dump: `rows cols`, then one hex line per row of phase bits,
    /// then one hex line per row of mask bits. Bits are packed MSB first
    /// and each line is zero-padded to whole bytes.
    pub fn to_dump(&self) -> String {
        let mut out = format!("{} {}\n", self.rows, self.cols);
        let per_row = 2 * self.cols;
        for r in 0..self.rows {
            let _ = writeln!(
                out,
                "{}",
                hex::encode(pack(&self.bits[r * per_row..(r + 1) * per_row]))
            );
        }
        for r in 0..self.rows {
            let _ = writeln!(
                out,
                "{}",
                hex::encode(pack(&self.mask[r * self.cols..(r + 1) * self.cols]))
            );
        }
        out
    }

    pub fn from_dump(text: &str) -> Result<IrisCode> {
        let bad = |m: &str| Error::InvalidParam(format!("iris code dump: {m}"));
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("missing header"))?;
        let mut dims = header.split_whitespace().map(str::parse::<usize>);
        let (Some(Ok(rows)), Some(Ok(cols)), None) = (dims.next(), dims.next(), dims.next()) else {
            return Err(bad("header must be `rows cols`"));
        };
        let mut read = |width: usize| -> Result<Vec<bool>> {
            let line = lines.next().ok_or_else(|| bad("truncated"))?;
            let bytes = hex::decode(line.trim()).map_err(|e| bad(&e.to_string()))?;
            if bytes.len() != width.div_ceil(8) {
                return Err(bad("row length"));
            }
            Ok(unpack(&bytes, width))
        };
        let mut bits = Vec::with_capacity(2 * rows * cols);
        for _ in 0..rows {
            bits.extend(read(2 * cols)?);
        }
        let mut mask = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            mask.extend(read(cols)?);
        }
        IrisCode::new(rows, cols, bits, mask)
    }
}

fn pack(bits: &[bool]) -> Vec<u8> {
    bits.chunks(8)
        .map(|c| {
            c.iter()
                .enumerate()
                .fold(0u8, |acc, (i, &b)| acc | ((b as u8) << (7 - i)))
        })
        .collect()
}

fn unpack(bytes: &[u8], n: usize) -> Vec<bool> {
    (0..n)
        .map(|i| bytes[i / 8] >> (7 - i % 8) & 1 == 1)
        .collect()
}

/// One-sided log-Gabor transfer function over `n` FFT bins.
pub fn log_gabor(n: usize, wavelength: f64, sigma_over_f: f64) -> Vec<f64> {
    let f0 = 1.0 / wavelength;
    let denom = 2.0 * sigma_over_f.ln().powi(2);
    (0..n)
        .map(|k| {
            if k == 0 || k > n / 2 {
                0.0
            } else {
                let f = k as f64 / n as f64;
                (-(f / f0).ln().powi(2) / denom).exp()
            }
        })
        .collect()
}

/// Encode the iris between `pupil` and `iris` of `img`. A position is usable
/// when its unwrap sample is inside the image, not on a glint, labeled iris
/// in `mask`, and has a nonzero filter response.
pub fn encode(
    img: &GrayImage,
    mask: &SegMask,
    pupil: &Ellipse,
    iris: &Ellipse,
    params: &EncodingParams,
    glints: &GlintMask,
) -> Result<IrisCode> {
    params.validate()?;
    check_dims(img, mask)?;
    check_dims(img, glints)?;
    let (rows, cols) = (params.enc_n_r, params.enc_n_theta);
    let polar = unwrap(img, pupil, iris, rows, cols)?;
    let points = sample_points(pupil, iris, rows, cols)?;
    let filter = log_gabor(cols, params.wavelength, params.sigma_over_f);
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(cols);
    let inverse = planner.plan_fft_inverse(cols);

    let mut bits = Vec::with_capacity(2 * rows * cols);
    let mut usable = Vec::with_capacity(rows * cols);
    let mut buf = vec![Complex64::new(0.0, 0.0); cols];
    for r in 0..rows {
        let row = polar.row(r);
        let ok = &polar.valid()[r * cols..(r + 1) * cols];
        let n_ok = ok.iter().filter(|&&v| v).count();
        let mean = if n_ok == 0 {
            0.0
        } else {
            row.iter()
                .zip(ok)
                .filter(|(_, &v)| v)
                .map(|(&x, _)| x)
                .sum::<f64>()
                / n_ok as f64
        };
        for (c, slot) in buf.iter_mut().enumerate() {
            let v = if ok[c] { row[c] - mean } else { 0.0 };
            *slot = Complex64::new(v, 0.0);
        }
        forward.process(&mut buf);
        for (slot, &g) in buf.iter_mut().zip(&filter) {
            *slot *= g;
        }
        inverse.process(&mut buf);
        for (c, z) in buf.iter().enumerate() {
            let z = *z / cols as f64;
            bits.push(z.re > 0.0);
            bits.push(z.im > 0.0);
            let (px, py) = points[r * cols + c];
            let has_phase = z.re.abs() > ZERO_RESPONSE && z.im.abs() > ZERO_RESPONSE;
            usable.push(
                ok[c]
                    && has_phase
                    && !glints.nearest(px, py)
                    && mask.nearest(px, py) == Some(Label::Iris),
            );
        }
    }
    let code = IrisCode::new(rows, cols, bits, usable)?;
    if code.usable_fraction() < 0.1 {
        return Err(Error::EmptyRegion(
            "fewer than 10% of iris code bits usable",
        ));
    }
    Ok(code)
}

/// Masked Hamming distance at a single shift of `b`; `None` without overlap.
pub fn hamming_at(a: &IrisCode, b: &IrisCode, shift: i64) -> Option<f64> {
    let n = a.cols;
    let s = shift.rem_euclid(n as i64) as usize;
    let mut differ = 0usize;
    let mut joint = 0usize;
    for r in 0..a.rows {
        for j in 0..n {
            let ia = r * n + j;
            let ib = r * n + (j + n - s) % n;
            if a.mask[ia] && b.mask[ib] {
                joint += 1;
                differ += (a.bits[2 * ia] != b.bits[2 * ib]) as usize;
                differ += (a.bits[2 * ia + 1] != b.bits[2 * ib + 1]) as usize;
            }
        }
    }
    (joint > 0).then(|| differ as f64 / (2 * joint) as f64)
}

/// Minimum masked Hamming distance over shifts of `b` in
/// `-shift_range..=shift_range`, with the shift that attains it. Ties go to
/// the smallest `|s|`, then the negative shift.
pub fn hamming(a: &IrisCode, b: &IrisCode, shift_range: usize) -> Result<(f64, i64)> {
    if a.rows != b.rows || a.cols != b.cols {
        return Err(Error::DimensionMismatch(a.cols, a.rows, b.cols, b.rows));
    }
    let order = std::iter::once(0i64).chain((1..=shift_range as i64).flat_map(|s| [-s, s]));
    let mut best: Option<(f64, i64)> = None;
    for s in order {
        if let Some(hd) = hamming_at(a, b, s) {
            if best.is_none_or(|(b, _)| hd < b) {
                best = Some((hd, s));
            }
        }
    }
    best.ok_or(Error::NoOverlap)
}
