use std::collections::{BTreeMap, VecDeque};

use crate::error::{Error, Result};
use crate::geometry::{
    boundary_crack_points, compute_radial_profile, fit_ellipse, fit_eye_ellipses, EyeEllipses,
};
use crate::glint::{detect_glints, restore_glints, GlintMask};
use crate::iriscode::{encode, hamming};
use crate::privacy::{blend, median_count, median_iris};
use crate::raster::{check_dims, GrayImage, Label, SegMask};
use crate::synthesis::{
    composite, iris_histogram, ks_distance, layer_histogram, match_histogram, render_iris, Donor,
};

use super::config::{Mode, PipelineConfig};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FrameStatus {
    Ok,
    Skipped(String),
}

impl FrameStatus {
    pub fn is_ok(&self) -> bool {
        matches!(self, FrameStatus::Ok)
    }

    pub fn skipped(e: &Error) -> Self {
        FrameStatus::Skipped(e.kind().to_string())
    }
}

impl std::fmt::Display for FrameStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FrameStatus::Ok => f.write_str("ok"),
            FrameStatus::Skipped(reason) => write!(f, "skipped({reason})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeResult {
    pub mode: Mode,
    pub status: FrameStatus,
    /// Masked Hamming distance between the source and output iris codes.
    pub hd: Option<f64>,
    /// Pupil center detected on the output image.
    pub pupil_center: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameResult {
    pub frame_id: String,
    pub status: FrameStatus,
    /// One entry per requested mode, in canonical mode order.
    pub modes: Vec<ModeResult>,
    /// Pupil center fitted on the input mask.
    pub reference_center: Option<(f64, f64)>,
    /// KS distance between the matched donor layer and the source iris.
    pub histogram_ks: Option<f64>,
    pub covered_pixels: usize,
}

impl FrameResult {
    fn skipped(frame_id: &str, modes: &[Mode], reason: FrameStatus) -> Self {
        Self {
            frame_id: frame_id.to_string(),
            status: reason.clone(),
            modes: modes
                .iter()
                .map(|&mode| ModeResult {
                    mode,
                    status: reason.clone(),
                    hd: None,
                    pupil_center: None,
                })
                .collect(),
            reference_center: None,
            histogram_ks: None,
            covered_pixels: 0,
        }
    }

    pub fn mode(&self, mode: Mode) -> Option<&ModeResult> {
        self.modes.iter().find(|m| m.mode == mode)
    }

    pub fn hd(&self, mode: Mode) -> Option<f64> {
        self.mode(mode).and_then(|m| m.hd)
    }
}

#[derive(Debug, Clone)]
pub struct FrameOutput {
    pub result: FrameResult,
    pub images: BTreeMap<Mode, GrayImage>,
}

/// Replace the iris of one frame with the donor's, producing one image per
/// requested mode. Geometry and data problems never fail the call: the frame
/// comes back skipped with the error kind as reason.
pub fn process_frame(
    frame_id: &str,
    source: &GrayImage,
    mask: &SegMask,
    donor: &Donor,
    cfg: &PipelineConfig,
) -> FrameOutput {
    let modes = cfg.mode_set();
    match run(frame_id, source, mask, donor, cfg, &modes) {
        Ok(out) => out,
        Err(e) => FrameOutput {
            result: FrameResult::skipped(frame_id, &modes, FrameStatus::skipped(&e)),
            images: BTreeMap::new(),
        },
    }
}

fn run(
    frame_id: &str,
    source: &GrayImage,
    mask: &SegMask,
    donor: &Donor,
    cfg: &PipelineConfig,
    modes: &[Mode],
) -> Result<FrameOutput> {
    check_dims(source, mask)?;
    let eye = fit_eye_ellipses(mask)?;
    let profile = compute_radial_profile(mask, &eye.pupil, &eye.iris, cfg.n_theta)?;
    let glints = detect_glints(source, Some(mask), cfg.glint_threshold, cfg.glint_dilate)?;

    let template = donor.template_for(&profile, &eye.iris)?;
    let layer = render_iris(&template, &profile, mask);
    let layer = match_histogram(&layer, source, mask, Some(&glints))?;
    let ks = ks_distance(
        &layer_histogram(&layer),
        &iris_histogram(source, mask, Some(&glints))?,
    );
    let generated = restore_glints(&composite(source, &layer)?, source, &glints)?;

    let mut images = BTreeMap::new();
    for &mode in modes {
        let img = match mode {
            Mode::Generated => generated.clone(),
            Mode::Blended => {
                let b = blend(
                    source,
                    &generated,
                    mask,
                    &eye.iris,
                    &eye.pupil,
                    &cfg.blend_params(),
                )?;
                restore_glints(&b, source, &glints)?
            }
            Mode::Median => restore_glints(&median_iris(source, mask)?, source, &glints)?,
        };
        images.insert(mode, img);
    }

    let threshold = pupil_threshold(source, mask);
    let source_code = if cfg.emit_metrics {
        Some(encode(
            source,
            mask,
            &eye.pupil,
            &eye.iris,
            &cfg.encoding,
            &glints,
        ))
    } else {
        None
    };
    let results = images
        .iter()
        .map(|(&mode, img)| {
            let hd = source_code
                .as_ref()
                .and_then(|c| c.as_ref().ok())
                .and_then(|c| output_hd(c, img, mask, &eye, cfg, &glints).ok());
            let pupil_center = threshold.and_then(|t| detect_pupil_center(img, mask, t).ok());
            ModeResult {
                mode,
                status: FrameStatus::Ok,
                hd,
                pupil_center,
            }
        })
        .collect();

    Ok(FrameOutput {
        result: FrameResult {
            frame_id: frame_id.to_string(),
            status: FrameStatus::Ok,
            modes: results,
            reference_center: Some(eye.pupil.center()),
            histogram_ks: Some(ks),
            covered_pixels: layer.covered_count(),
        },
        images,
    })
}

fn output_hd(
    source_code: &crate::iriscode::IrisCode,
    img: &GrayImage,
    mask: &SegMask,
    eye: &EyeEllipses,
    cfg: &PipelineConfig,
    glints: &GlintMask,
) -> Result<f64> {
    let code = encode(img, mask, &eye.pupil, &eye.iris, &cfg.encoding, glints)?;
    Ok(hamming(source_code, &code, cfg.encoding.shift_range)?.0)
}

/// Dark-pupil threshold: halfway between the brightest pupil and darkest
/// iris count of the source when they separate, else between the medians.
/// Outputs only draw iris values from the source iris range, so a separating
/// threshold picks out the same pupil on every mode.
fn pupil_threshold(source: &GrayImage, mask: &SegMask) -> Option<u8> {
    let mut pupil = Vec::new();
    let mut iris = Vec::new();
    for (&v, &l) in source.data().iter().zip(mask.labels()) {
        match l {
            Label::Pupil => pupil.push(v),
            Label::Iris => iris.push(v),
            _ => {}
        }
    }
    let p_max = *pupil.iter().max()?;
    let i_min = *iris.iter().min()?;
    if p_max < i_min {
        return Some(((p_max as u16 + i_min as u16) / 2) as u8);
    }
    let p = median_count(&mut pupil)?;
    let i = median_count(&mut iris)?;
    (p < i).then(|| ((p as u16 + i as u16) / 2) as u8)
}

/// Pupil center of an image: pixels at or below `threshold` inside the eye
/// disk of `region`, largest 4-connected component, holes filled, ellipse
/// fitted to its crack boundary.
pub fn detect_pupil_center(img: &GrayImage, region: &SegMask, threshold: u8) -> Result<(f64, f64)> {
    check_dims(img, region)?;
    let (w, h) = (img.width(), img.height());
    let dark: Vec<bool> = img
        .data()
        .iter()
        .zip(region.labels())
        .map(|(&v, &l)| v <= threshold && l.is_eye_disk())
        .collect();

    let mut comp = vec![usize::MAX; w * h];
    let mut best = (0usize, usize::MAX);
    let mut next = 0;
    for start in 0..w * h {
        if !dark[start] || comp[start] != usize::MAX {
            continue;
        }
        let size = flood(&mut comp, start, w, h, next, |i| dark[i]);
        if size > best.0 {
            best = (size, next);
        }
        next += 1;
    }
    if best.0 == 0 {
        return Err(Error::EmptyRegion("no dark pixels"));
    }
    let blob: Vec<bool> = comp.iter().map(|&c| c == best.1).collect();

    // Anything not reachable from the border through non-blob pixels is a hole.
    let mut outside = vec![usize::MAX; w * h];
    for i in 0..w * h {
        let (x, y) = (i % w, i / w);
        let border = x == 0 || y == 0 || x + 1 == w || y + 1 == h;
        if border && !blob[i] && outside[i] == usize::MAX {
            flood(&mut outside, i, w, h, 0, |j| !blob[j]);
        }
    }
    let filled = SegMask::from_fn(w, h, |x, y| {
        if outside[y * w + x] == usize::MAX {
            Label::Pupil
        } else {
            Label::Background
        }
    });
    let pts: Vec<(f64, f64)> = boundary_crack_points(&filled, |l| l == Label::Pupil)
        .into_iter()
        .map(|(x, y, _)| (x, y))
        .collect();
    Ok(fit_ellipse(&pts)?.center())
}

fn flood(
    label: &mut [usize],
    start: usize,
    w: usize,
    h: usize,
    id: usize,
    member: impl Fn(usize) -> bool,
) -> usize {
    let mut queue = VecDeque::from([start]);
    label[start] = id;
    let mut size = 0;
    while let Some(i) = queue.pop_front() {
        size += 1;
        let (x, y) = (i % w, i / w);
        let mut push = |j: usize| {
            if label[j] == usize::MAX && member(j) {
                label[j] = id;
                queue.push_back(j);
            }
        };
        if x > 0 {
            push(i - 1);
        }
        if x + 1 < w {
            push(i + 1);
        }
        if y > 0 {
            push(i - w);
        }
        if y + 1 < h {
            push(i + w);
        }
    }
    size
}
