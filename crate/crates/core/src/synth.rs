//! Seeded synthetic eye frames with exact segmentation masks, used in place
//! of a recorded dataset for end-to-end checks.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{angle_of, Ellipse};
use crate::raster::{GrayImage, Label, SegMask};

const GLINT_RADIUS: f64 = 1.5;
const IRIS_RANGE: (f64, f64) = (40.0, 170.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TextureKind {
    Bands,
    NoiseBlobs,
    SmoothGradient,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthEyeSpec {
    pub width: usize,
    pub height: usize,
    pub pupil: Ellipse,
    pub iris: Ellipse,
    pub seed: u64,
    pub texture: TextureKind,
    /// Fraction of the iris height hidden under the upper eyelid.
    pub occlusion: f64,
    pub glints: Vec<(f64, f64)>,
    /// Scales both pupil semi-axes.
    pub pupil_dilation: f64,
}

impl SynthEyeSpec {
    pub fn effective_pupil(&self) -> Result<Ellipse> {
        Ellipse::new(
            self.pupil.h,
            self.pupil.k,
            self.pupil.a * self.pupil_dilation,
            self.pupil.b * self.pupil_dilation,
            self.pupil.theta,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if self.width < 16 || self.height < 16 {
            return bad(format!("frame {}x{}", self.width, self.height));
        }
        if !(0.0..=0.5).contains(&self.occlusion) {
            return bad(format!("occlusion {}", self.occlusion));
        }
        if !(self.pupil_dilation > 0.0) {
            return bad(format!("pupil dilation {}", self.pupil_dilation));
        }
        let pupil = self
            .effective_pupil()
            .map_err(|e| Error::InvalidSpec(e.to_string()))?;
        let pupil_inside = (0..64).all(|i| {
            let (x, y) = pupil.point_at(TAU * i as f64 / 64.0);
            self.iris.implicit(x, y) < 1.0
        });
        if !pupil_inside {
            return bad("pupil not inside iris".into());
        }
        let (hw, hh) = half_extents(&self.iris);
        let fits = self.iris.h - hw >= 1.0
            && self.iris.h + hw <= (self.width - 2) as f64
            && self.iris.k - hh >= 1.0
            && self.iris.k + hh <= (self.height - 2) as f64;
        if !fits {
            return bad("iris not inside frame".into());
        }
        Ok(())
    }
}

/// Half width and half height of the axis-aligned bounding box.
fn half_extents(e: &Ellipse) -> (f64, f64) {
    let (s, c) = e.theta.sin_cos();
    (
        ((e.a * c).powi(2) + (e.b * s).powi(2)).sqrt(),
        ((e.a * s).powi(2) + (e.b * c).powi(2)).sqrt(),
    )
}

/// Render the eye described by `spec`: dark pupil (counts 0..=20), textured
/// iris, bright sclera (180..=220), skin background, an upper eyelid that
/// relabels the top of the eye as sclera, and saturated glints.
pub fn synth_eye(spec: &SynthEyeSpec) -> Result<(GrayImage, SegMask)> {
    spec.validate()?;
    let pupil = spec.effective_pupil()?;
    let iris = spec.iris;
    let opening = Ellipse::new(iris.h, iris.k, iris.a * 2.4, iris.b * 1.35, 0.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let texture = Texture::new(spec.texture, &iris, &mut rng);

    let (_, half_h) = half_extents(&iris);
    let lid = iris.k - half_h + spec.occlusion * 2.0 * half_h;

    let (w, h) = (spec.width, spec.height);
    let mut img = GrayImage::filled(w, h, 0);
    let mut mask = SegMask::filled(w, h, Label::Background);
    for y in 0..h {
        for x in 0..w {
            let (fx, fy) = (x as f64, y as f64);
            let mut label = if pupil.implicit(fx, fy) <= 1.0 {
                Label::Pupil
            } else if iris.implicit(fx, fy) <= 1.0 {
                Label::Iris
            } else if opening.implicit(fx, fy) <= 1.0 {
                Label::Sclera
            } else {
                Label::Background
            };
            if label != Label::Background && spec.occlusion > 0.0 && fy < lid {
                label = Label::Sclera;
            }
            let v = match label {
                Label::Pupil => rng.gen_range(4.0..16.0),
                Label::Iris => texture.value(fx, fy) + rng.gen_range(-3.0..3.0),
                Label::Sclera => 200.0 + rng.gen_range(-12.0..12.0),
                Label::Background => 140.0 + rng.gen_range(-15.0..15.0),
            };
            let v = match label {
                Label::Iris => v.clamp(IRIS_RANGE.0, IRIS_RANGE.1),
                _ => v,
            };
            img.set(x, y, v.round().clamp(0.0, 255.0) as u8);
            mask.set(x, y, label);
        }
    }
    for &(gx, gy) in &spec.glints {
        let r = GLINT_RADIUS.ceil() as i64;
        for dy in -r..=r {
            for dx in -r..=r {
                let (x, y) = (gx.round() as i64 + dx, gy.round() as i64 + dy);
                if x < 0 || y < 0 || x >= w as i64 || y >= h as i64 {
                    continue;
                }
                if (x as f64 - gx).hypot(y as f64 - gy) <= GLINT_RADIUS {
                    img.set(x as usize, y as usize, 255);
                }
            }
        }
    }
    Ok((img, mask))
}

enum Texture {
    Blobs {
        base: f64,
        blobs: Vec<(f64, f64, f64, f64)>,
    },
    Bands {
        base: f64,
        center: (f64, f64),
        radius: f64,
        waves: Vec<(f64, f64, f64, f64)>,
    },
    Gradient {
        center: (f64, f64),
        radius: f64,
        phase: f64,
    },
}

impl Texture {
    fn new(kind: TextureKind, iris: &Ellipse, rng: &mut ChaCha8Rng) -> Self {
        let radius = iris.a;
        match kind {
            TextureKind::NoiseBlobs => {
                let n = (0.12 * PI * iris.a * iris.b) as usize;
                let blobs = (0..n)
                    .map(|_| {
                        let t = rng.gen_range(0.0..TAU);
                        let r = radius * rng.gen_range(0.0f64..1.0).sqrt();
                        let amp =
                            rng.gen_range(18.0..45.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                        let sigma = rng.gen_range(1.5..3.5);
                        (iris.h + r * t.cos(), iris.k + r * t.sin(), amp, sigma)
                    })
                    .collect();
                Texture::Blobs {
                    base: rng.gen_range(95.0..115.0),
                    blobs,
                }
            }
            TextureKind::Bands => {
                let waves = (0..6)
                    .map(|_| {
                        let freq = rng.gen_range(6..28) as f64;
                        let radial = rng.gen_range(-6.0..6.0);
                        let amp = rng.gen_range(8.0..20.0);
                        (freq, radial, amp, rng.gen_range(0.0..TAU))
                    })
                    .collect();
                Texture::Bands {
                    base: rng.gen_range(95.0..115.0),
                    center: iris.center(),
                    radius,
                    waves,
                }
            }
            TextureKind::SmoothGradient => Texture::Gradient {
                center: iris.center(),
                radius,
                phase: rng.gen_range(0.0..TAU),
            },
        }
    }

    fn value(&self, x: f64, y: f64) -> f64 {
        match self {
            Texture::Blobs { base, blobs } => {
                let mut v = *base;
                for &(bx, by, amp, sigma) in blobs {
                    let d2 = (x - bx).powi(2) + (y - by).powi(2);
                    if d2 < 16.0 * sigma * sigma {
                        v += amp * (-d2 / (2.0 * sigma * sigma)).exp();
                    }
                }
                v
            }
            Texture::Bands {
                base,
                center,
                radius,
                waves,
            } => {
                let (dx, dy) = (x - center.0, y - center.1);
                let phi = angle_of(dx, dy);
                let rho = dx.hypot(dy) / radius;
                base + waves
                    .iter()
                    .map(|&(f, radial, amp, ph)| amp * (f * phi + radial * rho * TAU + ph).cos())
                    .sum::<f64>()
            }
            Texture::Gradient {
                center,
                radius,
                phase,
            } => {
                let (dx, dy) = (x - center.0, y - center.1);
                let rho = dx.hypot(dy) / radius;
                70.0 + 60.0 * rho + 8.0 * (angle_of(dx, dy) + phase).cos()
            }
        }
    }
}

/// Frame size of the built-in corpus.
pub const CORPUS_FRAME: (usize, usize) = (200, 150);

/// Seeded source eyes for dataset-free runs: varied position, size,
/// ellipticity, rotation, pupil offset and dilation, light eyelid occlusion
/// and two glints on the iris.
pub fn default_corpus(n: usize, seed: u64) -> Vec<SynthEyeSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let texture = if i % 2 == 0 {
                TextureKind::NoiseBlobs
            } else {
                TextureKind::Bands
            };
            random_eye(&mut rng, texture, rng_seed(seed, i), 0.15)
        })
        .collect()
}

/// The donor eye used with [`default_corpus`].
pub fn default_target(seed: u64) -> SynthEyeSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7A59_E7D0);
    random_eye(
        &mut rng,
        TextureKind::NoiseBlobs,
        rng_seed(seed, usize::MAX),
        0.0,
    )
}

fn rng_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(i as u64)
        .rotate_left(17)
}

fn random_eye(
    rng: &mut ChaCha8Rng,
    texture: TextureKind,
    seed: u64,
    max_occlusion: f64,
) -> SynthEyeSpec {
    let (w, h) = CORPUS_FRAME;
    let a = rng.gen_range(36.0..44.0);
    let b = a * rng.gen_range(0.84..0.96);
    let theta = rng.gen_range(-PI / 2.0..PI / 2.0);
    let cx = rng.gen_range(85.0..115.0);
    let cy = rng.gen_range(66.0..84.0);
    let iris = Ellipse::new(cx, cy, a, b, theta).expect("positive axes");
    let pr = rng.gen_range(12.0..16.0);
    let pupil = Ellipse::new(
        cx + rng.gen_range(-3.0..3.0),
        cy + rng.gen_range(-3.0..3.0),
        pr,
        pr * rng.gen_range(0.9..1.0),
        rng.gen_range(-PI / 2.0..PI / 2.0),
    )
    .expect("positive axes");
    let pupil_dilation = rng.gen_range(0.9..1.15);
    let occlusion = if max_occlusion > 0.0 {
        rng.gen_range(0.0..max_occlusion)
    } else {
        0.0
    };
    // Glints halfway across the annulus, kept below the eyelid.
    let glints = (0..2)
        .map(|_| {
            let phi = rng.gen_range(0.25 * PI..0.75 * PI)
                + if rng.gen_bool(0.5) { 0.0 } else { 0.5 * PI };
            let frac = rng.gen_range(0.55..0.7);
            let (s, c) = phi.sin_cos();
            let pe = pupil.ray_distance(pupil.center(), phi).unwrap_or(pr) * pupil_dilation;
            let ie = iris.ray_distance(pupil.center(), phi).unwrap_or(a);
            let t = pe + frac * (ie - pe);
            (pupil.h + t * c, pupil.k + t * s)
        })
        .collect();
    SynthEyeSpec {
        width: w,
        height: h,
        pupil,
        iris,
        seed,
        texture,
        occlusion,
        glints,
        pupil_dilation,
    }
}
