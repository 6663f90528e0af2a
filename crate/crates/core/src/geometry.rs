//! Ellipse model, mask boundary extraction, direct least-squares ellipse
//! fitting and per-ray radial profiles of the eye.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::raster::{Label, SegMask};

/// Rotated ellipse `(h, k, a, b, theta)`.
///
/// Normalized on construction so that `a >= b` and `theta` lies in
/// `[-pi/2, pi/2)`. `theta` rotates the major axis from `+x` toward `+y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipse {
    pub h: f64,
    pub k: f64,
    pub a: f64,
    pub b: f64,
    pub theta: f64,
}

impl Ellipse {
    pub fn new(h: f64, k: f64, a: f64, b: f64, theta: f64) -> Result<Self> {
        let finite = [h, k, a, b, theta].iter().all(|v| v.is_finite());
        if !finite || a <= 0.0 || b <= 0.0 {
            return Err(Error::InvalidParam(format!(
                "ellipse ({h}, {k}, {a}, {b}, {theta})"
            )));
        }
        let (a, b, theta) = if a < b {
            (b, a, theta + FRAC_PI_2)
        } else {
            (a, b, theta)
        };
        Ok(Self {
            h,
            k,
            a,
            b,
            theta: normalize_axis_angle(theta),
        })
    }

    pub fn circle(h: f64, k: f64, r: f64) -> Result<Self> {
        Self::new(h, k, r, r, 0.0)
    }

    #[inline]
    pub fn center(&self) -> (f64, f64) {
        (self.h, self.k)
    }

    /// Coordinates of `(x, y)` in the ellipse frame (major axis along `u`).
    #[inline]
    pub fn to_local(&self, x: f64, y: f64) -> (f64, f64) {
        let (s, c) = self.theta.sin_cos();
        let dx = x - self.h;
        let dy = y - self.k;
        (dx * c + dy * s, dy * c - dx * s)
    }

    /// `u^2/a^2 + v^2/b^2`: 0 at the center, 1 on the boundary.
    #[inline]
    pub fn implicit(&self, x: f64, y: f64) -> f64 {
        let (u, v) = self.to_local(x, y);
        u * u / (self.a * self.a) + v * v / (self.b * self.b)
    }

    #[inline]
    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.implicit(x, y) < 1.0
    }

    /// Point at parametric angle `t` (not the polar angle).
    pub fn point_at(&self, t: f64) -> (f64, f64) {
        let (s, c) = self.theta.sin_cos();
        let u = self.a * t.cos();
        let v = self.b * t.sin();
        (self.h + u * c - v * s, self.k + u * s + v * c)
    }

    /// Same ellipse with both semi-axes grown by `d`.
    pub fn grown(&self, d: f64) -> Result<Self> {
        Self::new(self.h, self.k, self.a + d, self.b + d, self.theta)
    }

    /// Distance along the ray `origin + t (cos phi, sin phi)` to the boundary.
    /// `None` unless the origin is strictly inside.
    pub fn ray_distance(&self, origin: (f64, f64), phi: f64) -> Option<f64> {
        let (u0, v0) = self.to_local(origin.0, origin.1);
        let (s, c) = self.theta.sin_cos();
        let (dy, dx) = phi.sin_cos();
        let du = dx * c + dy * s;
        let dv = dy * c - dx * s;
        let ia = 1.0 / (self.a * self.a);
        let ib = 1.0 / (self.b * self.b);
        let qa = du * du * ia + dv * dv * ib;
        let qb = 2.0 * (u0 * du * ia + v0 * dv * ib);
        let qc = u0 * u0 * ia + v0 * v0 * ib - 1.0;
        if qc >= 0.0 {
            return None;
        }
        let disc = (qb * qb - 4.0 * qa * qc).sqrt();
        // qc < 0 so the roots have opposite signs; take the positive one
        // without cancellation.
        let t = if qb <= 0.0 {
            (-qb + disc) / (2.0 * qa)
        } else {
            2.0 * qc / (-qb - disc)
        };
        Some(t)
    }
}

/// Map an axis angle to `[-pi/2, pi/2)`; axes are pi-periodic.
pub fn normalize_axis_angle(theta: f64) -> f64 {
    let t = (theta + FRAC_PI_2).rem_euclid(PI) - FRAC_PI_2;
    if t >= FRAC_PI_2 {
        -FRAC_PI_2
    } else {
        t
    }
}

/// Ray direction for angle `phi`.
#[inline]
pub fn ray_dir(phi: f64) -> (f64, f64) {
    let (s, c) = phi.sin_cos();
    (c, s)
}

/// Angle in `[0, 2pi)` of the offset `(dx, dy)`.
#[inline]
pub fn angle_of(dx: f64, dy: f64) -> f64 {
    let a = dy.atan2(dx);
    if a < 0.0 {
        a + TAU
    } else {
        a
    }
}

/// Pixels of class `cls` that are 4-adjacent to an in-image pixel of another
/// class, in row-major order.
pub fn boundary_points(mask: &SegMask, cls: Label) -> Vec<(usize, usize)> {
    boundary_points_where(mask, |l| l == cls)
}

/// Like [`boundary_points`] for a region given by a label predicate.
pub fn boundary_points_where(
    mask: &SegMask,
    inside: impl Fn(Label) -> bool,
) -> Vec<(usize, usize)> {
    let (w, h) = (mask.width(), mask.height());
    let mut out = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if !inside(mask.get(x, y)) {
                continue;
            }
            if neighbors4(x, y, w, h).any(|(nx, ny)| !inside(mask.get(nx, ny))) {
                out.push((x, y));
            }
        }
    }
    out
}

/// Sub-pixel boundary samples of a region: the midpoint between each
/// boundary pixel and each of its 4-neighbors outside the region. These sit
/// on the pixel cracks, so a fitted ellipse is not biased toward the inside.
/// The flag reports the label of the inner pixel.
pub fn boundary_crack_points(
    mask: &SegMask,
    inside: impl Fn(Label) -> bool,
) -> Vec<(f64, f64, Label)> {
    let (w, h) = (mask.width(), mask.height());
    let mut out = Vec::new();
    for (x, y) in boundary_points_where(mask, &inside) {
        for (nx, ny) in neighbors4(x, y, w, h) {
            if !inside(mask.get(nx, ny)) {
                out.push(((x + nx) as f64 * 0.5, (y + ny) as f64 * 0.5, mask.get(x, y)));
            }
        }
    }
    out
}

fn neighbors4(x: usize, y: usize, w: usize, h: usize) -> impl Iterator<Item = (usize, usize)> {
    let cand = [
        (x.checked_sub(1), Some(y)),
        (if x + 1 < w { Some(x + 1) } else { None }, Some(y)),
        (Some(x), y.checked_sub(1)),
        (Some(x), if y + 1 < h { Some(y + 1) } else { None }),
    ];
    cand.into_iter().filter_map(|(a, b)| Some((a?, b?)))
}

/// Direct least-squares ellipse fit (ellipse-specific conic constraint
/// `4AC - B^2 = 1`), solved in the numerically stable reduced 3x3 form.
/// Points are centered and scaled before fitting.
pub fn fit_ellipse(points: &[(f64, f64)]) -> Result<Ellipse> {
    if points.len() < 5 {
        return Err(Error::InsufficientPoints(points.len()));
    }
    let n = points.len() as f64;
    let (mx, my) = points
        .iter()
        .fold((0.0, 0.0), |(sx, sy), &(x, y)| (sx + x, sy + y));
    let (mx, my) = (mx / n, my / n);
    let spread = points
        .iter()
        .map(|&(x, y)| (x - mx).powi(2) + (y - my).powi(2))
        .sum::<f64>()
        / n;
    let scale = (spread / 2.0).sqrt();
    if !(scale > 0.0) {
        return Err(Error::DegenerateFit("all points coincide"));
    }

    let mut s1 = Matrix3::<f64>::zeros();
    let mut s2 = Matrix3::<f64>::zeros();
    let mut s3 = Matrix3::<f64>::zeros();
    for &(px, py) in points {
        let x = (px - mx) / scale;
        let y = (py - my) / scale;
        let quad = Vector3::new(x * x, x * y, y * y);
        let lin = Vector3::new(x, y, 1.0);
        s1 += quad * quad.transpose();
        s2 += quad * lin.transpose();
        s3 += lin * lin.transpose();
    }
    let s3_inv = s3
        .try_inverse()
        .ok_or(Error::DegenerateFit("collinear points"))?;
    let t = -s3_inv * s2.transpose();
    let m = s1 + s2 * t;
    // Premultiply by the inverse of the constraint block [[0,0,2],[0,-1,0],[2,0,0]].
    let reduced = Matrix3::from_rows(&[(m.row(2) * 0.5), (-m.row(1)), (m.row(0) * 0.5)]);

    let mut best: Option<(f64, Vector3<f64>)> = None;
    for ev in reduced.complex_eigenvalues().iter() {
        if ev.im.abs() > 1e-9 * (1.0 + ev.re.abs()) {
            continue;
        }
        let Some(v) = null_vector(&(reduced - Matrix3::identity() * ev.re)) else {
            continue;
        };
        let cond = 4.0 * v[0] * v[2] - v[1] * v[1];
        if cond > 0.0 {
            // Among admissible eigenvectors, the smallest eigenvalue is the
            // least-squares minimum.
            if best.as_ref().is_none_or(|(lambda, _)| ev.re < *lambda) {
                best = Some((ev.re, v));
            }
        }
    }
    let (_, quad) = best.ok_or(Error::DegenerateFit("conic is not an ellipse"))?;
    let lin = t * quad;
    let conic = [quad[0], quad[1], quad[2], lin[0], lin[1], lin[2]];
    let local = conic_to_ellipse(conic)?;
    Ellipse::new(
        mx + scale * local.h,
        my + scale * local.k,
        scale * local.a,
        scale * local.b,
        local.theta,
    )
}

/// Null vector of a (numerically) rank-2 3x3 matrix: the right singular
/// vector of its smallest singular value.
fn null_vector(m: &Matrix3<f64>) -> Option<Vector3<f64>> {
    let svd = m.svd(false, true);
    let v_t = svd.v_t?;
    let (i, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))?;
    let v: Vector3<f64> = v_t.row(i).transpose();
    v.iter().all(|x| x.is_finite()).then_some(v)
}

/// General conic `Ax^2 + Bxy + Cy^2 + Dx + Ey + F = 0` to ellipse parameters.
fn conic_to_ellipse(c: [f64; 6]) -> Result<Ellipse> {
    let [mut a, mut b, mut cc, mut d, mut e, mut f] = c;
    if a + cc < 0.0 {
        a = -a;
        b = -b;
        cc = -cc;
        d = -d;
        e = -e;
        f = -f;
    }
    let den = b * b - 4.0 * a * cc;
    if den >= 0.0 {
        return Err(Error::DegenerateFit("conic is not an ellipse"));
    }
    let x0 = (2.0 * cc * d - b * e) / den;
    let y0 = (2.0 * a * e - b * d) / den;
    let f0 = f + 0.5 * (d * x0 + e * y0);
    // Eigenvalues of [[a, b/2], [b/2, cc]].
    let mean = 0.5 * (a + cc);
    let half_diff = (0.25 * (a - cc).powi(2) + 0.25 * b * b).sqrt();
    let l_small = mean - half_diff;
    let l_large = mean + half_diff;
    if l_small <= 0.0 || f0 >= 0.0 {
        return Err(Error::DegenerateFit("conic is imaginary or degenerate"));
    }
    let major = (-f0 / l_small).sqrt();
    let minor = (-f0 / l_large).sqrt();
    // 0.5 atan2(b, a - cc) points along the large-eigenvalue (minor) axis.
    let theta = 0.5 * b.atan2(a - cc) + FRAC_PI_2;
    Ellipse::new(x0, y0, major, minor, theta)
}

/// Pupil and limbus ellipses of one eye.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EyeEllipses {
    pub pupil: Ellipse,
    pub iris: Ellipse,
}

/// Fit the pupil boundary and the limbus (outer boundary of iris and pupil
/// together) of a segmentation mask.
pub fn fit_eye_ellipses(mask: &SegMask) -> Result<EyeEllipses> {
    let pupil_pts: Vec<(f64, f64)> = boundary_crack_points(mask, |l| l == Label::Pupil)
        .into_iter()
        .map(|(x, y, _)| (x, y))
        .collect();
    let pupil = fit_ellipse(&pupil_pts)?;

    let limbus = boundary_crack_points(mask, Label::is_eye_disk);
    let iris_backed = limbus.iter().filter(|p| p.2 == Label::Iris).count();
    if iris_backed < 5 {
        return Err(Error::InsufficientPoints(iris_backed));
    }
    let limbus_pts: Vec<(f64, f64)> = limbus.into_iter().map(|(x, y, _)| (x, y)).collect();
    let iris = fit_ellipse(&limbus_pts)?;

    if !iris.contains(pupil.h, pupil.k) {
        return Err(Error::GeometryInconsistent(
            "pupil center lies outside the iris ellipse".into(),
        ));
    }
    Ok(EyeEllipses { pupil, iris })
}

/// Per-ray geometry of the source eye, rays cast from the pupil center.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub origin: (f64, f64),
    pub n_theta: usize,
    pub pupil_extent: Vec<f64>,
    pub iris_extent: Vec<f64>,
    /// Per ray, `(start, end)` distances of runs sampled as iris in the mask.
    pub visible_iris_runs: Vec<Vec<(f64, f64)>>,
    /// Maximum of `iris_extent`.
    pub max_radius: f64,
}

impl RadialProfile {
    #[inline]
    pub fn ray_angle(&self, j: usize) -> f64 {
        TAU * j as f64 / self.n_theta as f64
    }

    /// Pupil and iris extents at an arbitrary angle, linear between rays.
    pub fn extents_at(&self, phi: f64) -> (f64, f64) {
        let pos = phi.rem_euclid(TAU) / TAU * self.n_theta as f64;
        let j0 = (pos.floor() as usize) % self.n_theta;
        let j1 = (j0 + 1) % self.n_theta;
        let f = pos - pos.floor();
        let lerp = |v: &[f64]| v[j0] + (v[j1] - v[j0]) * f;
        (lerp(&self.pupil_extent), lerp(&self.iris_extent))
    }
}

pub fn compute_radial_profile(
    mask: &SegMask,
    pupil: &Ellipse,
    iris: &Ellipse,
    n_theta: usize,
) -> Result<RadialProfile> {
    if n_theta < 8 {
        return Err(Error::InvalidParam(format!("n_theta {n_theta} < 8")));
    }
    let origin = pupil.center();
    let mut pupil_extent = Vec::with_capacity(n_theta);
    let mut iris_extent = Vec::with_capacity(n_theta);
    for j in 0..n_theta {
        let phi = TAU * j as f64 / n_theta as f64;
        let pe = pupil
            .ray_distance(origin, phi)
            .ok_or_else(|| Error::GeometryInconsistent("pupil center on its boundary".into()))?;
        let ie = iris.ray_distance(origin, phi).ok_or_else(|| {
            Error::GeometryInconsistent("pupil center outside the iris ellipse".into())
        })?;
        if ie <= pe {
            return Err(Error::GeometryInconsistent(format!(
                "ray {j}: iris extent {ie:.3} <= pupil extent {pe:.3}"
            )));
        }
        pupil_extent.push(pe);
        iris_extent.push(ie);
    }
    let max_radius = iris_extent.iter().copied().fold(f64::MIN, f64::max);

    let steps = max_radius.floor() as usize;
    let visible_iris_runs = (0..n_theta)
        .map(|j| {
            let (dx, dy) = ray_dir(TAU * j as f64 / n_theta as f64);
            let mut runs = Vec::new();
            let mut start: Option<f64> = None;
            let mut last = 0.0;
            for s in 0..=steps {
                let t = s as f64;
                let is_iris =
                    mask.nearest(origin.0 + t * dx, origin.1 + t * dy) == Some(Label::Iris);
                match (is_iris, start) {
                    (true, None) => start = Some(t),
                    (false, Some(s0)) => {
                        runs.push((s0, last));
                        start = None;
                    }
                    _ => {}
                }
                last = t;
            }
            if let Some(s0) = start {
                runs.push((s0, last));
            }
            runs
        })
        .collect();

    Ok(RadialProfile {
        origin,
        n_theta,
        pupil_extent,
        iris_extent,
        visible_iris_runs,
        max_radius,
    })
}
