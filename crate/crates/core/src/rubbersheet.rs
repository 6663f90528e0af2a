//! Rubber-sheet unwrapping of the iris annulus into a `(r, phi)` rectangle.
//!
//! Row 0 is the inner (pupil) boundary and the last row the outer (limbus)
//! boundary; column `j` is the ray at `phi = 2 pi j / n_theta` cast from the
//! inner ellipse center. Every sample carries a validity bit; operations
//! that combine samples mark the result invalid if any contributing sample
//! is invalid.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::geometry::{ray_dir, Ellipse};
use crate::raster::GrayImage;

#[derive(Debug, Clone, PartialEq)]
pub struct UnwrappedIris {
    n_r: usize,
    n_theta: usize,
    values: Vec<f64>,
    valid: Vec<bool>,
}

impl UnwrappedIris {
    /// Build from row-major samples. Invalid samples may hold any value;
    /// valid ones must lie in `[0, 255]`.
    pub fn new(n_r: usize, n_theta: usize, values: Vec<f64>, valid: Vec<bool>) -> Result<Self> {
        if n_r < 2 || n_theta < 8 {
            return Err(Error::InvalidParam(format!(
                "unwrapped grid {n_r}x{n_theta}"
            )));
        }
        if values.len() != n_r * n_theta || valid.len() != n_r * n_theta {
            return Err(Error::InvalidParam("unwrapped sample count".into()));
        }
        if values
            .iter()
            .zip(&valid)
            .any(|(&v, &ok)| ok && !(0.0..=255.0).contains(&v))
        {
            return Err(Error::InvalidParam("valid sample outside [0, 255]".into()));
        }
        Ok(Self {
            n_r,
            n_theta,
            values,
            valid,
        })
    }

    pub fn constant(n_r: usize, n_theta: usize, value: f64) -> Result<Self> {
        Self::new(
            n_r,
            n_theta,
            vec![value; n_r * n_theta],
            vec![true; n_r * n_theta],
        )
    }

    #[inline]
    pub fn n_r(&self) -> usize {
        self.n_r
    }

    #[inline]
    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn valid(&self) -> &[bool] {
        &self.valid
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> (f64, bool) {
        let i = row * self.n_theta + col;
        (self.values[i], self.valid[i])
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.n_theta..(row + 1) * self.n_theta]
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }
}

/// Cartesian positions of the unwrap grid, row-major: sample `(i, j)` lies at
/// `(1 - r) P(phi) + r Q(phi)` with `r = i / (n_r - 1)`, where `P` and `Q`
/// are where the ray from `inner`'s center meets `inner` and `outer`.
pub fn sample_points(
    inner: &Ellipse,
    outer: &Ellipse,
    n_r: usize,
    n_theta: usize,
) -> Result<Vec<(f64, f64)>> {
    if n_r < 2 || n_theta < 8 {
        return Err(Error::InvalidParam(format!(
            "unwrapped grid {n_r}x{n_theta}"
        )));
    }
    let origin = inner.center();
    let mut rays = Vec::with_capacity(n_theta);
    for j in 0..n_theta {
        let phi = TAU * j as f64 / n_theta as f64;
        let t_in = inner
            .ray_distance(origin, phi)
            .ok_or_else(|| Error::GeometryInconsistent("degenerate inner ellipse".into()))?;
        let t_out = outer.ray_distance(origin, phi).ok_or_else(|| {
            Error::GeometryInconsistent("inner center outside the outer ellipse".into())
        })?;
        if t_out <= t_in {
            return Err(Error::GeometryInconsistent(format!(
                "inner ellipse not inside outer along phi = {phi:.4}"
            )));
        }
        rays.push((ray_dir(phi), t_in, t_out));
    }
    let mut pts = Vec::with_capacity(n_r * n_theta);
    for i in 0..n_r {
        let r = i as f64 / (n_r - 1) as f64;
        for &((dx, dy), t_in, t_out) in &rays {
            let t = (1.0 - r) * t_in + r * t_out;
            pts.push((origin.0 + t * dx, origin.1 + t * dy));
        }
    }
    Ok(pts)
}

/// Unwrap the annulus between `inner` and `outer` by bilinear sampling.
pub fn unwrap(
    img: &GrayImage,
    inner: &Ellipse,
    outer: &Ellipse,
    n_r: usize,
    n_theta: usize,
) -> Result<UnwrappedIris> {
    let pts = sample_points(inner, outer, n_r, n_theta)?;
    let mut values = Vec::with_capacity(pts.len());
    let mut valid = Vec::with_capacity(pts.len());
    for &(x, y) in &pts {
        match img.bilinear(x, y) {
            Some(v) => {
                values.push(v);
                valid.push(true);
            }
            None => {
                values.push(0.0);
                valid.push(false);
            }
        }
    }
    UnwrappedIris::new(n_r, n_theta, values, valid)
}

/// Catmull-Rom weights for fractional offset `t` over taps `-1, 0, 1, 2`.
fn catmull_rom_weights(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    [
        0.5 * (-t3 + 2.0 * t2 - t),
        0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
        0.5 * (-3.0 * t3 + 4.0 * t2 + t),
        0.5 * (t3 - t2),
    ]
}

/// Resample every column to `new_n_r` rows.
///
/// Uses Catmull-Rom when the source has at least 4 rows and linear
/// interpolation otherwise. Beyond the first and last rows the column is
/// extended linearly, so linear profiles are reproduced exactly. An output
/// sample is valid only when every real source row its kernel touches is
/// valid; a sample landing exactly on a source row touches only that row.
pub fn radial_resample(u: &UnwrappedIris, new_n_r: usize) -> Result<UnwrappedIris> {
    if new_n_r < 2 {
        return Err(Error::InvalidParam(format!("new_n_r {new_n_r} < 2")));
    }
    let n = u.n_r;
    let cubic = n >= 4;
    let step = (n - 1) as f64 / (new_n_r - 1) as f64;
    let mut values = vec![0.0; new_n_r * u.n_theta];
    let mut valid = vec![false; new_n_r * u.n_theta];
    let mut col = vec![0.0; n];
    let mut col_ok = vec![false; n];
    for j in 0..u.n_theta {
        for i in 0..n {
            (col[i], col_ok[i]) = u.get(i, j);
        }
        // Linearly extended phantom rows at -1 and n.
        let below = 2.0 * col[0] - col[1];
        let above = 2.0 * col[n - 1] - col[n - 2];
        for k in 0..new_n_r {
            let pos = if k == new_n_r - 1 {
                (n - 1) as f64
            } else {
                k as f64 * step
            };
            let i0 = (pos.floor() as usize).min(n - 1);
            let t = pos - i0 as f64;
            let mut touched: Vec<usize> = Vec::with_capacity(4);
            let value = if t == 0.0 {
                touched.push(i0);
                col[i0]
            } else if cubic {
                let w = catmull_rom_weights(t);
                let mut acc = 0.0;
                for (tap, wt) in w.iter().enumerate() {
                    let idx = i0 as isize + tap as isize - 1;
                    let v = if idx < 0 {
                        touched.extend([0, 1]);
                        below
                    } else if idx as usize >= n {
                        touched.extend([n - 1, n - 2]);
                        above
                    } else {
                        touched.push(idx as usize);
                        col[idx as usize]
                    };
                    acc += wt * v;
                }
                acc
            } else {
                touched.extend([i0, i0 + 1]);
                col[i0] + (col[i0 + 1] - col[i0]) * t
            };
            let ok = touched.iter().all(|&i| col_ok[i]);
            let o = k * u.n_theta + j;
            valid[o] = ok;
            values[o] = if ok { value.clamp(0.0, 255.0) } else { 0.0 };
        }
    }
    UnwrappedIris::new(new_n_r, u.n_theta, values, valid)
}

/// Output column `j` is input column `(j - shift) mod n_theta`.
pub fn rotate_columns(u: &UnwrappedIris, shift: i64) -> UnwrappedIris {
    let n = u.n_theta;
    let s = shift.rem_euclid(n as i64) as usize;
    let mut values = Vec::with_capacity(u.values.len());
    let mut valid = Vec::with_capacity(u.valid.len());
    for i in 0..u.n_r {
        for j in 0..n {
            let src = i * n + (j + n - s) % n;
            values.push(u.values[src]);
            valid.push(u.valid[src]);
        }
    }
    UnwrappedIris {
        n_r: u.n_r,
        n_theta: n,
        values,
        valid,
    }
}

/// Bilinear sample at normalized radius `r` and angle `phi`, wrapping in
/// angle. Valid only if every grid node with nonzero weight is valid.
pub fn sample(u: &UnwrappedIris, r: f64, phi: f64) -> (f64, bool) {
    let rpos = snap(r.clamp(0.0, 1.0) * (u.n_r - 1) as f64);
    let i0 = (rpos.floor() as usize).min(u.n_r - 1);
    let fr = rpos - i0 as f64;
    let i1 = (i0 + 1).min(u.n_r - 1);
    let cpos = snap(phi.rem_euclid(TAU) / TAU * u.n_theta as f64);
    let j0 = (cpos.floor() as usize) % u.n_theta;
    let fc = cpos - cpos.floor();
    let j1 = (j0 + 1) % u.n_theta;
    let taps = [
        (i0, j0, (1.0 - fr) * (1.0 - fc)),
        (i0, j1, (1.0 - fr) * fc),
        (i1, j0, fr * (1.0 - fc)),
        (i1, j1, fr * fc),
    ];
    let mut acc = 0.0;
    let mut ok = true;
    for (i, j, w) in taps {
        if w == 0.0 {
            continue;
        }
        let (v, valid) = u.get(i, j);
        ok &= valid;
        acc += w * v;
    }
    (acc, ok)
}

/// Round grid positions that are off a node only by float noise, so that
/// grid angles `TAU * j / n` sample node `j` exactly.
fn snap(pos: f64) -> f64 {
    let nearest = pos.round();
    if (pos - nearest).abs() < 1e-9 {
        nearest
    } else {
        pos
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circles() -> (Ellipse, Ellipse) {
        (
            Ellipse::circle(64.0, 64.0, 10.0).unwrap(),
            Ellipse::circle(64.0, 64.0, 30.0).unwrap(),
        )
    }

    #[test]
    fn constant_image_unwraps_to_constant() {
        let (p, i) = circles();
        let img = GrayImage::filled(128, 128, 100);
        let u = unwrap(&img, &p, &i, 16, 64).unwrap();
        assert!(u.values().iter().all(|&v| v == 100.0));
        assert_eq!(u.valid_count(), 16 * 64);
    }

    #[test]
    fn radial_field_rows_track_radius() {
        let (p, i) = circles();
        let img = GrayImage::from_fn(128, 128, |x, y| {
            let d = ((x as f64 - 64.0).powi(2) + (y as f64 - 64.0).powi(2)).sqrt();
            d.round().min(255.0) as u8
        });
        let u = unwrap(&img, &p, &i, 21, 90).unwrap();
        for row in 0..21 {
            for &v in u.row(row) {
                assert!((v - (10.0 + row as f64)).abs() <= 0.5, "row {row}: {v}");
            }
        }
    }

    #[test]
    fn out_of_bounds_samples_are_invalid() {
        let p = Ellipse::circle(20.0, 20.0, 5.0).unwrap();
        let o = Ellipse::circle(20.0, 20.0, 25.0).unwrap();
        let img = GrayImage::filled(64, 64, 50);
        let u = unwrap(&img, &p, &o, 11, 36).unwrap();
        // phi = pi (column 18) heads toward x < 0 and leaves the image.
        assert!(!u.get(10, 18).1);
        assert!(u.get(0, 18).1);
        // phi = 0 stays inside.
        assert!((0..11).all(|i| u.get(i, 0) == (50.0, true)));
    }

    #[test]
    fn unwrap_rejects_inverted_annulus() {
        let (p, i) = circles();
        let img = GrayImage::filled(128, 128, 1);
        assert!(matches!(
            unwrap(&img, &i, &p, 4, 16),
            Err(Error::GeometryInconsistent(_))
        ));
    }

    fn column(values: Vec<f64>, valid: Vec<bool>) -> UnwrappedIris {
        // Replicate the column across 8 angles.
        let n = values.len();
        let vals = (0..n)
            .flat_map(|i| std::iter::repeat_n(values[i], 8))
            .collect();
        let ok = (0..n)
            .flat_map(|i| std::iter::repeat_n(valid[i], 8))
            .collect();
        UnwrappedIris::new(n, 8, vals, ok).unwrap()
    }

    #[test]
    fn resample_constant_and_ramp() {
        let u = UnwrappedIris::constant(16, 8, 100.0).unwrap();
        let r = radial_resample(&u, 64).unwrap();
        assert!(r.values().iter().all(|&v| (v - 100.0).abs() < 1e-12));

        let u = column((0..16).map(|i| i as f64).collect(), vec![true; 16]);
        let r = radial_resample(&u, 64).unwrap();
        for k in 0..64 {
            let want = k as f64 * 15.0 / 63.0;
            assert!((r.get(k, 3).0 - want).abs() <= 1e-6, "row {k}");
        }
    }

    #[test]
    fn resample_identity_on_same_size() {
        let vals: Vec<f64> = (0..10).map(|i| ((i * 37) % 11) as f64 * 20.0).collect();
        let u = column(vals, vec![true; 10]);
        let r = radial_resample(&u, 10).unwrap();
        for (a, b) in u.values().iter().zip(r.values()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn resample_invalid_footprint() {
        let mut ok = vec![true; 8];
        ok[3] = false;
        let u = column((0..8).map(|i| 10.0 * i as f64).collect(), ok);
        let r = radial_resample(&u, 15).unwrap();
        // Enumerated footprints: output k sits at source position k/2.
        // Even k hits row k/2 exactly; odd k touches rows (k-1)/2 - 1 ..= (k-1)/2 + 2,
        // with the phantom rows mapping to {0, 1} and {6, 7}. Row 3 is touched
        // by k = 3, 5, 7, 9 (taps) and k = 6 (node).
        for k in 0..15 {
            let want_invalid = matches!(k, 3 | 5 | 6 | 7 | 9);
            assert_eq!(!r.get(k, 0).1, want_invalid, "k = {k}");
        }
    }

    #[test]
    fn rotation_group_laws() {
        let vals: Vec<f64> = (0..3 * 12).map(|i| i as f64).collect();
        let u = UnwrappedIris::new(3, 12, vals, vec![true; 36]).unwrap();
        assert_eq!(rotate_columns(&u, 0), u);
        assert_eq!(rotate_columns(&u, 12), u);
        assert_eq!(rotate_columns(&rotate_columns(&u, 5), -5), u);
        let r = rotate_columns(&u, 1);
        assert_eq!(r.get(0, 1), u.get(0, 0));
        assert_eq!(r.get(0, 0), u.get(0, 11));
    }

    #[test]
    fn sampling_nodes_and_wrap() {
        let vals: Vec<f64> = (0..2 * 8).map(|i| i as f64 * 10.0).collect();
        let u = UnwrappedIris::new(2, 8, vals, vec![true; 16]).unwrap();
        let phi = |j: f64| TAU * j / 8.0;
        assert_eq!(sample(&u, 0.0, phi(3.0)), (30.0, true));
        assert_eq!(sample(&u, 1.0, phi(5.0)), (130.0, true));
        // phi = 2pi - eps sits at column position 7.75: a quarter of
        // column 7 (70) and three quarters of column 0 (0).
        let eps = TAU / 8.0 * 0.25;
        let (v, ok) = sample(&u, 0.0, TAU - eps);
        assert!(ok);
        assert!((v - 17.5).abs() < 1e-9, "{v}");
        let c = UnwrappedIris::constant(5, 16, 42.0).unwrap();
        assert!((sample(&c, 0.37, 4.2).0 - 42.0).abs() < 1e-12);
    }
}
