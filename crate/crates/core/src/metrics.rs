//! Utility metrics: per-class IoU, pupil-center errors and trimmed MSE.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::raster::{check_dims, Label, SegMask};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IoUReport {
    /// IoU per class present in either mask, keyed by class id.
    pub per_class: BTreeMap<u8, f64>,
    /// Mean over the reported classes.
    pub miou: f64,
}

pub fn iou(pred: &SegMask, gt: &SegMask) -> Result<IoUReport> {
    check_dims(pred, gt)?;
    let mut inter = [0u64; 4];
    let mut union = [0u64; 4];
    for (&p, &g) in pred.labels().iter().zip(gt.labels()) {
        if p == g {
            inter[p as usize] += 1;
            union[p as usize] += 1;
        } else {
            union[p as usize] += 1;
            union[g as usize] += 1;
        }
    }
    let per_class: BTreeMap<u8, f64> = Label::ALL
        .iter()
        .map(|&l| l as usize)
        .filter(|&c| union[c] > 0)
        .map(|c| (c as u8, inter[c] as f64 / union[c] as f64))
        .collect();
    let miou = if per_class.is_empty() {
        0.0
    } else {
        per_class.values().sum::<f64>() / per_class.len() as f64
    };
    Ok(IoUReport { per_class, miou })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CenterErrorReport {
    pub mse_x: f64,
    pub mse_y: f64,
    /// Coefficient of determination per axis; NaN when the ground truth
    /// does not vary along that axis.
    pub r2_x: f64,
    pub r2_y: f64,
    pub n: usize,
}

pub fn center_errors(pred: &[(f64, f64)], gt: &[(f64, f64)]) -> Result<CenterErrorReport> {
    if pred.len() != gt.len() {
        return Err(Error::LengthMismatch(pred.len(), gt.len()));
    }
    let n = pred.len();
    if n < 2 {
        return Err(Error::InvalidParam(format!(
            "center errors need n >= 2, got {n}"
        )));
    }
    let axis = |sel: fn(&(f64, f64)) -> f64| -> (f64, f64) {
        let ss_res: f64 = pred
            .iter()
            .zip(gt)
            .map(|(p, g)| (sel(p) - sel(g)).powi(2))
            .sum();
        let mean = gt.iter().map(sel).sum::<f64>() / n as f64;
        let ss_tot: f64 = gt.iter().map(|g| (sel(g) - mean).powi(2)).sum();
        let r2 = if ss_tot > 0.0 {
            1.0 - ss_res / ss_tot
        } else {
            f64::NAN
        };
        (ss_res / n as f64, r2)
    };
    let (mse_x, r2_x) = axis(|p| p.0);
    let (mse_y, r2_y) = axis(|p| p.1);
    Ok(CenterErrorReport {
        mse_x,
        mse_y,
        r2_x,
        r2_y,
        n,
    })
}

/// Mean square after dropping the `ceil(trim_fraction * n)` largest
/// absolute errors.
pub fn outlier_trimmed_mse(errors: &[f64], trim_fraction: f64) -> Result<f64> {
    if !(0.0..0.5).contains(&trim_fraction) {
        return Err(Error::InvalidParam(format!(
            "trim fraction {trim_fraction}"
        )));
    }
    let mut abs: Vec<f64> = errors.iter().map(|e| e.abs()).collect();
    abs.sort_by(f64::total_cmp);
    let drop = (trim_fraction * abs.len() as f64).ceil() as usize;
    let kept = &abs[..abs.len().saturating_sub(drop)];
    if kept.is_empty() {
        return Err(Error::EmptyAfterTrim);
    }
    Ok(kept.iter().map(|e| e * e).sum::<f64>() / kept.len() as f64)
}
