use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::{center_errors, iou, outlier_trimmed_mse};
use crate::raster::{GrayImage, SegMask};
use crate::synth::{default_corpus, default_target, synth_eye};
use crate::synthesis::Donor;

use super::config::{Mode, PipelineConfig};
use super::frame::{process_frame, FrameResult, FrameStatus};

pub const CSV_HEADER: [&str; 6] = [
    "frame_id",
    "mode",
    "hd",
    "pupil_center_x",
    "pupil_center_y",
    "status",
];

/// Per-mode reductions written to `summary.json`. Statistics that cannot be
/// computed (no values, constant ground truth) serialize as `null`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeSummary {
    pub hd_mean: Option<f64>,
    pub hd_std: Option<f64>,
    pub mse_x: Option<f64>,
    pub mse_y: Option<f64>,
    pub r2_x: Option<f64>,
    pub r2_y: Option<f64>,
    pub n: usize,
    pub skipped: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub miou: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub frames: Vec<FrameResult>,
    pub modes: BTreeMap<Mode, ModeSummary>,
    pub out_dir: PathBuf,
}

impl RunSummary {
    pub fn report_path(&self) -> PathBuf {
        self.out_dir.join("report.csv")
    }

    pub fn summary_path(&self) -> PathBuf {
        self.out_dir.join("summary.json")
    }

    pub fn output_path(&self, mode: Mode, frame_id: &str) -> PathBuf {
        output_path(&self.out_dir, mode, frame_id)
    }
}

fn output_path(out_dir: &Path, mode: Mode, frame_id: &str) -> PathBuf {
    out_dir.join(mode.as_str()).join(format!("{frame_id}.png"))
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Render `n` seeded source eyes and a donor under `dir`: `frames/NNNN.png`,
/// `masks/NNNN.png`, `target.png` and `target_mask.png`.
pub fn write_corpus(dir: &Path, n: usize, seed: u64) -> Result<()> {
    let frames = dir.join("frames");
    let masks = dir.join("masks");
    for d in [&frames, &masks] {
        fs::create_dir_all(d).map_err(io_err(d))?;
    }
    for (i, spec) in default_corpus(n, seed).iter().enumerate() {
        let (img, mask) = synth_eye(spec)?;
        let name = format!("{i:04}.png");
        img.save_png(&frames.join(&name))?;
        mask.save_png(&masks.join(&name))?;
    }
    let (t, tm) = synth_eye(&default_target(seed))?;
    t.save_png(&dir.join("target.png"))?;
    tm.save_png(&dir.join("target_mask.png"))
}

/// Process every `*.png` frame of the source directory against its
/// same-named mask, write one image per mode under `<out>/<mode>/`, and the
/// `report.csv` and `summary.json` reports.
pub fn run_dataset(cfg: &PipelineConfig) -> Result<RunSummary> {
    cfg.validate()?;
    let mut cfg = cfg.clone();
    if let Some(n) = cfg.seed_corpus {
        let dir = cfg.out_dir.join("corpus");
        write_corpus(&dir, n, cfg.corpus_seed)?;
        cfg.source_dir = Some(dir.join("frames"));
        cfg.mask_dir = Some(dir.join("masks"));
        cfg.target_image = Some(dir.join("target.png"));
        cfg.target_mask = Some(dir.join("target_mask.png"));
    }
    let required = |p: &Option<PathBuf>, name: &str| {
        p.clone()
            .ok_or_else(|| Error::Config(format!("{name} is required")))
    };
    let source_dir = required(&cfg.source_dir, "source_dir")?;
    let mask_dir = required(&cfg.mask_dir, "mask_dir")?;
    let target_image = required(&cfg.target_image, "target_image")?;
    let target_mask = required(&cfg.target_mask, "target_mask")?;

    let stems = list_frames(&source_dir)?;
    if stems.is_empty() {
        eprintln!("warning: no PNG frames in {}", source_dir.display());
    }
    let modes = cfg.mode_set();
    for m in &modes {
        let d = cfg.out_dir.join(m.as_str());
        fs::create_dir_all(&d).map_err(io_err(&d))?;
    }

    let frames: Vec<FrameResult> = if stems.is_empty() {
        Vec::new()
    } else {
        let donor = Donor::prepare(
            &GrayImage::load_png(&target_image)?,
            &SegMask::load_png(&target_mask)?,
            &cfg.template_params(),
        )?;
        stems
            .par_iter()
            .map(|stem| {
                let mask_path = mask_dir.join(format!("{stem}.png"));
                if !mask_path.is_file() {
                    return Ok(missing_mask(stem, &modes));
                }
                let src = GrayImage::load_png(&source_dir.join(format!("{stem}.png")))?;
                let mask = SegMask::load_png(&mask_path)?;
                let out = process_frame(stem, &src, &mask, &donor, &cfg);
                for (mode, img) in &out.images {
                    img.save_png(&output_path(&cfg.out_dir, *mode, stem))?;
                }
                Ok(out.result)
            })
            .collect::<Result<_>>()?
    };

    let mut summaries = BTreeMap::new();
    for &mode in &modes {
        let miou = match &cfg.eval_mask_dir {
            Some(dir) => mean_iou(&dir.join(mode.as_str()), &mask_dir, &frames)?,
            None => None,
        };
        summaries.insert(mode, summarize(mode, &frames, cfg.trim_fraction, miou));
    }
    let summary = RunSummary {
        frames,
        modes: summaries,
        out_dir: cfg.out_dir.clone(),
    };
    write_report(&summary.report_path(), &summary.frames)?;
    write_summary(&summary.summary_path(), &summary.modes)?;
    Ok(summary)
}

fn list_frames(dir: &Path) -> Result<Vec<String>> {
    let mut stems = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        let is_png = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("png"));
        if path.is_file() && is_png {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                stems.push(stem.to_string());
            }
        }
    }
    stems.sort();
    Ok(stems)
}

fn missing_mask(stem: &str, modes: &[Mode]) -> FrameResult {
    let status = FrameStatus::Skipped("MissingMask".into());
    FrameResult {
        frame_id: stem.to_string(),
        status: status.clone(),
        modes: modes
            .iter()
            .map(|&mode| super::ModeResult {
                mode,
                status: status.clone(),
                hd: None,
                pupil_center: None,
            })
            .collect(),
        reference_center: None,
        histogram_ks: None,
        covered_pixels: 0,
    }
}

/// Mean IoU of masks predicted on the outputs against the input masks, over
/// frames that have a prediction file.
fn mean_iou(pred_dir: &Path, mask_dir: &Path, frames: &[FrameResult]) -> Result<Option<f64>> {
    let mut scores = Vec::new();
    for f in frames.iter().filter(|f| f.status.is_ok()) {
        let pred_path = pred_dir.join(format!("{}.png", f.frame_id));
        if !pred_path.is_file() {
            continue;
        }
        let pred = SegMask::load_png(&pred_path)?;
        let gt = SegMask::load_png(&mask_dir.join(format!("{}.png", f.frame_id)))?;
        scores.push(iou(&pred, &gt)?.miou);
    }
    Ok((!scores.is_empty()).then(|| scores.iter().sum::<f64>() / scores.len() as f64))
}

fn summarize(
    mode: Mode,
    frames: &[FrameResult],
    trim_fraction: f64,
    miou: Option<f64>,
) -> ModeSummary {
    let results: Vec<_> = frames
        .iter()
        .filter_map(|f| f.mode(mode).map(|m| (f, m)))
        .collect();
    let ok: Vec<_> = results.iter().filter(|(_, m)| m.status.is_ok()).collect();

    let hds: Vec<f64> = ok.iter().filter_map(|(_, m)| m.hd).collect();
    let (hd_mean, hd_std) = if hds.is_empty() {
        (None, None)
    } else {
        let n = hds.len() as f64;
        let mean = hds.iter().sum::<f64>() / n;
        let var = hds.iter().map(|h| (h - mean).powi(2)).sum::<f64>() / n;
        (Some(mean), Some(var.sqrt()))
    };

    let (pred, gt): (Vec<_>, Vec<_>) = ok
        .iter()
        .filter_map(|(f, m)| Some((m.pupil_center?, f.reference_center?)))
        .unzip();
    let dx: Vec<f64> = pred.iter().zip(&gt).map(|(p, g)| p.0 - g.0).collect();
    let dy: Vec<f64> = pred.iter().zip(&gt).map(|(p, g)| p.1 - g.1).collect();
    let finite = |v: f64| v.is_finite().then_some(v);
    let r2 = center_errors(&pred, &gt).ok();

    ModeSummary {
        hd_mean,
        hd_std,
        mse_x: outlier_trimmed_mse(&dx, trim_fraction).ok(),
        mse_y: outlier_trimmed_mse(&dy, trim_fraction).ok(),
        r2_x: r2.as_ref().and_then(|r| finite(r.r2_x)),
        r2_y: r2.as_ref().and_then(|r| finite(r.r2_y)),
        n: ok.len(),
        skipped: results.len() - ok.len(),
        miou,
    }
}

fn fmt6(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.6}")).unwrap_or_default()
}

fn write_report(path: &Path, frames: &[FrameResult]) -> Result<()> {
    let to_io = |e: csv::Error| Error::Io {
        path: path.display().to_string(),
        source: e.into(),
    };
    let mut w = csv::Writer::from_path(path).map_err(to_io)?;
    w.write_record(CSV_HEADER).map_err(to_io)?;
    for f in frames {
        for m in &f.modes {
            w.write_record([
                f.frame_id.clone(),
                m.mode.to_string(),
                fmt6(m.hd),
                fmt6(m.pupil_center.map(|c| c.0)),
                fmt6(m.pupil_center.map(|c| c.1)),
                m.status.to_string(),
            ])
            .map_err(to_io)?;
        }
    }
    w.flush().map_err(io_err(path))
}

fn write_summary(path: &Path, modes: &BTreeMap<Mode, ModeSummary>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(modes).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e.into(),
    })?;
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}
