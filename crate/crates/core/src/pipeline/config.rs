use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::glint::GlintParams;
use crate::iriscode::EncodingParams;
use crate::privacy::BlendParams;
use crate::synthesis::TemplateParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Generated,
    Blended,
    Median,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Generated, Mode::Blended, Mode::Median];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Generated => "generated",
            Mode::Blended => "blended",
            Mode::Median => "median",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "generated" => Ok(Mode::Generated),
            "blended" => Ok(Mode::Blended),
            "median" => Ok(Mode::Median),
            other => Err(Error::Config(format!("unknown mode `{other}`"))),
        }
    }
}

/// Run configuration, readable from a JSON document. Every field has a
/// default; the four input paths are required unless `seed_corpus` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub source_dir: Option<PathBuf>,
    pub mask_dir: Option<PathBuf>,
    pub target_image: Option<PathBuf>,
    pub target_mask: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub modes: Vec<Mode>,
    pub n_r: usize,
    pub n_theta: usize,
    pub glint_threshold: u8,
    pub glint_dilate: usize,
    pub ring_width: f64,
    pub weight_clamp: bool,
    pub encoding: EncodingParams,
    pub emit_metrics: bool,
    pub trim_fraction: f64,
    /// Optional masks predicted on the outputs, laid out as
    /// `<dir>/<mode>/<stem>.png`, scored by IoU against the input masks.
    pub eval_mask_dir: Option<PathBuf>,
    /// Generate this many synthetic frames (plus a donor) under
    /// `<out_dir>/corpus` and process them instead of reading a dataset.
    pub seed_corpus: Option<usize>,
    pub corpus_seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            source_dir: None,
            mask_dir: None,
            target_image: None,
            target_mask: None,
            out_dir: PathBuf::from("out"),
            modes: Mode::ALL.to_vec(),
            n_r: 64,
            n_theta: 360,
            glint_threshold: 250,
            glint_dilate: 1,
            ring_width: 5.0,
            weight_clamp: true,
            encoding: EncodingParams::default(),
            emit_metrics: false,
            trim_fraction: 0.05,
            eval_mask_dir: None,
            seed_corpus: None,
            corpus_seed: 1,
        }
    }
}

impl PipelineConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.modes.is_empty() {
            return bad("no output modes requested".into());
        }
        if self.n_r < 2 || self.n_theta < 8 {
            return bad(format!("grid {}x{} below 2x8", self.n_r, self.n_theta));
        }
        if self.glint_threshold == 0 {
            return bad("glint threshold must be in 1..=255".into());
        }
        if !(self.ring_width >= 0.0) {
            return bad(format!("ring width {}", self.ring_width));
        }
        if !(0.0..0.5).contains(&self.trim_fraction) {
            return bad(format!(
                "trim fraction {} outside [0, 0.5)",
                self.trim_fraction
            ));
        }
        self.encoding
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        if self.seed_corpus.is_none() {
            let required = [
                ("source_dir", &self.source_dir),
                ("mask_dir", &self.mask_dir),
                ("target_image", &self.target_image),
                ("target_mask", &self.target_mask),
            ];
            for (name, p) in required {
                if p.is_none() {
                    return bad(format!("{name} is required without seed_corpus"));
                }
            }
        }
        let paths: Vec<&PathBuf> = [
            &self.source_dir,
            &self.mask_dir,
            &self.target_image,
            &self.target_mask,
        ]
        .into_iter()
        .flatten()
        .chain(std::iter::once(&self.out_dir))
        .collect();
        for (i, a) in paths.iter().enumerate() {
            if paths[i + 1..].contains(a) {
                return bad(format!("path {} used twice", a.display()));
            }
        }
        Ok(())
    }

    pub fn template_params(&self) -> TemplateParams {
        TemplateParams {
            n_r: self.n_r,
            n_theta: self.n_theta,
            glint: self.glint_params(),
        }
    }

    pub fn glint_params(&self) -> GlintParams {
        GlintParams {
            threshold: self.glint_threshold,
            dilate: self.glint_dilate,
        }
    }

    pub fn blend_params(&self) -> BlendParams {
        BlendParams {
            ring_width: self.ring_width,
            weight_clamp: self.weight_clamp,
        }
    }

    /// Requested modes, deduplicated, in canonical order.
    pub fn mode_set(&self) -> Vec<Mode> {
        Mode::ALL
            .into_iter()
            .filter(|m| self.modes.contains(m))
            .collect()
    }
}
