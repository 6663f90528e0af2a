use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("insufficient points for an ellipse fit: got {0}, need at least 5")]
    InsufficientPoints(usize),
    #[error("degenerate fit: {0}")]
    DegenerateFit(&'static str),
    #[error("inconsistent geometry: {0}")]
    GeometryInconsistent(String),
    #[error("empty region: {0}")]
    EmptyRegion(&'static str),
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("every pixel is flagged as glint")]
    AllGlint,
    #[error("iris codes have no jointly usable bits at any shift")]
    NoOverlap,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("nothing left after trimming outliers")]
    EmptyAfterTrim,
    #[error("invalid synthetic eye spec: {0}")]
    InvalidSpec(String),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("image error on {path}: {source}")]
    Image {
        path: String,
        #[source]
        source: image::ImageError,
    },
}

impl Error {
    /// Short variant name, used as the skip reason in frame reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InsufficientPoints(_) => "InsufficientPoints",
            Error::DegenerateFit(_) => "DegenerateFit",
            Error::GeometryInconsistent(_) => "GeometryInconsistent",
            Error::EmptyRegion(_) => "EmptyRegion",
            Error::DimensionMismatch(..) => "DimensionMismatch",
            Error::AllGlint => "AllGlint",
            Error::NoOverlap => "NoOverlap",
            Error::LengthMismatch(..) => "LengthMismatch",
            Error::EmptyAfterTrim => "EmptyAfterTrim",
            Error::InvalidSpec(_) => "InvalidSpec",
            Error::InvalidParam(_) => "InvalidParam",
            Error::Config(_) => "Config",
            Error::Io { .. } => "Io",
            Error::Image { .. } => "Image",
        }
    }
}
