//! End-to-end orchestration: per-frame processing, dataset runs over paired
//! frame/mask directories, synthetic corpus generation and report output.

mod config;
mod dataset;
mod frame;

pub use config::{Mode, PipelineConfig};
pub use dataset::{run_dataset, write_corpus, ModeSummary, RunSummary, CSV_HEADER};
pub use frame::{
    detect_pupil_center, process_frame, FrameOutput, FrameResult, FrameStatus, ModeResult,
};
