//! Iris texture replacement for eye-tracking video frames.
//!
//! Given a grayscale eye frame and its four-class segmentation mask
//! (background, sclera, iris, pupil), `irisveil` replaces the identifiable
//! iris texture with a donor iris mapped through the rubber-sheet model,
//! and offers two lighter variants: an elliptical-gradient blend of source
//! and donor, and a flat median iris. Glints are preserved verbatim so
//! corneal-reflection trackers see the same input.
//!
//! The crate also carries the tools to check the result:
//!
//! - [`iriscode`] encodes irises into log-Gabor phase codes and matches
//!   them with a rotation-searched masked Hamming distance (privacy).
//! - [`metrics`] computes per-class IoU and pupil-center errors (utility).
//! - [`synth`] renders seeded synthetic eyes so everything can be exercised
//!   without a dataset.
//!
//! Stages, in processing order:
//!
//! 1. [`geometry`] – boundary extraction, ellipse fitting, per-ray profiles.
//! 2. [`rubbersheet`] – unwrap, radial resampling, column rotation, sampling.
//! 3. [`glint`] – detection, removal from the donor, restoration.
//! 4. [`synthesis`] – donor template, inverse rendering, histogram matching,
//!    compositing.
//! 5. [`privacy`] – blended and median-iris variants.
//! 6. [`pipeline`] – per-frame orchestration, dataset runs, reports.
//!
//! Angles: image `x` grows right and `y` grows down. A ray angle `phi`
//! points along `(cos phi, sin phi)` in image coordinates, the same sense
//! in which [`Ellipse::theta`] rotates the ellipse axes.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod glint;
pub mod iriscode;
pub mod metrics;
pub mod pipeline;
pub mod privacy;
pub mod raster;
pub mod rubbersheet;
pub mod synth;
pub mod synthesis;

pub use error::{Error, Result};
pub use geometry::{Ellipse, RadialProfile};
pub use raster::{GrayImage, Label, SegMask};
