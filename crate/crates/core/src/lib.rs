//! Offline recognition of isolated handwritten Farsi characters.
//!
//! The crate covers the whole chain from a raw raster to a class label:
//!
//! * [`raster`] smooths and binarizes grayscale input,
//! * [`skeleton`] thins strokes, normalizes the glyph into a 30×30 grid and
//!   optionally pools it down to 10×10,
//! * [`mlp`] and [`train`] hold the one-hidden-layer sigmoid perceptron and its
//!   online backpropagation trainer with momentum,
//! * [`dataset`] stores labeled glyphs and maps the 32 letters to 5-bit codes,
//! * [`pipeline`] wires the stages together and [`experiment`] sweeps
//!   hidden-layer sizes the way a results table would.

pub mod dataset;
pub mod error;
pub mod experiment;
pub mod mlp;
pub mod pipeline;
pub mod pnm;
pub mod raster;
pub mod skeleton;
pub mod synth;
pub mod train;

pub use dataset::{Dataset, Label, Sample, Source};
pub use error::{Error, Result};
pub use mlp::{Activations, Mlp};
pub use pipeline::{Input, PipelineConfig, Recognition};
pub use raster::{BinaryImage, GrayImage, Threshold};
pub use skeleton::Glyph;
pub use train::{StopReason, TrainConfig, TrainReport, TrainState};
