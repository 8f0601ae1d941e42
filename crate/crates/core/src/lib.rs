//! All-at-once multi-frame video interpolation.
//!
//! Seven (or any odd number of) intermediate frames are generated between the two
//! middle frames of a four-frame window. Inter-input optical flow is estimated by a
//! two-stage coarse-to-fine variational solver, per-pixel motion toward each
//! intermediate time is predicted with a cubic (or quadratic/linear) model, and
//! flows and frames are refined through temporal pyramids whose depth adapts to the
//! distance of each timestamp from the inputs.
//!
//! # Flow convention
//!
//! A [`FlowField`] named `f_{a→b}` is sampled on the pixel grid of frame `b` and
//! points into frame `a`: `b(x) ≈ a(x + f(x))`. Backward warping frame `a` with it
//! therefore reproduces `b`. Vectors are stored `(dx, dy)` with `x` the column axis.
//!
//! The crate is `no_std` and only needs `alloc`. File formats and the command line
//! live in the `tempyr` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

mod error;
mod math;

pub mod flow;
pub mod image;
pub mod metrics;
pub mod motion;
pub mod pyramid;
pub mod solver;
pub mod synth;
pub mod types;
pub mod warp;

pub use error::{Error, Result};
pub use flow::FlowField;
pub use image::{DownsampleFilter, Image};
pub use metrics::MetricsReport;
pub use motion::{CubicCoefficients, MotionModelKind};
pub use pyramid::{InterpolationResult, PyramidPlan};
pub use solver::{FlowBundle, FlowSolverConfig};
pub use types::{BlendMask, InputQuad, TimeStamp};
pub use warp::SynthesisOutput;
