//! HRIR post-processing and HRTF evaluation toolkit.
//!
//! Takes candidate head-related impulse response sets, aligns and
//! normalises them against a reference, computes interaural and spectral
//! cue errors (ITD, ILD, log-spectral distortion), runs the associated
//! spatial/frequency statistics, and scores behavioural localisation
//! logs. A spherical-head generator provides fixtures with analytically
//! known cues.
//!
//! Everything in this crate is a pure function over immutable values;
//! all computations are deterministic (randomised procedures take
//! explicit seeds) and safe to run concurrently.

pub mod behavior;
pub mod cues;
pub mod io;
pub mod model;
pub mod preprocess;
pub mod stats;
pub mod synth;

pub use model::{Direction, HrirSet, LateralPolar, MetricConfig, StereoImpulse};
