//! Point-level outlier detection for mobility trajectories.
//!
//! The crate covers the full benchmark loop: CSV ingestion ([`ingest`]),
//! sensor cross-check ground truth ([`groundtruth`]), eight detectors behind
//! a common interface ([`detectors`]), synthetic data with known outliers
//! ([`synth`]) and precision/recall/F-beta scoring ([`eval`]).

pub mod detectors;
pub mod error;
pub mod eval;
pub mod geo;
pub mod groundtruth;
pub mod ingest;
pub mod labels;
pub mod model;
pub mod synth;

pub use error::{Error, Result};
pub use model::{LabelSet, SpeedBounds, Trajectory, TrajectoryPoint};
