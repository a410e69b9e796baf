//! Experiment driver for the `mdlac` detectors: parameter sweeps, polygon
//! simplification runs, segment detection, decision-equivalence checks and
//! synthetic image generation, all writing CSV and PGM artifacts.

pub mod commands;
pub mod config;
pub mod equiv_run;
pub mod error;
pub mod lsd_run;
pub mod polygon_run;
pub mod sweep_multi;
pub mod sweep_single;

pub use config::ExperimentConfig;
pub use error::CliError;
