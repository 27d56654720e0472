//! Command line front end for `snakefit-core`: experiment configs, gait
//! sweeps, CSV/JSON export and SVG overlays.

pub mod config;
pub mod formats;
pub mod plot;
pub mod runner;

pub use config::{ConfigError, ExperimentConfig};
pub use runner::{plot, run, RunError, RunSummary};
