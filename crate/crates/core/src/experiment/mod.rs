//! Refinement studies: configuration, parallel sweeps, CSV and summary
//! output, and SVG plots.

pub mod config;
pub mod plot;
pub mod runner;

pub use config::{ExperimentConfig, Levels};
pub use plot::{emit_plot, read_curve, Curve, PlotStyle};
pub use runner::{run_experiment, run_level, simulate_levels, ExperimentSummary, LevelResult, SCHEMA_VERSION};
