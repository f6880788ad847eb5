//! Distortion experiments: configuration, orchestration, CSV output and the
//! command-line front end.

pub mod cli;
pub mod config;
pub mod output;
pub mod runner;
pub mod verify;

pub use config::{required_k, Construction, ExperimentConfig, InputFamily};
pub use runner::{
    run_cdf, run_input_sparsity_sweep, run_k_sweep, run_sparsity_sweep, CdfGrid, CdfReport,
    CdfSeries, SweepResult, SweepRow,
};
