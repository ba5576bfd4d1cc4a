//! Seeded sweeps with their CSV datasets and SVG plots, plus the verify suite.

pub mod config;
pub mod dataset;
pub mod plot;
pub mod sweep;
pub mod verify;

pub use config::SweepConfig;
pub use dataset::{Dataset, DatasetKind, Row, SeedTag};
pub use plot::{emit_plots, render_panels, PlotOutput};
pub use sweep::{
    run_decay_sweep, run_ns_iteration_sweep, run_sweep, with_thread_cap, ExperimentSpec, NsSweepSpec,
};
pub use verify::{run_all, Criterion, VerifyOptions};
