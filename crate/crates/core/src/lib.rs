//! Inversion of unit lower triangular matrices built from linear-attention
//! chunks, using algorithms made mostly of matrix products.
//!
//! Every algorithm runs under a [`PrecisionPolicy`], so the same code path
//! serves float64 oracle runs and emulated float32/float16/bfloat16 runs.
//!
//! * [`matrix`]: dense square container and structural helpers.
//! * [`fpsim`]: bit-faithful rounding to reduced formats and the emulated
//!   mixed-precision matrix product.
//! * [`gen`]: chunk-matrix generators (DeltaNet, decay-scaled, adversarial).
//! * [`algos`]: VCS, MCS, MCH, MBH, MXR, Newton–Schulz and iterative refinement.
//! * [`metrics`]: float64 reference inverse, forward errors, conditioning.
//! * [`harness`]: seeded sweeps with CSV output and SVG plots, plus the verify suite.

pub mod algos;
pub mod error;
pub mod fpsim;
pub mod gen;
pub mod harness;
pub mod matrix;
pub mod metrics;

pub use algos::{AlgorithmConfig, InitialGuess, Inversion, InversionTrace, Method};
pub use error::{Error, Result};
pub use fpsim::{FloatFormat, PrecisionPolicy};
pub use matrix::{BlockSpec, Kind, Parity, TriMatrix};
pub use metrics::ErrorReport;
