//! Command implementations, configuration and file formats for the spiking
//! finite-element solver. The numerics live in `spikefem-core`.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod formats;
pub mod svg;

pub use commands::{run_sweep, Problem};
pub use config::{ConfigError, ConfigSources, RunConfig};
