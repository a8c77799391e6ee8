//! Neuromorphic finite-element solver core.
//!
//! This crate is `no_std` (it needs `alloc`). It covers the whole numerical
//! pipeline: a structured triangulation of the unit square, P1 assembly of the
//! zero-Dirichlet Poisson problem into a sparse SPD system, a conjugate-gradient
//! reference solver, the spike-coding network that embeds the system, a clocked
//! simulator with ablation and spike-drop fault hooks, and the sweep statistics
//! used to measure robustness.
//!
//! IO, configuration and the command line live in the `spikefem` crate.

#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod cg;
pub mod encoder;
pub mod error;
pub mod faults;
pub mod fem;
pub mod harness;
pub mod mesh;
pub mod sim;
pub mod sparse;

pub use cg::{cg_solve, residual_norm, CgConfig, CgSolution};
pub use encoder::{build_gamma, build_network, calibrate_gamma, Network, NetworkConfig, Readout};
pub use error::{Error, Result};
pub use faults::{sample_ablation_mask, sample_drop_mask, FaultKind, FaultRealization, FaultSpec};
pub use fem::{assemble, element_load, element_stiffness, evaluate_rhs, FemSystem, Rhs};
pub use harness::{
    error_field, raster_extract, relative_error, trial_seed, ErrorField, ErrorFieldRow, RasterRow,
    SweepPoint, SweepResult, TrialRecord,
};
pub use mesh::{build_unit_square_mesh, interior_nodes, Element, Mesh, Node};
pub use sim::{decode, mean_firing_rate, run, SimState, Simulator, SpikeEvent, SpikeLog, TrialResult};
pub use sparse::{CooMatrix, CsrMatrix};
