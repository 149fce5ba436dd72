//! Simulation of a reflective common-path nonlinear interferometer (CP-NLI)
//! that couples and decouples the polarization and frequency degrees of
//! freedom of type-II SPDC biphotons.
//!
//! Pipeline: [`source`] builds the biphoton state on a detuning grid,
//! [`interferometer`] superposes the forward and backward amplitudes, and the
//! analysis modules ([`measures`], [`reduced`], [`schmidt`]) extract
//! concurrence, reduced states and Schmidt structure. [`tomography`] simulates
//! the frequency-resolved measurement chain, and [`config`] / [`experiment`]
//! drive batch runs for the `cpnli-sim` binary.

// Index loops mirror the matrix formulas; negated comparisons also reject NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiment;
pub mod interferometer;
pub mod linalg;
pub mod measures;
pub mod par;
pub mod reduced;
pub mod schmidt;
pub mod source;
pub mod state;
pub mod tomography;
pub mod units;

pub use error::{Error, Result};
pub use interferometer::{
    alpha_phase, compose_nli, concurrence_spectrum, fringe_visibility, pc_unitary,
    spectral_intensity, ImperfectionParams, LinearArm, PcUnitary,
};
pub use measures::{concurrence, fidelity, purity};
pub use reduced::{conditional_density, trace_out_frequency};
pub use schmidt::{schmidt_decompose, SchmidtResult};
pub use source::{joint_amplitude, phase_mismatch, spdc_state, DispersionExpansion, SpdcParams};
pub use state::{DensityMatrix4, JointState, PolarizationKet4};
