//! Simulated measurement chain: dispersive time-to-wavelength binning,
//! 16-setting polarization tomography with Poissonian counts, and
//! maximum-likelihood reconstruction.

mod counts;
mod dcm;
mod mle;
mod projectors;
mod resolved;

pub use counts::{expected_rates, simulate_counts, split_seed, BinCounts, CountRecord};
pub use dcm::{wavelength_bins, ArmLabel, DcmParams, WavelengthBin, LC_SPLIT_WAVELENGTH};
pub use mle::{linear_inversion, mle_reconstruct, MleOptions, MleResult};
pub use projectors::{Analyzer, DesignDiagnostics, Projector, ProjectorSet16};
pub use resolved::{
    frequency_resolved_qst, full_band_qst, reconstruct_with_bootstrap, QstBinResult, QstSettings,
};
