//! Polarization states extracted from a [`JointState`].

use crate::error::{Error, Result};
use crate::linalg::{Mat4, C64, ZERO};
use crate::state::{DensityMatrix4, JointState};

/// Normalized polarization state of a single frequency-conjugate pair.
pub fn conditional_density(state: &JointState, bin_index: usize) -> Result<DensityMatrix4> {
    if bin_index >= state.len() {
        return Err(Error::validation(
            "JointState",
            "bin index in range",
            format!("index {bin_index} >= {}", state.len()),
        ));
    }
    let ket = state.ket(bin_index);
    if ket.norm_sqr() == 0.0 {
        return Err(Error::ZeroWeightBin { index: bin_index });
    }
    DensityMatrix4::from_ket(ket)
}

/// Reduced polarization state after tracing out frequency:
/// `∫ |ψ(Ω)⟩⟨ψ(Ω)| dΩ / ∫ ⟨ψ(Ω)|ψ(Ω)⟩ dΩ`.
pub fn trace_out_frequency(state: &JointState) -> Result<DensityMatrix4> {
    let indices: Vec<usize> = (0..state.len()).collect();
    average_density(state, &indices)
}

/// Weighted average of `|ψ⟩⟨ψ|` over a subset of grid points, using the
/// grid's quadrature weights. A single index returns that bin's conditional
/// state.
pub fn average_density(state: &JointState, indices: &[usize]) -> Result<DensityMatrix4> {
    if indices.len() == 1 {
        return conditional_density(state, indices[0]);
    }
    let weights = state.quadrature_weights();
    let mut acc: Mat4 = [[ZERO; 4]; 4];
    for &n in indices {
        let w = C64::new(weights[n], 0.0);
        let outer = state.ket(n).outer();
        for i in 0..4 {
            for j in 0..4 {
                acc[i][j] += w * outer[i][j];
            }
        }
    }
    let total: f64 = (0..4).map(|i| acc[i][i].re).sum();
    if !(total > 0.0) {
        return Err(Error::validation(
            "JointState",
            "positive total weight",
            "selected bins carry no weight",
        ));
    }
    DensityMatrix4::normalized(acc)
}
