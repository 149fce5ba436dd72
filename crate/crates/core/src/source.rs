//! Type-II SPDC biphoton source under a continuous-wave pump.
//!
//! The pump is treated as monochromatic, so energy conservation pins each
//! signal/idler pair to `(ω_P/2 + Ω, ω_P/2 − Ω)` and the joint amplitude is a
//! function of the detuning `Ω` alone. The group-birefringence phase between
//! the `|HV⟩` and `|VH⟩` emission paths is neglected, so every bin carries the
//! same polarization ket `|Ψ⁺⟩`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::state::{JointState, PolarizationKet4};
use crate::units;

/// Taylor expansion of a phase mismatch about the degeneracy point `Ω = 0`:
/// `Δk(Ω) = k0 + k1 Ω + k2 Ω²/2 + k3 Ω³/6`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispersionExpansion {
    pub k0_rad_per_m: f64,
    pub k1_s_per_m: f64,
    pub k2_s2_per_m: f64,
    pub k3_s3_per_m: f64,
}

impl DispersionExpansion {
    pub const fn quadratic(k2: f64) -> Self {
        Self {
            k0_rad_per_m: 0.0,
            k1_s_per_m: 0.0,
            k2_s2_per_m: k2,
            k3_s3_per_m: 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        [
            self.k0_rad_per_m,
            self.k1_s_per_m,
            self.k2_s2_per_m,
            self.k3_s3_per_m,
        ]
        .iter()
        .all(|c| c.is_finite())
    }
}

/// Phase mismatch Δk(Ω) in rad/m.
pub fn phase_mismatch(model: &DispersionExpansion, omega: f64) -> f64 {
    model.k0_rad_per_m
        + omega
            * (model.k1_s_per_m
                + omega * (model.k2_s2_per_m / 2.0 + omega * model.k3_s3_per_m / 6.0))
}

/// Source parameters. Lengths in m, frequencies in rad/s.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdcParams {
    pub pump_wavelength: f64,
    pub crystal_length: f64,
    pub phase_mismatch: DispersionExpansion,
    /// Half-width of the detuning grid.
    pub emission_bandwidth: f64,
    pub grid_points: usize,
    /// Overall amplitude scale `A₀`.
    pub amplitude_scale: f64,
}

/// Default quadratic phase-mismatch coefficient of the poled fiber (s²/m).
///
/// Chosen so that `sinc²(ΔkL/2)` falls to one half about 35 nm from the
/// 1560 nm degeneracy point for a 20 cm fiber, giving a flat-topped emission
/// band wider than 60 nm.
pub const DEFAULT_CRYSTAL_K2: f64 = 3.79e-26;

impl Default for SpdcParams {
    fn default() -> Self {
        Self {
            pump_wavelength: 780e-9,
            crystal_length: 0.20,
            phase_mismatch: DispersionExpansion::quadratic(DEFAULT_CRYSTAL_K2),
            emission_bandwidth: units::thz_to_rad_per_s(12.0),
            grid_points: 4096,
            amplitude_scale: 1.0,
        }
    }
}

impl SpdcParams {
    pub fn validate(&self) -> Result<()> {
        let bad =
            |invariant, detail: String| Err(Error::validation("SpdcParams", invariant, detail));
        if !(self.pump_wavelength > 0.0 && self.pump_wavelength.is_finite()) {
            return bad("pump_wavelength > 0", format!("{}", self.pump_wavelength));
        }
        if !(self.crystal_length > 0.0 && self.crystal_length.is_finite()) {
            return bad("crystal_length > 0", format!("{}", self.crystal_length));
        }
        if !(self.emission_bandwidth > 0.0 && self.emission_bandwidth.is_finite()) {
            return bad("bandwidth > 0", format!("{}", self.emission_bandwidth));
        }
        if self.grid_points < 16 {
            return bad("grid_points >= 16", format!("{}", self.grid_points));
        }
        if !self.phase_mismatch.is_finite() || !self.amplitude_scale.is_finite() {
            return bad("finite coefficients", "non-finite coefficient".into());
        }
        Ok(())
    }

    pub fn pump_frequency(&self) -> f64 {
        units::angular_frequency(self.pump_wavelength)
    }

    /// Uniform detuning grid over `[-bandwidth, bandwidth]`.
    pub fn grid(&self) -> Vec<f64> {
        let n = self.grid_points;
        let w = self.emission_bandwidth;
        (0..n)
            .map(|i| -w + 2.0 * w * i as f64 / (n - 1) as f64)
            .collect()
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Joint spectral amplitude `φ(Ω) = A₀ L sinc(Δk(Ω) L / 2)`.
pub fn joint_amplitude(params: &SpdcParams, omega: f64) -> C64 {
    let dk = phase_mismatch(&params.phase_mismatch, omega);
    let l = params.crystal_length;
    C64::new(params.amplitude_scale * l * sinc(dk * l / 2.0), 0.0)
}

/// Biphoton state `φ(Ω) |Ψ⁺⟩` on the parameter grid.
pub fn spdc_state(params: &SpdcParams) -> Result<JointState> {
    params.validate()?;
    let grid = params.grid();
    let psi = PolarizationKet4::psi_plus();
    let kets = grid
        .iter()
        .map(|&omega| psi.scaled(joint_amplitude(params, omega)))
        .collect();
    JointState::new(grid, kets, params.pump_frequency())
}
