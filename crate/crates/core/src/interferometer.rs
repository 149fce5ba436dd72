//! Reflective common-path nonlinear interferometer.
//!
//! The pump generates a biphoton amplitude on its forward pass through the
//! nonlinear fiber. That amplitude runs through the polarization controller and
//! the dispersive arm, is reflected, and comes back through the fiber where the
//! reflected pump generates a second amplitude. The two add coherently.
//!
//! The arm and controller are lumped into one transformation acting on the
//! forward amplitude, `U ⊗ U` per photon pair, and the round-trip dispersion
//! enters as the relative phase `e^{2iα(Ω)}` between the two amplitudes:
//!
//! ```text
//! |out(Ω)⟩ = (U ⊗ U)|src(Ω)⟩ + r e^{2iα(Ω)} |src(Ω)⟩
//! ```
//!
//! With `U = 1` this is `φ(Ω)(1 + e^{2iα})|Ψ⁺⟩`, and with `θ = π/4` it is
//! `φ(Ω)(−|Φ⁻⟩ + e^{2iα}|Ψ⁺⟩)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{kron2, mat4_apply, C64, ONE, ZERO};
use crate::measures::concurrence;
use crate::par;
use crate::reduced::conditional_density;
use crate::source::{phase_mismatch, DispersionExpansion, SpdcParams};
use crate::state::{JointState, PolarizationKet4};

/// Quadratic phase-mismatch coefficient of the SMF-28 arm, `−2β₂` with
/// `β₂ = −21.7 ps²/km` at 1560 nm (s²/m).
pub const SMF28_K2: f64 = 4.34e-26;

/// Single-photon polarization-controller unitary
/// `[[e^{iφ₁} cos θ, −e^{iφ₂} sin θ], [e^{−iφ₂} sin θ, e^{−iφ₁} cos θ]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcUnitary {
    theta: f64,
    phi1: f64,
    phi2: f64,
    matrix: [[C64; 2]; 2],
}

pub fn pc_unitary(theta: f64, phi1: f64, phi2: f64) -> PcUnitary {
    let (s, c) = theta.sin_cos();
    let matrix = [
        [C64::from_polar(c, phi1), -C64::from_polar(s, phi2)],
        [C64::from_polar(s, -phi2), C64::from_polar(c, -phi1)],
    ];
    PcUnitary {
        theta,
        phi1,
        phi2,
        matrix,
    }
}

impl PcUnitary {
    pub fn angles(&self) -> (f64, f64, f64) {
        (self.theta, self.phi1, self.phi2)
    }

    pub fn matrix(&self) -> &[[C64; 2]; 2] {
        &self.matrix
    }

    /// Same controller with `θ` offset by `delta`.
    pub fn misaligned(&self, delta: f64) -> Self {
        pc_unitary(self.theta + delta, self.phi1, self.phi2)
    }

    /// `max |U†U − I|`
    pub fn unitarity_error(&self) -> f64 {
        let u = &self.matrix;
        let mut err: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = ZERO;
                for k in 0..2 {
                    acc += u[k][i].conj() * u[k][j];
                }
                let target = if i == j { ONE } else { ZERO };
                err = err.max((acc - target).norm());
            }
        }
        err
    }
}

/// Dispersive arm plus the nonlinear fiber's own phase mismatch; together
/// they set `α(Ω) = Δk⁽⁰⁾(Ω) L₀ + Δk(Ω) L`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearArm {
    /// L₀ (m).
    pub length: f64,
    /// Δk⁽⁰⁾(Ω) of the linear medium.
    pub dispersion: DispersionExpansion,
    /// L (m).
    pub crystal_length: f64,
    /// Δk(Ω) of the nonlinear medium.
    pub crystal_dispersion: DispersionExpansion,
}

impl LinearArm {
    pub fn new(length: f64, dispersion: DispersionExpansion, source: &SpdcParams) -> Self {
        Self {
            length,
            dispersion,
            crystal_length: source.crystal_length,
            crystal_dispersion: source.phase_mismatch,
        }
    }

    /// 5 m of SMF-28 after the default source.
    pub fn smf28(source: &SpdcParams) -> Self {
        Self::new(5.0, DispersionExpansion::quadratic(SMF28_K2), source)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(Error::validation(
                "LinearArm",
                "length > 0",
                format!("{}", self.length),
            ));
        }
        if !self.dispersion.is_finite() {
            return Err(Error::validation(
                "LinearArm",
                "finite coefficients",
                "non-finite dispersion coefficient",
            ));
        }
        Ok(())
    }
}

/// Amplitude and alignment imperfections of the physical device.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImperfectionParams {
    /// Ratio of the directly generated (backward) amplitude to the transformed
    /// (forward) one.
    pub amplitude_ratio: f64,
    /// Error added to the controller angle θ (rad).
    pub theta_error_rad: f64,
}

impl Default for ImperfectionParams {
    fn default() -> Self {
        Self {
            amplitude_ratio: 1.0,
            theta_error_rad: 0.0,
        }
    }
}

impl ImperfectionParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude_ratio > 0.0 && self.amplitude_ratio.is_finite()) {
            return Err(Error::validation(
                "ImperfectionParams",
                "amplitude_ratio > 0",
                format!("{}", self.amplitude_ratio),
            ));
        }
        if !self.theta_error_rad.is_finite() {
            return Err(Error::validation(
                "ImperfectionParams",
                "finite theta_error",
                format!("{}", self.theta_error_rad),
            ));
        }
        Ok(())
    }
}

/// Relative phase α(Ω) in rad.
pub fn alpha_phase(arm: &LinearArm, omega: f64) -> f64 {
    phase_mismatch(&arm.dispersion, omega) * arm.length
        + phase_mismatch(&arm.crystal_dispersion, omega) * arm.crystal_length
}

/// Superposes the transformed forward amplitude with the backward one, bin by bin.
pub fn compose_nli(
    src: &JointState,
    pc: &PcUnitary,
    arm: &LinearArm,
    imp: &ImperfectionParams,
) -> Result<JointState> {
    let u = pc.misaligned(imp.theta_error_rad);
    let pair_op = kron2(u.matrix(), u.matrix());
    let r = imp.amplitude_ratio;
    let kets = par::map_range(src.len(), |n| {
        let ket = src.ket(n);
        let forward = PolarizationKet4::from_array(mat4_apply(&pair_op, ket.amplitudes()));
        let phase = C64::from_polar(r, 2.0 * alpha_phase(arm, src.detunings()[n]));
        forward.add(&ket.scaled(phase))
    });
    src.with_kets(kets)
}

/// Polarization-traced spectral density `(Ω, Σ_pol |c(Ω)|²)` per bin.
pub fn spectral_intensity(state: &JointState) -> Vec<(f64, f64)> {
    state
        .detunings()
        .iter()
        .enumerate()
        .map(|(n, &omega)| (omega, state.bin_weight(n)))
        .collect()
}

/// Concurrence of each nonzero-weight bin's conditional polarization state.
pub fn concurrence_spectrum(state: &JointState) -> Vec<(f64, f64)> {
    par::map_range(state.len(), |n| {
        let rho = conditional_density(state, n).ok()?;
        Some((state.detunings()[n], concurrence(&rho)))
    })
    .into_iter()
    .flatten()
    .collect()
}

/// Number of `cos² α` fringes spanned by the grid, `(α_max − α_min)/π`.
pub fn fringe_count(arm: &LinearArm, grid: &[f64]) -> f64 {
    let (lo, hi) = grid
        .iter()
        .map(|&w| alpha_phase(arm, w))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), a| {
            (lo.min(a), hi.max(a))
        });
    (hi - lo) / std::f64::consts::PI
}

/// Spectral fringe visibility of `output` relative to the `source` envelope.
///
/// The ratio `I_out(Ω)/I_src(Ω)` on bins where the source is above `1e-6` of
/// its peak is regressed onto `a + b cos 2α(Ω) + c sin 2α(Ω)`; the visibility
/// is `√(b² + c²)/a`. For two interfering amplitudes this equals
/// `(I_max − I_min)/(I_max + I_min)` of the continuous fringe, without
/// depending on whether a grid point lands exactly on a dark fringe.
pub fn fringe_visibility(output: &JointState, source: &JointState, arm: &LinearArm) -> Result<f64> {
    if output.detunings() != source.detunings() {
        return Err(Error::validation(
            "JointState",
            "matching grids",
            "output and source live on different grids",
        ));
    }
    let peak = (0..source.len())
        .map(|n| source.bin_weight(n))
        .fold(0.0, f64::max);
    let mut normal = [[0.0; 3]; 3];
    let mut rhs = [0.0; 3];
    let mut alpha_range = (f64::INFINITY, f64::NEG_INFINITY);
    for n in 0..source.len() {
        let s = source.bin_weight(n);
        if s <= 1e-6 * peak {
            continue;
        }
        let alpha = alpha_phase(arm, source.detunings()[n]);
        alpha_range = (alpha_range.0.min(alpha), alpha_range.1.max(alpha));
        let ratio = output.bin_weight(n) / s;
        let basis = [1.0, (2.0 * alpha).cos(), (2.0 * alpha).sin()];
        for i in 0..3 {
            rhs[i] += basis[i] * ratio;
            for j in 0..3 {
                normal[i][j] += basis[i] * basis[j];
            }
        }
    }
    if alpha_range.1 - alpha_range.0 < std::f64::consts::PI {
        return Err(Error::validation(
            "LinearArm",
            "at least one full fringe",
            format!(
                "alpha spans only {:.3} rad over the emission band",
                alpha_range.1 - alpha_range.0
            ),
        ));
    }
    let [a, b, c] = solve3(normal, rhs).ok_or_else(|| {
        Error::validation("LinearArm", "resolvable fringe", "singular regression")
    })?;
    Ok((b * b + c * c).sqrt() / a)
}

fn solve3(m: [[f64; 3]; 3], rhs: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&m);
    if d.abs() < 1e-300 {
        return None;
    }
    let mut out = [0.0; 3];
    for (k, slot) in out.iter_mut().enumerate() {
        let mut mk = m;
        for i in 0..3 {
            mk[i][k] = rhs[i];
        }
        *slot = det(&mk) / d;
    }
    Some(out)
}
