//! State containers for the polarization and frequency degrees of freedom.
//!
//! Basis ordering is fixed everywhere as `(HH, HV, VH, VV)`: index `2 * a + b`
//! where `a` is the polarization of photon A (signal) and `b` that of photon B
//! (idler), with `H = 0` and `V = 1`.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, CMat, HermitianEigen, Mat4, C64, ZERO};

pub const HH: usize = 0;
pub const HV: usize = 1;
pub const VH: usize = 2;
pub const VV: usize = 3;

pub const BASIS_LABELS: [&str; 4] = ["HH", "HV", "VH", "VV"];

const HERMITIAN_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;
const PSD_TOL: f64 = 1e-10;

/// Two-photon polarization amplitudes over `(HH, HV, VH, VV)`.
///
/// Amplitudes are not required to be normalized; inside a [`JointState`] they
/// carry the spectral amplitude of their frequency bin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationKet4([C64; 4]);

impl PolarizationKet4 {
    pub fn new(amplitudes: [C64; 4]) -> Result<Self> {
        if amplitudes
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::validation(
                "PolarizationKet4",
                "finite amplitudes",
                format!("{amplitudes:?}"),
            ));
        }
        Ok(Self(amplitudes))
    }

    /// Builds a unit-norm ket by rescaling `amplitudes`.
    pub fn normalized(amplitudes: [C64; 4]) -> Result<Self> {
        let ket = Self::new(amplitudes)?;
        let n2 = ket.norm_sqr();
        if !(n2 > 0.0) || !n2.is_finite() {
            return Err(Error::validation(
                "PolarizationKet4",
                "nonzero finite norm",
                format!("norm^2 = {n2}"),
            ));
        }
        Ok(ket.scaled(C64::new(1.0 / n2.sqrt(), 0.0)))
    }

    pub(crate) const fn from_array(amplitudes: [C64; 4]) -> Self {
        Self(amplitudes)
    }

    pub fn basis(index: usize) -> Self {
        let mut a = [ZERO; 4];
        a[index] = C64::new(1.0, 0.0);
        Self(a)
    }

    /// |Ψ⁺⟩ = (|HV⟩ + |VH⟩)/√2
    pub fn psi_plus() -> Self {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        Self([ZERO, h, h, ZERO])
    }

    /// |Ψ⁻⟩ = (|HV⟩ − |VH⟩)/√2
    pub fn psi_minus() -> Self {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        Self([ZERO, h, -h, ZERO])
    }

    /// |Φ⁺⟩ = (|HH⟩ + |VV⟩)/√2
    pub fn phi_plus() -> Self {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        Self([h, ZERO, ZERO, h])
    }

    /// |Φ⁻⟩ = (|HH⟩ − |VV⟩)/√2
    pub fn phi_minus() -> Self {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        Self([h, ZERO, ZERO, -h])
    }

    pub fn amplitudes(&self) -> &[C64; 4] {
        &self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self(self.0.map(|z| z * factor))
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &Self) -> C64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(std::array::from_fn(|i| self.0[i] + other.0[i]))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// |self⟩⟨self| without normalization.
    pub fn outer(&self) -> Mat4 {
        let mut m = [[ZERO; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = self.0[i] * self.0[j].conj();
            }
        }
        m
    }
}

/// Two-qubit polarization density matrix in the `(HH, HV, VH, VV)` basis.
///
/// Constructors validate Hermiticity, unit trace and positive
/// semi-definiteness, so every value of this type is a physical state. The
/// stored matrix is exactly Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix4 {
    m: Mat4,
}

impl DensityMatrix4 {
    /// Validates `m` as a density matrix (no renormalization).
    pub fn new(m: Mat4) -> Result<Self> {
        Self::validate(&m)?;
        Ok(Self {
            m: hermitian_part(&m),
        })
    }

    /// Divides `m` by its trace, then validates.
    pub fn normalized(m: Mat4) -> Result<Self> {
        check_finite(&m)?;
        let tr: f64 = (0..4).map(|i| m[i][i].re).sum();
        if !(tr > 0.0) {
            return Err(Error::validation(
                "DensityMatrix4",
                "positive trace",
                format!("trace = {tr}"),
            ));
        }
        let scaled = m.map(|row| row.map(|z| z / tr));
        Self::new(scaled)
    }

    /// Pure state |ψ⟩⟨ψ|/⟨ψ|ψ⟩.
    pub fn from_ket(ket: &PolarizationKet4) -> Result<Self> {
        let n2 = ket.norm_sqr();
        if !(n2 > 0.0) {
            return Err(Error::validation(
                "DensityMatrix4",
                "nonzero ket",
                "cannot build a state from a zero ket",
            ));
        }
        let m = ket.outer().map(|row| row.map(|z| z / n2));
        Ok(Self {
            m: hermitian_part(&m),
        })
    }

    pub fn maximally_mixed() -> Self {
        let mut m = [[ZERO; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = C64::new(0.25, 0.0);
        }
        Self { m }
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.m
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.m[row][col]
    }

    pub fn eigen(&self) -> HermitianEigen {
        hermitian_eigen(&CMat::from_mat4(&self.m))
    }

    /// A 4x4 factor `X` with `X X† = ρ`, built from the eigen-decomposition.
    /// Eigenvalues within rounding of zero (below `64 ε λ_max`) are set to
    /// zero so that pure states yield a rank-one factor.
    pub fn factor(&self) -> CMat {
        let eig = self.eigen();
        let floor = 64.0 * f64::EPSILON * eig.values[0].max(0.0);
        let mut x = eig.vectors;
        for (k, &lambda) in eig.values.iter().enumerate() {
            let s = if lambda > floor { lambda.sqrt() } else { 0.0 };
            for i in 0..4 {
                x[(i, k)] *= s;
            }
        }
        x
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                d = d.max((self.m[i][j] - other.m[i][j]).norm());
            }
        }
        d
    }

    /// Expectation value Tr(A ρ) for a Hermitian observable.
    pub fn expectation(&self, a: &Mat4) -> f64 {
        let mut acc = ZERO;
        for i in 0..4 {
            for j in 0..4 {
                acc += a[i][j] * self.m[j][i];
            }
        }
        acc.re
    }

    /// Applies `ρ → W ρ W†`. `W` must be unitary for the result to stay valid.
    pub fn transformed(&self, w: &Mat4) -> Result<Self> {
        use crate::linalg::{mat4_adjoint, mat4_mul};
        Self::new(mat4_mul(&mat4_mul(w, &self.m), &mat4_adjoint(w)))
    }

    fn validate(m: &Mat4) -> Result<()> {
        check_finite(m)?;
        let mut herm: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                herm = herm.max((m[i][j] - m[j][i].conj()).norm());
            }
        }
        if herm > HERMITIAN_TOL {
            return Err(Error::validation(
                "DensityMatrix4",
                "Hermitian",
                format!("max |m - m†| = {herm:e}"),
            ));
        }
        let tr: f64 = (0..4).map(|i| m[i][i].re).sum();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::validation(
                "DensityMatrix4",
                "unit trace",
                format!("trace = {tr}"),
            ));
        }
        let eig = hermitian_eigen(&CMat::from_mat4(m));
        let min = eig.values[3];
        if min < -PSD_TOL {
            return Err(Error::validation(
                "DensityMatrix4",
                "positive semidefinite",
                format!("smallest eigenvalue = {min:e}"),
            ));
        }
        Ok(())
    }
}

fn check_finite(m: &Mat4) -> Result<()> {
    if m.iter()
        .flatten()
        .any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return Err(Error::validation(
            "DensityMatrix4",
            "finite entries",
            "matrix contains NaN or infinity",
        ));
    }
    Ok(())
}

fn hermitian_part(m: &Mat4) -> Mat4 {
    std::array::from_fn(|i| std::array::from_fn(|j| 0.5 * (m[i][j] + m[j][i].conj())))
}

/// Biphoton state sampled on a detuning grid under a CW pump.
///
/// Bin `n` at detuning `Ω_n` stands for the frequency-conjugate pair
/// `(ω_P/2 + Ω_n, ω_P/2 − Ω_n)` for photons (A, B). Its polarization ket is
/// unnormalized and carries the spectral amplitude. Integrals over the grid
/// use trapezoidal quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    detunings: Vec<f64>,
    kets: Vec<PolarizationKet4>,
    quadrature: Vec<f64>,
    pump_frequency: f64,
}

impl JointState {
    pub fn new(
        detunings: Vec<f64>,
        kets: Vec<PolarizationKet4>,
        pump_frequency: f64,
    ) -> Result<Self> {
        if detunings.is_empty() || detunings.len() != kets.len() {
            return Err(Error::validation(
                "JointState",
                "one ket per grid point",
                format!("{} detunings, {} kets", detunings.len(), kets.len()),
            ));
        }
        if detunings.iter().any(|w| !w.is_finite()) || !pump_frequency.is_finite() {
            return Err(Error::validation(
                "JointState",
                "finite grid",
                "non-finite detuning or pump frequency",
            ));
        }
        if detunings.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::validation(
                "JointState",
                "strictly increasing detunings",
                "grid is not strictly increasing",
            ));
        }
        if kets
            .iter()
            .any(|k| k.0.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()))
        {
            return Err(Error::validation(
                "JointState",
                "finite amplitudes",
                "a ket contains NaN or infinity",
            ));
        }
        let quadrature = trapezoid_weights(&detunings);
        let state = Self {
            detunings,
            kets,
            quadrature,
            pump_frequency,
        };
        let total = state.total_weight();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::validation(
                "JointState",
                "positive total weight",
                format!("total weight = {total:e}"),
            ));
        }
        Ok(state)
    }

    pub fn len(&self) -> usize {
        self.detunings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detunings.is_empty()
    }

    pub fn detunings(&self) -> &[f64] {
        &self.detunings
    }

    pub fn kets(&self) -> &[PolarizationKet4] {
        &self.kets
    }

    pub fn ket(&self, index: usize) -> &PolarizationKet4 {
        &self.kets[index]
    }

    pub fn pump_frequency(&self) -> f64 {
        self.pump_frequency
    }

    /// Trapezoidal integration weight of each grid point (rad/s). A
    /// single-point grid gets unit weight.
    pub fn quadrature_weights(&self) -> &[f64] {
        &self.quadrature
    }

    /// Spectral density of bin `index`: Σ_pol |c|².
    pub fn bin_weight(&self, index: usize) -> f64 {
        self.kets[index].norm_sqr()
    }

    /// ∫ Σ_pol |c(Ω)|² dΩ
    pub fn total_weight(&self) -> f64 {
        self.kets
            .iter()
            .zip(&self.quadrature)
            .map(|(k, w)| k.norm_sqr() * w)
            .sum()
    }

    /// Angular frequencies (ω_A, ω_B) of the conjugate pair in bin `index`.
    pub fn pair_frequencies(&self, index: usize) -> (f64, f64) {
        let half = 0.5 * self.pump_frequency;
        let d = self.detunings[index];
        (half + d, half - d)
    }

    /// Same grid with every ket replaced by `f(index, ket)`.
    pub fn map_kets(
        &self,
        f: impl Fn(usize, &PolarizationKet4) -> PolarizationKet4,
    ) -> Result<Self> {
        let kets = self.kets.iter().enumerate().map(|(i, k)| f(i, k)).collect();
        Self::new(self.detunings.clone(), kets, self.pump_frequency)
    }

    pub(crate) fn with_kets(&self, kets: Vec<PolarizationKet4>) -> Result<Self> {
        Self::new(self.detunings.clone(), kets, self.pump_frequency)
    }
}

/// Trapezoidal weights for an increasing, possibly non-uniform grid.
pub fn trapezoid_weights(grid: &[f64]) -> Vec<f64> {
    let n = grid.len();
    if n == 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|i| {
            let left = if i > 0 { grid[i] - grid[i - 1] } else { 0.0 };
            let right = if i + 1 < n {
                grid[i + 1] - grid[i]
            } else {
                0.0
            };
            0.5 * (left + right)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_states_are_orthonormal() {
        let bells = [
            PolarizationKet4::psi_plus(),
            PolarizationKet4::psi_minus(),
            PolarizationKet4::phi_plus(),
            PolarizationKet4::phi_minus(),
        ];
        for (i, a) in bells.iter().enumerate() {
            for (j, b) in bells.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((a.inner(b) - C64::new(expected, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn normalized_ket_has_unit_norm() {
        let k = PolarizationKet4::normalized([
            C64::new(1.0, 2.0),
            C64::new(-3.0, 0.5),
            ZERO,
            C64::new(0.0, 7.0),
        ])
        .unwrap();
        assert!((k.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ket_rejects_nan() {
        let err = PolarizationKet4::new([C64::new(f64::NAN, 0.0), ZERO, ZERO, ZERO]).unwrap_err();
        assert!(matches!(
            err,
            Error::Validation {
                invariant: "finite amplitudes",
                ..
            }
        ));
        assert!(PolarizationKet4::normalized([ZERO; 4]).is_err());
    }

    #[test]
    fn density_rejects_each_invariant() {
        let mut m = *DensityMatrix4::maximally_mixed().matrix();
        m[0][1] = C64::new(0.1, 0.0);
        let err = DensityMatrix4::new(m).unwrap_err();
        assert!(matches!(
            err,
            Error::Validation {
                invariant: "Hermitian",
                ..
            }
        ));

        let mut m = *DensityMatrix4::maximally_mixed().matrix();
        m[0][0] = C64::new(0.5, 0.0);
        let err = DensityMatrix4::new(m).unwrap_err();
        assert!(matches!(
            err,
            Error::Validation {
                invariant: "unit trace",
                ..
            }
        ));

        let mut m = [[ZERO; 4]; 4];
        m[0][0] = C64::new(1.2, 0.0);
        m[1][1] = C64::new(-0.2, 0.0);
        let err = DensityMatrix4::new(m).unwrap_err();
        assert!(matches!(
            err,
            Error::Validation {
                invariant: "positive semidefinite",
                ..
            }
        ));
    }

    #[test]
    fn trapezoid_weights_sum_to_span() {
        let grid = [0.0, 0.5, 1.5, 4.0];
        let w = trapezoid_weights(&grid);
        assert!((w.iter().sum::<f64>() - 4.0).abs() < 1e-15);
        assert_eq!(trapezoid_weights(&[3.0]), vec![1.0]);
    }

    #[test]
    fn joint_state_rejects_bad_grids() {
        let k = PolarizationKet4::psi_plus();
        assert!(JointState::new(vec![0.0, 0.0], vec![k, k], 1.0).is_err());
        assert!(JointState::new(vec![1.0, 0.0], vec![k, k], 1.0).is_err());
        assert!(JointState::new(vec![0.0], vec![k, k], 1.0).is_err());
        let zero = PolarizationKet4::new([ZERO; 4]).unwrap();
        let err = JointState::new(vec![0.0, 1.0], vec![zero, zero], 1.0).unwrap_err();
        assert!(matches!(
            err,
            Error::Validation {
                invariant: "positive total weight",
                ..
            }
        ));
    }
}
