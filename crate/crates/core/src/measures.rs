//! Entanglement and similarity measures for two-qubit polarization states.

use crate::linalg::{svd, CMat, C64};
use crate::state::{DensityMatrix4, PolarizationKet4};

/// σ_y ⊗ σ_y in the (HH, HV, VH, VV) basis; it is real.
const SPIN_FLIP: [[f64; 4]; 4] = [
    [0.0, 0.0, 0.0, -1.0],
    [0.0, 0.0, 1.0, 0.0],
    [0.0, 1.0, 0.0, 0.0],
    [-1.0, 0.0, 0.0, 0.0],
];

/// Wootters concurrence `max(0, λ₁ − λ₂ − λ₃ − λ₄)`.
///
/// The λ are the square roots of the eigenvalues of `ρ (σ_y⊗σ_y) ρ* (σ_y⊗σ_y)`.
/// With `ρ = X X†` they are exactly the singular values of the symmetric matrix
/// `τ = Xᵀ (σ_y⊗σ_y) X`, which is what is computed here: no square roots of
/// nearly-zero eigenvalues are taken, so pure states stay exact to rounding.
pub fn concurrence(rho: &DensityMatrix4) -> f64 {
    let x = rho.factor();
    let tau = x.transpose().matmul(&spin_flip().matmul(&x));
    let lambda = svd(&tau).sigma;
    let c = lambda[0] - lambda[1] - lambda[2] - lambda[3];
    c.clamp(0.0, 1.0)
}

/// Concurrence of a pure state, `|ψᵀ (σ_y⊗σ_y) ψ| / ⟨ψ|ψ⟩`. Returns 0 for the
/// zero ket.
pub fn ket_concurrence(ket: &PolarizationKet4) -> f64 {
    let a = ket.amplitudes();
    let n2 = ket.norm_sqr();
    if n2 == 0.0 {
        return 0.0;
    }
    let overlap = 2.0 * (a[0] * a[3] - a[1] * a[2]);
    (overlap.norm() / n2).min(1.0)
}

/// Purity Tr(ρ²).
pub fn purity(rho: &DensityMatrix4) -> f64 {
    rho.matrix().iter().flatten().map(|z| z.norm_sqr()).sum()
}

/// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²`.
///
/// Evaluated as the squared nuclear norm of `X_σ† X_ρ` for factors
/// `ρ = X_ρ X_ρ†`, `σ = X_σ X_σ†`, which is symmetric in its arguments.
pub fn fidelity(rho: &DensityMatrix4, sigma: &DensityMatrix4) -> f64 {
    let overlap = sigma.factor().adjoint().matmul(&rho.factor());
    let nuclear: f64 = svd(&overlap).sigma.iter().sum();
    (nuclear * nuclear).clamp(0.0, 1.0)
}

fn spin_flip() -> CMat {
    CMat::from_fn(4, 4, |i, j| C64::new(SPIN_FLIP[i][j], 0.0))
}
