//! Schmidt decomposition across the polarization ⊗ frequency bipartition.

use crate::error::{Error, Result};
use crate::linalg::{canonical_phase, svd, CMat, C64, ZERO};
use crate::state::{JointState, PolarizationKet4};

/// Squared-coefficient fraction above which a Schmidt term counts toward the rank.
pub const DEFAULT_RANK_THRESHOLD: f64 = 1e-6;

/// Terms with a normalized coefficient at or below this are numerically zero
/// and are not returned.
const NEGLIGIBLE_COEFFICIENT: f64 = 1e-12;

/// `|ψ⟩ = Σ_k c_k |ξ_k⟩_pol ⊗ |χ_k⟩_freq` for a normalized state.
#[derive(Debug, Clone)]
pub struct SchmidtResult {
    /// Descending, with Σ c_k² = 1.
    pub coefficients: Vec<f64>,
    /// Orthonormal polarization kets, first non-negligible component real and positive.
    pub pol_vectors: Vec<PolarizationKet4>,
    /// Frequency modes on the state's grid, orthonormal under
    /// `⟨f, g⟩ = Σ_n w_n f_n* g_n` with the trapezoidal weights `w_n`.
    pub freq_weights: Vec<Vec<C64>>,
    /// Number of terms with `c_k² > threshold`.
    pub rank: usize,
}

impl SchmidtResult {
    /// Coefficient matrix `M[p][n] = Σ_k c_k ξ_k[p] χ_k[n] √w_n` rebuilt from
    /// the decomposition, in the same normalization as [`coefficient_matrix`].
    pub fn reconstruct(&self, state: &JointState) -> CMat {
        let w = state.quadrature_weights();
        CMat::from_fn(4, state.len(), |p, n| {
            let sqrt_w = w[n].sqrt();
            self.coefficients
                .iter()
                .zip(&self.pol_vectors)
                .zip(&self.freq_weights)
                .map(|((&c, xi), chi)| c * xi.amplitudes()[p] * chi[n] * sqrt_w)
                .sum()
        })
    }
}

/// Unit-Frobenius-norm 4 x N matrix `c_p(Ω_n) √w_n / ‖·‖`.
pub fn coefficient_matrix(state: &JointState) -> Result<CMat> {
    let total = state.total_weight();
    if !(total > 0.0) {
        return Err(Error::validation(
            "JointState",
            "positive total weight",
            "cannot decompose a zero state",
        ));
    }
    let norm = total.sqrt();
    let w = state.quadrature_weights();
    Ok(CMat::from_fn(4, state.len(), |p, n| {
        state.ket(n).amplitudes()[p] * (w[n].sqrt() / norm)
    }))
}

/// Singular value decomposition of the polarization x frequency coefficient
/// matrix. `threshold` is the squared-coefficient fraction a term must exceed
/// to count toward `rank`.
pub fn schmidt_decompose(state: &JointState, threshold: f64) -> Result<SchmidtResult> {
    if state.len() < 2 {
        return Err(Error::validation(
            "JointState",
            "at least two grid bins",
            format!("grid has {} bin", state.len()),
        ));
    }
    let m = coefficient_matrix(state)?;
    let w = state.quadrature_weights();
    // M = A† with A tall (N x 4): A = U Σ V†  ⇒  M = V Σ U†. Grids shorter
    // than four bins get zero rows appended, which leaves the spectrum intact.
    let a = m.adjoint();
    let a = if a.rows() < 4 {
        CMat::from_fn(4, 4, |i, j| if i < a.rows() { a[(i, j)] } else { ZERO })
    } else {
        a
    };
    let dec = svd(&a);
    let mut coefficients = Vec::new();
    let mut pol_vectors = Vec::new();
    let mut freq_weights = Vec::new();
    for (k, &sigma) in dec.sigma.iter().enumerate() {
        if sigma <= NEGLIGIBLE_COEFFICIENT {
            continue;
        }
        let mut xi: Vec<C64> = dec.v.column(k);
        let phase = canonical_phase(&mut xi);
        let chi: Vec<C64> = (0..state.len())
            .map(|n| dec.u[(n, k)].conj() * phase.conj() / w[n].sqrt())
            .collect();
        coefficients.push(sigma);
        pol_vectors.push(PolarizationKet4::from_array([xi[0], xi[1], xi[2], xi[3]]));
        freq_weights.push(chi);
    }
    let rank = coefficients.iter().filter(|&&c| c * c > threshold).count();
    Ok(SchmidtResult {
        coefficients,
        pol_vectors,
        freq_weights,
        rank,
    })
}

/// Grid inner product `Σ_n w_n f_n* g_n`.
pub fn grid_inner(weights: &[f64], f: &[C64], g: &[C64]) -> C64 {
    weights
        .iter()
        .zip(f.iter().zip(g))
        .fold(ZERO, |acc, (&w, (a, b))| acc + a.conj() * b * w)
}
