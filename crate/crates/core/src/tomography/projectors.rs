use std::f64::consts::FRAC_1_SQRT_2;

use crate::linalg::{svd, CMat, Mat4, C64, ONE, ZERO};

/// Single-photon analyzer setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Analyzer {
    H,
    V,
    /// (H + V)/√2
    D,
    /// (H − iV)/√2
    R,
}

impl Analyzer {
    pub const ALL: [Analyzer; 4] = [Analyzer::H, Analyzer::V, Analyzer::D, Analyzer::R];

    pub fn ket(&self) -> [C64; 2] {
        let h = FRAC_1_SQRT_2;
        match self {
            Analyzer::H => [ONE, ZERO],
            Analyzer::V => [ZERO, ONE],
            Analyzer::D => [C64::new(h, 0.0), C64::new(h, 0.0)],
            Analyzer::R => [C64::new(h, 0.0), C64::new(0.0, -h)],
        }
    }

    pub fn label(&self) -> char {
        match self {
            Analyzer::H => 'H',
            Analyzer::V => 'V',
            Analyzer::D => 'D',
            Analyzer::R => 'R',
        }
    }
}

/// Rank-one two-photon projector `|a b⟩⟨a b|`.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    pub settings: [Analyzer; 2],
    pub ket: [C64; 4],
    pub matrix: Mat4,
}

impl Projector {
    pub fn new(a: Analyzer, b: Analyzer) -> Self {
        let (ka, kb) = (a.ket(), b.ket());
        let ket = [ka[0] * kb[0], ka[0] * kb[1], ka[1] * kb[0], ka[1] * kb[1]];
        let matrix = std::array::from_fn(|i| std::array::from_fn(|j| ket[i] * ket[j].conj()));
        Self {
            settings: [a, b],
            ket,
            matrix,
        }
    }

    pub fn label(&self) -> String {
        format!("{}{}", self.settings[0].label(), self.settings[1].label())
    }
}

/// Rank and conditioning of the linear map ρ ↦ (Tr P_j ρ)_j.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignDiagnostics {
    pub rank: usize,
    pub condition_number: f64,
}

/// The 16 projectors `{H,V,D,R} ⊗ {H,V,D,R}`, photon A setting varying slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorSet16 {
    projectors: Vec<Projector>,
    design: CMat,
    pseudo_inverse: CMat,
    diagnostics: DesignDiagnostics,
}

impl Default for ProjectorSet16 {
    fn default() -> Self {
        Self::standard()
    }
}

impl ProjectorSet16 {
    pub fn standard() -> Self {
        let projectors: Vec<Projector> = Analyzer::ALL
            .iter()
            .flat_map(|&a| Analyzer::ALL.iter().map(move |&b| Projector::new(a, b)))
            .collect();
        let design = design_matrix(&projectors);
        let dec = svd(&design);
        let max = dec.sigma[0];
        let rank = dec.sigma.iter().filter(|&&v| v > 1e-10 * max).count();
        let min = dec.sigma[dec.sigma.len() - 1];
        let diagnostics = DesignDiagnostics {
            rank,
            condition_number: if min > 0.0 { max / min } else { f64::INFINITY },
        };
        // B⁺ = V Σ⁻¹ U†, dropping numerically zero singular values.
        let pseudo_inverse = CMat::from_fn(16, projectors.len(), |k, j| {
            (0..dec.sigma.len())
                .filter(|&i| dec.sigma[i] > 1e-10 * max)
                .map(|i| dec.v[(k, i)] * dec.u[(j, i)].conj() / dec.sigma[i])
                .sum()
        });
        Self {
            projectors,
            design,
            pseudo_inverse,
            diagnostics,
        }
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn get(&self, j: usize) -> &Projector {
        &self.projectors[j]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Projector> {
        self.projectors.iter()
    }

    pub fn position(&self, a: Analyzer, b: Analyzer) -> Option<usize> {
        self.projectors.iter().position(|p| p.settings == [a, b])
    }

    /// Real 16 x 16 matrix `B[j][k] = Tr(P_j Γ_k)/4` with `Γ_k = σ_a ⊗ σ_b`
    /// (a, b ∈ {I, X, Y, Z}), so that `Tr(P_j ρ) = Σ_k B[j][k] s_k` for the
    /// two-qubit Stokes parameters `s_k = Tr(Γ_k ρ)`.
    pub fn design_matrix(&self) -> &CMat {
        &self.design
    }

    /// Moore-Penrose inverse of [`Self::design_matrix`].
    pub fn pseudo_inverse(&self) -> &CMat {
        &self.pseudo_inverse
    }

    pub fn diagnostics(&self) -> DesignDiagnostics {
        self.diagnostics
    }
}

fn design_matrix(projectors: &[Projector]) -> CMat {
    let paulis = pauli_products();
    CMat::from_fn(projectors.len(), 16, |j, k| {
        let p = &projectors[j];
        let mut acc = ZERO;
        for r in 0..4 {
            for c in 0..4 {
                acc += p.ket[r].conj() * paulis[k][r][c] * p.ket[c];
            }
        }
        C64::new(acc.re / 4.0, 0.0)
    })
}

/// σ_a ⊗ σ_b for a, b ∈ {I, X, Y, Z}, index `4a + b`.
pub(crate) fn pauli_products() -> Vec<Mat4> {
    let i = C64::new(0.0, 1.0);
    let single: [[[C64; 2]; 2]; 4] = [
        [[ONE, ZERO], [ZERO, ONE]],
        [[ZERO, ONE], [ONE, ZERO]],
        [[ZERO, -i], [i, ZERO]],
        [[ONE, ZERO], [ZERO, -ONE]],
    ];
    let mut out = Vec::with_capacity(16);
    for a in &single {
        for b in &single {
            out.push(crate::linalg::kron2(a, b));
        }
    }
    out
}
