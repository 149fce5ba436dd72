//! Maximum-likelihood state reconstruction.
//!
//! The state is parametrized as `ρ = A A† / Tr(A A†)` with `A` lower
//! triangular (real diagonal, 16 real parameters), which keeps every iterate
//! Hermitian, positive semidefinite and unit trace. For counts `n_j` the
//! Poisson likelihood, maximized over the unknown intensity, reduces to
//! minimizing
//!
//! ```text
//! f(A) = −(1/n) Σ_j n_j ln q_j + ln Σ_j q_j,     q_j = ⟨ψ_j|A A†|ψ_j⟩,
//! ```
//!
//! which is done with BFGS and a backtracking line search, starting from the
//! linear-inversion estimate. In the `ρ = T†T` form common in tomography
//! texts, `T = A†`.

use super::projectors::{pauli_products, ProjectorSet16};
use crate::error::{Error, Result};
use crate::linalg::{Mat4, C64, ZERO};
use crate::state::DensityMatrix4;

const DIM: usize = 16;
const OFF_DIAGONAL: [(usize, usize); 6] = [(1, 0), (2, 0), (2, 1), (3, 0), (3, 1), (3, 2)];
const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;
/// Weight of the maximally mixed state blended into the starting point so
/// that every projector starts with a nonzero probability.
const START_MIXING: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleOptions {
    pub max_iterations: usize,
    /// Stop when the Euclidean norm of the gradient falls below this.
    pub gradient_tolerance: f64,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            max_iterations: 10_000,
            gradient_tolerance: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MleResult {
    pub density: DensityMatrix4,
    /// Poisson log-likelihood `Σ_j (n_j ln μ_j − μ_j)` at the fitted means
    /// `μ_j`, without the data-only term `−Σ_j ln n_j!`.
    pub log_likelihood: f64,
    pub converged: bool,
    pub iterations: usize,
    pub gradient_norm: f64,
}

/// Linear-inversion estimate: Stokes parameters from the design pseudo-inverse,
/// normalized to unit trace and with negative eigenvalues clipped to zero.
pub fn linear_inversion(counts: &[f64], set: &ProjectorSet16) -> Result<DensityMatrix4> {
    check_counts(counts, set)?;
    let pinv = set.pseudo_inverse();
    let paulis = pauli_products();
    let mut m: Mat4 = [[ZERO; 4]; 4];
    for (k, gamma) in paulis.iter().enumerate() {
        let s: f64 = counts
            .iter()
            .enumerate()
            .map(|(j, &n)| pinv[(k, j)].re * n)
            .sum();
        for i in 0..4 {
            for l in 0..4 {
                m[i][l] += gamma[i][l] * (s / 4.0);
            }
        }
    }
    let trace: f64 = (0..4).map(|i| m[i][i].re).sum();
    if !(trace > 0.0) {
        return Err(Error::NoCounts);
    }
    for row in m.iter_mut() {
        for z in row.iter_mut() {
            *z /= trace;
        }
    }
    clip_to_physical(&m)
}

/// Maximum-likelihood density matrix for the 16 projector counts.
/// Starts from linear inversion, or from `I/4` when that estimate has no
/// physical part.
pub fn mle_reconstruct(
    counts: &[f64],
    set: &ProjectorSet16,
    opts: &MleOptions,
) -> Result<MleResult> {
    check_counts(counts, set)?;
    let start = linear_inversion(counts, set).unwrap_or_else(|_| DensityMatrix4::maximally_mixed());
    let mut mixed = *start.matrix();
    for (i, row) in mixed.iter_mut().enumerate() {
        for (l, z) in row.iter_mut().enumerate() {
            *z *= 1.0 - START_MIXING;
            if i == l {
                *z += START_MIXING / 4.0;
            }
        }
    }
    let problem = Objective::new(counts, set);
    let x0 = pack(&cholesky(&mixed));
    let fit = bfgs(&problem, x0, opts);
    let density = boundary_polish(&problem, DensityMatrix4::normalized(gram(&unpack(&fit.x)))?)?;
    Ok(MleResult {
        log_likelihood: problem.log_likelihood(&problem.probabilities(density.matrix())),
        density,
        converged: fit.converged,
        iterations: fit.iterations,
        gradient_norm: fit.gradient_norm,
    })
}

/// When the maximum lies on the boundary of the state space (a rank-deficient
/// ρ), the objective is flat there and the iterate keeps small spurious
/// eigenvalues. Truncating to the leading eigenvectors is accepted whenever it
/// does not lower the likelihood.
fn boundary_polish(problem: &Objective, rho: DensityMatrix4) -> Result<DensityMatrix4> {
    let eig = rho.eigen();
    let mut best = problem.value_from(&problem.probabilities(rho.matrix()));
    let mut chosen = rho;
    for rank in 1..4 {
        let mut m: Mat4 = [[ZERO; 4]; 4];
        for k in 0..rank {
            let lambda = eig.values[k].max(0.0);
            for i in 0..4 {
                for l in 0..4 {
                    m[i][l] += eig.vectors[(i, k)] * eig.vectors[(l, k)].conj() * lambda;
                }
            }
        }
        let f = problem.value_from(&problem.probabilities(&m));
        if f <= best {
            best = f;
            chosen = DensityMatrix4::normalized(m)?;
        }
    }
    Ok(chosen)
}

fn check_counts(counts: &[f64], set: &ProjectorSet16) -> Result<()> {
    if counts.len() != set.len() {
        return Err(Error::validation(
            "counts",
            "one entry per projector",
            format!("{} counts for {} projectors", counts.len(), set.len()),
        ));
    }
    if counts.iter().any(|&n| !(n.is_finite() && n >= 0.0)) {
        return Err(Error::validation(
            "counts",
            "finite non-negative counts",
            format!("{counts:?}"),
        ));
    }
    if counts.iter().sum::<f64>() <= 0.0 {
        return Err(Error::NoCounts);
    }
    Ok(())
}

fn clip_to_physical(m: &Mat4) -> Result<DensityMatrix4> {
    let eig = crate::linalg::hermitian_eigen(&crate::linalg::CMat::from_mat4(m));
    let mut out: Mat4 = [[ZERO; 4]; 4];
    for (k, &lambda) in eig.values.iter().enumerate() {
        let lambda = lambda.max(0.0);
        if lambda == 0.0 {
            continue;
        }
        for i in 0..4 {
            for l in 0..4 {
                out[i][l] += eig.vectors[(i, k)] * eig.vectors[(l, k)].conj() * lambda;
            }
        }
    }
    DensityMatrix4::normalized(out)
}

/// Lower-triangular `L` with `L L† = m` for a positive definite Hermitian `m`.
fn cholesky(m: &Mat4) -> Mat4 {
    let mut l: Mat4 = [[ZERO; 4]; 4];
    for j in 0..4 {
        let mut d = m[j][j].re;
        for k in 0..j {
            d -= l[j][k].norm_sqr();
        }
        let d = d.max(f64::MIN_POSITIVE).sqrt();
        l[j][j] = C64::new(d, 0.0);
        for i in j + 1..4 {
            let mut acc = m[i][j];
            for k in 0..j {
                acc -= l[i][k] * l[j][k].conj();
            }
            l[i][j] = acc / d;
        }
    }
    l
}

fn gram(a: &Mat4) -> Mat4 {
    std::array::from_fn(|i| std::array::from_fn(|l| (0..4).map(|k| a[i][k] * a[l][k].conj()).sum()))
}

fn pack(a: &Mat4) -> [f64; DIM] {
    let mut x = [0.0; DIM];
    for i in 0..4 {
        x[i] = a[i][i].re;
    }
    for (m, &(r, c)) in OFF_DIAGONAL.iter().enumerate() {
        x[4 + 2 * m] = a[r][c].re;
        x[5 + 2 * m] = a[r][c].im;
    }
    x
}

fn unpack(x: &[f64; DIM]) -> Mat4 {
    let mut a: Mat4 = [[ZERO; 4]; 4];
    for i in 0..4 {
        a[i][i] = C64::new(x[i], 0.0);
    }
    for (m, &(r, c)) in OFF_DIAGONAL.iter().enumerate() {
        a[r][c] = C64::new(x[4 + 2 * m], x[5 + 2 * m]);
    }
    a
}

struct Objective {
    kets: Vec<[C64; 4]>,
    counts: Vec<f64>,
    total: f64,
}

impl Objective {
    fn new(counts: &[f64], set: &ProjectorSet16) -> Self {
        Self {
            kets: set.iter().map(|p| p.ket).collect(),
            counts: counts.to_vec(),
            total: counts.iter().sum(),
        }
    }

    /// `A†ψ_j` and `q_j` for every projector.
    fn project(&self, a: &Mat4) -> (Vec<[C64; 4]>, Vec<f64>) {
        let v: Vec<[C64; 4]> = self
            .kets
            .iter()
            .map(|psi| std::array::from_fn(|k| (k..4).map(|i| a[i][k].conj() * psi[i]).sum()))
            .collect();
        let q = v
            .iter()
            .map(|v| v.iter().map(|z| z.norm_sqr()).sum())
            .collect();
        (v, q)
    }

    /// `q_j = ⟨ψ_j|m|ψ_j⟩` for a Hermitian `m`.
    fn probabilities(&self, m: &Mat4) -> Vec<f64> {
        self.kets
            .iter()
            .map(|psi| {
                let mut acc = ZERO;
                for i in 0..4 {
                    for l in 0..4 {
                        acc += psi[i].conj() * m[i][l] * psi[l];
                    }
                }
                acc.re.max(0.0)
            })
            .collect()
    }

    fn value(&self, x: &[f64; DIM]) -> f64 {
        let (_, q) = self.project(&unpack(x));
        self.value_from(&q)
    }

    fn value_from(&self, q: &[f64]) -> f64 {
        let s: f64 = q.iter().sum();
        if !(s > 0.0) {
            return f64::INFINITY;
        }
        let mut f = s.ln();
        for (&n, &qj) in self.counts.iter().zip(q) {
            if n > 0.0 {
                if !(qj > 0.0) {
                    return f64::INFINITY;
                }
                f -= n / self.total * qj.ln();
            }
        }
        f
    }

    fn value_and_gradient(&self, x: &[f64; DIM]) -> (f64, [f64; DIM]) {
        let a = unpack(x);
        let (v, q) = self.project(&a);
        let f = self.value_from(&q);
        let mut g = [0.0; DIM];
        if !f.is_finite() {
            return (f, g);
        }
        let s: f64 = q.iter().sum();
        // ∂f/∂A* = Σ_j c_j ψ_j (ψ_j† A), with ψ_j† A = (A†ψ_j)*.
        let mut grad: Mat4 = [[ZERO; 4]; 4];
        for ((psi, vj), (&n, &qj)) in self.kets.iter().zip(&v).zip(self.counts.iter().zip(&q)) {
            let mut c = 1.0 / s;
            if n > 0.0 {
                c -= n / (self.total * qj);
            }
            for r in 0..4 {
                let cp = psi[r] * c;
                for k in 0..=r {
                    grad[r][k] += cp * vj[k].conj();
                }
            }
        }
        for i in 0..4 {
            g[i] = 2.0 * grad[i][i].re;
        }
        for (m, &(r, c)) in OFF_DIAGONAL.iter().enumerate() {
            g[4 + 2 * m] = 2.0 * grad[r][c].re;
            g[5 + 2 * m] = 2.0 * grad[r][c].im;
        }
        (f, g)
    }

    fn log_likelihood(&self, q: &[f64]) -> f64 {
        let s: f64 = q.iter().sum();
        self.counts
            .iter()
            .zip(q)
            .map(|(&n, &qj)| {
                let mu = self.total * qj / s;
                if n > 0.0 {
                    n * mu.ln() - mu
                } else {
                    -mu
                }
            })
            .sum()
    }
}

struct Fit {
    x: [f64; DIM],
    converged: bool,
    iterations: usize,
    gradient_norm: f64,
}

fn dot(a: &[f64; DIM], b: &[f64; DIM]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64; DIM]) -> f64 {
    dot(a, a).sqrt()
}

fn identity() -> [[f64; DIM]; DIM] {
    std::array::from_fn(|i| std::array::from_fn(|j| if i == j { 1.0 } else { 0.0 }))
}

fn bfgs(obj: &Objective, mut x: [f64; DIM], opts: &MleOptions) -> Fit {
    let (mut f, mut g) = obj.value_and_gradient(&x);
    let mut h = identity();
    let mut fresh = true;
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        if norm(&g) < opts.gradient_tolerance {
            break;
        }
        iterations += 1;
        let mut p: [f64; DIM] = std::array::from_fn(|i| -dot(&h[i], &g));
        let mut slope = dot(&g, &p);
        if !(slope < 0.0) {
            h = identity();
            fresh = true;
            p = g.map(|v| -v);
            slope = -dot(&g, &g);
        }
        let mut step = None;
        let mut t = 1.0;
        for _ in 0..MAX_HALVINGS {
            let trial: [f64; DIM] = std::array::from_fn(|i| x[i] + t * p[i]);
            let ft = obj.value(&trial);
            if ft.is_finite() && ft <= f + ARMIJO * t * slope {
                step = Some(trial);
                break;
            }
            // At the resolution limit of f, accept a step that still shrinks the gradient.
            if ft.is_finite() && (ft - f).abs() <= 4.0 * f64::EPSILON * f.abs().max(1.0) {
                let (_, gt) = obj.value_and_gradient(&trial);
                if norm(&gt) < norm(&g) {
                    step = Some(trial);
                    break;
                }
            }
            t *= 0.5;
        }
        let Some(x_new) = step else {
            if fresh {
                break;
            }
            h = identity();
            fresh = true;
            continue;
        };
        let (f_new, g_new) = obj.value_and_gradient(&x_new);
        let s: [f64; DIM] = std::array::from_fn(|i| x_new[i] - x[i]);
        let y: [f64; DIM] = std::array::from_fn(|i| g_new[i] - g[i]);
        let sy = dot(&s, &y);
        if sy > 1e-300 {
            if fresh {
                let scale = sy / dot(&y, &y);
                h = std::array::from_fn(|i| {
                    std::array::from_fn(|j| if i == j { scale } else { 0.0 })
                });
            }
            bfgs_update(&mut h, &s, &y, sy);
            fresh = false;
        }
        x = x_new;
        f = f_new;
        g = g_new;
        // f is invariant under A → cA; keep the parameters near the unit sphere.
        let len = norm(&x);
        if !(0.5..=2.0).contains(&len) {
            x = x.map(|v| v / len);
            g = g.map(|v| v * len);
            h = identity();
            fresh = true;
        }
    }
    let gradient_norm = norm(&g);
    Fit {
        x,
        converged: gradient_norm < opts.gradient_tolerance,
        iterations,
        gradient_norm,
    }
}

/// `H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ` with `ρ = 1/(yᵀs)`.
fn bfgs_update(h: &mut [[f64; DIM]; DIM], s: &[f64; DIM], y: &[f64; DIM], sy: f64) {
    let rho = 1.0 / sy;
    let hy: [f64; DIM] = std::array::from_fn(|i| dot(&h[i], y));
    let yhy = dot(y, &hy);
    for i in 0..DIM {
        for j in 0..DIM {
            h[i][j] += (1.0 + rho * yhy) * rho * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
        }
    }
}
