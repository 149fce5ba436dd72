//! Small dense complex linear algebra.
//!
//! Everything here works on matrices of at most a few thousand rows and a
//! handful of columns (two-qubit operators, 4 x N Schmidt matrices, the 16 x 16
//! tomography design matrix), so plain cyclic Jacobi methods are used. They are
//! accurate to working precision and give reproducible results independent of
//! any external BLAS/LAPACK.

use num_complex::Complex64;

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// 4x4 complex matrix in row-major order.
pub type Mat4 = [[C64; 4]; 4];

const MAX_SWEEPS: usize = 100;

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_mat4(m: &Mat4) -> Self {
        Self::from_fn(4, 4, |i, j| m[i][j])
    }

    pub fn to_mat4(&self) -> Mat4 {
        assert_eq!((self.rows, self.cols), (4, 4), "not a 4x4 matrix");
        let mut out = [[ZERO; 4]; 4];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = self[(i, j)];
            }
        }
        out
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in matmul");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn column_rotate(&mut self, p: usize, q: usize, rot: &Rotation) {
        let phase = C64::from_polar(1.0, -rot.phase);
        for i in 0..self.rows {
            let ap = self[(i, p)];
            let aq = self[(i, q)] * phase;
            self[(i, p)] = ap * rot.c - aq * rot.s;
            self[(i, q)] = ap * rot.s + aq * rot.c;
        }
    }

    fn row_rotate_adjoint(&mut self, p: usize, q: usize, rot: &Rotation) {
        let phase = C64::from_polar(1.0, rot.phase);
        for j in 0..self.cols {
            let ap = self[(p, j)];
            let aq = self[(q, j)] * phase;
            self[(p, j)] = ap * rot.c - aq * rot.s;
            self[(q, j)] = ap * rot.s + aq * rot.c;
        }
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Complex Jacobi rotation `J = diag(1, e^{-i phase}) [[c, s], [-s, c]]` acting on
/// the (p, q) plane. It diagonalizes the 2x2 Hermitian block `[[a, b], [b*, d]]`.
struct Rotation {
    c: f64,
    s: f64,
    phase: f64,
}

impl Rotation {
    fn annihilating(a: f64, d: f64, b: C64) -> Self {
        let mag = b.norm();
        let tau = (d - a) / (2.0 * mag);
        let t = if tau >= 0.0 {
            1.0 / (tau + (1.0 + tau * tau).sqrt())
        } else {
            -1.0 / (-tau + (1.0 + tau * tau).sqrt())
        };
        let c = 1.0 / (1.0 + t * t).sqrt();
        Self {
            c,
            s: t * c,
            phase: b.arg(),
        }
    }
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Eigenvectors stored as columns, in the order of `values`.
    pub vectors: CMat,
}

/// Cyclic Jacobi eigen-decomposition of a Hermitian matrix.
///
/// Only the Hermitian part of `a` is used. Eigenvalues are sorted in
/// descending order and each eigenvector is rephased so that its first
/// non-negligible component is real and positive.
pub fn hermitian_eigen(a: &CMat) -> HermitianEigen {
    let n = a.rows();
    assert_eq!(n, a.cols(), "hermitian_eigen needs a square matrix");
    let mut m = CMat::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)].conj()));
    let mut v = CMat::identity(n);
    let scale = m.frobenius_norm();
    if scale > 0.0 {
        for _ in 0..MAX_SWEEPS {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| m[(i, j)].norm_sqr())
                .sum::<f64>()
                .sqrt();
            if off <= f64::EPSILON * 1e-2 * scale {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let b = m[(p, q)];
                    if b.norm() <= f64::MIN_POSITIVE {
                        continue;
                    }
                    let rot = Rotation::annihilating(m[(p, p)].re, m[(q, q)].re, b);
                    m.column_rotate(p, q, &rot);
                    m.row_rotate_adjoint(p, q, &rot);
                    m[(p, q)] = ZERO;
                    m[(q, p)] = ZERO;
                    m[(p, p)].im = 0.0;
                    m[(q, q)].im = 0.0;
                    v.column_rotate(p, q, &rot);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].re.total_cmp(&m[(i, i)].re));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let mut vectors = CMat::zeros(n, n);
    for (k, &src) in order.iter().enumerate() {
        let mut col = v.column(src);
        canonical_phase(&mut col);
        for (i, z) in col.into_iter().enumerate() {
            vectors[(i, k)] = z;
        }
    }
    HermitianEigen { values, vectors }
}

/// Rotates the global phase of `v` so its first component with modulus above
/// `1e-12 * max|v_i|` is real and positive. Returns the applied phase factor.
pub fn canonical_phase(v: &mut [C64]) -> C64 {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return ONE;
    }
    let lead = v
        .iter()
        .find(|z| z.norm() > 1e-12 * max)
        .copied()
        .unwrap_or(ONE);
    let factor = lead.conj() / lead.norm();
    for z in v.iter_mut() {
        *z *= factor;
    }
    factor
}

/// Thin singular value decomposition `A = U diag(sigma) V^dagger`.
#[derive(Debug, Clone)]
pub struct Svd {
    /// Left singular vectors (m x k), columns with zero singular value are zero.
    pub u: CMat,
    /// Singular values in descending order (length k = min(m, n) for m >= n).
    pub sigma: Vec<f64>,
    /// Right singular vectors (n x n), columns in the order of `sigma`.
    pub v: CMat,
}

/// One-sided (Hestenes) Jacobi SVD.
///
/// Orthogonalizes the columns of `a` by plane rotations accumulated in `V`.
/// Singular values come out as column norms, which keeps small singular values
/// accurate in the absolute sense (errors of order `eps * |A|`), unlike routes
/// through the Gram matrix `A^dagger A`.
///
/// Requires `rows >= cols`; callers with wide matrices should pass the adjoint.
pub fn svd(a: &CMat) -> Svd {
    let (m, n) = (a.rows(), a.cols());
    assert!(m >= n, "svd expects a tall or square matrix, got {m}x{n}");
    let mut w = a.clone();
    let mut v = CMat::identity(n);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = ZERO;
                for i in 0..m {
                    let wp = w[(i, p)];
                    let wq = w[(i, q)];
                    alpha += wp.norm_sqr();
                    beta += wq.norm_sqr();
                    gamma += wp.conj() * wq;
                }
                if gamma.norm() <= f64::EPSILON * (alpha * beta).sqrt() || gamma.norm() == 0.0 {
                    continue;
                }
                rotated = true;
                let rot = Rotation::annihilating(alpha, beta, gamma);
                w.column_rotate(p, q, &rot);
                v.column_rotate(p, q, &rot);
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..n)
        .map(|j| (0..m).map(|i| w[(i, j)].norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let mut u = CMat::zeros(m, n);
    let mut v_sorted = CMat::zeros(n, n);
    let mut sigma = Vec::with_capacity(n);
    for (k, &src) in order.iter().enumerate() {
        let s = norms[src];
        sigma.push(s);
        for i in 0..n {
            v_sorted[(i, k)] = v[(i, src)];
        }
        if s > 0.0 {
            for i in 0..m {
                u[(i, k)] = w[(i, src)] / s;
            }
        }
    }
    Svd {
        u,
        sigma,
        v: v_sorted,
    }
}

/// `U ⊗ U` for a 2x2 single-photon operator, in the (HH, HV, VH, VV) basis.
pub fn kron2(a: &[[C64; 2]; 2], b: &[[C64; 2]; 2]) -> Mat4 {
    let mut out = [[ZERO; 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[2 * i + k][2 * j + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn mat4_mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = [[ZERO; 4]; 4];
    for i in 0..4 {
        for k in 0..4 {
            for j in 0..4 {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

pub fn mat4_adjoint(a: &Mat4) -> Mat4 {
    let mut out = [[ZERO; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = a[j][i].conj();
        }
    }
    out
}

pub fn mat4_apply(a: &Mat4, v: &[C64; 4]) -> [C64; 4] {
    let mut out = [ZERO; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i] += a[i][j] * v[j];
        }
    }
    out
}

pub fn mat4_trace(a: &Mat4) -> C64 {
    (0..4).map(|i| a[i][i]).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lcg_matrix(rows: usize, cols: usize, seed: u64) -> CMat {
        let mut state = seed;
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        CMat::from_fn(rows, cols, |_, _| C64::new(next(), next()))
    }

    #[test]
    fn eigen_reconstructs_random_hermitian() {
        for seed in 0..20 {
            let g = lcg_matrix(4, 4, seed);
            let h = g.matmul(&g.adjoint());
            let eig = hermitian_eigen(&h);
            let d = CMat::from_fn(4, 4, |i, j| {
                if i == j {
                    C64::new(eig.values[i], 0.0)
                } else {
                    ZERO
                }
            });
            let back = eig.vectors.matmul(&d).matmul(&eig.vectors.adjoint());
            assert!(back.max_abs_diff(&h) < 1e-13, "seed {seed}");
            let gram = eig.vectors.adjoint().matmul(&eig.vectors);
            assert!(gram.max_abs_diff(&CMat::identity(4)) < 1e-13);
            assert!(eig.values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn eigen_phase_convention() {
        let h = CMat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => C64::new(0.0, 1.0),
            (1, 0) => C64::new(0.0, -1.0),
            _ => ZERO,
        });
        let eig = hermitian_eigen(&h);
        assert!((eig.values[0] - 1.0).abs() < 1e-15);
        assert!((eig.values[1] + 1.0).abs() < 1e-15);
        for k in 0..2 {
            let lead = eig.vectors[(0, k)];
            assert!(lead.im.abs() < 1e-15 && lead.re > 0.0);
        }
    }

    #[test]
    fn svd_reconstructs_tall_matrix() {
        let a = lcg_matrix(37, 4, 7);
        let s = svd(&a);
        let d = CMat::from_fn(4, 4, |i, j| {
            if i == j {
                C64::new(s.sigma[i], 0.0)
            } else {
                ZERO
            }
        });
        let back = s.u.matmul(&d).matmul(&s.v.adjoint());
        assert!(back.max_abs_diff(&a) < 1e-13);
        let gu = s.u.adjoint().matmul(&s.u);
        assert!(gu.max_abs_diff(&CMat::identity(4)) < 1e-13);
    }

    #[test]
    fn svd_of_rank_one_has_exact_zero_tail() {
        let x = lcg_matrix(6, 1, 3);
        let y = lcg_matrix(4, 1, 4);
        let a = x.matmul(&y.adjoint());
        let s = svd(&a);
        let scale = s.sigma[0];
        assert!(s.sigma[1..].iter().all(|&v| v < 1e-15 * scale));
    }

    #[test]
    fn kron_of_identity_is_identity() {
        let id = [[ONE, ZERO], [ZERO, ONE]];
        let k = kron2(&id, &id);
        for (i, row) in k.iter().enumerate() {
            for (j, z) in row.iter().enumerate() {
                assert_eq!(*z, if i == j { ONE } else { ZERO });
            }
        }
    }
}
