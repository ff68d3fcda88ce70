//! Dense linear algebra for small symmetric systems.
//!
//! Everything here operates on matrices of dimension up to a few dozen, so
//! the implementations favor robustness over asymptotic speed: a cyclic
//! Jacobi eigensolver, Gaussian elimination with partial pivoting, and a
//! strong-connectivity check for transition supports.

use thiserror::Error;

/// Relative threshold below which a pivot is treated as zero.
const PIVOT_REL_TOL: f64 = 1e-12;
/// Relative asymmetry allowed by [`sym_eigen`].
const SYMMETRY_REL_TOL: f64 = 1e-12;
/// Jacobi sweep cap; quadratic convergence makes this generous.
const MAX_SWEEPS: usize = 100;

#[derive(Debug, Error, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not symmetric: |m[{i}][{j}] - m[{j}][{i}]| exceeds tolerance")]
    NonSymmetric { i: usize, j: usize },
    #[error("Jacobi iteration did not converge within {MAX_SWEEPS} sweeps")]
    NoConvergence,
    #[error("matrix is singular: pivot {pivot:e} at column {col} below threshold")]
    Singular { col: usize, pivot: f64 },
    #[error("dimension mismatch: matrix dim {dim}, vector len {len}")]
    DimensionMismatch { dim: usize, len: usize },
    #[error("support pattern has no active index")]
    EmptySupport,
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
}

/// Dense square matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl SquareMatrix {
    pub fn new(dim: usize, entries: Vec<f64>) -> Result<Self, LinalgError> {
        if dim == 0 {
            return Err(LinalgError::InvalidMatrix("dimension must be >= 1".into()));
        }
        if entries.len() != dim * dim {
            return Err(LinalgError::InvalidMatrix(format!(
                "expected {} entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        if let Some(x) = entries.iter().find(|x| !x.is_finite()) {
            return Err(LinalgError::InvalidMatrix(format!("non-finite entry {x}")));
        }
        Ok(Self { dim, entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let dim = rows.len();
        for row in rows {
            if row.len() != dim {
                return Err(LinalgError::InvalidMatrix(format!(
                    "row of length {} in a {}-row matrix",
                    row.len(),
                    dim
                )));
            }
        }
        Self::new(dim, rows.concat())
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![0.0; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = 1.0;
        }
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.entries[i * self.dim + j] = value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.dim..(i + 1) * self.dim]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Largest absolute entry; scale reference for tolerances.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim);
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        let scale = self.max_abs();
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                if (self.get(i, j) - self.get(j, i)).abs() > rel_tol * scale {
                    return false;
                }
            }
        }
        true
    }
}

/// Inertia of a symmetric matrix under a sign tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Signature {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

/// Eigendecomposition of a symmetric matrix.
///
/// Eigenvalues are sorted descending; `eigenvectors` holds the matching
/// orthonormal eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: SquareMatrix,
    pub signature: Signature,
    /// Sign tolerance the stored signature was computed with.
    pub sign_tol: f64,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Recount the signature under a different sign tolerance.
    pub fn signature_with(&self, tol: f64) -> Signature {
        signature_of(&self.eigenvalues, tol)
    }

    /// Spectral radius: largest |eigenvalue|.
    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }
}

fn signature_of(eigenvalues: &[f64], tol: f64) -> Signature {
    let positive = eigenvalues.iter().filter(|&&x| x > tol).count();
    let negative = eigenvalues.iter().filter(|&&x| x < -tol).count();
    Signature {
        positive,
        negative,
        zero: eigenvalues.len() - positive - negative,
    }
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// `sign_tol` governs the signature counts; `None` uses the default
/// `1e-9 * spectral radius`, which callers probing near-zero eigenvalues
/// (the stability dichotomy) may want to override.
pub fn sym_eigen(m: &SquareMatrix, sign_tol: Option<f64>) -> Result<Spectrum, LinalgError> {
    let n = m.dim;
    let scale = m.max_abs();
    for i in 0..n {
        for j in (i + 1)..n {
            if (m.get(i, j) - m.get(j, i)).abs() > SYMMETRY_REL_TOL * scale {
                return Err(LinalgError::NonSymmetric { i, j });
            }
        }
    }

    let mut a = m.clone();
    // Symmetrize exactly so rotations see a[i][j] == a[j][i].
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (a.get(i, j) + a.get(j, i));
            a.set(i, j, avg);
            a.set(j, i, avg);
        }
    }
    let mut v = SquareMatrix::identity(n);
    let conv_tol = 1e-14 * if scale > 0.0 { scale } else { 1.0 };

    let mut converged = false;
    for _sweep in 0..MAX_SWEEPS {
        let mut off_max: f64 = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off_max = off_max.max(a.get(p, q).abs());
            }
        }
        if off_max <= conv_tol {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq.abs() <= conv_tol * 1e-2 {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let theta = 0.5 * (aqq - app) / apq;
                // Smaller-angle root of t^2 + 2t*theta - 1 = 0.
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                a.set(p, p, app - t * apq);
                a.set(q, q, aqq + t * apq);
                a.set(p, q, 0.0);
                a.set(q, p, 0.0);
                for k in 0..n {
                    if k != p && k != q {
                        let akp = a.get(k, p);
                        let akq = a.get(k, q);
                        let new_kp = c * akp - s * akq;
                        let new_kq = s * akp + c * akq;
                        a.set(k, p, new_kp);
                        a.set(p, k, new_kp);
                        a.set(k, q, new_kq);
                        a.set(q, k, new_kq);
                    }
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    if !converged {
        // Final re-check: the last sweep may have finished the job.
        let mut off_max: f64 = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off_max = off_max.max(a.get(p, q).abs());
            }
        }
        if off_max > conv_tol {
            return Err(LinalgError::NoConvergence);
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(j, j).partial_cmp(&a.get(i, i)).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a.get(i, i)).collect();
    let mut vectors = SquareMatrix::identity(n);
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            vectors.set(row, col, v.get(row, src));
        }
    }

    let radius = eigenvalues.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    let tol = sign_tol.unwrap_or(1e-9 * radius);
    let signature = signature_of(&eigenvalues, tol);
    Ok(Spectrum {
        eigenvalues,
        eigenvectors: vectors,
        signature,
        sign_tol: tol,
    })
}

/// Solve `m x = rhs` by Gaussian elimination with partial pivoting.
///
/// A pivot below `1e-12 * max|m|` signals a singular (degenerate) system.
pub fn solve_linear(m: &SquareMatrix, rhs: &[f64]) -> Result<Vec<f64>, LinalgError> {
    let n = m.dim;
    if rhs.len() != n {
        return Err(LinalgError::DimensionMismatch {
            dim: n,
            len: rhs.len(),
        });
    }
    let scale = m.max_abs();
    let pivot_tol = PIVOT_REL_TOL * if scale > 0.0 { scale } else { 1.0 };

    let mut a = m.entries.clone();
    let mut b = rhs.to_vec();
    for col in 0..n {
        let (pivot_row, pivot_val) = (col..n)
            .map(|r| (r, a[r * n + col]))
            .max_by(|x, y| x.1.abs().partial_cmp(&y.1.abs()).unwrap())
            .unwrap();
        if pivot_val.abs() < pivot_tol {
            return Err(LinalgError::Singular {
                col,
                pivot: pivot_val,
            });
        }
        if pivot_row != col {
            for k in 0..n {
                a.swap(col * n + k, pivot_row * n + k);
            }
            b.swap(col, pivot_row);
        }
        for r in (col + 1)..n {
            let factor = a[r * n + col] / a[col * n + col];
            if factor != 0.0 {
                for k in col..n {
                    a[r * n + k] -= factor * a[col * n + k];
                }
                b[r] -= factor * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in (row + 1)..n {
            acc -= a[row * n + k] * x[k];
        }
        x[row] = acc / a[row * n + row];
    }
    Ok(x)
}

/// Strong connectivity of a directed support pattern.
///
/// `support[i][j]` marks a positive transition weight from `i` to `j`; the
/// caller restricts the pattern to the active (positive-mass) indices before
/// calling. Empty patterns (no index at all) are rejected.
pub fn is_irreducible(support: &[Vec<bool>]) -> Result<bool, LinalgError> {
    let n = support.len();
    if n == 0 {
        return Err(LinalgError::EmptySupport);
    }
    for row in support {
        assert_eq!(row.len(), n, "support pattern must be square");
    }
    let forward = reachable(support, |i, j| support[i][j]);
    let backward = reachable(support, |i, j| support[j][i]);
    Ok(forward.iter().all(|&r| r) && backward.iter().all(|&r| r))
}

fn reachable(support: &[Vec<bool>], edge: impl Fn(usize, usize) -> bool) -> Vec<bool> {
    let n = support.len();
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(i) = stack.pop() {
        for j in 0..n {
            if !seen[j] && edge(i, j) {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn example2() -> SquareMatrix {
        SquareMatrix::from_rows(&[
            vec![3.0, 1.0, 1.0],
            vec![1.0, 2.0, 4.0],
            vec![1.0, 4.0, 2.0],
        ])
        .unwrap()
    }

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn eigen_diagonal() {
        let m = SquareMatrix::from_rows(&[
            vec![5.0, 0.0, 0.0],
            vec![0.0, -3.0, 0.0],
            vec![0.0, 0.0, 0.0],
        ])
        .unwrap();
        let s = sym_eigen(&m, Some(1e-9)).unwrap();
        assert_close(s.eigenvalues[0], 5.0, 1e-12);
        assert_close(s.eigenvalues[1], 0.0, 1e-12);
        assert_close(s.eigenvalues[2], -3.0, 1e-12);
        assert_eq!(
            s.signature,
            Signature {
                positive: 1,
                negative: 1,
                zero: 1
            }
        );
    }

    #[test]
    fn eigen_example2() {
        // Characteristic roots by hand: -2 (eigenvector (0,1,-1)) and
        // (9 +- sqrt(17))/2 for the remaining pair.
        let s = sym_eigen(&example2(), None).unwrap();
        let sqrt17 = 17.0f64.sqrt();
        assert_close(s.eigenvalues[0], (9.0 + sqrt17) / 2.0, 1e-9);
        assert_close(s.eigenvalues[1], (9.0 - sqrt17) / 2.0, 1e-9);
        assert_close(s.eigenvalues[2], -2.0, 1e-9);
        assert_eq!(
            s.signature,
            Signature {
                positive: 2,
                negative: 1,
                zero: 0
            }
        );
    }

    #[test]
    fn eigen_all_ones() {
        let m = SquareMatrix::new(3, vec![1.0; 9]).unwrap();
        let s = sym_eigen(&m, None).unwrap();
        assert_close(s.eigenvalues[0], 3.0, 1e-10);
        assert_close(s.eigenvalues[1], 0.0, 1e-10);
        assert_close(s.eigenvalues[2], 0.0, 1e-10);
        assert_eq!(
            s.signature,
            Signature {
                positive: 1,
                negative: 0,
                zero: 2
            }
        );
    }

    #[test]
    fn eigen_rejects_asymmetric() {
        let m = SquareMatrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(
            sym_eigen(&m, None),
            Err(LinalgError::NonSymmetric { .. })
        ));
    }

    #[test]
    fn eigen_residual_and_orthogonality() {
        let mut rng = StdRng::seed_from_u64(7);
        for dim in [2usize, 3, 5, 8, 16] {
            let mut m = SquareMatrix::identity(dim);
            for i in 0..dim {
                for j in i..dim {
                    let x = rng.random_range(-2.0..2.0);
                    m.set(i, j, x);
                    m.set(j, i, x);
                }
            }
            let s = sym_eigen(&m, None).unwrap();
            let scale = m.max_abs();
            for (k, &lambda) in s.eigenvalues.iter().enumerate() {
                let v: Vec<f64> = (0..dim).map(|r| s.eigenvectors.get(r, k)).collect();
                let mv = m.mul_vec(&v);
                for r in 0..dim {
                    assert_close(mv[r], lambda * v[r], 1e-9 * scale);
                }
            }
            // V^T V = I to 1e-10.
            for a in 0..dim {
                for b in 0..dim {
                    let dot: f64 = (0..dim)
                        .map(|r| s.eigenvectors.get(r, a) * s.eigenvectors.get(r, b))
                        .sum();
                    let expect = if a == b { 1.0 } else { 0.0 };
                    assert_close(dot, expect, 1e-10);
                }
            }
            // Reconstruction V diag(lambda) V^T = m to 1e-8.
            for i in 0..dim {
                for j in 0..dim {
                    let rec: f64 = (0..dim)
                        .map(|k| {
                            s.eigenvectors.get(i, k) * s.eigenvalues[k] * s.eigenvectors.get(j, k)
                        })
                        .sum();
                    assert_close(rec, m.get(i, j), 1e-8);
                }
            }
        }
    }

    #[test]
    fn signature_invariant_under_rotation() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..20 {
            let dim = rng.random_range(2..7);
            let mut m = SquareMatrix::identity(dim);
            for i in 0..dim {
                for j in i..dim {
                    let x = rng.random_range(-1.0..1.0);
                    m.set(i, j, x);
                    m.set(j, i, x);
                }
            }
            let sig = sym_eigen(&m, Some(1e-9)).unwrap().signature;

            // Random orthogonal Q as a product of Givens rotations.
            let mut q = SquareMatrix::identity(dim);
            for p in 0..dim {
                for r in (p + 1)..dim {
                    let angle = rng.random_range(0.0..std::f64::consts::TAU);
                    let (s, c) = angle.sin_cos();
                    for k in 0..dim {
                        let qkp = q.get(k, p);
                        let qkr = q.get(k, r);
                        q.set(k, p, c * qkp - s * qkr);
                        q.set(k, r, s * qkp + c * qkr);
                    }
                }
            }
            // conj = Q^T m Q
            let mut conj = SquareMatrix::identity(dim);
            for i in 0..dim {
                for j in 0..dim {
                    let mut acc = 0.0;
                    for a in 0..dim {
                        for b in 0..dim {
                            acc += q.get(a, i) * m.get(a, b) * q.get(b, j);
                        }
                    }
                    conj.set(i, j, acc);
                }
            }
            let sig2 = sym_eigen(&conj, Some(1e-9)).unwrap().signature;
            assert_eq!(sig, sig2);
        }
    }

    #[test]
    fn solve_identity() {
        let m = SquareMatrix::identity(3);
        let x = solve_linear(&m, &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(x, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn solve_example2_faces() {
        // Face {1,2} of the 3x3 example: 2x2 inverse by hand gives (1/5, 2/5).
        let m = SquareMatrix::from_rows(&[vec![3.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let x = solve_linear(&m, &[1.0, 1.0]).unwrap();
        assert_close(x[0], 0.2, 1e-12);
        assert_close(x[1], 0.4, 1e-12);

        // Face {2,3}: (1/6, 1/6).
        let m = SquareMatrix::from_rows(&[vec![2.0, 4.0], vec![4.0, 2.0]]).unwrap();
        let x = solve_linear(&m, &[1.0, 1.0]).unwrap();
        assert_close(x[0], 1.0 / 6.0, 1e-12);
        assert_close(x[1], 1.0 / 6.0, 1e-12);
    }

    #[test]
    fn solve_singular() {
        let m = SquareMatrix::new(2, vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(
            solve_linear(&m, &[1.0, 1.0]),
            Err(LinalgError::Singular { .. })
        ));
    }

    #[test]
    fn solve_then_multiply_roundtrip() {
        let mut rng = StdRng::seed_from_u64(23);
        for _ in 0..50 {
            let dim = rng.random_range(1..8);
            let mut m = SquareMatrix::identity(dim);
            for i in 0..dim {
                for j in 0..dim {
                    m.set(i, j, rng.random_range(-1.0..1.0) + if i == j { 3.0 } else { 0.0 });
                }
            }
            let rhs: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            let x = solve_linear(&m, &rhs).unwrap();
            let back = m.mul_vec(&x);
            let xmax = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let rmax = rhs.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let bound = 1e-9 * (m.max_abs() * xmax + rmax);
            for i in 0..dim {
                assert_close(back[i], rhs[i], bound);
            }
        }
    }

    #[test]
    fn irreducible_full_support() {
        let support = vec![vec![true; 3]; 3];
        assert!(is_irreducible(&support).unwrap());
    }

    #[test]
    fn irreducible_blocked_pair() {
        // Face {1,2} with R_12 = R_21 = 0: two isolated self-loops.
        let support = vec![vec![true, false], vec![false, true]];
        assert!(!is_irreducible(&support).unwrap());
    }

    #[test]
    fn irreducible_single_state() {
        assert!(is_irreducible(&[vec![true]]).unwrap());
    }

    #[test]
    fn irreducible_empty() {
        assert_eq!(is_irreducible(&[]), Err(LinalgError::EmptySupport));
    }

    #[test]
    fn irreducible_cycle_vs_one_way() {
        let cycle = vec![
            vec![false, true, false],
            vec![false, false, true],
            vec![true, false, false],
        ];
        assert!(is_irreducible(&cycle).unwrap());
        let chain = vec![
            vec![false, true, false],
            vec![false, false, true],
            vec![false, false, true],
        ];
        assert!(!is_irreducible(&chain).unwrap());
    }
}
