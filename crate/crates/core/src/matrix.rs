//! Small dense square matrices and a cyclic Jacobi eigensolver.
//!
//! Everything here targets the covariance-sized problems of this crate
//! (dimension at most a few dozen, plus quadrature node computations up
//! to a couple hundred). Storage is row-major `Vec<f64>`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DMat {
    dim: usize,
    data: Vec<f64>,
}

impl DMat {
    pub fn zeros(dim: usize) -> Self {
        DMat {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let dim = rows.len();
        let mut m = Self::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), dim, "matrix rows must be square");
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn diag(entries: &[f64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &v) in entries.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn transpose(&self) -> DMat {
        let mut t = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul(&self, other: &DMat) -> DMat {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    /// Largest |A_ij - A_ji| over all pairs.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn require_symmetric(&self) -> Result<()> {
        let tol = 1e-12 * self.max_abs().max(1.0);
        let a = self.asymmetry();
        if a > tol {
            return Err(Error::Asymmetric(a));
        }
        Ok(())
    }
}

/// Eigendecomposition of a symmetric matrix: `A = Q diag(values) Q^T`,
/// eigenvalues ascending, eigenvectors in the columns of `vectors`.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: DMat,
}

/// Off-diagonal Frobenius mass, sqrt(sum of squares of off-diagonal entries).
fn off_diagonal_mass(a: &DMat) -> f64 {
    let n = a.dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let v = a.get(i, j);
                s += v * v;
            }
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi eigensolver for symmetric matrices.
///
/// Sweeps rotate every (p, q) pair until the off-diagonal Frobenius mass
/// drops below `1e-13 * ||A||_F` of the input. Converges quadratically;
/// the sweep cap is generous.
pub fn jacobi_eigen(a: &DMat) -> Result<SymEigen> {
    a.require_symmetric()?;
    let n = a.dim();
    let mut m = a.clone();
    // symmetrize exactly so rotations preserve symmetry bit-for-bit
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m.get(i, j) + m.get(j, i));
            m.set(i, j, v);
            m.set(j, i, v);
        }
    }
    let mut q = DMat::identity(n);
    let target = 1e-13 * a.frobenius();
    const MAX_SWEEPS: usize = 64;

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_mass(&m) <= target {
            return Ok(sorted_eigen(m, q));
        }
        for p in 0..n.saturating_sub(1) {
            for r in (p + 1)..n {
                let apq = m.get(p, r);
                if apq == 0.0 {
                    continue;
                }
                let app = m.get(p, p);
                let aqq = m.get(r, r);
                let theta = 0.5 * (aqq - app) / apq;
                // tan of the rotation angle, smaller root for stability
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    let s = theta.signum();
                    s / (theta.abs() + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                m.set(p, p, app - t * apq);
                m.set(r, r, aqq + t * apq);
                m.set(p, r, 0.0);
                m.set(r, p, 0.0);
                for k in 0..n {
                    if k != p && k != r {
                        let akp = m.get(k, p);
                        let akq = m.get(k, r);
                        m.set(k, p, akp - s * (akq + tau * akp));
                        m.set(p, k, m.get(k, p));
                        m.set(k, r, akq + s * (akp - tau * akq));
                        m.set(r, k, m.get(k, r));
                    }
                }
                for k in 0..n {
                    let qkp = q.get(k, p);
                    let qkq = q.get(k, r);
                    q.set(k, p, qkp - s * (qkq + tau * qkp));
                    q.set(k, r, qkq + s * (qkp - tau * qkq));
                }
            }
        }
    }
    if off_diagonal_mass(&m) <= target {
        return Ok(sorted_eigen(m, q));
    }
    Err(Error::EigenNoConvergence(MAX_SWEEPS))
}

fn sorted_eigen(m: DMat, q: DMat) -> SymEigen {
    let n = m.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m.get(i, i).partial_cmp(&m.get(j, j)).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| m.get(i, i)).collect();
    let mut vectors = DMat::zeros(n);
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            vectors.set(row, col, q.get(row, src));
        }
    }
    SymEigen { values, vectors }
}

impl SymEigen {
    /// Reassemble `Q diag(values) Q^T`.
    pub fn reconstruct(&self) -> DMat {
        let lambda = DMat::diag(&self.values);
        self.vectors.mul(&lambda).mul(&self.vectors.transpose())
    }
}

/// Operator norm `max |eigenvalue|` and, when the matrix is positive
/// definite, the operator norm of the inverse (`1 / min eigenvalue`).
///
/// Positive definiteness uses the threshold
/// `min eigenvalue > 1e-12 * max(1, ||C||_op)`; below it no inverse norm
/// is reported.
pub fn operator_norms(c: &DMat) -> Result<(f64, Option<f64>)> {
    if c.dim() > 64 {
        return Err(Error::InvalidSpec(format!(
            "operator norms support dimension <= 64, got {}",
            c.dim()
        )));
    }
    let eig = jacobi_eigen(c)?;
    let op = eig
        .values
        .iter()
        .fold(0.0f64, |m, &v| m.max(v.abs()));
    let min = eig.values.first().copied().unwrap_or(0.0);
    let inv = if min > 1e-12 * op.max(1.0) {
        Some(1.0 / min)
    } else {
        None
    };
    Ok((op, inv))
}

/// Lower Cholesky factor, or `None` when the matrix is not positive
/// definite to working precision.
pub fn cholesky(c: &DMat) -> Option<DMat> {
    let n = c.dim();
    let mut l = DMat::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = c.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l.set(i, j, s.sqrt());
            } else {
                l.set(i, j, s / l.get(j, j));
            }
        }
    }
    Some(l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::draw_uniform;

    fn random_symmetric(dim: usize, seed: u64) -> DMat {
        let mut m = DMat::zeros(dim);
        let mut ctr = 0;
        for i in 0..dim {
            for j in i..dim {
                let v = 2.0 * draw_uniform(seed, ctr) - 1.0;
                ctr += 1;
                m.set(i, j, v);
                m.set(j, i, v);
            }
        }
        m
    }

    #[test]
    fn identity_norms() {
        let (op, inv) = operator_norms(&DMat::identity(2)).unwrap();
        assert_eq!(op, 1.0);
        assert_eq!(inv, Some(1.0));
    }

    #[test]
    fn diagonal_norms() {
        let c = DMat::diag(&[2.0, 0.5]);
        let (op, inv) = operator_norms(&c).unwrap();
        assert!((op - 2.0).abs() < 1e-15);
        assert!((inv.unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn two_by_two_eigenvalues_by_characteristic_polynomial() {
        // [[2,1],[1,2]] has eigenvalues 3 and 1
        let c = DMat::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let (op, inv) = operator_norms(&c).unwrap();
        assert!((op - 3.0).abs() < 1e-13);
        assert!((inv.unwrap() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn singular_matrix_has_no_inverse_norm() {
        let c = DMat::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        let (op, inv) = operator_norms(&c).unwrap();
        assert!((op - 2.0).abs() < 1e-13);
        assert!(inv.is_none());
    }

    #[test]
    fn jacobi_reconstruction_random_matrices() {
        for dim in [2usize, 3, 5, 8, 13, 16] {
            for seed in 0..4u64 {
                let c = random_symmetric(dim, 1000 * dim as u64 + seed);
                let eig = jacobi_eigen(&c).unwrap();
                let rec = eig.reconstruct();
                let mut err = DMat::zeros(dim);
                for i in 0..dim {
                    for j in 0..dim {
                        err.set(i, j, rec.get(i, j) - c.get(i, j));
                    }
                }
                assert!(
                    err.frobenius() <= 1e-10 * c.frobenius(),
                    "dim {dim} seed {seed}: reconstruction error {}",
                    err.frobenius()
                );
            }
        }
    }

    #[test]
    fn eigenvectors_are_orthonormal() {
        let c = random_symmetric(6, 99);
        let eig = jacobi_eigen(&c).unwrap();
        let qtq = eig.vectors.transpose().mul(&eig.vectors);
        for i in 0..6 {
            for j in 0..6 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((qtq.get(i, j) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn asymmetric_matrix_rejected() {
        let c = DMat::from_rows(&[vec![1.0, 0.5], vec![0.2, 1.0]]);
        assert!(matches!(jacobi_eigen(&c), Err(Error::Asymmetric(_))));
    }

    #[test]
    fn cholesky_roundtrip() {
        let c = DMat::from_rows(&[vec![4.0, 2.0], vec![2.0, 3.0]]);
        let l = cholesky(&c).unwrap();
        let back = l.mul(&l.transpose());
        for i in 0..2 {
            for j in 0..2 {
                assert!((back.get(i, j) - c.get(i, j)).abs() < 1e-14);
            }
        }
        let singular = DMat::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert!(cholesky(&singular).is_none());
    }
}
