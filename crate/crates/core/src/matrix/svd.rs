use serde::{Deserialize, Serialize};

use super::dense::{dot, DenseMatrix};
use crate::error::{Error, Result};

/// Relative threshold below which a singular value counts as zero.
pub const RANK_TOL: f64 = 1e-12;

/// Maximum number of cyclic Jacobi sweeps before giving up.
pub const MAX_SWEEPS: usize = 60;

/// Thin SVD truncated at the numerical rank.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SvdResult {
    /// Nonincreasing, strictly positive.
    pub singular_values: Vec<f64>,
    /// `m × r`, orthonormal columns.
    pub left_vectors: DenseMatrix,
    /// `n × r`, orthonormal columns.
    pub right_vectors: DenseMatrix,
}

impl SvdResult {
    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }

    /// `U diag(σ) V^T`.
    pub fn reconstruct(&self) -> DenseMatrix {
        let (m, n, r) = (self.left_vectors.rows(), self.right_vectors.rows(), self.rank());
        let mut a = DenseMatrix::zeros(m, n);
        for i in 0..m {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..r {
                    acc += self.left_vectors[(i, k)] * self.singular_values[k] * self.right_vectors[(j, k)];
                }
                a[(i, j)] = acc;
            }
        }
        a
    }

    /// Moore–Penrose pseudoinverse `V diag(1/σ) U^T` (`n × m`).
    pub fn pseudoinverse(&self) -> DenseMatrix {
        let (m, n, r) = (self.left_vectors.rows(), self.right_vectors.rows(), self.rank());
        let mut p = DenseMatrix::zeros(n, m);
        for i in 0..n {
            for j in 0..m {
                let mut acc = 0.0;
                for k in 0..r {
                    acc += self.right_vectors[(i, k)] * self.left_vectors[(j, k)] / self.singular_values[k];
                }
                p[(i, j)] = acc;
            }
        }
        p
    }
}

/// One-sided (Hestenes) Jacobi SVD.
///
/// Columns of a working copy are rotated pairwise until every pair is
/// orthogonal to working precision; singular values are the column norms.
/// Values below `tol · σ_max` are discarded, which fixes the numerical rank.
pub fn svd_jacobi(a: &DenseMatrix, tol: f64) -> Result<SvdResult> {
    if a.rows() == 0 || a.cols() == 0 {
        return Err(Error::InvalidMatrix("SVD of an empty matrix".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("SVD tolerance must be positive, got {tol}")));
    }
    if a.rows() >= a.cols() {
        jacobi_tall(a, tol)
    } else {
        let t = jacobi_tall(&a.transpose(), tol)?;
        Ok(SvdResult {
            singular_values: t.singular_values,
            left_vectors: t.right_vectors,
            right_vectors: t.left_vectors,
        })
    }
}

fn jacobi_tall(a: &DenseMatrix, tol: f64) -> Result<SvdResult> {
    let (m, n) = (a.rows(), a.cols());
    let mut w: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            e
        })
        .collect();
    let eps = 4.0 * f64::EPSILON;
    let mut norms: Vec<f64> = w.iter().map(|c| dot(c, c)).collect();
    let mut converged = false;
    for _sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = norms[p];
                let beta = norms[q];
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma = dot(&w[p], &w[q]);
                if gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (wp, wq) = two_mut(&mut w, p, q);
                rotate(wp, wq, c, s);
                let (vp, vq) = two_mut(&mut v, p, q);
                rotate(vp, vq, c, s);
                norms[p] = dot(&w[p], &w[p]);
                norms[q] = dot(&w[q], &w[q]);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::SvdNotConverged { sweeps: MAX_SWEEPS });
    }
    let mut order: Vec<usize> = (0..n).collect();
    let sig: Vec<f64> = norms.iter().map(|x| x.sqrt()).collect();
    order.sort_by(|&i, &j| sig[j].total_cmp(&sig[i]));
    let smax = sig[order[0]];
    let kept: Vec<usize> = order
        .into_iter()
        .filter(|&j| smax > 0.0 && sig[j] >= tol * smax)
        .collect();
    let r = kept.len();
    let mut u = DenseMatrix::zeros(m, r);
    let mut vv = DenseMatrix::zeros(n, r);
    let mut singular_values = Vec::with_capacity(r);
    for (k, &j) in kept.iter().enumerate() {
        let s = sig[j];
        singular_values.push(s);
        for i in 0..m {
            u[(i, k)] = w[j][i] / s;
        }
        for i in 0..n {
            vv[(i, k)] = v[j][i];
        }
    }
    Ok(SvdResult {
        singular_values,
        left_vectors: u,
        right_vectors: vv,
    })
}

#[inline]
fn rotate(x: &mut [f64], y: &mut [f64], c: f64, s: f64) {
    for (a, b) in x.iter_mut().zip(y.iter_mut()) {
        let (xa, yb) = (*a, *b);
        *a = c * xa - s * yb;
        *b = s * xa + c * yb;
    }
}

fn two_mut<T>(v: &mut [T], p: usize, q: usize) -> (&mut T, &mut T) {
    debug_assert!(p < q);
    let (lo, hi) = v.split_at_mut(q);
    (&mut lo[p], &mut hi[0])
}
