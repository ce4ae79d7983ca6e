use super::dense::DenseMatrix;
use crate::error::{Error, Result};

/// Relative pivot size under which `qr_householder` reports rank deficiency.
pub const QR_RANK_TOL: f64 = 1e-12;

/// Householder reflectors of a tall matrix, kept in compact form.
struct Householder {
    rows: usize,
    /// Unit reflector vectors; `vs[k]` acts on entries `k..rows`.
    vs: Vec<Vec<f64>>,
    r: DenseMatrix,
}

impl Householder {
    fn factor(a: &DenseMatrix) -> Self {
        let (m, n) = (a.rows(), a.cols());
        let mut w = a.clone();
        let mut vs = Vec::with_capacity(n);
        for k in 0..n.min(m) {
            let mut v: Vec<f64> = (k..m).map(|i| w[(i, k)]).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                vs.push(vec![0.0; m - k]);
                continue;
            }
            let alpha = if v[0] >= 0.0 { -norm } else { norm };
            v[0] -= alpha;
            let vnorm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if vnorm == 0.0 {
                vs.push(vec![0.0; m - k]);
                continue;
            }
            for x in v.iter_mut() {
                *x /= vnorm;
            }
            for j in k..n {
                let proj: f64 = (k..m).map(|i| v[i - k] * w[(i, j)]).sum();
                for i in k..m {
                    w[(i, j)] -= 2.0 * v[i - k] * proj;
                }
            }
            vs.push(v);
        }
        let mut r = DenseMatrix::zeros(n, n);
        for i in 0..n.min(m) {
            for j in i..n {
                r[(i, j)] = w[(i, j)];
            }
        }
        Self { rows: m, vs, r }
    }

    /// First `cols` columns of `Q = H_1 H_2 ⋯ H_n`.
    fn q_columns(&self, cols: usize) -> DenseMatrix {
        let m = self.rows;
        let mut q = DenseMatrix::zeros(m, cols);
        for j in 0..cols {
            q[(j, j)] = 1.0;
        }
        for (k, v) in self.vs.iter().enumerate().rev() {
            for j in 0..cols {
                let proj: f64 = (k..m).map(|i| v[i - k] * q[(i, j)]).sum();
                if proj != 0.0 {
                    for i in k..m {
                        q[(i, j)] -= 2.0 * v[i - k] * proj;
                    }
                }
            }
        }
        q
    }
}

/// Thin Householder QR of a tall matrix: `A = Q R` with `Q` `m × n`.
///
/// The signs are normalized so that `R` has a nonnegative diagonal.
pub fn qr_householder(a: &DenseMatrix) -> Result<(DenseMatrix, DenseMatrix)> {
    let (m, n) = (a.rows(), a.cols());
    if m < n {
        return Err(Error::invalid(format!("thin QR needs rows >= cols, got {m}x{n}")));
    }
    let h = Householder::factor(a);
    let mut q = h.q_columns(n);
    let mut r = h.r;
    let scale = a.frobenius_norm();
    for k in 0..n {
        if r[(k, k)].abs() <= QR_RANK_TOL * scale || scale == 0.0 {
            return Err(Error::RankDeficient { column: k });
        }
        if r[(k, k)] < 0.0 {
            for j in k..n {
                r[(k, j)] = -r[(k, j)];
            }
            for i in 0..m {
                q[(i, k)] = -q[(i, k)];
            }
        }
    }
    Ok((q, r))
}

/// Extends the orthonormal columns of `u` (`m × r`) to a full orthogonal
/// `m × m` basis. The first `r` columns are `u` itself; the rest span the
/// orthogonal complement and come from a full Householder QR of `u`.
pub fn complete_orthonormal_basis(u: &DenseMatrix) -> DenseMatrix {
    let (m, r) = (u.rows(), u.cols());
    let full_q = Householder::factor(u).q_columns(m);
    let mut out = DenseMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..r {
            out[(i, j)] = u[(i, j)];
        }
        for j in r..m {
            out[(i, j)] = full_q[(i, j)];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_gram_schmidt_case() {
        let a = DenseMatrix::from_rows(&[vec![3.0, 0.0], vec![4.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let (q, r) = qr_householder(&a).unwrap();
        assert!((q[(0, 0)] - 0.6).abs() < 1e-15);
        assert!((q[(1, 0)] - 0.8).abs() < 1e-15);
        assert!(q[(2, 0)].abs() < 1e-15);
        assert!((r[(0, 0)] - 5.0).abs() < 1e-14);
    }

    #[test]
    fn orthonormal_input_is_reproduced() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let a = DenseMatrix::from_rows(&[vec![s, 0.0], vec![s, 0.0], vec![0.0, -1.0]]).unwrap();
        let (q, r) = qr_householder(&a).unwrap();
        // R is the identity because the diagonal is normalized positive,
        // so Q equals A exactly up to rounding.
        assert!(r.sub(&DenseMatrix::identity(2)).frobenius_norm() < 1e-14);
        assert!(q.sub(&a).frobenius_norm() < 1e-14);
    }

    #[test]
    fn rank_deficiency_signalled() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]]).unwrap();
        assert!(matches!(qr_householder(&a), Err(Error::RankDeficient { column: 1 })));
    }

    #[test]
    fn wide_input_rejected() {
        assert!(qr_householder(&DenseMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn completion_is_orthogonal() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let u = DenseMatrix::from_rows(&[vec![s], vec![s], vec![0.0]]).unwrap();
        let full = complete_orthonormal_basis(&u);
        let g = full.transpose().matmul(&full).unwrap();
        assert!(g.sub(&DenseMatrix::identity(3)).frobenius_norm() < 1e-14);
        assert_eq!(full[(0, 0)], s);
    }
}
