use super::dense::DenseMatrix;
use crate::error::{Error, Result};

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
///
/// Intended for the small matrices produced by the brute-force oracles.
pub fn symmetric_eigenvalues(a: &DenseMatrix) -> Result<Vec<f64>> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: a.cols(),
        });
    }
    let mut w = a.clone();
    // symmetrize: callers pass matrices that are symmetric up to rounding
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (w[(i, j)] + w[(j, i)]);
            w[(i, j)] = v;
            w[(j, i)] = v;
        }
    }
    let scale = w.frobenius_norm();
    let mut done = scale == 0.0;
    for _ in 0..super::MAX_SWEEPS {
        if done {
            break;
        }
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| w[(i, j)] * w[(i, j)])
            .sum();
        if off.sqrt() <= 1e-15 * scale {
            done = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = w[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (w[(q, q)] - w[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (w[(k, p)], w[(k, q)]);
                    w[(k, p)] = c * akp - s * akq;
                    w[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (w[(p, k)], w[(q, k)]);
                    w[(p, k)] = c * apk - s * aqk;
                    w[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    if !done {
        return Err(Error::SvdNotConverged {
            sweeps: super::MAX_SWEEPS,
        });
    }
    let mut ev: Vec<f64> = (0..n).map(|i| w[(i, i)]).collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

pub fn min_eigenvalue(a: &DenseMatrix) -> Result<f64> {
    Ok(symmetric_eigenvalues(a)?.first().copied().unwrap_or(0.0))
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn determinant(a: &DenseMatrix) -> f64 {
    let n = a.rows();
    assert_eq!(n, a.cols());
    let mut w = a.clone();
    let mut det = 1.0;
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| w[(i, k)].abs().total_cmp(&w[(j, k)].abs()))
            .unwrap();
        if w[(p, k)] == 0.0 {
            return 0.0;
        }
        if p != k {
            for j in 0..n {
                let t = w[(k, j)];
                w[(k, j)] = w[(p, j)];
                w[(p, j)] = t;
            }
            det = -det;
        }
        let piv = w[(k, k)];
        det *= piv;
        for i in k + 1..n {
            let f = w[(i, k)] / piv;
            if f != 0.0 {
                for j in k..n {
                    w[(i, j)] -= f * w[(k, j)];
                }
            }
        }
    }
    det
}

/// Adjugate (transposed cofactor matrix); the 1×1 adjugate is `[1]`.
pub fn adjugate(a: &DenseMatrix) -> DenseMatrix {
    let n = a.rows();
    assert_eq!(n, a.cols());
    if n == 1 {
        return DenseMatrix::identity(1);
    }
    let mut adj = DenseMatrix::zeros(n, n);
    let mut minor = DenseMatrix::zeros(n - 1, n - 1);
    for i in 0..n {
        for j in 0..n {
            // cofactor C_ij uses the minor without row i and column j
            for (r, ii) in (0..n).filter(|&ii| ii != i).enumerate() {
                for (c, jj) in (0..n).filter(|&jj| jj != j).enumerate() {
                    minor[(r, c)] = a[(ii, jj)];
                }
            }
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            adj[(j, i)] = sign * determinant(&minor);
        }
    }
    adj
}
