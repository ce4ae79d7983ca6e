//! Brute-force enumeration over all `s`-subsets of rows.
//!
//! These are test-time tools: every expectation under volume sampling is
//! formed literally as `Σ_S P(S) X_S`, independently of the closed forms in
//! the parent module.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use super::profile::SpectralProfile;
use super::theory::{h_matrix, weighted_outer};
use crate::error::{Error, Result};
use crate::matrix::{
    adjugate, complete_orthonormal_basis, determinant, min_eigenvalue, svd_jacobi, DenseMatrix, RANK_TOL,
};

/// Maximum number of subsets an oracle will enumerate.
pub const ENUMERATION_BUDGET: u128 = 1_000_000;

pub fn binomial(m: usize, s: usize) -> u128 {
    if s > m {
        return 0;
    }
    let s = s.min(m - s);
    let mut c: u128 = 1;
    for k in 0..s {
        c = c * (m - k) as u128 / (k + 1) as u128;
    }
    c
}

pub fn check_budget(m: usize, s: usize) -> Result<()> {
    let count = binomial(m, s);
    if count > ENUMERATION_BUDGET {
        return Err(Error::EnumerationBudget {
            m,
            s,
            count,
            budget: ENUMERATION_BUDGET,
        });
    }
    Ok(())
}

/// One subset with its volume `det(A_S A_S^T)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SubsetVolume {
    pub rows: Vec<usize>,
    pub volume: f64,
}

/// Every `s`-subset in lexicographic order with its volume.
///
/// Rounding can push the determinant of a singular Gram block slightly
/// below zero; such values are clamped to zero.
pub fn subset_volumes(a: &DenseMatrix, s: usize) -> Result<Vec<SubsetVolume>> {
    let m = a.rows();
    if s == 0 || s > m {
        return Err(Error::BlockSizeOutOfRange { s, max: m });
    }
    check_budget(m, s)?;
    Ok((0..m)
        .combinations(s)
        .map(|rows| {
            let g = a.select_rows(&rows).gram_rows();
            let volume = determinant(&g).max(0.0);
            SubsetVolume { rows, volume }
        })
        .collect())
}

fn normalized(vols: &[SubsetVolume], s: usize) -> Result<(f64, impl Iterator<Item = (&SubsetVolume, f64)>)> {
    let total: f64 = vols.iter().map(|v| v.volume).sum();
    if !(total > 0.0) {
        return Err(Error::DegenerateVolume { s });
    }
    Ok((total, vols.iter().map(move |v| (v, v.volume / total))))
}

/// `Σ_S P(S) A_S^† A_S` (`n × n`).
pub fn expected_projector_bruteforce(a: &DenseMatrix, s: usize) -> Result<DenseMatrix> {
    let vols = subset_volumes(a, s)?;
    let (_, weighted) = normalized(&vols, s)?;
    let n = a.cols();
    let mut acc = DenseMatrix::zeros(n, n);
    for (sv, p) in weighted {
        if p == 0.0 {
            continue;
        }
        let svd = svd_jacobi(&a.select_rows(&sv.rows), RANK_TOL)?;
        let v = &svd.right_vectors;
        // A_S^† A_S = V_r V_r^T
        let proj = v.matmul(&v.transpose())?;
        acc.add_assign_scaled(p, &proj);
    }
    Ok(acc)
}

/// `Σ_S P(S) I_S^T (A_S^†)^T A_S^† I_S` (`m × m`).
pub fn expected_pinv_gram_bruteforce(a: &DenseMatrix, s: usize) -> Result<DenseMatrix> {
    let vols = subset_volumes(a, s)?;
    let (_, weighted) = normalized(&vols, s)?;
    let m = a.rows();
    let mut acc = DenseMatrix::zeros(m, m);
    for (sv, p) in weighted {
        if p == 0.0 {
            continue;
        }
        let pinv = svd_jacobi(&a.select_rows(&sv.rows), RANK_TOL)?.pseudoinverse();
        let block = pinv.transpose().matmul(&pinv)?;
        for (bi, &i) in sv.rows.iter().enumerate() {
            for (bj, &j) in sv.rows.iter().enumerate() {
                acc[(i, j)] += p * block[(bi, bj)];
            }
        }
    }
    Ok(acc)
}

/// `A^T H_s A` through the closed form.
pub fn expected_projector_closed_form(a: &DenseMatrix, s: usize) -> Result<DenseMatrix> {
    let (profile, svd) = SpectralProfile::with_svd(a)?;
    let h = h_matrix(&profile, &svd.left_vectors, s)?;
    a.transpose().matmul(&h)?.matmul(a)
}

/// `H_s` straight from a matrix.
pub fn h_matrix_of(a: &DenseMatrix, s: usize) -> Result<DenseMatrix> {
    let (profile, svd) = SpectralProfile::with_svd(a)?;
    h_matrix(&profile, &svd.left_vectors, s)
}

/// Outcome of the three appendix identities on one `(A, s)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AdjugateReport {
    /// `‖Σ_S I_S^T Adj(A_S A_S^T) I_S − U diag(e_{s-1}(λ_{-i})) U^T‖_F` relative
    /// to the norm of the right-hand side.
    pub adjugate_sum_rel_err: f64,
    /// `|Σ_S det(A_S A_S^T) − e_s(λ)| / e_s(λ)`.
    pub cauchy_binet_rel_err: f64,
    /// Smallest eigenvalue over all `Adj(A_S A_S^T)`.
    pub min_adjugate_eigenvalue: f64,
    pub adjugate_sum_ok: bool,
    pub cauchy_binet_ok: bool,
    pub adjugates_psd: bool,
}

impl AdjugateReport {
    pub fn all_pass(&self) -> bool {
        self.adjugate_sum_ok && self.cauchy_binet_ok && self.adjugates_psd
    }
}

pub const ADJUGATE_SUM_TOL: f64 = 1e-9;
pub const CAUCHY_BINET_TOL: f64 = 1e-10;
pub const PSD_SLACK: f64 = 1e-10;

pub fn adjugate_identity_report(a: &DenseMatrix, s: usize) -> Result<AdjugateReport> {
    let m = a.rows();
    let (profile, svd) = SpectralProfile::with_svd(a)?;
    profile.check_block_size(s)?;
    check_budget(m, s)?;

    let mut adj_sum = DenseMatrix::zeros(m, m);
    let mut det_sum = 0.0;
    let mut min_eig = f64::INFINITY;
    for rows in (0..m).combinations(s) {
        let g = a.select_rows(&rows).gram_rows();
        det_sum += determinant(&g);
        let adj = adjugate(&g);
        min_eig = min_eig.min(min_eigenvalue(&adj)?);
        for (bi, &i) in rows.iter().enumerate() {
            for (bj, &j) in rows.iter().enumerate() {
                adj_sum[(i, j)] += adj[(bi, bj)];
            }
        }
    }

    let u = complete_orthonormal_basis(&svd.left_vectors);
    let weights: Vec<f64> = (0..m).map(|i| profile.e_without(i, s - 1)).collect();
    let rhs = weighted_outer(&u, &weights);
    let adjugate_sum_rel_err = adj_sum.sub(&rhs).frobenius_norm() / rhs.frobenius_norm();
    let es = profile.e(s);
    let cauchy_binet_rel_err = (det_sum - es).abs() / es;
    Ok(AdjugateReport {
        adjugate_sum_rel_err,
        cauchy_binet_rel_err,
        min_adjugate_eigenvalue: min_eig,
        adjugate_sum_ok: adjugate_sum_rel_err <= ADJUGATE_SUM_TOL,
        cauchy_binet_ok: cauchy_binet_rel_err <= CAUCHY_BINET_TOL,
        adjugates_psd: min_eig >= -PSD_SLACK,
    })
}

/// True iff the adjugate-sum, Cauchy–Binet and adjugate-PSD identities all hold.
pub fn adjugate_identity_checks(a: &DenseMatrix, s: usize) -> Result<bool> {
    Ok(adjugate_identity_report(a, s)?.all_pass())
}
