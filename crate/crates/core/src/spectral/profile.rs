use serde::{Deserialize, Serialize};

use super::esp::EspTable;
use crate::error::{Error, Result};
use crate::matrix::{svd_jacobi, DenseMatrix, SvdResult, RANK_TOL};

/// Highest elementary-symmetric order tabulated by default.
pub const DEFAULT_MAX_ORDER: usize = 32;

/// Spectrum of `A A^T` together with its elementary symmetric tables.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralProfile {
    /// `(σ_1², …, σ_r², 0, …, 0)`, length `m`, nonincreasing.
    pub lambda: Vec<f64>,
    pub rank: usize,
    /// `‖A‖_F²`.
    pub frob_sq: f64,
    esp: EspTable,
}

impl SpectralProfile {
    /// Profile of a dense matrix; λ is padded with zeros to `m = rows`.
    pub fn from_matrix(a: &DenseMatrix) -> Result<Self> {
        Ok(Self::from_svd(&svd_jacobi(a, RANK_TOL)?, a.rows()))
    }

    /// Profile and the SVD it came from.
    pub fn with_svd(a: &DenseMatrix) -> Result<(Self, SvdResult)> {
        let svd = svd_jacobi(a, RANK_TOL)?;
        Ok((Self::from_svd(&svd, a.rows()), svd))
    }

    pub fn from_svd(svd: &SvdResult, m: usize) -> Self {
        let sq: Vec<f64> = svd.singular_values.iter().map(|s| s * s).collect();
        Self::from_eigenvalues(&sq, m)
    }

    /// Profile from nonnegative eigenvalues of `A A^T` (any order, zeros allowed),
    /// padded to length `m`. `‖A‖_F²` is taken as their sum.
    pub fn from_eigenvalues(eigs: &[f64], m: usize) -> Self {
        Self::from_eigenvalues_with_order(eigs, m, DEFAULT_MAX_ORDER)
    }

    pub fn from_eigenvalues_with_order(eigs: &[f64], m: usize, max_order: usize) -> Self {
        assert!(eigs.len() <= m, "more eigenvalues than rows");
        let mut lambda: Vec<f64> = eigs.to_vec();
        lambda.sort_by(|a, b| b.total_cmp(a));
        lambda.resize(m, 0.0);
        let rank = lambda.iter().filter(|&&v| v > 0.0).count();
        let frob_sq = lambda.iter().sum();
        let order = rank.min(max_order).max(1);
        let esp = EspTable::new(&lambda, order);
        Self {
            lambda,
            rank,
            frob_sq,
            esp,
        }
    }

    /// From singular values (not squared).
    pub fn from_singular_values(sigma: &[f64], m: usize) -> Self {
        let sq: Vec<f64> = sigma.iter().map(|s| s * s).collect();
        Self::from_eigenvalues(&sq, m)
    }

    pub fn m(&self) -> usize {
        self.lambda.len()
    }

    pub fn esp(&self) -> &EspTable {
        &self.esp
    }

    /// `‖A‖_2²`.
    pub fn spectral_norm_sq(&self) -> f64 {
        self.lambda.first().copied().unwrap_or(0.0)
    }

    /// `σ_min²`, the smallest nonzero eigenvalue.
    pub fn sigma_min_sq(&self) -> f64 {
        if self.rank == 0 {
            0.0
        } else {
            self.lambda[self.rank - 1]
        }
    }

    /// Checks `1 ≤ s ≤ rank` and that the table reaches order `s`.
    pub fn check_block_size(&self, s: usize) -> Result<()> {
        if s == 0 || s > self.rank {
            return Err(Error::BlockSizeOutOfRange { s, max: self.rank });
        }
        if s > self.esp.order() {
            return Err(Error::invalid(format!(
                "block size {s} exceeds the tabulated order {}",
                self.esp.order()
            )));
        }
        Ok(())
    }

    /// `e_ℓ(λ)`.
    pub fn e(&self, l: usize) -> f64 {
        self.esp.e(l)
    }

    /// `e_ℓ(λ_{-i})`, 0-based `i`.
    pub fn e_without(&self, i: usize, l: usize) -> f64 {
        self.esp.e_without(i, l)
    }

    /// `e_{s-1}(λ_{-i}) / e_s(λ)`, 0-based `i`.
    pub fn esp_ratio(&self, i: usize, s: usize) -> f64 {
        self.esp.ratio_without(i, s)
    }

    /// `e_{s-1}(λ_{-m}) / e_s(λ)`: drops the last (smallest) entry of the
    /// padded vector, which is the largest of the ratios.
    pub fn esp_ratio_last(&self, s: usize) -> f64 {
        self.esp_ratio(self.m() - 1, s)
    }

    /// `Σ_{i ≥ s} σ_i²` over the nonzero spectrum (1-based `s`).
    pub fn tail_sum(&self, s: usize) -> f64 {
        self.lambda[s.saturating_sub(1)..self.rank].iter().sum()
    }
}
