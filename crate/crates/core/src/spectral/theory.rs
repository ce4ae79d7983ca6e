//! Closed-form convergence constants for volume-sampled block Kaczmarz.

use serde::{Deserialize, Serialize};

use super::profile::SpectralProfile;
use crate::error::{Error, Result};
use crate::matrix::{complete_orthonormal_basis, DenseMatrix};

/// Relative slack used when `ω` sits exactly on its admissible maximum.
const OMEGA_EDGE_SLACK: f64 = 1e-12;

/// Contraction factor `σ_min² / (σ_s² + ⋯ + σ_min²)` for block size `s`.
pub fn rho_as(profile: &SpectralProfile, s: usize) -> Result<f64> {
    if s == 0 || s > profile.rank {
        return Err(Error::BlockSizeOutOfRange { s, max: profile.rank });
    }
    Ok(profile.sigma_min_sq() / profile.tail_sum(s))
}

/// Predicted iteration-count ratio `K_{s1} / K_{s2} = ρ_{A,s2} / ρ_{A,s1}`.
pub fn rate_ratio(profile: &SpectralProfile, s1: usize, s2: usize) -> Result<f64> {
    Ok(rho_as(profile, s2)? / rho_as(profile, s1)?)
}

/// The expected-projection kernel `U diag(e_{s-1}(λ_{-i})) U^T / e_s(λ)`.
///
/// `u` holds left singular vectors of `A` ordered like `profile.lambda`; when
/// it has fewer than `m` columns it is completed to a full orthogonal basis
/// (the extra directions carry the zero eigenvalues).
pub fn h_matrix(profile: &SpectralProfile, u: &DenseMatrix, s: usize) -> Result<DenseMatrix> {
    profile.check_block_size(s)?;
    let m = profile.m();
    if u.rows() != m || u.cols() > m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: u.rows(),
        });
    }
    let full = if u.cols() < m {
        complete_orthonormal_basis(u)
    } else {
        u.clone()
    };
    let weights: Vec<f64> = (0..m).map(|i| profile.esp_ratio(i, s)).collect();
    Ok(weighted_outer(&full, &weights))
}

/// `U diag(w) U^T`.
pub(crate) fn weighted_outer(u: &DenseMatrix, w: &[f64]) -> DenseMatrix {
    let m = u.rows();
    let mut h = DenseMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let v: f64 = w.iter().enumerate().map(|(k, &wk)| u[(i, k)] * wk * u[(j, k)]).sum();
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    h
}

/// Checks `e_{s-1}(λ_{-i}) / e_s(λ) ≥ 1 / (σ²_{min(i,s)} + Σ_{j>s} σ_j²)`
/// for every row index `i`, up to a relative slack of `1e-12`.
pub fn esp_ratio_lower_bound_check(profile: &SpectralProfile, s: usize) -> bool {
    if profile.check_block_size(s).is_err() {
        return false;
    }
    let tail: f64 = profile.tail_sum(s + 1);
    (0..profile.m()).all(|i| {
        let lhs = profile.esp_ratio(i, s);
        let denom = profile.lambda[i.min(s - 1)] + tail;
        lhs * denom >= 1.0 - 1e-12
    })
}

/// Constants of the mean-square bound for the momentum method.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentumConstants {
    pub gamma1: f64,
    pub gamma2: f64,
    /// `(γ₁ + √(γ₁² + 4γ₂)) / 2`.
    pub rho: f64,
    /// `ρ − γ₁`.
    pub q: f64,
    pub omega: f64,
    pub beta: f64,
    /// `γ₁ + γ₂ < 1`; otherwise the bound says nothing.
    pub bound_applicable: bool,
}

impl MomentumConstants {
    /// `ρ^k (1 + q)`, the bound on `E‖x^k − x⁰_*‖² / ‖x⁰ − x⁰_*‖²`.
    pub fn bound_factor(&self, k: u32) -> f64 {
        self.rho.powi(k as i32) * (1.0 + self.q)
    }
}

pub fn momentum_constants(profile: &SpectralProfile, s: usize, omega: f64, beta: f64) -> Result<MomentumConstants> {
    if !(omega > 0.0 && omega < 2.0) {
        return Err(Error::invalid(format!("omega must lie in (0, 2), got {omega}")));
    }
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::invalid(format!("beta must be nonnegative, got {beta}")));
    }
    profile.check_block_size(s)?;
    let rho_s = rho_as(profile, s)?;
    let gamma1 = 1.0 + 3.0 * beta + 2.0 * beta * beta - omega * (2.0 - omega + beta) * rho_s;
    let gamma2 = beta + 2.0 * beta * beta + omega * beta * profile.esp_ratio_last(s) * profile.spectral_norm_sq();
    let rho = 0.5 * (gamma1 + (gamma1 * gamma1 + 4.0 * gamma2).sqrt());
    Ok(MomentumConstants {
        gamma1,
        gamma2,
        rho,
        q: rho - gamma1,
        omega,
        beta,
        bound_applicable: gamma1 + gamma2 < 1.0,
    })
}

/// Largest step size for the accelerated expected-iterate rate:
/// `e_s(λ) / (e_{s-1}(λ_{-m}) ‖A‖_2²)`.
pub fn omega_max(profile: &SpectralProfile, s: usize) -> Result<f64> {
    profile.check_block_size(s)?;
    Ok(1.0 / (profile.esp_ratio_last(s) * profile.spectral_norm_sq()))
}

/// Open interval of momentum values `((1 − √(ωρ_{A,s}))², 1)` for which the
/// expected iterates contract at rate `β`.
pub fn momentum_beta_window(profile: &SpectralProfile, s: usize, omega: f64) -> Result<(f64, f64)> {
    let wmax = omega_max(profile, s)?;
    if !(omega > 0.0) || omega > wmax * (1.0 + OMEGA_EDGE_SLACK) {
        return Err(Error::invalid(format!(
            "omega {omega} outside the admissible range (0, {wmax}]"
        )));
    }
    let rho_s = rho_as(profile, s)?;
    let lo = (1.0 - (omega * rho_s).min(1.0).sqrt()).powi(2);
    Ok((lo, 1.0))
}

/// Right-hand side of the RBKVS mean-square bound:
/// `(1 − ρ)^k e0 + e_{s-1}(λ_{-m}) / (e_s(λ) ρ) · ‖r*‖²`.
pub fn rbkvs_error_bound(
    profile: &SpectralProfile,
    s: usize,
    k: u32,
    initial_error_sq: f64,
    residual_sq: f64,
) -> Result<f64> {
    let rho_s = rho_as(profile, s)?;
    Ok((1.0 - rho_s).powi(k as i32) * initial_error_sq + profile.esp_ratio_last(s) / rho_s * residual_sq)
}

/// Eigenvalues `σ_i² e_{s-1}(λ_{-i}) / e_s(λ)` of `A^T H_s A` on `Range(A^T)`.
pub fn expected_projector_spectrum(profile: &SpectralProfile, s: usize) -> Result<Vec<f64>> {
    profile.check_block_size(s)?;
    Ok((0..profile.rank)
        .map(|i| profile.lambda[i] * profile.esp_ratio(i, s))
        .collect())
}
