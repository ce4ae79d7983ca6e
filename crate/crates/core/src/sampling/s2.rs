//! Pair volume sampling from sparse tables of `A A^T`.
//!
//! For `i < j`, `det(A_{ij} A_{ij}^T) = ‖A_i‖²‖A_j‖² − ⟨A_i, A_j⟩²`. Writing
//! `α(i, j) = Σ_{j'=i}^{j} det(A_{ij'} A_{ij'}^T)`, the pair law factors as
//! `P(i) = α(i, m) / Σ_{i'} α(i', m)` and `P(j | i) = (α(i, j) − α(i, j−1)) / α(i, m)`.
//! With suffix sums `ζ_i = Σ_{j≥i} ‖A_j‖²` and prefix sums `φ_{i,k}` of the
//! squared Gram entries of row `i` at its neighbor columns `j_{i,1} = i < j_{i,2} < ⋯`,
//! `α(i, j) = ‖A_i‖² (ζ_i − ζ_{j+1}) − φ_{i,k}` for `j_{i,k} ≤ j < j_{i,k+1}`.
//! Only the neighbor values are stored; values in between are evaluated on
//! demand during the search.
//!
//! All indices here are 0-based.

use serde::{Deserialize, Serialize};

use super::rng::RngStream;
use super::search::{first_at_least, first_at_least_by};
use crate::error::{Error, Result};
use crate::matrix::{CsrMatrix, GramStats};

/// Squared Gram entries below this are treated as structural zeros.
pub const GRAM_DROP_SQ: f64 = 1e-300;

/// `Ψ_{m-1}` at or below `RANK_TWO_TOL · ‖A‖_F⁴` means no pair has volume.
pub const RANK_TWO_TOL: f64 = 1e-13;

/// Operation counts of the preprocessing pass.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreprocStats {
    pub gram: GramStats,
    /// Flops counted step by step while building the tables.
    pub flops: u64,
    /// Total number of stored neighbor entries, `Σ_i |T_{≥i}|`.
    pub neighbor_entries: u64,
    pub m: u64,
}

impl PreprocStats {
    /// `2 Σ_{i≤ℓ} s_{i,ℓ} + 2|T| + 5m − 2`.
    pub fn predicted_flops(&self) -> u64 {
        2 * self.gram.overlap_sum + 2 * self.gram.t_size + 5 * self.m - 2
    }
}

/// Tables for exact pair volume sampling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VsPreprocS2 {
    m: usize,
    row_norms_sq: Vec<f64>,
    /// `ζ_0..ζ_{m-1}` followed by the sentinel `ζ_m = 0`.
    zeta: Vec<f64>,
    /// Row `i` owns `neighbor_ptr[i]..neighbor_ptr[i+1]` of the flat arrays below.
    neighbor_ptr: Vec<usize>,
    neighbor_cols: Vec<usize>,
    phi: Vec<f64>,
    alpha: Vec<f64>,
    /// `α(i, m-1)` per row.
    alpha_total: Vec<f64>,
    /// `Ψ_j = Σ_{i≤j} α(i, m-1)` for `j = 0..m-1` (length `m − 1`).
    psi: Vec<f64>,
    stats: PreprocStats,
}

impl VsPreprocS2 {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn row_norms_sq(&self) -> &[f64] {
        &self.row_norms_sq
    }

    /// Suffix row-norm sums including the trailing zero sentinel.
    pub fn zeta(&self) -> &[f64] {
        &self.zeta
    }

    pub fn psi(&self) -> &[f64] {
        &self.psi
    }

    /// `Σ_{i<j} det(A_{ij} A_{ij}^T)`, which equals `e_2(λ)`.
    pub fn total_volume(&self) -> f64 {
        *self.psi.last().unwrap()
    }

    pub fn stats(&self) -> &PreprocStats {
        &self.stats
    }

    /// Neighbor columns of row `i`: `j_{i,1} = i < j_{i,2} < ⋯`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbor_cols[self.neighbor_ptr[i]..self.neighbor_ptr[i + 1]]
    }

    pub fn phi(&self, i: usize) -> &[f64] {
        &self.phi[self.neighbor_ptr[i]..self.neighbor_ptr[i + 1]]
    }

    /// `α(i, j_{i,k})` for every neighbor `k`.
    pub fn alpha_at_neighbors(&self, i: usize) -> &[f64] {
        &self.alpha[self.neighbor_ptr[i]..self.neighbor_ptr[i + 1]]
    }

    pub fn alpha_total(&self, i: usize) -> f64 {
        self.alpha_total[i]
    }

    #[inline]
    fn closed_form(&self, i: usize, j: usize, phi: f64) -> f64 {
        self.row_norms_sq[i] * (self.zeta[i] - self.zeta[j + 1]) - phi
    }

    /// `α(i, j)` inside the gap after neighbor slot `k` (absolute index).
    #[inline]
    fn alpha_in_gap(&self, i: usize, j: usize, slot: usize) -> f64 {
        self.alpha[slot].max(self.closed_form(i, j, self.phi[slot]))
    }

    /// `α(i, j)` for `i ≤ j < m`.
    ///
    /// Evaluated values are made nondecreasing in `j` by taking running
    /// maxima, which removes rounding dips where consecutive exact values
    /// coincide (parallel rows).
    pub fn alpha(&self, i: usize, j: usize) -> f64 {
        assert!(i <= j && j < self.m, "alpha needs i <= j < m");
        let start = self.neighbor_ptr[i];
        let cols = self.neighbors(i);
        let k = cols.partition_point(|&c| c <= j) - 1;
        if cols[k] == j {
            self.alpha[start + k]
        } else {
            self.alpha_in_gap(i, j, start + k)
        }
    }

    /// Exact probability of the pair `{i, j}`, `i < j`.
    pub fn pair_probability(&self, i: usize, j: usize) -> Result<f64> {
        if !(i < j && j < self.m) {
            return Err(Error::IndexOrder { i, j, m: self.m });
        }
        Ok((self.alpha(i, j) - self.alpha(i, j - 1)) / self.total_volume())
    }

    /// Draws a pair `(i0, j0)`, `i0 < j0`, with probability proportional to
    /// `det(A_{i0 j0} A_{i0 j0}^T)`.
    pub fn sample(&self, rng: &mut RngStream) -> (usize, usize) {
        let u1 = rng.uniform_positive();
        let u2 = rng.uniform_positive();
        self.sample_with(u1, u2)
    }

    /// Binary-search sampling for given `u1, u2 ∈ (0, 1]`.
    ///
    /// `u2` drives both the search over neighbor slots and the search inside
    /// the selected gap, since the neighbor values are a subsequence of the
    /// same conditional CDF.
    pub fn sample_with(&self, u1: f64, u2: f64) -> (usize, usize) {
        let i0 = first_at_least(&self.psi, u1 * self.total_volume());
        let t = u2 * self.alpha_total[i0];
        let start = self.neighbor_ptr[i0];
        let cols = self.neighbors(i0);
        let alphas = self.alpha_at_neighbors(i0);
        // last neighbor strictly below the target; slot 0 has α = 0 < t
        let k0 = alphas.partition_point(|&a| a < t) - 1;
        let lo = cols[k0] + 1;
        let (hi, next) = match cols.get(k0 + 1) {
            Some(&c) => (c, Some(c)),
            None => (self.m - 1, None),
        };
        let j0 = first_at_least_by(lo, hi, t, |j| {
            if Some(j) == next {
                alphas[k0 + 1]
            } else {
                self.alpha_in_gap(i0, j, start + k0)
            }
        });
        (i0, j0)
    }

    /// Reference sampler: linear inverse-CDF scans over `Ψ` and over every
    /// `α(i0, j)`. Same output as [`Self::sample_with`] for the same uniforms.
    pub fn sample_linear_scan(&self, u1: f64, u2: f64) -> (usize, usize) {
        let t1 = u1 * self.total_volume();
        let i0 = (0..self.psi.len())
            .find(|&i| t1 <= self.psi[i])
            .unwrap_or(self.psi.len() - 1);
        let t2 = u2 * self.alpha_total[i0];
        let j0 = (i0 + 1..self.m)
            .find(|&j| t2 <= self.alpha(i0, j))
            .unwrap_or(self.m - 1);
        (i0, j0)
    }
}

/// Builds the pair-sampling tables from a sparse matrix with nonzero rows and
/// rank at least two.
pub fn vs_preprocess_s2(a: &CsrMatrix) -> Result<VsPreprocS2> {
    let m = a.rows();
    if m < 2 {
        return Err(Error::BlockSizeOutOfRange { s: 2, max: m });
    }
    let (g, gram) = a.gram_with_stats()?;
    let mut flops = gram.flops;

    let row_norms_sq: Vec<f64> = (0..m).map(|i| g.get(i, i)).collect();
    let mut zeta = vec![0.0; m + 1];
    for i in (0..m).rev() {
        zeta[i] = zeta[i + 1] + row_norms_sq[i];
    }
    flops += m as u64 - 1;

    let mut neighbor_ptr = Vec::with_capacity(m + 1);
    neighbor_ptr.push(0);
    let mut neighbor_cols = Vec::new();
    let mut phi = Vec::new();
    for i in 0..m {
        let (cols, vals) = g.row(i);
        let mut acc = 0.0;
        let before = phi.len();
        for (&c, &v) in cols.iter().zip(vals) {
            let sq = v * v;
            if c < i || (c > i && sq < GRAM_DROP_SQ) {
                continue;
            }
            acc += sq;
            neighbor_cols.push(c);
            phi.push(acc);
        }
        let k = (phi.len() - before) as u64;
        flops += 2 * k - 1;
        neighbor_ptr.push(neighbor_cols.len());
    }

    let mut pre = VsPreprocS2 {
        m,
        row_norms_sq,
        zeta,
        alpha: vec![0.0; neighbor_cols.len()],
        neighbor_ptr,
        neighbor_cols,
        phi,
        alpha_total: vec![0.0; m],
        psi: Vec::with_capacity(m - 1),
        stats: PreprocStats::default(),
    };

    for i in 0..m {
        let (start, end) = (pre.neighbor_ptr[i], pre.neighbor_ptr[i + 1]);
        // α(i, i) = 0 exactly
        pre.alpha[start] = 0.0;
        for slot in start + 1..end {
            let j = pre.neighbor_cols[slot];
            let before_j = if j - 1 > pre.neighbor_cols[slot - 1] {
                pre.alpha_in_gap(i, j - 1, slot - 1)
            } else {
                pre.alpha[slot - 1]
            };
            pre.alpha[slot] = before_j.max(pre.closed_form(i, j, pre.phi[slot]));
        }
        flops += 3 * (end - start) as u64;
        pre.alpha_total[i] = pre.alpha(i, m - 1);
    }

    let mut acc = 0.0;
    for i in 0..m - 1 {
        acc += pre.alpha_total[i];
        pre.psi.push(acc);
    }
    flops += 3 * m as u64 - 1;

    if !(acc > RANK_TWO_TOL * pre.zeta[0] * pre.zeta[0]) {
        return Err(Error::DegenerateVolume { s: 2 });
    }
    pre.stats = PreprocStats {
        gram,
        flops,
        neighbor_entries: pre.neighbor_cols.len() as u64,
        m: m as u64,
    };
    Ok(pre)
}

/// Free-function form of [`VsPreprocS2::sample`].
pub fn vs_sample_s2(pre: &VsPreprocS2, rng: &mut RngStream) -> (usize, usize) {
    pre.sample(rng)
}

/// Free-function form of [`VsPreprocS2::pair_probability`].
pub fn vs_prob_s2_exact(pre: &VsPreprocS2, i: usize, j: usize) -> Result<f64> {
    pre.pair_probability(i, j)
}
