use serde::{Deserialize, Serialize};

use super::rng::RngStream;
use super::search::first_at_least;
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::spectral::oracles::subset_volumes;

/// Exact volume sampler for any block size, backed by a full table of
/// `det(A_S A_S^T)` over all `C(m, s)` subsets.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VsEnumerator {
    s: usize,
    subsets: Vec<Vec<usize>>,
    /// Unnormalized cumulative volumes in lexicographic subset order.
    cdf: Vec<f64>,
}

impl VsEnumerator {
    pub fn new(a: &DenseMatrix, s: usize) -> Result<Self> {
        let vols = subset_volumes(a, s)?;
        let mut acc = 0.0;
        let mut cdf = Vec::with_capacity(vols.len());
        let mut subsets = Vec::with_capacity(vols.len());
        for v in vols {
            acc += v.volume;
            cdf.push(acc);
            subsets.push(v.rows);
        }
        if !(acc > 0.0) {
            return Err(Error::DegenerateVolume { s });
        }
        Ok(Self { s, subsets, cdf })
    }

    pub fn block_size(&self) -> usize {
        self.s
    }

    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }

    pub fn total_volume(&self) -> f64 {
        *self.cdf.last().unwrap()
    }

    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.subsets
    }

    /// `P(S)` for every subset, in the order of [`Self::subsets`].
    pub fn probabilities(&self) -> Vec<f64> {
        let total = self.total_volume();
        let mut prev = 0.0;
        self.cdf
            .iter()
            .map(|&c| {
                let p = (c - prev) / total;
                prev = c;
                p
            })
            .collect()
    }

    /// Position of a sorted subset in the table.
    pub fn position(&self, subset: &[usize]) -> Option<usize> {
        self.subsets.binary_search_by(|s| s.as_slice().cmp(subset)).ok()
    }

    /// Draws `S ∼ Vol_s(A A^T)` by inverse-CDF lookup.
    pub fn sample(&self, rng: &mut RngStream) -> &[usize] {
        self.sample_with(rng.uniform_positive())
    }

    /// Inverse-CDF lookup for a given `u ∈ (0, 1]`.
    pub fn sample_with(&self, u: f64) -> &[usize] {
        let t = u * self.total_volume();
        &self.subsets[first_at_least(&self.cdf, t)]
    }
}
