//! Exact volume sampling of row subsets: an enumerative sampler for any
//! block size and a table-driven pair sampler whose cost per draw is
//! logarithmic in the number of rows.

pub mod cache;
mod enumerate;
mod rng;
mod s2;
mod search;

pub use enumerate::VsEnumerator;
pub use rng::RngStream;
pub use s2::{vs_preprocess_s2, vs_prob_s2_exact, vs_sample_s2, PreprocStats, VsPreprocS2, GRAM_DROP_SQ, RANK_TWO_TOL};
pub(crate) use search::first_at_least;

use crate::error::Result;
use crate::matrix::DenseMatrix;

/// Draws `S ∼ Vol_s(A A^T)` from a freshly built enumeration table. Build a
/// [`VsEnumerator`] once instead when drawing repeatedly.
pub fn vs_enumerate(a: &DenseMatrix, s: usize, rng: &mut RngStream) -> Result<Vec<usize>> {
    Ok(VsEnumerator::new(a, s)?.sample(rng).to_vec())
}
