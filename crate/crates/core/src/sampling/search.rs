/// Smallest index `k` with `t <= cdf[k]` in a nondecreasing array.
///
/// Ties resolve to the lower index, so flat stretches (zero-mass entries)
/// are skipped whenever `t > 0`. Returns the last index if `t` exceeds every
/// entry, which only rounding can cause.
#[inline]
pub(crate) fn first_at_least(cdf: &[f64], t: f64) -> usize {
    cdf.partition_point(|&c| c < t).min(cdf.len() - 1)
}

/// Smallest `j` in `lo..=hi` with `t <= f(j)` for a nondecreasing `f`;
/// `f(hi) >= t` must hold.
#[inline]
pub(crate) fn first_at_least_by(mut lo: usize, mut hi: usize, t: f64, f: impl Fn(usize) -> f64) -> usize {
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if f(mid) < t {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}
