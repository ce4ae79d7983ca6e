use serde::{Deserialize, Serialize};

/// Elementary symmetric polynomials of a nonnegative vector `λ` and of every
/// leave-one-out vector `λ_{-i}`, up to a fixed order.
///
/// Entries are normalized by `λ_max` before the recurrences run, so
/// `e_ℓ(λ) = λ_max^ℓ · e_ℓ(λ / λ_max)`; every recurrence only adds
/// nonnegative terms. Leave-one-out values come from splitting the
/// prefix table at `i - 1` and the suffix table at `i + 1`:
/// `e_ℓ(λ_{-i}) = Σ_{a+b=ℓ} e_a(λ_{<i}) e_b(λ_{>i})`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EspTable {
    scale: f64,
    order: usize,
    len: usize,
    /// `prefix[k][ℓ] = e_ℓ(μ_1..μ_k)`, `k = 0..=len`.
    prefix: Vec<Vec<f64>>,
    /// `suffix[k][ℓ] = e_ℓ(μ_{k+1}..μ_len)`, `k = 0..=len`.
    suffix: Vec<Vec<f64>>,
    /// `leave_out[i][ℓ] = e_ℓ(μ_{-i})`.
    leave_out: Vec<Vec<f64>>,
}

impl EspTable {
    /// Builds tables for orders `0..=order`.
    ///
    /// Panics when `lambda` holds a negative or non-finite entry.
    pub fn new(lambda: &[f64], order: usize) -> Self {
        assert!(
            lambda.iter().all(|v| v.is_finite() && *v >= 0.0),
            "elementary symmetric tables need a finite nonnegative vector"
        );
        let len = lambda.len();
        let lmax = lambda.iter().copied().fold(0.0, f64::max);
        let scale = if lmax > 0.0 { lmax } else { 1.0 };
        let mu: Vec<f64> = lambda.iter().map(|v| v / scale).collect();

        let step = |prev: &[f64], x: f64| -> Vec<f64> {
            let mut next = prev.to_vec();
            for l in 1..=order {
                next[l] += x * prev[l - 1];
            }
            next
        };
        let mut base = vec![0.0; order + 1];
        base[0] = 1.0;

        let mut prefix = Vec::with_capacity(len + 1);
        prefix.push(base.clone());
        for &x in &mu {
            let next = step(prefix.last().unwrap(), x);
            prefix.push(next);
        }
        let mut suffix = vec![base; len + 1];
        for k in (0..len).rev() {
            suffix[k] = step(&suffix[k + 1], mu[k]);
        }
        let leave_out = (0..len)
            .map(|i| {
                let (p, s) = (&prefix[i], &suffix[i + 1]);
                (0..=order).map(|l| (0..=l).map(|a| p[a] * s[l - a]).sum()).collect()
            })
            .collect();
        Self {
            scale,
            order,
            len,
            prefix,
            suffix,
            leave_out,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Normalization constant `λ_max` (1 for the zero vector).
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `e_ℓ(λ)`; zero above the table order is not implied, so `ℓ` must be
    /// within `0..=order`.
    pub fn e(&self, l: usize) -> f64 {
        self.e_scaled(l) * self.scale.powi(l as i32)
    }

    /// `e_ℓ(λ_{-i})` with a 0-based index `i`.
    pub fn e_without(&self, i: usize, l: usize) -> f64 {
        self.e_without_scaled(i, l) * self.scale.powi(l as i32)
    }

    /// `e_ℓ(λ / λ_max)`.
    pub fn e_scaled(&self, l: usize) -> f64 {
        assert!(l <= self.order, "order {l} above table order {}", self.order);
        self.prefix[self.len][l]
    }

    pub fn e_without_scaled(&self, i: usize, l: usize) -> f64 {
        assert!(l <= self.order, "order {l} above table order {}", self.order);
        self.leave_out[i][l]
    }

    /// `e_{s-1}(λ_{-i}) / e_s(λ)` evaluated in the normalized domain.
    pub fn ratio_without(&self, i: usize, s: usize) -> f64 {
        assert!(s >= 1);
        self.e_without_scaled(i, s - 1) / self.e_scaled(s) / self.scale
    }

    /// `e_ℓ` of the first `k` entries.
    pub fn e_prefix(&self, k: usize, l: usize) -> f64 {
        self.prefix[k][l] * self.scale.powi(l as i32)
    }

    /// `e_ℓ` of the entries after position `k` (0-based, exclusive).
    pub fn e_suffix(&self, k: usize, l: usize) -> f64 {
        self.suffix[k][l] * self.scale.powi(l as i32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_two_three() {
        let t = EspTable::new(&[1.0, 2.0, 3.0], 3);
        assert!((t.e(0) - 1.0).abs() < 1e-15);
        assert!((t.e(1) - 6.0).abs() < 1e-13);
        assert!((t.e(2) - 11.0).abs() < 1e-13);
        assert!((t.e(3) - 6.0).abs() < 1e-13);
    }

    #[test]
    fn leave_out_last_zero() {
        let t = EspTable::new(&[4.0, 1.0, 0.0], 2);
        assert!((t.e_without(2, 1) - 5.0).abs() < 1e-14);
        assert!((t.e_without(2, 2) - 4.0).abs() < 1e-14);
        assert_eq!(t.e(2), t.e_without(2, 2));
    }

    #[test]
    fn empty_product_is_one_everywhere() {
        let t = EspTable::new(&[0.3, 7.0, 2.5, 0.0], 2);
        assert_eq!(t.e(0), 1.0);
        for i in 0..4 {
            assert_eq!(t.e_without(i, 0), 1.0);
        }
    }

    #[test]
    fn zero_vector() {
        let t = EspTable::new(&[0.0, 0.0], 2);
        assert_eq!(t.e(0), 1.0);
        assert_eq!(t.e(1), 0.0);
        assert_eq!(t.e(2), 0.0);
    }

    #[test]
    fn large_values_do_not_overflow_ratio() {
        let lambda = vec![1e200, 5e199, 1e199];
        let t = EspTable::new(&lambda, 2);
        // e_1(λ_{-1}) / e_2(λ) = 6e199 / (5e399 + 1e399 + 5e398)
        let r = t.ratio_without(0, 2);
        let expect = 6.0 / 6.5 * 1e-200;
        assert!(((r - expect) / expect).abs() < 1e-14);
    }
}
