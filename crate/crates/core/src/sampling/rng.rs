use rand::distributions::{Distribution, OpenClosed01};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seeded random stream shared by every sampler and generator.
///
/// The generator is ChaCha8 keyed by `seed` (see [`ChaCha8Rng::seed_from_u64`]),
/// which produces the same sequence on every platform. Independent trials use
/// [`RngStream::for_trial`], whose seed is `seed ^ trial`.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    inner: ChaCha8Rng,
    spare_normal: Option<f64>,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
            spare_normal: None,
        }
    }

    pub fn for_trial(seed: u64, trial: u64) -> Self {
        Self::new(seed ^ trial)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform on `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.inner.gen::<f64>()
    }

    /// Uniform on `(0, 1]`, the draw used by every inverse-CDF search.
    #[inline]
    pub fn uniform_positive(&mut self) -> f64 {
        OpenClosed01.sample(&mut self.inner)
    }

    /// Uniform integer in `0..n`.
    #[inline]
    pub fn index(&mut self, n: usize) -> usize {
        self.inner.gen_range(0..n)
    }

    /// Standard normal via the Box–Muller transform; the second value of each
    /// pair is kept for the next call.
    pub fn gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = self.uniform_positive();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        self.spare_normal = Some(r * theta.sin());
        r * theta.cos()
    }

    pub fn gaussian_vec(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.gaussian()).collect()
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.inner.try_fill_bytes(dest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = RngStream::new(42);
        let mut b = RngStream::new(42);
        for _ in 0..100 {
            assert_eq!(a.uniform().to_bits(), b.uniform().to_bits());
            assert_eq!(a.gaussian().to_bits(), b.gaussian().to_bits());
        }
    }

    #[test]
    fn trial_streams_differ() {
        let mut a = RngStream::for_trial(7, 0);
        let mut b = RngStream::for_trial(7, 1);
        assert_eq!(a.seed(), 7);
        assert_eq!(b.seed(), 6);
        assert_ne!(a.next_u64(), b.next_u64());
    }

    #[test]
    fn ranges() {
        let mut r = RngStream::new(1);
        for _ in 0..10_000 {
            let u = r.uniform();
            assert!((0.0..1.0).contains(&u));
            let v = r.uniform_positive();
            assert!(v > 0.0 && v <= 1.0);
            assert!(r.index(5) < 5);
        }
    }

    #[test]
    fn gaussian_moments() {
        let mut r = RngStream::new(3);
        let n = 200_000;
        let z = r.gaussian_vec(n);
        let mean = z.iter().sum::<f64>() / n as f64;
        let var = z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.01, "var {var}");
    }
}
