//! Monte-Carlo and scaling checks that need more than a handful of draws.

use rbkvs::experiments::{gen_type2, TypeIISpec};
use rbkvs::matrix::{CsrMatrix, DenseMatrix};
use rbkvs::sampling::{vs_preprocess_s2, RngStream};
use rbkvs::solvers::{picker_for, KaczmarzIter, Method, RowNormSampler, SolverConfig, VsSource};
use rbkvs::spectral::{momentum_constants, SpectralProfile};

#[test]
fn second_row_marginal_excludes_the_first() {
    let norms: Vec<f64> = (1..=6).map(|k| f64::from(k * k)).collect();
    let total: f64 = norms.iter().sum();
    let sampler = RowNormSampler::new(&norms).unwrap();
    let mut rng = RngStream::new(3);
    let draws = 200_000;
    let mut counts = vec![vec![0usize; 6]; 6];
    for _ in 0..draws {
        let (i, j) = sampler.sample_pair(&mut rng);
        assert_ne!(i, j);
        counts[i][j] += 1;
    }
    for i in 0..6 {
        let row: usize = counts[i].iter().sum();
        if row < 20_000 {
            continue;
        }
        let tv: f64 = (0..6)
            .filter(|&j| j != i)
            .map(|j| (counts[i][j] as f64 / row as f64 - norms[j] / (total - norms[i])).abs())
            .sum::<f64>()
            / 2.0;
        assert!(tv < 0.02, "row {i}: TV {tv}");
    }
}

fn banded_random(m: usize, seed: u64) -> CsrMatrix {
    let mut rng = RngStream::new(seed);
    let t: Vec<(usize, usize, f64)> = (0..m)
        .flat_map(|i| (0..3).map(move |k| (i, (i + k * 7) % m)))
        .map(|(i, j)| (i, j, 1.0 + rng.uniform()))
        .collect();
    CsrMatrix::from_triplets(m, m, &t).unwrap()
}

#[test]
fn preprocessing_cost_per_row_does_not_grow_with_m() {
    let per_row = |m: usize| {
        let t = vs_preprocess_s2(&banded_random(m, m as u64)).unwrap();
        let stats = t.stats();
        assert_eq!(stats.flops, stats.predicted_flops());
        stats.flops as f64 / m as f64
    };
    let (small, large) = (per_row(400), per_row(800));
    assert!(large < 2.0 * small, "{small} -> {large}");
    assert!(large <= 1.1 * small, "{small} -> {large}");
}

#[test]
fn momentum_mean_square_bound() {
    let spec = TypeIISpec {
        m: 10,
        n: 3,
        r: 3,
        kappa: 1.2,
    };
    let sys = gen_type2(&spec, &mut RngStream::new(17)).unwrap();
    let a: &DenseMatrix = &sys.a;
    let profile = SpectralProfile::from_matrix(a).unwrap();
    let (omega, beta) = (1.0, 0.05);
    let k = momentum_constants(&profile, 2, omega, beta).unwrap();
    assert!(k.bound_applicable, "{k:?}");
    let pre = vs_preprocess_s2(&CsrMatrix::from_dense(a)).unwrap();
    let x0 = vec![0.0; 3];
    let e0: f64 = sys.x_star.iter().map(|v| v * v).sum();
    let trials = 2000;
    let checkpoints = [5u32, 10, 20];
    let mut sums = [0.0f64; 3];
    let mut sq = [0.0f64; 3];
    for t in 0..trials {
        let cfg = SolverConfig {
            seed: t,
            omega,
            beta,
            ..SolverConfig::new(Method::Mrbkvs)
        };
        let mut rng = RngStream::new(cfg.seed);
        let picker = picker_for(a, &cfg, Some(VsSource::Pairs(&pre)), &mut rng).unwrap();
        let mut it = KaczmarzIter::new(a, &sys.b, &x0, picker, rng)
            .unwrap()
            .with_momentum(omega, beta);
        for step in 1..=20u32 {
            it.step();
            if let Some(c) = checkpoints.iter().position(|&p| p == step) {
                let e: f64 = it.x().iter().zip(&sys.x_star).map(|(x, s)| (x - s).powi(2)).sum();
                sums[c] += e;
                sq[c] += e * e;
            }
        }
    }
    let n = trials as f64;
    for (c, &step) in checkpoints.iter().enumerate() {
        let mean = sums[c] / n;
        let se = ((sq[c] / n - mean * mean).max(0.0) / n).sqrt();
        let bound = k.bound_factor(step) * e0;
        assert!(mean - 3.0 * se <= bound, "k={step}: {mean} vs {bound}");
    }
}
