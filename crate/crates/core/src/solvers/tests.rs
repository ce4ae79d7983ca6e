use super::*;
use crate::matrix::{CsrMatrix, DenseMatrix, RowAccess};
use crate::sampling::{vs_preprocess_s2, RngStream, VsEnumerator};

fn consistent(m: usize, n: usize, seed: u64) -> (DenseMatrix, Vec<f64>, Vec<f64>) {
    let mut rng = RngStream::new(seed);
    let a = DenseMatrix::new(m, n, rng.gaussian_vec(m * n)).unwrap();
    let x = rng.gaussian_vec(n);
    let b = a.matvec(&x).unwrap();
    (a, x, b)
}

fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
}

#[test]
fn single_row_projection_lands_on_hyperplane() {
    let a = DenseMatrix::from_rows(&[vec![1.0, 0.0]]).unwrap();
    let sampler = RowNormSampler::new(&a.row_norms_sq()).unwrap();
    let mut x = vec![0.0, 0.0];
    step_rk(&a, &[1.0], &mut x, &sampler, &mut RngStream::new(0));
    assert_eq!(x, vec![1.0, 0.0]);
}

#[test]
fn rk_on_identity_hits_selected_coordinate() {
    let a = DenseMatrix::identity(2);
    let b = [2.0, 3.0];
    let sampler = RowNormSampler::new(&a.row_norms_sq()).unwrap();
    let mut x = vec![0.0, 0.0];
    let i = step_rk(&a, &b, &mut x, &sampler, &mut RngStream::new(9));
    assert_eq!(x[i], b[i]);
    assert_eq!(x[1 - i], 0.0);
}

#[test]
fn rk_steps_never_increase_error() {
    let (a, xs, b) = consistent(20, 5, 1);
    let sampler = RowNormSampler::new(&a.row_norms_sq()).unwrap();
    let mut rng = RngStream::new(2);
    let mut x = vec![0.0; 5];
    let mut prev = dist(&x, &xs);
    let floor = 1e-12 * prev;
    for _ in 0..1000 {
        step_rk(&a, &b, &mut x, &sampler, &mut rng);
        let d = dist(&x, &xs);
        assert!(d <= prev + floor);
        prev = d;
    }
}

#[test]
fn singleton_block_equals_row_projection() {
    let (a, _, b) = consistent(6, 3, 4);
    let mut x1 = vec![0.1, -0.4, 2.0];
    let mut x2 = x1.clone();
    step_block_project(&a, &b, &[3], &mut x1);
    let r = a.row_dot(3, &x2) - b[3];
    a.row_axpy(3, -r / a.row_norm_sq(3), &mut x2);
    assert_eq!(x1, x2);
}

#[test]
fn orthogonal_block_on_identity() {
    let a = DenseMatrix::identity(3);
    let mut x = vec![0.0; 3];
    step_block_project(&a, &[4.0, 5.0, 9.0], &[0, 1], &mut x);
    assert_eq!(x, vec![4.0, 5.0, 0.0]);
}

#[test]
fn random_pair_block_interpolates() {
    let (a, xs, b) = consistent(2, 6, 5);
    let mut x = vec![0.0; 6];
    step_block_project(&a, &b, &[0, 1], &mut x);
    for i in 0..2 {
        assert!((a.row_dot(i, &x) - b[i]).abs() < 1e-12);
    }
    assert!(dist(&x, &xs) <= dist(&[0.0; 6], &xs));
}

#[test]
fn start_at_solution_takes_no_steps() {
    let (a, xs, b) = consistent(10, 4, 6);
    let pre = vs_preprocess_s2(&CsrMatrix::from_dense(&a)).unwrap();
    let cfg = SolverConfig::default();
    let out = solve_from(
        &a,
        &b,
        &xs,
        &cfg,
        Some(VsSource::Pairs(&pre)),
        &ReferenceSolution::planted(xs.clone()),
    )
    .unwrap();
    assert_eq!(out.record.iterations, 0);
    assert_eq!(out.record.final_rse, 0.0);
    assert!(out.record.converged);
}

#[test]
fn every_method_converges_on_small_system() {
    let (a, xs, b) = consistent(30, 6, 7);
    let pre = vs_preprocess_s2(&CsrMatrix::from_dense(&a)).unwrap();
    let reference = ReferenceSolution::planted(xs);
    for method in Method::ALL {
        let mut cfg = SolverConfig::new(method);
        cfg.seed = 3;
        cfg.max_iters = 200_000;
        cfg.beta = if method == Method::Mrbkvs { 0.3 } else { 0.0 };
        let out = solve_from(&a, &b, &[0.0; 6], &cfg, Some(VsSource::Pairs(&pre)), &reference).unwrap();
        assert!(out.record.converged, "{method}");
        assert!(out.record.final_rse <= 1e-12);
        let hist = &out.record.rse_history;
        assert!(hist.windows(2).all(|w| w[0].0 < w[1].0));
        assert_eq!(hist.last().unwrap().1, out.record.final_rse);
    }
}

#[test]
fn momentum_off_matches_plain_run_bitwise() {
    let (a, xs, b) = consistent(25, 5, 8);
    let pre = vs_preprocess_s2(&CsrMatrix::from_dense(&a)).unwrap();
    let reference = ReferenceSolution::planted(xs);
    let mut cfg = SolverConfig::new(Method::Rbkvs);
    cfg.seed = 21;
    cfg.history_stride = 7;
    let plain = solve_from(&a, &b, &[0.0; 5], &cfg, Some(VsSource::Pairs(&pre)), &reference).unwrap();
    cfg.method = Method::Mrbkvs;
    let heavy = solve_from(&a, &b, &[0.0; 5], &cfg, Some(VsSource::Pairs(&pre)), &reference).unwrap();
    assert_eq!(plain.record.iterations, heavy.record.iterations);
    assert_eq!(plain.record.rse_history, heavy.record.rse_history);
    let bits = |v: &[f64]| v.iter().map(|f| f.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&plain.x), bits(&heavy.x));
}

#[test]
fn single_partition_block_solves_in_one_step() {
    let (a, xs, b) = consistent(5, 5, 10);
    let mut cfg = SolverConfig::new(Method::Rbk);
    cfg.partition_block = 5;
    let rec = solve_rbk(&a, &b, &cfg, &ReferenceSolution::planted(xs)).unwrap();
    assert!(rec.converged);
    assert_eq!(rec.iterations, 1);
}

#[test]
fn two_orthogonal_rows_solve_in_one_pair_step() {
    let a = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, -1.0]]).unwrap();
    let xs = vec![0.5, 2.0];
    let b = a.matvec(&xs).unwrap();
    let rec = solve_gtrk(
        &a,
        &b,
        &SolverConfig::new(Method::Gtrk),
        &ReferenceSolution::planted(xs),
    )
    .unwrap();
    assert_eq!(rec.iterations, 1);
}

#[test]
fn enumerated_sampler_solves_with_three_row_blocks() {
    let (a, xs, b) = consistent(8, 4, 12);
    let e = VsEnumerator::new(&a, 3).unwrap();
    let mut cfg = SolverConfig::new(Method::Rbkvs);
    cfg.block_size = 3;
    let rec = solve_rbkvs(&a, &b, &cfg, VsSource::Enumerated(&e), &ReferenceSolution::planted(xs)).unwrap();
    assert!(rec.converged);
}

#[test]
fn sampler_block_size_must_match() {
    let (a, xs, b) = consistent(8, 4, 13);
    let pre = vs_preprocess_s2(&CsrMatrix::from_dense(&a)).unwrap();
    let mut cfg = SolverConfig::new(Method::Rbkvs);
    cfg.block_size = 3;
    assert!(solve_rbkvs(&a, &b, &cfg, VsSource::Pairs(&pre), &ReferenceSolution::planted(xs)).is_err());
}

#[test]
fn budget_exhaustion_is_reported_not_raised() {
    let (a, xs, b) = consistent(40, 10, 14);
    let mut cfg = SolverConfig::new(Method::Rk);
    cfg.max_iters = 50;
    cfg.history_stride = 20;
    let rec = solve_rk(&a, &b, &cfg, &ReferenceSolution::planted(xs)).unwrap();
    assert!(!rec.converged);
    assert_eq!(rec.iterations, 50);
    assert_eq!(
        rec.rse_history.iter().map(|h| h.0).collect::<Vec<_>>(),
        vec![0, 20, 40, 50]
    );
    assert!(rec.rse_floor_estimate.is_some());
}

#[test]
fn overflowing_momentum_run_stops_early() {
    let (a, xs, b) = consistent(25, 5, 3);
    let pre = vs_preprocess_s2(&CsrMatrix::from_dense(&a)).unwrap();
    let mut cfg = SolverConfig::new(Method::Mrbkvs);
    cfg.beta = 1.5;
    cfg.max_iters = 1_000_000;
    let out = solve_from(
        &a,
        &b,
        &[0.0; 5],
        &cfg,
        Some(VsSource::Pairs(&pre)),
        &ReferenceSolution::planted(xs),
    )
    .unwrap();
    assert!(!out.record.converged);
    assert!(out.record.iterations < 10_000, "{}", out.record.iterations);
    assert!(!out.record.final_rse.is_finite());
}

#[test]
fn inconsistent_system_stalls_at_a_floor() {
    let (a, _, mut b) = consistent(30, 4, 15);
    b[0] += 1.0;
    let reference = ReferenceSolution::pseudoinverse(&a, &b, &[0.0; 4]).unwrap();
    let pre = vs_preprocess_s2(&CsrMatrix::from_dense(&a)).unwrap();
    let mut cfg = SolverConfig::new(Method::Rbkvs);
    cfg.max_iters = 20_000;
    let rec = solve_rbkvs(&a, &b, &cfg, VsSource::Pairs(&pre), &reference).unwrap();
    assert!(!rec.converged);
    assert!(rec.rse_floor_estimate.unwrap() < 1.0);
}

#[test]
fn sparse_and_dense_storage_agree() {
    let (a, xs, b) = consistent(15, 4, 16);
    let csr = CsrMatrix::from_dense(&a);
    let reference = ReferenceSolution::planted(xs);
    let cfg = SolverConfig::new(Method::Rk);
    let d = solve_rk(&a, &b, &cfg, &reference).unwrap();
    let s = solve_rk(&csr, &b, &cfg, &reference).unwrap();
    assert_eq!(d.iterations, s.iterations);
}

#[test]
fn record_json_omits_wall_time() {
    let (a, xs, b) = consistent(10, 3, 17);
    let rec = solve_rk(&a, &b, &SolverConfig::new(Method::Rk), &ReferenceSolution::planted(xs)).unwrap();
    let json = rec.to_json().unwrap();
    assert!(!json.contains("wall_time"));
    assert!(json.contains("\"method\":\"rk\""));
    assert!(rec.history_csv().starts_with("iter,rse\n0,"));
}
