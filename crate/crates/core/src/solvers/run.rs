use std::time::Instant;

use super::config::{Method, ReferenceSolution, RunRecord, SolverConfig};
use super::engine::{BlockPicker, BlockSolve, KaczmarzIter, RowNormSampler, VsSource};
use crate::error::{Error, Result};
use crate::matrix::RowAccess;
use crate::sampling::RngStream;

/// Final iterate together with its record.
#[derive(Clone, Debug)]
pub struct SolveOutput {
    pub record: RunRecord,
    pub x: Vec<f64>,
}

/// One step of norm-sampled row projection; returns the row used.
pub fn step_rk<M: RowAccess + ?Sized>(
    a: &M,
    b: &[f64],
    x: &mut [f64],
    sampler: &RowNormSampler,
    rng: &mut RngStream,
) -> usize {
    let i = sampler.sample(rng);
    let r = a.row_dot(i, x) - b[i];
    a.row_axpy(i, -r / a.row_norm_sq(i), x);
    i
}

/// `x ← x − A_S^†(A_S x − b_S)`.
pub fn step_block_project<M: RowAccess + ?Sized>(a: &M, b: &[f64], block: &[usize], x: &mut [f64]) {
    assert!(!block.is_empty(), "block must be nonempty");
    let norms: Vec<f64> = {
        let mut v = vec![0.0; a.nrows()];
        for &i in block {
            v[i] = a.row_norm_sq(i);
        }
        v
    };
    let mut bs = BlockSolve::default();
    bs.compute(a, b, &norms, block, x);
    bs.apply(a, block, -1.0, x);
}

fn dist_sq(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Runs an iteration until `RSE ≤ rse_tol` or `max_iters`.
///
/// Without momentum the squared error is updated in O(|S|²) per step from
/// the block solve and recomputed exactly every `max(n, 1024)` steps, at
/// every history point and whenever the running value nears the tolerance;
/// convergence is only declared on an exact value. A run whose error
/// overflows stops at once, unconverged.
pub fn drive<M: RowAccess + ?Sized>(
    mut it: KaczmarzIter<'_, M>,
    method: Method,
    b: &[f64],
    config: &SolverConfig,
    reference: &ReferenceSolution,
) -> Result<SolveOutput> {
    let start = Instant::now();
    let a_rows = b.len();
    let x_star = &reference.x_star;
    if x_star.len() != it.x().len() {
        return Err(Error::DimensionMismatch {
            expected: it.x().len(),
            actual: x_star.len(),
        });
    }
    let e0 = dist_sq(it.x(), x_star);
    let mut history = vec![(0, if e0 > 0.0 { 1.0 } else { 0.0 })];
    let finish = |it: KaczmarzIter<'_, M>, history: Vec<(u64, f64)>, converged: bool| {
        let final_rse = history.last().unwrap().1;
        let rse_floor_estimate = (!converged).then(|| {
            let tail = history.len().div_ceil(4);
            history[history.len() - tail..].iter().map(|h| h.1).sum::<f64>() / tail as f64
        });
        SolveOutput {
            record: RunRecord {
                method,
                iterations: it.iterations(),
                final_rse,
                rse_history: history,
                wall_time: start.elapsed().as_secs_f64(),
                converged,
                seed_used: config.seed,
                rse_floor_estimate,
            },
            x: it.x().to_vec(),
        }
    };
    if e0 == 0.0 {
        return Ok(finish(it, history, true));
    }

    let incremental = !it.has_momentum();
    let shift: Vec<f64> = if incremental {
        (0..a_rows).map(|i| b[i] - it.matrix().row_dot(i, x_star)).collect()
    } else {
        Vec::new()
    };
    let resync = (it.x().len() as u64).max(1024);
    let near = 2.0 * config.rse_tol * e0;
    let mut err = e0;
    let mut since_sync = 0u64;

    for k in 1..=config.max_iters {
        it.step();
        let exact = if incremental {
            err += it.last_solve().error_change(it.last_block(), &shift);
            since_sync += 1;
            if since_sync >= resync || err <= near || k % config.history_stride == 0 {
                err = dist_sq(it.x(), x_star);
                since_sync = 0;
                true
            } else {
                false
            }
        } else {
            err = dist_sq(it.x(), x_star);
            true
        };
        let rse = err / e0;
        if exact && (rse <= config.rse_tol || !rse.is_finite()) {
            history.push((k, rse));
            return Ok(finish(it, history, rse.is_finite()));
        }
        if k % config.history_stride == 0 {
            history.push((k, rse));
        }
    }
    let k = it.iterations();
    if history.last().unwrap().0 != k {
        history.push((k, dist_sq(it.x(), x_star) / e0));
    }
    Ok(finish(it, history, false))
}

fn zeros_like<M: RowAccess + ?Sized>(a: &M) -> Vec<f64> {
    vec![0.0; a.ncols()]
}

fn norms<M: RowAccess + ?Sized>(a: &M) -> Vec<f64> {
    (0..a.nrows()).map(|i| a.row_norm_sq(i)).collect()
}

/// Builds the selection rule for `config.method`; volume-sampled methods
/// need `vs`.
pub fn picker_for<'a, M: RowAccess + ?Sized>(
    a: &M,
    config: &SolverConfig,
    vs: Option<VsSource<'a>>,
    rng: &mut RngStream,
) -> Result<BlockPicker<'a>> {
    Ok(match config.method {
        Method::Rk => BlockPicker::Rk(RowNormSampler::new(&norms(a))?),
        Method::Gtrk => {
            if a.nrows() < 2 {
                return Err(Error::invalid("two-row sampling needs at least two rows"));
            }
            BlockPicker::Gtrk(RowNormSampler::new(&norms(a))?)
        }
        Method::Rbk => BlockPicker::Rbk(BlockPicker::random_partition(a.nrows(), config.partition_block, rng)),
        Method::Rbkvs | Method::Mrbkvs => {
            let src = vs.ok_or_else(|| Error::invalid("volume sampling needs preprocessed tables or an enumerator"))?;
            if src.block_size() != config.block_size {
                return Err(Error::invalid(format!(
                    "sampler draws blocks of {} rows but the configuration asks for {}",
                    src.block_size(),
                    config.block_size
                )));
            }
            BlockPicker::Volume(src)
        }
    })
}

/// Solves with the method named in `config`, starting from `x0`.
pub fn solve_from<M: RowAccess + ?Sized>(
    a: &M,
    b: &[f64],
    x0: &[f64],
    config: &SolverConfig,
    vs: Option<VsSource<'_>>,
    reference: &ReferenceSolution,
) -> Result<SolveOutput> {
    config.validate()?;
    let mut rng = RngStream::new(config.seed);
    let picker = picker_for(a, config, vs, &mut rng)?;
    let mut it = KaczmarzIter::new(a, b, x0, picker, rng)?;
    if config.method == Method::Mrbkvs {
        it = it.with_momentum(config.omega, config.beta);
    }
    drive(it, config.method, b, config, reference)
}

fn with_method(config: &SolverConfig, method: Method) -> SolverConfig {
    SolverConfig {
        method,
        ..config.clone()
    }
}

/// Volume-sampled block Kaczmarz from `x0 = 0`.
pub fn solve_rbkvs<M: RowAccess + ?Sized>(
    a: &M,
    b: &[f64],
    config: &SolverConfig,
    vs: VsSource<'_>,
    reference: &ReferenceSolution,
) -> Result<RunRecord> {
    let c = with_method(config, Method::Rbkvs);
    Ok(solve_from(a, b, &zeros_like(a), &c, Some(vs), reference)?.record)
}

/// Volume-sampled block Kaczmarz with heavy-ball momentum from `x0 = x1 = 0`.
pub fn solve_mrbkvs<M: RowAccess + ?Sized>(
    a: &M,
    b: &[f64],
    config: &SolverConfig,
    vs: VsSource<'_>,
    reference: &ReferenceSolution,
) -> Result<RunRecord> {
    let c = with_method(config, Method::Mrbkvs);
    Ok(solve_from(a, b, &zeros_like(a), &c, Some(vs), reference)?.record)
}

/// Random-partition block Kaczmarz from `x0 = 0`.
pub fn solve_rbk<M: RowAccess + ?Sized>(
    a: &M,
    b: &[f64],
    config: &SolverConfig,
    reference: &ReferenceSolution,
) -> Result<RunRecord> {
    let c = with_method(config, Method::Rbk);
    Ok(solve_from(a, b, &zeros_like(a), &c, None, reference)?.record)
}

/// Two-row norm-sampled block Kaczmarz from `x0 = 0`.
pub fn solve_gtrk<M: RowAccess + ?Sized>(
    a: &M,
    b: &[f64],
    config: &SolverConfig,
    reference: &ReferenceSolution,
) -> Result<RunRecord> {
    let c = with_method(config, Method::Gtrk);
    Ok(solve_from(a, b, &zeros_like(a), &c, None, reference)?.record)
}

/// Norm-sampled Kaczmarz from `x0 = 0`.
pub fn solve_rk<M: RowAccess + ?Sized>(
    a: &M,
    b: &[f64],
    config: &SolverConfig,
    reference: &ReferenceSolution,
) -> Result<RunRecord> {
    let c = with_method(config, Method::Rk);
    Ok(solve_from(a, b, &zeros_like(a), &c, None, reference)?.record)
}
