use std::fs;
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rbkvs::experiments::{
    plant_in_row_space, run_bench, solver_seed, BenchOptions, ConsensusProblem, ExperimentSpec, GraphSpec,
    SPECTRUM_DENSE_LIMIT,
};
use rbkvs::matrix::{read_matrix_market, read_vector, write_vector, CsrMatrix};
use rbkvs::sampling::{cache, vs_preprocess_s2, RngStream, VsEnumerator, VsPreprocS2};
use rbkvs::solvers::{solve_from, ReferenceSolution, RunRecord, SolverConfig, VsSource};
use rbkvs::spectral::oracles::check_budget;
use rbkvs::{Error, Result};
use serde_json::json;

use crate::args::{BenchArgs, ConsensusArgs, PreprocessArgs, SampleCheckArgs, SolveArgs, SolverArgs};
use crate::presets;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

fn resolve_seed(seed: Option<u64>) -> u64 {
    let seed = seed.unwrap_or_else(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_nanos() as u64)
            .unwrap_or(0)
    });
    eprintln!("seed: {seed}");
    seed
}

fn config_from(args: &SolverArgs, seed: u64) -> Result<SolverConfig> {
    let cfg = SolverConfig {
        method: args.method,
        block_size: args.block_size,
        partition_block: args.partition_block,
        omega: args.omega,
        beta: args.beta,
        max_iters: args.max_iters,
        rse_tol: args.tol,
        seed: solver_seed(seed),
        history_stride: args.history_stride,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn emit_record(record: &RunRecord) -> Result<i32> {
    println!("{}", record.to_json()?);
    eprintln!(
        "{}: {} iterations, final RSE {:.3e}, {:.3}s",
        record.method, record.iterations, record.final_rse, record.wall_time
    );
    Ok(if record.converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

enum Sampler {
    None,
    Pairs(VsPreprocS2),
    Enumerated(VsEnumerator),
}

impl Sampler {
    fn source(&self) -> Option<VsSource<'_>> {
        match self {
            Sampler::None => None,
            Sampler::Pairs(t) => Some(VsSource::Pairs(t)),
            Sampler::Enumerated(e) => Some(VsSource::Enumerated(e)),
        }
    }
}

fn pair_tables(a: &CsrMatrix, cache_dir: Option<&Path>) -> Result<VsPreprocS2> {
    let start = Instant::now();
    let tables = match cache_dir {
        Some(dir) => {
            let (t, hit) = cache::load_or_build(dir, a)?;
            eprintln!("pair tables: {}", if hit { "cache hit" } else { "built and cached" });
            t
        }
        None => vs_preprocess_s2(a)?,
    };
    eprintln!("preprocessing: {:.3}s", start.elapsed().as_secs_f64());
    Ok(tables)
}

fn sampler_for(a: &CsrMatrix, cfg: &SolverConfig, cache_dir: Option<&Path>) -> Result<Sampler> {
    if !cfg.method.uses_volume_sampling() {
        return Ok(Sampler::None);
    }
    if cfg.block_size == 2 {
        return Ok(Sampler::Pairs(pair_tables(a, cache_dir)?));
    }
    check_budget(a.rows(), cfg.block_size)?;
    Ok(Sampler::Enumerated(VsEnumerator::new(&a.to_dense(), cfg.block_size)?))
}

pub fn solve(args: &SolveArgs) -> Result<i32> {
    let seed = resolve_seed(args.solver.seed);
    let cfg = config_from(&args.solver, seed)?;
    let a = read_matrix_market(&args.matrix)?;
    a.ensure_no_zero_rows()?;
    let (b, reference) = match &args.rhs {
        None => {
            let (x_star, b) = plant_in_row_space(&a, &mut RngStream::new(seed));
            (b, ReferenceSolution::planted(x_star))
        }
        Some(path) => {
            let b = read_vector(path)?;
            if b.len() != a.rows() {
                return Err(Error::DimensionMismatch {
                    expected: a.rows(),
                    actual: b.len(),
                });
            }
            if a.rows() * a.cols() > SPECTRUM_DENSE_LIMIT {
                return Err(Error::invalid(format!(
                    "measuring the error against A^+ b needs a dense {}x{} factorization; use --planted for matrices this large",
                    a.rows(),
                    a.cols()
                )));
            }
            let reference = ReferenceSolution::pseudoinverse(&a.to_dense(), &b, &vec![0.0; a.cols()])?;
            (b, reference)
        }
    };
    let sampler = sampler_for(&a, &cfg, args.cache_dir.as_deref())?;
    let out = solve_from(&a, &b, &vec![0.0; a.cols()], &cfg, sampler.source(), &reference)?;
    if let Some(path) = &args.solution_out {
        write_vector(path, &out.x)?;
    }
    emit_record(&out.record)
}

fn load_spec(args: &BenchArgs) -> Result<ExperimentSpec> {
    match (&args.config, &args.preset) {
        (Some(path), _) => ExperimentSpec::load(path),
        (None, Some(name)) => {
            let text = presets::find(name).ok_or_else(|| {
                let names: Vec<&str> = presets::PRESETS.iter().map(|p| p.0).collect();
                Error::invalid(format!("unknown preset {name:?}; available: {}", names.join(", ")))
            })?;
            ExperimentSpec::from_json(text)
        }
        (None, None) => Err(Error::invalid("give an experiment file or --preset")),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn bench(args: &BenchArgs) -> Result<i32> {
    if args.list_presets {
        for (name, _) in presets::PRESETS {
            println!("{name}");
        }
        return Ok(EXIT_OK);
    }
    let mut spec = load_spec(args)?;
    if let Some(t) = args.trials {
        spec.trials = t;
    }
    spec.seed = resolve_seed(args.seed.or(Some(spec.seed)));
    let problems = spec.problems();
    if !problems.is_empty() {
        for p in &problems {
            eprintln!("config error: {p}");
        }
        return Ok(EXIT_INPUT);
    }
    let report = run_bench(
        &spec,
        &BenchOptions {
            jobs: args.jobs,
            timing: args.timing,
        },
    )?;
    fs::create_dir_all(&args.out_dir).map_err(|source| Error::Io {
        path: args.out_dir.clone(),
        source,
    })?;
    let csv = report.to_csv()?;
    write_file(&args.out_dir.join(format!("{}.csv", spec.name)), &csv)?;
    write_file(&args.out_dir.join(format!("{}.json", spec.name)), &report.to_json()?)?;
    print!("{csv}");
    for m in &report.methods {
        eprintln!(
            "{:<24} {:>3}/{} converged, mean iterations {:.4e}",
            m.label, m.converged_trials, m.trials, m.mean_iters
        );
    }
    if let Some(e) = &report.error {
        eprintln!("incomplete: {e}");
        return Ok(EXIT_INPUT);
    }
    let all_converged = report.methods.iter().all(|m| m.converged_trials == m.trials);
    Ok(if all_converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

pub fn consensus(args: &ConsensusArgs) -> Result<i32> {
    let seed = resolve_seed(args.solver.seed);
    let cfg = config_from(&args.solver, seed)?;
    let spec = GraphSpec {
        topology: args.graph,
        n_vertices: args.vertices,
    };
    let problem = ConsensusProblem::new(&spec)?;
    let c = match &args.values {
        Some(path) => read_vector(path)?,
        None => RngStream::new(seed).gaussian_vec(args.vertices),
    };
    let out = problem.run(&c, &cfg)?;
    emit_record(&out.record)
}

pub fn sample_check(args: &SampleCheckArgs) -> Result<i32> {
    let seed = resolve_seed(args.seed);
    let a = read_matrix_market(&args.matrix)?;
    if let Err(e) = check_budget(a.rows(), 2) {
        return Err(Error::invalid(format!(
            "{e}; exhaustive comparison is only feasible for small matrices, try a leading block of rows"
        )));
    }
    if args.draws == 0 {
        return Err(Error::invalid("--draws must be positive"));
    }
    let tables = vs_preprocess_s2(&a)?;
    let exact = VsEnumerator::new(&a.to_dense(), 2)?;
    let probs = exact.probabilities();
    let mut counts = vec![0usize; probs.len()];
    let mut rng = RngStream::new(seed);
    for _ in 0..args.draws {
        let (i, j) = tables.sample(&mut rng);
        let k = exact.position(&[i, j]).expect("sampled pair is a valid subset");
        counts[k] += 1;
    }
    let mut tv = 0.0;
    let mut max_dev = 0.0f64;
    let mut table_err = 0.0f64;
    let mut zero_mass_drawn = 0usize;
    for (k, set) in exact.subsets().iter().enumerate() {
        let emp = counts[k] as f64 / args.draws as f64;
        tv += (emp - probs[k]).abs();
        max_dev = max_dev.max((emp - probs[k]).abs());
        table_err = table_err.max((tables.pair_probability(set[0], set[1])? - probs[k]).abs());
        if probs[k] == 0.0 && counts[k] > 0 {
            zero_mass_drawn += 1;
        }
    }
    tv /= 2.0;
    let pass = tv < args.threshold && zero_mass_drawn == 0;
    let report = json!({
        "rows": a.rows(),
        "pairs": probs.len(),
        "draws": args.draws,
        "seed": seed,
        "tv_distance": tv,
        "threshold": args.threshold,
        "max_pair_deviation": max_dev,
        "max_table_error": table_err,
        "zero_mass_pairs_drawn": zero_mass_drawn,
        "pass": pass,
    });
    println!("{report}");
    eprintln!(
        "TV {tv:.5} (threshold {}): {}",
        args.threshold,
        if pass { "pass" } else { "FAIL" }
    );
    Ok(if pass { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

pub fn preprocess(args: &PreprocessArgs) -> Result<i32> {
    let a = read_matrix_market(&args.matrix)?;
    let start = Instant::now();
    let (tables, hit) = cache::load_or_build(&args.cache_dir, &a)?;
    eprintln!("{:.3}s", start.elapsed().as_secs_f64());
    let key = cache::content_hash(&a);
    let stats = tables.stats();
    let report = json!({
        "key": key,
        "path": cache::cache_path(&args.cache_dir, &key),
        "cache_hit": hit,
        "rows": a.rows(),
        "cols": a.cols(),
        "nnz": a.nnz(),
        "gram_nnz": stats.gram.t_size,
        "flops": stats.flops,
        "predicted_flops": stats.predicted_flops(),
    });
    println!("{report}");
    Ok(EXIT_OK)
}
