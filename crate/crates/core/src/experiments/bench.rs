use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generators::{gen_type1, gen_type2, plant_in_row_space, TypeIISpec, TypeISpec};
use super::graph::{gen_incidence, GraphSpec};
use crate::error::{Error, Result};
use crate::matrix::{read_matrix_market, svd_jacobi, CsrMatrix, SystemMatrix, RANK_TOL};
use crate::sampling::{vs_preprocess_s2, RngStream, VsEnumerator, VsPreprocS2};
use crate::solvers::{solve_from, Method, ReferenceSolution, SolverConfig, VsSource};
use crate::spectral::oracles::check_budget;

/// Largest `m · n` for which a fixed matrix's spectrum is computed densely.
pub const SPECTRUM_DENSE_LIMIT: usize = 4_000_000;

const SOLVER_STREAM: u64 = 0x9E37_79B9_7F4A_7C15;

/// Sampling seed paired with an instance seed, so instance generation and
/// block selection never share a stream.
pub fn solver_seed(instance_seed: u64) -> u64 {
    instance_seed ^ SOLVER_STREAM
}

/// Problem family a benchmark draws from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InstanceSpec {
    #[serde(rename = "type1")]
    TypeI(TypeISpec),
    #[serde(rename = "type2")]
    TypeII(TypeIISpec),
    /// A fixed matrix with a fresh planted solution per trial.
    MatrixMarket { path: PathBuf },
    /// Average consensus from a fresh Gaussian start per trial.
    Graph(GraphSpec),
}

/// A benchmark: one instance family, several solver configurations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub instance: InstanceSpec,
    pub methods: Vec<SolverConfig>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_trials() -> usize {
    1
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    fn generated_shape(&self) -> Option<(usize, usize)> {
        match &self.instance {
            InstanceSpec::TypeI(t) => Some((t.m, t.r)),
            InstanceSpec::TypeII(t) => Some((t.m, t.r)),
            InstanceSpec::Graph(g) => Some((g.edges().len(), g.n_vertices - 1)),
            InstanceSpec::MatrixMarket { .. } => None,
        }
    }

    /// Every problem with the specification, found without running anything.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.trials == 0 {
            out.push("trials must be at least 1".to_string());
        }
        if self.methods.is_empty() {
            out.push("methods must list at least one solver".to_string());
        }
        let instance = match &self.instance {
            InstanceSpec::TypeI(t) => t.validate(),
            InstanceSpec::TypeII(t) => t.validate(),
            InstanceSpec::Graph(g) => g.validate(),
            InstanceSpec::MatrixMarket { path } => {
                if path.is_file() {
                    Ok(())
                } else {
                    Err(Error::invalid(format!("matrix file {} does not exist", path.display())))
                }
            }
        };
        let shape = match instance {
            Ok(()) => self.generated_shape(),
            Err(e) => {
                out.push(format!("instance: {e}"));
                None
            }
        };
        let mut labels = BTreeMap::new();
        for (k, cfg) in self.methods.iter().enumerate() {
            if let Err(e) = cfg.validate() {
                out.push(format!("methods[{k}]: {e}"));
            }
            let label = method_label(cfg);
            if let Some(prev) = labels.insert(label.clone(), k) {
                out.push(format!("methods[{k}] duplicates methods[{prev}] ({label})"));
            }
            if !cfg.method.uses_volume_sampling() {
                continue;
            }
            if let Some((m, rank)) = shape {
                if cfg.block_size > rank {
                    out.push(format!(
                        "methods[{k}]: block size {} exceeds the rank {rank}",
                        cfg.block_size
                    ));
                } else if cfg.block_size != 2 {
                    if let Err(e) = check_budget(m, cfg.block_size) {
                        out.push(format!("methods[{k}]: {e}"));
                    }
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.problems();
        if p.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(p.join("; ")))
        }
    }
}

/// Row label: the method name, plus the block size or momentum when they
/// distinguish configurations.
pub fn method_label(cfg: &SolverConfig) -> String {
    let mut label = cfg.method.name().to_string();
    if cfg.method.uses_volume_sampling() && cfg.block_size != 2 {
        label.push_str(&format!("-s{}", cfg.block_size));
    }
    if cfg.method == Method::Rbk && cfg.partition_block != 2 {
        label.push_str(&format!("-p{}", cfg.partition_block));
    }
    if cfg.method == Method::Mrbkvs {
        label.push_str(&format!("(w={},b={})", cfg.omega, cfg.beta));
    }
    label
}

#[derive(Clone, Debug, Default)]
pub struct BenchOptions {
    /// Worker threads; `None` uses rayon's default.
    pub jobs: Option<usize>,
    /// Report wall-clock columns.
    pub timing: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub label: String,
    pub method: Method,
    pub block_size: usize,
    pub trials: usize,
    pub converged_trials: usize,
    pub mean_iters: f64,
    pub std_iters: f64,
    pub mean_seconds: Option<f64>,
    /// Mean iterations of RK divided by this method's mean iterations.
    pub acc: Option<f64>,
    /// Observed speedup over RK as a percentage of `ρ_{A,s}/ρ_{A,1}`.
    pub ptt: Option<f64>,
    pub preproc_seconds: Option<f64>,
    pub iterations: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub name: String,
    pub seed: u64,
    pub trials_requested: usize,
    pub instance_seeds: Vec<u64>,
    pub methods: Vec<MethodSummary>,
    /// False when some trial failed; summaries then cover the others.
    pub complete: bool,
    pub error: Option<String>,
}

pub const CSV_HEADER: [&str; 8] = [
    "method",
    "trials",
    "mean_iters",
    "std_iters",
    "mean_seconds",
    "acc",
    "ptt",
    "preproc_seconds",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl BenchReport {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::invalid(format!("csv: {e}"));
        w.write_record(CSV_HEADER).map_err(io)?;
        for s in &self.methods {
            w.write_record([
                s.label.clone(),
                s.trials.to_string(),
                s.mean_iters.to_string(),
                s.std_iters.to_string(),
                opt(s.mean_seconds),
                opt(s.acc),
                opt(s.ptt),
                opt(s.preproc_seconds),
            ])
            .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::invalid(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn method(&self, label: &str) -> Option<&MethodSummary> {
        self.methods.iter().find(|m| m.label == label)
    }
}

enum Loaded {
    Generated,
    Fixed { a: CsrMatrix, lambda: Option<Vec<f64>> },
}

struct Realized {
    a: SystemMatrix,
    b: Vec<f64>,
    x0: Vec<f64>,
    reference: ReferenceSolution,
    /// Squared nonzero singular values, when known.
    lambda: Option<Vec<f64>>,
}

struct MethodRun {
    iterations: u64,
    converged: bool,
    seconds: f64,
}

struct Trial {
    runs: Vec<MethodRun>,
    preproc_seconds: BTreeMap<usize, f64>,
    /// `Σ_{i≥s} σ_i² / ‖A‖_F²` per block size, when the spectrum is known.
    tail_fraction: BTreeMap<usize, f64>,
}

fn squares(v: &[f64]) -> Vec<f64> {
    v.iter().map(|s| s * s).collect()
}

fn spectrum_of(a: &CsrMatrix) -> Result<Option<Vec<f64>>> {
    if a.rows() * a.cols() > SPECTRUM_DENSE_LIMIT {
        return Ok(None);
    }
    let svd = svd_jacobi(&a.to_dense(), RANK_TOL)?;
    Ok(Some(squares(&svd.singular_values)))
}

fn load(spec: &ExperimentSpec) -> Result<Loaded> {
    Ok(match &spec.instance {
        InstanceSpec::TypeI(_) | InstanceSpec::TypeII(_) => Loaded::Generated,
        InstanceSpec::MatrixMarket { path } => {
            let a = read_matrix_market(path)?;
            a.ensure_no_zero_rows()?;
            let lambda = if spec.methods.iter().any(|c| c.method == Method::Rbkvs) {
                spectrum_of(&a)?
            } else {
                None
            };
            Loaded::Fixed { a, lambda }
        }
        InstanceSpec::Graph(g) => {
            let a = gen_incidence(g)?;
            let lambda = spectrum_of(&a)?;
            Loaded::Fixed { a, lambda }
        }
    })
}

fn realize(spec: &ExperimentSpec, loaded: &Loaded, rng: &mut RngStream) -> Result<Realized> {
    let planted = |sys: super::generators::PlantedSystem| Realized {
        x0: vec![0.0; sys.a.cols()],
        lambda: Some(squares(&sys.singular_values)),
        reference: ReferenceSolution::planted(sys.x_star),
        b: sys.b,
        a: SystemMatrix::Dense(sys.a),
    };
    Ok(match (&spec.instance, loaded) {
        (InstanceSpec::TypeI(t), _) => planted(gen_type1(t, rng)?),
        (InstanceSpec::TypeII(t), _) => planted(gen_type2(t, rng)?),
        (InstanceSpec::Graph(_), Loaded::Fixed { a, lambda }) => {
            let c = rng.gaussian_vec(a.cols());
            Realized {
                b: vec![0.0; a.rows()],
                reference: ReferenceSolution::consensus_mean(&c),
                x0: c,
                a: SystemMatrix::Sparse(a.clone()),
                lambda: lambda.clone(),
            }
        }
        (InstanceSpec::MatrixMarket { .. }, Loaded::Fixed { a, lambda }) => {
            let (x_star, b) = plant_in_row_space(a, rng);
            Realized {
                b,
                reference: ReferenceSolution::planted(x_star),
                x0: vec![0.0; a.cols()],
                a: SystemMatrix::Sparse(a.clone()),
                lambda: lambda.clone(),
            }
        }
        _ => unreachable!("instance and loaded data disagree"),
    })
}

fn run_trial(spec: &ExperimentSpec, loaded: &Loaded, trial: usize) -> Result<Trial> {
    let trial_seed = spec.seed ^ trial as u64;
    let mut rng = RngStream::new(trial_seed);
    let inst = realize(spec, loaded, &mut rng)?;

    let mut pairs: Option<VsPreprocS2> = None;
    let mut enumerators: BTreeMap<usize, VsEnumerator> = BTreeMap::new();
    let mut preproc_seconds = BTreeMap::new();
    for cfg in spec.methods.iter().filter(|c| c.method.uses_volume_sampling()) {
        let s = cfg.block_size;
        if preproc_seconds.contains_key(&s) {
            continue;
        }
        let t = Instant::now();
        if s == 2 {
            pairs = Some(vs_preprocess_s2(&inst.a.to_csr())?);
        } else {
            enumerators.insert(s, VsEnumerator::new(&inst.a.to_dense(), s)?);
        }
        preproc_seconds.insert(s, t.elapsed().as_secs_f64());
    }

    let mut runs = Vec::with_capacity(spec.methods.len());
    for cfg in &spec.methods {
        let cfg = SolverConfig {
            seed: solver_seed(trial_seed),
            ..cfg.clone()
        };
        let vs = if !cfg.method.uses_volume_sampling() {
            None
        } else if cfg.block_size == 2 {
            pairs.as_ref().map(VsSource::Pairs)
        } else {
            enumerators.get(&cfg.block_size).map(VsSource::Enumerated)
        };
        let out = solve_from(&inst.a, &inst.b, &inst.x0, &cfg, vs, &inst.reference)?;
        runs.push(MethodRun {
            iterations: out.record.iterations,
            converged: out.record.converged,
            seconds: out.record.wall_time,
        });
    }

    let mut tail_fraction = BTreeMap::new();
    if let Some(lambda) = &inst.lambda {
        let total: f64 = lambda.iter().sum();
        let mut sorted = lambda.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        for cfg in &spec.methods {
            let s = cfg.block_size;
            if cfg.method == Method::Rbkvs && s <= sorted.len() {
                tail_fraction.insert(s, sorted[s - 1..].iter().sum::<f64>() / total);
            }
        }
    }
    Ok(Trial {
        runs,
        preproc_seconds,
        tail_fraction,
    })
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn summarize(spec: &ExperimentSpec, trials: &[Trial], timing: bool) -> Vec<MethodSummary> {
    let mut out: Vec<MethodSummary> = spec
        .methods
        .iter()
        .enumerate()
        .map(|(k, cfg)| {
            let runs: Vec<&MethodRun> = trials.iter().map(|t| &t.runs[k]).collect();
            let iters: Vec<f64> = runs.iter().map(|r| r.iterations as f64).collect();
            let (mean_iters, std_iters) = mean_std(&iters);
            let secs: Vec<f64> = runs.iter().map(|r| r.seconds).collect();
            let preproc: Vec<f64> = trials
                .iter()
                .filter_map(|t| t.preproc_seconds.get(&cfg.block_size).copied())
                .collect();
            let vs = cfg.method.uses_volume_sampling();
            MethodSummary {
                label: method_label(cfg),
                method: cfg.method,
                block_size: cfg.block_size,
                trials: runs.len(),
                converged_trials: runs.iter().filter(|r| r.converged).count(),
                mean_iters,
                std_iters,
                mean_seconds: timing.then(|| mean_std(&secs).0),
                acc: None,
                ptt: None,
                preproc_seconds: (timing && vs && !preproc.is_empty()).then(|| mean_std(&preproc).0),
                iterations: runs.iter().map(|r| r.iterations).collect(),
            }
        })
        .collect();

    let rk = out.iter().find(|s| s.method == Method::Rk).map(|s| s.mean_iters);
    if let Some(rk) = rk {
        for (k, s) in out.iter_mut().enumerate() {
            if s.mean_iters > 0.0 {
                s.acc = Some(rk / s.mean_iters);
            }
            if s.method != Method::Rbkvs {
                continue;
            }
            let fractions: Vec<f64> = trials
                .iter()
                .filter_map(|t| t.tail_fraction.get(&spec.methods[k].block_size).copied())
                .collect();
            if fractions.len() == trials.len() {
                if let Some(acc) = s.acc {
                    s.ptt = Some(acc * mean_std(&fractions).0 * 100.0);
                }
            }
        }
    }
    out
}

/// Runs every configured method on `trials` independent instances.
///
/// Trial `t` draws its instance from seed `seed ^ t`. Trials run in
/// parallel and are aggregated in trial order, so the report does not
/// depend on the thread count. A failing trial is excluded and flagged.
pub fn run_bench(spec: &ExperimentSpec, options: &BenchOptions) -> Result<BenchReport> {
    spec.validate()?;
    let loaded = load(spec)?;
    let work = || -> Vec<Result<Trial>> {
        (0..spec.trials)
            .into_par_iter()
            .map(|t| run_trial(spec, &loaded, t))
            .collect()
    };
    let results = match options.jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .map_err(|e| Error::invalid(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };

    let mut trials = Vec::new();
    let mut seeds = Vec::new();
    let mut error = None;
    for (t, r) in results.into_iter().enumerate() {
        match r {
            Ok(trial) => {
                trials.push(trial);
                seeds.push(spec.seed ^ t as u64);
            }
            Err(e) if error.is_none() => error = Some(format!("trial {t}: {e}")),
            Err(_) => {}
        }
    }
    if trials.is_empty() {
        return Err(Error::invalid(error.unwrap_or_else(|| "no trials ran".into())));
    }
    Ok(BenchReport {
        name: spec.name.clone(),
        seed: spec.seed,
        trials_requested: spec.trials,
        instance_seeds: seeds,
        methods: summarize(spec, &trials, options.timing),
        complete: error.is_none(),
        error,
    })
}
