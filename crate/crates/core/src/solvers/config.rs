use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{svd_jacobi, DenseMatrix, RANK_TOL};

/// Default iteration budget.
pub const DEFAULT_MAX_ITERS: u64 = 200_000_000;
pub const DEFAULT_RSE_TOL: f64 = 1e-12;
pub const DEFAULT_HISTORY_STRIDE: u64 = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Single rows sampled by squared norm.
    Rk,
    /// Uniform blocks of a random partition.
    Rbk,
    /// Two distinct rows, each sampled by squared norm.
    Gtrk,
    /// Volume-sampled blocks.
    Rbkvs,
    /// Volume-sampled blocks with heavy-ball momentum.
    Mrbkvs,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Rk, Method::Rbk, Method::Gtrk, Method::Rbkvs, Method::Mrbkvs];

    pub fn name(self) -> &'static str {
        match self {
            Method::Rk => "rk",
            Method::Rbk => "rbk",
            Method::Gtrk => "gtrk",
            Method::Rbkvs => "rbkvs",
            Method::Mrbkvs => "mrbkvs",
        }
    }

    pub fn uses_volume_sampling(self) -> bool {
        matches!(self, Method::Rbkvs | Method::Mrbkvs)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown method {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub method: Method,
    /// Volume-sampled block size `s`.
    pub block_size: usize,
    /// Partition block size `p` for RBK.
    pub partition_block: usize,
    pub omega: f64,
    pub beta: f64,
    pub max_iters: u64,
    pub rse_tol: f64,
    pub seed: u64,
    pub history_stride: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: Method::Rbkvs,
            block_size: 2,
            partition_block: 2,
            omega: 1.0,
            beta: 0.0,
            max_iters: DEFAULT_MAX_ITERS,
            rse_tol: DEFAULT_RSE_TOL,
            seed: 0,
            history_stride: DEFAULT_HISTORY_STRIDE,
        }
    }
}

impl SolverConfig {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.method == Method::Mrbkvs && !(self.omega > 0.0 && self.omega < 2.0) {
            return Err(Error::invalid(format!("omega must lie in (0, 2), got {}", self.omega)));
        }
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return Err(Error::invalid(format!("beta must be nonnegative, got {}", self.beta)));
        }
        if !(self.rse_tol > 0.0) {
            return Err(Error::invalid(format!(
                "rse_tol must be positive, got {}",
                self.rse_tol
            )));
        }
        if self.block_size == 0 {
            return Err(Error::invalid("block size must be at least 1"));
        }
        if self.partition_block == 0 {
            return Err(Error::invalid("partition block size must be at least 1"));
        }
        if self.history_stride == 0 {
            return Err(Error::invalid("history stride must be at least 1"));
        }
        Ok(())
    }
}

/// Outcome of one solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub method: Method,
    pub iterations: u64,
    pub final_rse: f64,
    /// `(iteration, rse)` at every multiple of the history stride, then the
    /// final iterate.
    pub rse_history: Vec<(u64, f64)>,
    /// Seconds; left out of serialized output so records replay byte for byte.
    #[serde(skip)]
    pub wall_time: f64,
    pub converged: bool,
    pub seed_used: u64,
    /// Mean RSE over the last quarter of the history when the budget ran out.
    pub rse_floor_estimate: Option<f64>,
}

impl RunRecord {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    /// `iter,rse` lines with a header.
    pub fn history_csv(&self) -> String {
        let mut out = String::from("iter,rse\n");
        for (k, r) in &self.rse_history {
            out.push_str(&format!("{k},{r:e}\n"));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    KnownPlanted,
    Pseudoinverse,
    ConsensusMean,
}

/// The point errors are measured against.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSolution {
    pub x_star: Vec<f64>,
    pub provenance: Provenance,
}

impl ReferenceSolution {
    pub fn planted(x_star: Vec<f64>) -> Self {
        Self {
            x_star,
            provenance: Provenance::KnownPlanted,
        }
    }

    /// `A^† b + (I − A^† A) x0`, the limit of every method started at `x0`.
    pub fn pseudoinverse(a: &DenseMatrix, b: &[f64], x0: &[f64]) -> Result<Self> {
        if b.len() != a.rows() {
            return Err(Error::DimensionMismatch {
                expected: a.rows(),
                actual: b.len(),
            });
        }
        if x0.len() != a.cols() {
            return Err(Error::DimensionMismatch {
                expected: a.cols(),
                actual: x0.len(),
            });
        }
        let svd = svd_jacobi(a, RANK_TOL)?;
        let mut x = svd.pseudoinverse().matvec(b)?;
        let v = &svd.right_vectors;
        let coef = v.matvec_t(x0)?;
        let proj = v.matvec(&coef)?;
        for ((xi, &zi), &pi) in x.iter_mut().zip(x0).zip(&proj) {
            *xi += zi - pi;
        }
        Ok(Self {
            x_star: x,
            provenance: Provenance::Pseudoinverse,
        })
    }

    /// `c̄ · 1`, the projection of `c` onto the null space of a connected
    /// graph's incidence matrix.
    pub fn consensus_mean(c: &[f64]) -> Self {
        let mean = c.iter().sum::<f64>() / c.len() as f64;
        Self {
            x_star: vec![mean; c.len()],
            provenance: Provenance::ConsensusMean,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert_eq!("RBKVS".parse::<Method>().unwrap(), Method::Rbkvs);
        assert!("kaczmarz".parse::<Method>().is_err());
        assert_eq!(serde_json::to_string(&Method::Mrbkvs).unwrap(), "\"mrbkvs\"");
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        let mut c = SolverConfig::new(Method::Mrbkvs);
        c.omega = 2.0;
        assert!(c.validate().is_err());
        c.omega = 1.0;
        c.beta = -0.1;
        assert!(c.validate().is_err());
        c.beta = 0.4;
        c.rse_tol = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn config_rejects_unknown_keys() {
        assert!(serde_json::from_str::<SolverConfig>(r#"{"method":"rk","bogus":1}"#).is_err());
        let c: SolverConfig = serde_json::from_str(r#"{"method":"rk"}"#).unwrap();
        assert_eq!(c.max_iters, DEFAULT_MAX_ITERS);
    }

    #[test]
    fn pseudoinverse_reference_keeps_null_component() {
        // A = [1 0], x0 = (5, 7): limit is (b, 7)
        let a = DenseMatrix::from_rows(&[vec![1.0, 0.0]]).unwrap();
        let r = ReferenceSolution::pseudoinverse(&a, &[2.0], &[5.0, 7.0]).unwrap();
        assert!((r.x_star[0] - 2.0).abs() < 1e-15);
        assert!((r.x_star[1] - 7.0).abs() < 1e-15);
    }

    #[test]
    fn consensus_reference_is_constant() {
        let r = ReferenceSolution::consensus_mean(&[1.0, 2.0, 6.0]);
        assert_eq!(r.x_star, vec![3.0; 3]);
        assert_eq!(r.provenance, Provenance::ConsensusMean);
    }
}
