use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::CsrMatrix;
use crate::sampling::{vs_preprocess_s2, VsPreprocS2};
use crate::solvers::{solve_from, ReferenceSolution, SolveOutput, SolverConfig, VsSource};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    Line,
    Cycle,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub topology: Topology,
    pub n_vertices: usize,
}

impl GraphSpec {
    pub fn validate(&self) -> Result<()> {
        let min = match self.topology {
            Topology::Line => 2,
            Topology::Cycle => 3,
        };
        if self.n_vertices < min {
            return Err(Error::invalid(format!(
                "a {:?} graph needs at least {min} vertices, got {}",
                self.topology, self.n_vertices
            )));
        }
        Ok(())
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.n_vertices;
        let mut e: Vec<(usize, usize)> = (0..n - 1).map(|k| (k, k + 1)).collect();
        if self.topology == Topology::Cycle {
            e.push((0, n - 1));
        }
        e
    }
}

/// Signed incidence matrix: edge `(u, v)`, `u < v`, is the row `e_u − e_v`.
pub fn gen_incidence(spec: &GraphSpec) -> Result<CsrMatrix> {
    spec.validate()?;
    let edges = spec.edges();
    let triplets: Vec<(usize, usize, f64)> = edges
        .iter()
        .enumerate()
        .flat_map(|(k, &(u, v))| [(k, u, 1.0), (k, v, -1.0)])
        .collect();
    CsrMatrix::from_triplets(edges.len(), spec.n_vertices, &triplets)
}

/// Pair-sampling tables and incidence matrix for repeated consensus runs.
#[derive(Clone, Debug)]
pub struct ConsensusProblem {
    pub spec: GraphSpec,
    pub a: CsrMatrix,
    pub tables: VsPreprocS2,
}

impl ConsensusProblem {
    pub fn new(spec: &GraphSpec) -> Result<Self> {
        let a = gen_incidence(spec)?;
        let tables = vs_preprocess_s2(&a)?;
        Ok(Self {
            spec: spec.clone(),
            a,
            tables,
        })
    }

    /// Solves `A x = 0` from `x0 = c`; errors are measured against `c̄ · 1`.
    pub fn run(&self, c: &[f64], config: &SolverConfig) -> Result<SolveOutput> {
        if c.len() != self.spec.n_vertices {
            return Err(Error::DimensionMismatch {
                expected: self.spec.n_vertices,
                actual: c.len(),
            });
        }
        let zeros = vec![0.0; self.a.rows()];
        let reference = ReferenceSolution::consensus_mean(c);
        solve_from(
            &self.a,
            &zeros,
            c,
            config,
            Some(VsSource::Pairs(&self.tables)),
            &reference,
        )
    }
}

/// Average consensus on a line or cycle graph.
pub fn run_consensus(spec: &GraphSpec, c: &[f64], config: &SolverConfig) -> Result<SolveOutput> {
    ConsensusProblem::new(spec)?.run(c, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{svd_jacobi, RowAccess, RANK_TOL};
    use crate::sampling::RngStream;
    use crate::solvers::Method;

    #[test]
    fn line3_rows() {
        let a = gen_incidence(&GraphSpec {
            topology: Topology::Line,
            n_vertices: 3,
        })
        .unwrap();
        assert_eq!(a.to_dense().data(), &[1.0, -1.0, 0.0, 0.0, 1.0, -1.0]);
    }

    #[test]
    fn cycle3_rank_and_null_space() {
        let a = gen_incidence(&GraphSpec {
            topology: Topology::Cycle,
            n_vertices: 3,
        })
        .unwrap();
        assert_eq!(a.rows(), 3);
        let svd = svd_jacobi(&a.to_dense(), RANK_TOL).unwrap();
        assert_eq!(svd.rank(), 2);
        assert!(a.matvec(&[1.0; 3]).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn ones_in_null_space_and_two_entries_per_row() {
        for topology in [Topology::Line, Topology::Cycle] {
            for n in [3, 4, 17] {
                let a = gen_incidence(&GraphSpec {
                    topology,
                    n_vertices: n,
                })
                .unwrap();
                assert!(a.matvec(&vec![1.0; n]).unwrap().iter().all(|&v| v == 0.0));
                assert!((0..a.rows()).all(|i| a.row_len(i) == 2));
                let edges = if topology == Topology::Line { n - 1 } else { n };
                assert_eq!(a.rows(), edges);
            }
        }
    }

    #[test]
    fn size_limits() {
        assert!(gen_incidence(&GraphSpec {
            topology: Topology::Line,
            n_vertices: 1
        })
        .is_err());
        assert!(gen_incidence(&GraphSpec {
            topology: Topology::Cycle,
            n_vertices: 2
        })
        .is_err());
    }

    #[test]
    fn constant_start_needs_no_steps() {
        let spec = GraphSpec {
            topology: Topology::Cycle,
            n_vertices: 6,
        };
        let out = run_consensus(&spec, &[2.5; 6], &SolverConfig::new(Method::Rk)).unwrap();
        assert_eq!(out.record.iterations, 0);
    }

    #[test]
    fn line10_reaches_the_average() {
        let spec = GraphSpec {
            topology: Topology::Line,
            n_vertices: 10,
        };
        let c = RngStream::new(4).gaussian_vec(10);
        let mean = c.iter().sum::<f64>() / 10.0;
        let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        let problem = ConsensusProblem::new(&spec).unwrap();
        for method in Method::ALL {
            let mut cfg = SolverConfig::new(method);
            cfg.beta = if method == Method::Mrbkvs { 0.4 } else { 0.0 };
            let out = problem.run(&c, &cfg).unwrap();
            assert!(out.record.converged, "{method}");
            let worst = out.x.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
            assert!(worst <= 1e-5 * norm, "{method}: {worst}");
        }
    }
}
