//! Randomized Kaczmarz solvers for consistent linear systems, built around
//! volume-sampled row blocks.
//!
//! A step picks a block `S` of rows with probability proportional to
//! `det(A_S A_Sᵀ)` and projects the iterate onto `{x : A_S x = b_S}`. For
//! blocks of two rows the sampler runs on the sparse Gram matrix
//! ([`sampling::vs_preprocess_s2`]); larger blocks are enumerated exactly.
//!
//! ```
//! use rbkvs::matrix::{CsrMatrix, DenseMatrix};
//! use rbkvs::sampling::vs_preprocess_s2;
//! use rbkvs::solvers::{solve_rbkvs, ReferenceSolution, SolverConfig, VsSource};
//!
//! let a = DenseMatrix::from_rows(&[
//!     vec![1.0, 0.0],
//!     vec![1.0, 1.0],
//!     vec![0.0, 2.0],
//! ])?;
//! let x_star = vec![1.0, -1.0];
//! let b = a.matvec(&x_star)?;
//! let tables = vs_preprocess_s2(&CsrMatrix::from_dense(&a))?;
//! let config = SolverConfig { rse_tol: 1e-12, seed: 3, ..SolverConfig::default() };
//! let run = solve_rbkvs(&a, &b, &config, VsSource::Pairs(&tables), &ReferenceSolution::planted(x_star))?;
//! assert!(run.converged);
//! # Ok::<(), rbkvs::Error>(())
//! ```
//!
//! - [`matrix`]: CSR and dense storage, Matrix Market I/O, SVD.
//! - [`sampling`]: seeded random streams and the volume samplers.
//! - [`solvers`]: the five iterations and their run records.
//! - [`spectral`]: convergence constants computed from the singular values.
//! - [`experiments`]: synthetic generators, consensus and the benchmark harness.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod experiments;
pub mod matrix;
pub mod sampling;
pub mod solvers;
pub mod spectral;

pub use error::{Error, Result};
