//! The user guide in `book/`, compiled so that `cargo test` runs every code
//! block in it. Each chapter is its own module to make failures easier to
//! place.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/quick-start.md")]
pub mod quick_start {}
#[doc = include_str!("../../../book/src/volume-sampling.md")]
pub mod volume_sampling {}
#[doc = include_str!("../../../book/src/convergence.md")]
pub mod convergence {}
#[doc = include_str!("../../../book/src/momentum.md")]
pub mod momentum {}
#[doc = include_str!("../../../book/src/consensus.md")]
pub mod consensus {}
#[doc = include_str!("../../../book/src/benchmarks.md")]
pub mod benchmarks {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
#[doc = include_str!("../../../README.md")]
pub mod readme {}
