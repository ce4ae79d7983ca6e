//! Kaczmarz-type iterations behind one interface: norm-sampled rows (RK),
//! random-partition blocks (RBK), norm-sampled row pairs (GTRK),
//! volume-sampled blocks (RBKVS) and its heavy-ball variant (mRBKVS).

mod config;
mod engine;
mod run;

pub use config::{
    Method, Provenance, ReferenceSolution, RunRecord, SolverConfig, DEFAULT_HISTORY_STRIDE, DEFAULT_MAX_ITERS,
    DEFAULT_RSE_TOL,
};
pub use engine::{BlockPicker, KaczmarzIter, RowNormSampler, VsSource, PAIR_DEGENERACY};
pub use run::{
    drive, picker_for, solve_from, solve_gtrk, solve_mrbkvs, solve_rbk, solve_rbkvs, solve_rk, step_block_project,
    step_rk, SolveOutput,
};

#[cfg(test)]
mod tests;
