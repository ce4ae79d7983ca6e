//! Synthetic problem generators, consensus on graphs and the benchmark harness.

mod bench;
mod generators;
mod graph;

pub use bench::{
    method_label, run_bench, solver_seed, BenchOptions, BenchReport, ExperimentSpec, InstanceSpec, MethodSummary,
    CSV_HEADER, SPECTRUM_DENSE_LIMIT,
};
pub use generators::{gen_type1, gen_type2, plant_in_row_space, PlantedSystem, TypeIISpec, TypeISpec};
pub use graph::{gen_incidence, run_consensus, ConsensusProblem, GraphSpec, Topology};
