//! Deterministic in-process network simulation.
//!
//! Nodes are plain values driven by an ordered event script; peers hand
//! chains to each other directly, with no sockets involved. The same seed
//! and script always produce the same final state.

mod convergence;
mod cost;
mod scenario;
mod sim;

pub use convergence::{convergence_test, equal_length_divergence, rounds_to_converge};
#[cfg(feature = "parallel")]
pub use cost::measure_linear_cost_parallel;
pub use cost::{
    cost_run, fit_line, measure_linear_cost, measure_linear_cost_sequential, CostConfig, CostRun,
    CostSummary, CostTable, LinearFit,
};
pub use scenario::{Event, Scenario, Topology};
pub use sim::{
    run_scenario, FixpointOutcome, Metrics, NodeSnapshot, ScriptError, SimNode, SimOutcome, Simulation,
};
