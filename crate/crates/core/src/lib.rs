//! Ascertainment bias in two-arm time-to-event trials: estimating the bias
//! from blinded interim category counts, projecting its effect on event
//! counts, the effective hazard ratio and log-rank power, and checking the
//! closed forms against an individual-level simulation.

// Validation is written as `!(x > 0.0)` so that NaN fails it.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bias;
pub mod error;
pub mod event_model;
pub mod heff_solver;
pub mod mc_oracle;
pub mod normal;
pub mod power;
pub mod sensitivity;
pub mod stride;

pub use bias::{estimate_bias, BiasEstimate, CategoryCounts, Estimate};
pub use error::{Error, Result};
pub use event_model::{
    expected_category_events, expected_events, hazards_from_rates, q_factor, CauseSpecificRates, HazardPair,
    StudyDesign,
};
pub use heff_solver::{solve_h_eff, HeffResult, Seed, SolverSettings};
pub use mc_oracle::{simulate, SimulationConfig, SimulationSummary};
pub use power::{
    project, schoenfeld_power, AdjudicationProfile, BiasParams, Confirmation, Definition, PowerProjection,
    ProjectionInputs, RevisedDefinition, SampleSizeInputs,
};
pub use sensitivity::{run_sweep, Axis, SweepMode, SweepParameter, SweepRow, SweepSpec};
