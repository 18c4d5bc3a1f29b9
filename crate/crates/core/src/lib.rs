//! Planning and simulation for multi-step pooled (batch) screening under
//! imperfect tests.
//!
//! The crate covers four layers:
//!
//! - [`prob`]: closed-form pooled-outcome probabilities and the branch
//!   updates that propagate infection rates through rounds of pooling.
//! - [`optimizer`]: expected-test minimization over the integer pool size.
//! - [`plan`]: the multi-round branching procedure (three same-sign results
//!   terminate a branch), its expected test counts and analytic accuracy.
//! - [`metrics`] / [`sim`] / [`experiment`]: diagnostic measures, the seeded
//!   Monte Carlo engine for six screening strategies, and deterministic
//!   experiment aggregation.

pub mod error;
pub mod experiment;
pub mod metrics;
pub mod optimizer;
pub mod plan;
pub mod prob;
pub mod sim;

pub use error::{Error, Result};
pub use experiment::{
    run_experiment, CellReport, ExperimentSpec, MeasureStats, PilotSpec, SimulationReport, Stats,
};
pub use metrics::{
    ppv_npv, single_batch_ppv_npv, single_batch_sensitivity, single_batch_specificity, summarize,
    AccuracyMeasures, ConfusionMatrix,
};
pub use optimizer::{
    expected_tests, optimal_batch_size, stationarity_residual, tests_per_person, ObjectiveSpec,
    OptimalBatch, MAX_BATCH_SIZE,
};
pub use plan::{
    build_plan, case_false_negative_rates, sequential_model, Plan, PlanNode, ProcedureAccuracy,
    SequentialTestModel, Terminal, TerminalMode, TestCounts, DEFAULT_RATE_CUTOFF,
};
pub use prob::{
    batch_outcome_probs, binom_pmf, invert_batch_negative_rate, p_batch_negative,
    p_batch_positive, subpop_after_negative, subpop_after_positive, BatchOutcomeProbs,
    BatchResult, ErrorModel, InfectionModel, RoundState, RoundTransition,
};
pub use sim::{
    estimate_pilot_rate, run_batch_test, run_strategy, run_strategy_with_rate, PilotEstimate,
    Population, Strategy, StrategyOutcome, TestTally,
};
