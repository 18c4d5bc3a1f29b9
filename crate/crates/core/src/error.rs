//! Error type shared across the crate.

use std::fmt;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors surfaced by planning, optimization and simulation routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A value expected to lie in [0, 1] does not.
    InvalidProbability { name: &'static str, value: f64 },
    /// Per-test error rates violate 0 <= alpha < 1, 0 <= beta < 1, alpha + beta < 1.
    InvalidErrorRates { alpha: f64, beta: f64 },
    /// Binomial count outside 0..=n.
    CountOutOfRange { k: u32, n: u32 },
    /// Observed batch-negative rate cannot be inverted: it must lie in (beta, 1 - alpha).
    RateNotInvertible { rate: f64, min: f64, max: f64 },
    /// The expected-test objective has no interior stationary point (q = 1 or q = 0).
    NoFiniteOptimum,
    /// Pooling cannot beat one test per person at this infection rate.
    BatchingNotBeneficial { tests_per_person: f64 },
    /// Plan cutoff must lie in (0, 1].
    InvalidCutoff { value: f64 },
    /// A strategy parameter is out of its valid range.
    InvalidStrategyParameter { reason: String },
    /// Pilot sample cannot fill a single batch.
    SampleTooSmall { sample: usize, batch_size: u32 },
    /// A derived accuracy measure has an empty denominator.
    UndefinedMeasure { name: &'static str },
    /// Experiment configuration is missing a required dimension.
    EmptyExperiment { what: &'static str },
    /// A repetition failed; carries the (strategy, rate, repetition) coordinate.
    Simulation {
        strategy: String,
        rate: f64,
        repetition: usize,
        source: Box<Error>,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidProbability { name, value } => {
                write!(f, "{name} = {value} is not a probability in [0, 1]")
            }
            Error::InvalidErrorRates { alpha, beta } => write!(
                f,
                "error rates alpha = {alpha}, beta = {beta} must satisfy \
                 0 <= alpha < 1, 0 <= beta < 1 and alpha + beta < 1"
            ),
            Error::CountOutOfRange { k, n } => {
                write!(f, "count k = {k} outside 0..={n}")
            }
            Error::RateNotInvertible { rate, min, max } => write!(
                f,
                "batch-negative rate {rate} outside invertible range ({min}, {max})"
            ),
            Error::NoFiniteOptimum => {
                write!(f, "no finite optimum: objective has no interior stationary point")
            }
            Error::BatchingNotBeneficial { tests_per_person } => write!(
                f,
                "batching not beneficial: best pooled plan needs {tests_per_person:.4} \
                 tests per person (>= 1)"
            ),
            Error::InvalidCutoff { value } => {
                write!(f, "cutoff {value} outside (0, 1]")
            }
            Error::InvalidStrategyParameter { reason } => {
                write!(f, "invalid strategy parameter: {reason}")
            }
            Error::SampleTooSmall { sample, batch_size } => write!(
                f,
                "pilot sample of {sample} cannot fill one batch of {batch_size}"
            ),
            Error::UndefinedMeasure { name } => {
                write!(f, "{name} undefined: empty denominator")
            }
            Error::EmptyExperiment { what } => {
                write!(f, "experiment needs at least one {what}")
            }
            Error::Simulation { strategy, rate, repetition, source } => write!(
                f,
                "strategy {strategy}, rate {rate}, repetition {repetition}: {source}"
            ),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Simulation { source, .. } => Some(source),
            _ => None,
        }
    }
}
