//! Seeded Monte Carlo engine: synthetic populations, error-prone pooled and
//! individual test draws, and the six screening strategies compared in the
//! report tables.
//!
//! Every test consumed goes through [`run_batch_test`] or the individual-test
//! helpers, which increment a [`TestTally`]; reported counts are exactly
//! those tallies.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::ConfusionMatrix;
use crate::optimizer::{optimal_batch_size, ObjectiveSpec};
use crate::plan::{build_plan, Terminal, TerminalMode, DEFAULT_RATE_CUTOFF};
use crate::prob::{invert_batch_negative_rate, BatchResult, ErrorModel};

/// Planning rates are clamped into this range before pool-size optimization;
/// the endpoints have no finite optimum.
const PLANNING_RATE_MIN: f64 = 1e-6;
const PLANNING_RATE_MAX: f64 = 1.0 - 1e-6;

/// A synthetic population with independent Bernoulli infection marks.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    infected: Vec<bool>,
    true_rate: f64,
}

impl Population {
    /// Generate `size` people, each infected independently with probability
    /// `p`. Deterministic for a fixed seed.
    pub fn generate(size: usize, p: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidProbability { name: "infection rate", value: p });
        }
        let mut rng = <ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        let infected = (0..size).map(|_| rng.random::<f64>() < p).collect();
        Ok(Self { infected, true_rate: p })
    }

    pub fn len(&self) -> usize {
        self.infected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.infected.is_empty()
    }

    pub fn infected(&self, person: usize) -> bool {
        self.infected[person]
    }

    pub fn infected_count(&self) -> usize {
        self.infected.iter().filter(|i| **i).count()
    }

    pub fn true_rate(&self) -> f64 {
        self.true_rate
    }
}

/// Running count of consumed tests, split by kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TestTally {
    pub batch: u64,
    pub individual: u64,
}

impl TestTally {
    pub fn total(&self) -> u64 {
        self.batch + self.individual
    }
}

/// One screening policy with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Strategy {
    /// (A) one individual test per person.
    #[serde(rename = "A", alias = "individual")]
    Individual,
    /// (B) one round of fixed-size pools; members of positive pools get one
    /// individual test each.
    #[serde(rename = "B", alias = "fixed-batch")]
    FixedBatch {
        #[serde(default = "default_fixed_batch_size")]
        batch_size: u32,
    },
    /// (C) one round of optimally sized pools; members of positive pools get
    /// up to `sequential_cap` sequential individual tests.
    #[serde(rename = "C", alias = "optimal-batch")]
    OptimalBatchSeq {
        #[serde(default = "default_sequential_cap")]
        sequential_cap: u32,
    },
    /// (D) square-array pooling, `replicates` parallel passes over the same
    /// arrangement; people whose row pool and column pool are each positive
    /// in some pass get sequential individual tests.
    #[serde(rename = "D", alias = "matrix-pool")]
    MatrixPool {
        #[serde(default = "default_matrix_dim")]
        dim: u32,
        #[serde(default = "default_replicates")]
        replicates: u32,
        #[serde(default = "default_sequential_cap")]
        sequential_cap: u32,
    },
    /// (E) multi-round variable-size pooling; three-positive (or cutoff)
    /// subpopulations get one individual test per member.
    ///
    /// `reshuffle_each_round = false` keeps the single initial random
    /// assignment and re-chunks each subpopulation contiguously, which is the
    /// behaviour behind the published comparison tables (pool-mates persist
    /// across rounds). `true` re-randomizes pool membership every round.
    #[serde(rename = "E", alias = "multistep-single")]
    MultiStepSingle {
        #[serde(default)]
        rate_cutoff: Option<f64>,
        #[serde(default)]
        reshuffle_each_round: bool,
    },
    /// (F) as (E) with up to `sequential_cap` sequential individual tests.
    #[serde(rename = "F", alias = "multistep-seq")]
    MultiStepSeq {
        #[serde(default)]
        rate_cutoff: Option<f64>,
        #[serde(default = "default_sequential_cap")]
        sequential_cap: u32,
        #[serde(default)]
        reshuffle_each_round: bool,
    },
}

fn default_fixed_batch_size() -> u32 {
    10
}

fn default_sequential_cap() -> u32 {
    3
}

fn default_matrix_dim() -> u32 {
    12
}

fn default_replicates() -> u32 {
    3
}

impl Strategy {
    pub fn individual() -> Self {
        Strategy::Individual
    }

    pub fn fixed_batch() -> Self {
        Strategy::FixedBatch { batch_size: default_fixed_batch_size() }
    }

    pub fn optimal_batch() -> Self {
        Strategy::OptimalBatchSeq { sequential_cap: default_sequential_cap() }
    }

    pub fn matrix_pool() -> Self {
        Strategy::MatrixPool {
            dim: default_matrix_dim(),
            replicates: default_replicates(),
            sequential_cap: default_sequential_cap(),
        }
    }

    pub fn multi_step_single() -> Self {
        Strategy::MultiStepSingle { rate_cutoff: None, reshuffle_each_round: false }
    }

    pub fn multi_step_sequential() -> Self {
        Strategy::MultiStepSeq {
            rate_cutoff: None,
            sequential_cap: default_sequential_cap(),
            reshuffle_each_round: false,
        }
    }

    /// The six policies in table order A..F.
    pub fn paper_set() -> Vec<Strategy> {
        vec![
            Self::individual(),
            Self::fixed_batch(),
            Self::optimal_batch(),
            Self::matrix_pool(),
            Self::multi_step_single(),
            Self::multi_step_sequential(),
        ]
    }

    pub fn label(&self) -> &'static str {
        match self {
            Strategy::Individual => "A",
            Strategy::FixedBatch { .. } => "B",
            Strategy::OptimalBatchSeq { .. } => "C",
            Strategy::MatrixPool { .. } => "D",
            Strategy::MultiStepSingle { .. } => "E",
            Strategy::MultiStepSeq { .. } => "F",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        match label.trim() {
            "A" | "a" => Some(Self::individual()),
            "B" | "b" => Some(Self::fixed_batch()),
            "C" | "c" => Some(Self::optimal_batch()),
            "D" | "d" => Some(Self::matrix_pool()),
            "E" | "e" => Some(Self::multi_step_single()),
            "F" | "f" => Some(Self::multi_step_sequential()),
            _ => None,
        }
    }

    /// Whether pool sizes are derived from an infection-rate estimate.
    pub fn uses_planning_rate(&self) -> bool {
        matches!(
            self,
            Strategy::OptimalBatchSeq { .. }
                | Strategy::MultiStepSingle { .. }
                | Strategy::MultiStepSeq { .. }
        )
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |reason: String| Err(Error::InvalidStrategyParameter { reason });
        match *self {
            Strategy::Individual => Ok(()),
            Strategy::FixedBatch { batch_size } if batch_size < 2 => {
                fail(format!("fixed batch size {batch_size} must be at least 2"))
            }
            Strategy::OptimalBatchSeq { sequential_cap }
            | Strategy::MultiStepSeq { sequential_cap, .. }
                if sequential_cap < 1 =>
            {
                fail(format!("sequential cap {sequential_cap} must be at least 1"))
            }
            Strategy::MatrixPool { dim, replicates, sequential_cap } => {
                if dim < 2 {
                    fail(format!("matrix dimension {dim} must be at least 2"))
                } else if replicates < 1 {
                    fail("matrix pooling needs at least one replicate".to_string())
                } else if sequential_cap < 1 {
                    fail(format!("sequential cap {sequential_cap} must be at least 1"))
                } else {
                    Ok(())
                }
            }
            Strategy::MultiStepSingle { rate_cutoff: Some(c), .. }
            | Strategy::MultiStepSeq { rate_cutoff: Some(c), .. }
                if !(c > 0.0 && c <= 1.0) =>
            {
                fail(format!("rate cutoff {c} outside (0, 1]"))
            }
            _ => Ok(()),
        }
    }
}

/// Outcome of one strategy run over one population.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategyOutcome {
    pub confusion: ConfusionMatrix,
    pub tests: TestTally,
}

/// One pooled test over `members`: positive with probability `1 - beta` when
/// any member is infected, `alpha` otherwise. Consumes one test.
pub fn run_batch_test(
    pop: &Population,
    members: &[u32],
    err: ErrorModel,
    rng: &mut ChaCha8Rng,
    tally: &mut TestTally,
) -> BatchResult {
    debug_assert!(!members.is_empty());
    tally.batch += 1;
    let infected = members.iter().any(|&m| pop.infected(m as usize));
    let p_positive = if infected { 1.0 - err.beta() } else { err.alpha() };
    if rng.random::<f64>() < p_positive {
        BatchResult::Positive
    } else {
        BatchResult::Negative
    }
}

/// One individual test; returns whether it came back positive.
fn individual_test(
    infected: bool,
    err: ErrorModel,
    rng: &mut ChaCha8Rng,
    tally: &mut TestTally,
) -> bool {
    tally.individual += 1;
    let p_positive = if infected { 1.0 - err.beta() } else { err.alpha() };
    rng.random::<f64>() < p_positive
}

/// Up to `cap` sequential individual tests, stopping at the first positive.
/// Returns whether the person is concluded positive.
fn sequential_tests(
    infected: bool,
    cap: u32,
    err: ErrorModel,
    rng: &mut ChaCha8Rng,
    tally: &mut TestTally,
) -> bool {
    for _ in 0..cap {
        if individual_test(infected, err, rng, tally) {
            return true;
        }
    }
    false
}

fn shuffled_members(pop: &Population, rng: &mut ChaCha8Rng) -> Vec<u32> {
    let mut members: Vec<u32> = (0..pop.len() as u32).collect();
    members.shuffle(rng);
    members
}

fn confusion(pop: &Population, positive: &[bool]) -> ConfusionMatrix {
    let mut cm = ConfusionMatrix::default();
    for (person, flagged) in positive.iter().enumerate() {
        match (pop.infected(person), *flagged) {
            (true, true) => cm.true_positive += 1.0,
            (true, false) => cm.false_negative += 1.0,
            (false, true) => cm.false_positive += 1.0,
            (false, false) => cm.true_negative += 1.0,
        }
    }
    cm
}

/// Run `strategy` over `pop`, planning pool sizes from the population's true
/// generation rate. See [`run_strategy_with_rate`] to plan from an estimate.
pub fn run_strategy(
    pop: &Population,
    strategy: &Strategy,
    err: ErrorModel,
    rng: &mut ChaCha8Rng,
) -> Result<StrategyOutcome> {
    run_strategy_with_rate(pop, strategy, err, pop.true_rate(), DEFAULT_RATE_CUTOFF, rng)
}

/// Run `strategy` with pool sizes planned from `planning_rate` (which may be
/// a pilot estimate). `default_cutoff` applies to multi-step strategies that
/// do not carry their own cutoff.
pub fn run_strategy_with_rate(
    pop: &Population,
    strategy: &Strategy,
    err: ErrorModel,
    planning_rate: f64,
    default_cutoff: f64,
    rng: &mut ChaCha8Rng,
) -> Result<StrategyOutcome> {
    strategy.validate()?;
    let planning = planning_rate.clamp(PLANNING_RATE_MIN, PLANNING_RATE_MAX);
    let mut tally = TestTally::default();
    let mut positive = vec![false; pop.len()];

    match *strategy {
        Strategy::Individual => {
            for person in 0..pop.len() {
                positive[person] = individual_test(pop.infected(person), err, rng, &mut tally);
            }
        }
        Strategy::FixedBatch { batch_size } => {
            let members = shuffled_members(pop, rng);
            for chunk in members.chunks(batch_size as usize) {
                if run_batch_test(pop, chunk, err, rng, &mut tally) == BatchResult::Positive {
                    for &m in chunk {
                        positive[m as usize] =
                            individual_test(pop.infected(m as usize), err, rng, &mut tally);
                    }
                }
            }
        }
        Strategy::OptimalBatchSeq { sequential_cap } => {
            let size = planned_batch_size(planning, err)?;
            let members = shuffled_members(pop, rng);
            for chunk in members.chunks(size as usize) {
                if run_batch_test(pop, chunk, err, rng, &mut tally) == BatchResult::Positive {
                    for &m in chunk {
                        positive[m as usize] = sequential_tests(
                            pop.infected(m as usize),
                            sequential_cap,
                            err,
                            rng,
                            &mut tally,
                        );
                    }
                }
            }
        }
        Strategy::MatrixPool { dim, replicates, sequential_cap } => {
            run_matrix_pool(pop, dim, replicates, sequential_cap, err, rng, &mut tally, &mut positive);
        }
        Strategy::MultiStepSingle { rate_cutoff, reshuffle_each_round } => {
            let cutoff = rate_cutoff.unwrap_or(default_cutoff);
            run_multi_step(
                pop,
                planning,
                cutoff,
                TerminalMode::SingleTest,
                1,
                reshuffle_each_round,
                err,
                rng,
                &mut tally,
                &mut positive,
            )?;
        }
        Strategy::MultiStepSeq { rate_cutoff, sequential_cap, reshuffle_each_round } => {
            let cutoff = rate_cutoff.unwrap_or(default_cutoff);
            run_multi_step(
                pop,
                planning,
                cutoff,
                TerminalMode::SequentialTriple,
                sequential_cap,
                reshuffle_each_round,
                err,
                rng,
                &mut tally,
                &mut positive,
            )?;
        }
    }

    Ok(StrategyOutcome { confusion: confusion(pop, &positive), tests: tally })
}

/// Pool size for single-round optimal pooling. The strategy stays a pooled
/// one even at rates where pooling cannot beat individual testing, so the
/// interior optimum applies unconditionally.
fn planned_batch_size(planning_rate: f64, err: ErrorModel) -> Result<u32> {
    match optimal_batch_size(&ObjectiveSpec::per_person(planning_rate, err)?) {
        Ok(best) => Ok(best.size),
        Err(Error::BatchingNotBeneficial { .. }) => {
            Ok(crate::optimizer::interior_optimum(planning_rate, err).size)
        }
        Err(e) => Err(e),
    }
}

#[allow(clippy::too_many_arguments)]
fn run_matrix_pool(
    pop: &Population,
    dim: u32,
    replicates: u32,
    sequential_cap: u32,
    err: ErrorModel,
    rng: &mut ChaCha8Rng,
    tally: &mut TestTally,
    positive: &mut [bool],
) {
    let dim = dim as usize;
    let members = shuffled_members(pop, rng);

    for grid in members.chunks(dim * dim) {
        // Full chunks form dim x dim squares; the remainder forms the
        // smallest square that holds it, filled row-major.
        let side = if grid.len() == dim * dim {
            dim
        } else {
            (grid.len() as f64).sqrt().ceil() as usize
        };
        let rows = grid.len().div_ceil(side);
        let row_members = |r: usize| &grid[r * side..((r + 1) * side).min(grid.len())];
        let columns: Vec<Vec<u32>> = (0..side)
            .map(|c| (0..rows).filter_map(|r| grid.get(r * side + c)).copied().collect())
            .collect();

        let mut row_hit = vec![false; rows];
        let mut col_hit = vec![false; side];
        for _ in 0..replicates {
            for (r, hit) in row_hit.iter_mut().enumerate() {
                if run_batch_test(pop, row_members(r), err, rng, tally) == BatchResult::Positive {
                    *hit = true;
                }
            }
            for (col, hit) in columns.iter().zip(col_hit.iter_mut()) {
                if col.is_empty() {
                    continue;
                }
                if run_batch_test(pop, col, err, rng, tally) == BatchResult::Positive {
                    *hit = true;
                }
            }
        }

        for (offset, &person) in grid.iter().enumerate() {
            if row_hit[offset / side] && col_hit[offset % side] {
                positive[person as usize] = sequential_tests(
                    pop.infected(person as usize),
                    sequential_cap,
                    err,
                    rng,
                    tally,
                );
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn run_multi_step(
    pop: &Population,
    planning_rate: f64,
    rate_cutoff: f64,
    mode: TerminalMode,
    sequential_cap: u32,
    reshuffle_each_round: bool,
    err: ErrorModel,
    rng: &mut ChaCha8Rng,
    tally: &mut TestTally,
    positive: &mut [bool],
) -> Result<()> {
    let plan = build_plan(planning_rate, pop.len() as f64, err, rate_cutoff)?;

    let resolve = |members: &[u32],
                       rng: &mut ChaCha8Rng,
                       tally: &mut TestTally,
                       positive: &mut [bool]| {
        for &m in members {
            let infected = pop.infected(m as usize);
            positive[m as usize] = match mode {
                TerminalMode::SingleTest => individual_test(infected, err, rng, tally),
                TerminalMode::SequentialTriple => {
                    sequential_tests(infected, sequential_cap, err, rng, tally)
                }
            };
        }
    };

    // Round 1 always gets a random assignment; later rounds re-randomize
    // only when configured, otherwise pools are contiguous runs of the
    // incoming order (so pool-mates persist through the branches).
    let mut stack: Vec<(usize, Vec<u32>)> = vec![(0, shuffled_members(pop, rng))];
    while let Some((id, mut members)) = stack.pop() {
        if members.is_empty() {
            continue;
        }
        let node = plan.node(id);
        match node.terminal {
            Some(Terminal::Cleared) => {}
            Some(Terminal::Individual(_)) => resolve(&members, rng, tally, positive),
            None => {
                if reshuffle_each_round && node.round > 1 {
                    members.shuffle(rng);
                }
                let size = node.batch_size.expect("non-terminal node") as usize;
                let mut split: [Vec<u32>; 2] = [Vec::new(), Vec::new()];
                for chunk in members.chunks(size) {
                    let result = run_batch_test(pop, chunk, err, rng, tally);
                    split[(result == BatchResult::Positive) as usize].extend_from_slice(chunk);
                }
                let [negatives, positives] = split;
                for (child, branch_members) in
                    [(node.negative, negatives), (node.positive, positives)]
                {
                    match child {
                        Some(child_id) => stack.push((child_id, branch_members)),
                        // Realized members of a branch the plan pruned as
                        // empty-in-expectation: resolve them individually.
                        None => resolve(&branch_members, rng, tally, positive),
                    }
                }
            }
        }
    }
    Ok(())
}

/// Pilot infection-rate estimate and the pooled tests it consumed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PilotEstimate {
    pub rate: f64,
    pub batch_tests: u64,
}

/// Estimated rate cap; inverted estimates above this are clamped.
pub const PILOT_RATE_MAX: f64 = 0.5;

/// Estimate the infection rate by pooling `sample` at `batch_size` and
/// inverting the observed batch-negative fraction. Only whole batches count;
/// the fraction is clamped into the invertible range before inversion and the
/// estimate capped at [`PILOT_RATE_MAX`].
pub fn estimate_pilot_rate(
    pop: &Population,
    sample: &[u32],
    batch_size: u32,
    err: ErrorModel,
    rng: &mut ChaCha8Rng,
) -> Result<PilotEstimate> {
    if batch_size == 0 || sample.len() < batch_size as usize {
        return Err(Error::SampleTooSmall { sample: sample.len(), batch_size });
    }
    let mut tally = TestTally::default();
    let mut negatives = 0u64;
    let mut batches = 0u64;
    for chunk in sample.chunks_exact(batch_size as usize) {
        batches += 1;
        if run_batch_test(pop, chunk, err, rng, &mut tally) == BatchResult::Negative {
            negatives += 1;
        }
    }
    let eps = 1e-9;
    let observed = (negatives as f64 / batches as f64)
        .clamp(err.beta() + eps, 1.0 - err.alpha() - eps);
    let q = invert_batch_negative_rate(observed, batch_size, err)?;
    Ok(PilotEstimate { rate: (1.0 - q).min(PILOT_RATE_MAX), batch_tests: tally.batch })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn err_paper() -> ErrorModel {
        ErrorModel::new(0.01, 0.15).unwrap()
    }

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn population_generation_basics() {
        let empty = Population::generate(100_000, 0.0, 7).unwrap();
        assert_eq!(empty.infected_count(), 0);

        let a = Population::generate(100_000, 0.01, 42).unwrap();
        let b = Population::generate(100_000, 0.01, 42).unwrap();
        assert_eq!(a, b);

        // binomial oracle: mean 1000, 3 sigma ~ 94
        let count = a.infected_count() as f64;
        assert!((count - 1000.0).abs() < 3.0 * (100_000.0 * 0.01 * 0.99_f64).sqrt());

        assert!(Population::generate(10, 1.5, 0).is_err());
    }

    #[test]
    fn batch_test_trivial_outcomes() {
        let pop = Population::generate(100, 0.0, 1).unwrap();
        let err = ErrorModel::new(0.0, 0.15).unwrap();
        let members: Vec<u32> = (0..10).collect();
        let mut tally = TestTally::default();
        let mut r = rng(3);
        for _ in 0..1000 {
            assert_eq!(
                run_batch_test(&pop, &members, err, &mut r, &mut tally),
                BatchResult::Negative
            );
        }
        assert_eq!(tally.batch, 1000);
    }

    #[test]
    fn batch_test_positive_frequency_matches_beta() {
        // one infected member; positive frequency ~ 1 - beta over 10^6 draws
        let pop = Population::generate(10, 1.0, 1).unwrap();
        let members: Vec<u32> = (0..10).collect();
        let mut tally = TestTally::default();
        let mut r = rng(11);
        let trials = 1_000_000;
        let mut hits = 0u64;
        for _ in 0..trials {
            if run_batch_test(&pop, &members, err_paper(), &mut r, &mut tally)
                == BatchResult::Positive
            {
                hits += 1;
            }
        }
        let freq = hits as f64 / trials as f64;
        let sigma = (0.85 * 0.15 / trials as f64).sqrt();
        assert!((freq - 0.85).abs() < 4.0 * sigma, "freq {freq}");
    }

    #[test]
    fn empirical_batch_negative_rate_matches_closed_form() {
        // pools of 12 at p = .01: negative fraction ~ .894563
        let pop = Population::generate(120_000, 0.01, 99).unwrap();
        let members = shuffled_members(&pop, &mut rng(5));
        let mut tally = TestTally::default();
        let mut r = rng(6);
        let mut negatives = 0u64;
        let mut batches = 0u64;
        for chunk in members.chunks_exact(12) {
            batches += 1;
            if run_batch_test(&pop, chunk, err_paper(), &mut r, &mut tally)
                == BatchResult::Negative
            {
                negatives += 1;
            }
        }
        let rate = negatives as f64 / batches as f64;
        // two noise sources: batch-level binomial draw and the realized
        // prevalence of the generated population (which shifts q^12)
        let batch_sigma = (0.894563_f64 * (1.0 - 0.894563) / batches as f64).sqrt();
        let prevalence_sigma =
            0.84 * 12.0 * 0.99_f64.powi(11) * (0.01 * 0.99 / 120_000.0_f64).sqrt();
        let sigma = (batch_sigma.powi(2) + prevalence_sigma.powi(2)).sqrt();
        assert!((rate - 0.894563).abs() < 3.0 * sigma, "rate {rate}");
    }

    #[test]
    fn strategy_validation_errors() {
        assert!(Strategy::FixedBatch { batch_size: 1 }.validate().is_err());
        assert!(Strategy::MatrixPool { dim: 1, replicates: 3, sequential_cap: 3 }
            .validate()
            .is_err());
        assert!(Strategy::MatrixPool { dim: 12, replicates: 0, sequential_cap: 3 }
            .validate()
            .is_err());
        assert!(Strategy::MultiStepSeq {
            rate_cutoff: Some(0.0),
            sequential_cap: 3,
            reshuffle_each_round: false,
        }
            .validate()
            .is_err());
        for s in Strategy::paper_set() {
            assert!(s.validate().is_ok());
        }
    }

    #[test]
    fn individual_testing_matches_error_rates() {
        // strategy A recovers (1 - beta, 1 - alpha) within 3 sigma
        let pop = Population::generate(100_000, 0.05, 17).unwrap();
        let outcome =
            run_strategy(&pop, &Strategy::individual(), err_paper(), &mut rng(18)).unwrap();
        assert_eq!(outcome.tests.individual, 100_000);
        assert_eq!(outcome.tests.batch, 0);

        let infected = pop.infected_count() as f64;
        let clean = 100_000.0 - infected;
        let se = outcome.confusion.sensitivity().unwrap();
        let sp = outcome.confusion.specificity().unwrap();
        assert!((se - 0.85).abs() < 3.0 * (0.85 * 0.15 / infected).sqrt(), "se {se}");
        assert!((sp - 0.99).abs() < 3.0 * (0.99 * 0.01 / clean).sqrt(), "sp {sp}");
    }

    #[test]
    fn fixed_batch_counts_and_conclusions() {
        let pop = Population::generate(100_000, 0.001, 23).unwrap();
        let outcome =
            run_strategy(&pop, &Strategy::fixed_batch(), err_paper(), &mut rng(24)).unwrap();
        assert_eq!(outcome.tests.batch, 10_000);
        // individual tests are exactly 10 per positive batch
        assert_eq!(outcome.tests.individual % 10, 0);
        assert_eq!(outcome.confusion.total(), 100_000.0);
    }

    #[test]
    fn zero_rate_population_concludes_nobody_with_perfect_specificity() {
        let pop = Population::generate(20_000, 0.0, 31).unwrap();
        let err = ErrorModel::new(0.0, 0.15).unwrap();
        for strategy in Strategy::paper_set() {
            let outcome = run_strategy(&pop, &strategy, err, &mut rng(32)).unwrap();
            assert_eq!(
                outcome.confusion.false_positive, 0.0,
                "strategy {} flagged clean people",
                strategy.label()
            );
            assert_eq!(outcome.confusion.specificity(), Some(1.0));
        }
    }

    #[test]
    fn matrix_pool_test_counts_per_replicate() {
        // 694 full 12x12 squares (24 pools each) plus an 8x8 remainder (16
        // pools): 16,672 pooled tests per replicate at N = 100,000.
        let pop = Population::generate(100_000, 0.0, 41).unwrap();
        let err = ErrorModel::new(0.0, 0.0).unwrap();
        let strategy = Strategy::MatrixPool { dim: 12, replicates: 1, sequential_cap: 3 };
        let outcome = run_strategy(&pop, &strategy, err, &mut rng(42)).unwrap();
        assert_eq!(outcome.tests.batch, 694 * 24 + 16);

        let three = Strategy::matrix_pool();
        let outcome = run_strategy(&pop, &three, err, &mut rng(43)).unwrap();
        assert_eq!(outcome.tests.batch, 3 * (694 * 24 + 16));
        assert_eq!(outcome.tests.batch, 50_016);
    }

    #[test]
    fn multi_step_batch_counts_near_plan_expectation() {
        let pop = Population::generate(100_000, 0.001, 51).unwrap();
        let outcome =
            run_strategy(&pop, &Strategy::multi_step_single(), err_paper(), &mut rng(52))
                .unwrap();
        // analytic expectation is 5,696 pooled tests; each realized infected
        // person above/below the expected 100 swings the count by roughly 8
        // pooled tests, so a single repetition carries sigma ~ 80
        assert!(
            (outcome.tests.batch as f64 - 5696.0).abs() < 250.0,
            "batch tests {}",
            outcome.tests.batch
        );
        assert_eq!(outcome.confusion.total(), 100_000.0);
    }

    #[test]
    fn sequential_cap_is_respected() {
        // cap 1 makes F's terminal testing identical in cost to E's
        let pop = Population::generate(50_000, 0.01, 61).unwrap();
        let single =
            run_strategy(&pop, &Strategy::multi_step_single(), err_paper(), &mut rng(62))
                .unwrap();
        let capped = run_strategy(
            &pop,
            &Strategy::MultiStepSeq {
                rate_cutoff: None,
                sequential_cap: 1,
                reshuffle_each_round: false,
            },
            err_paper(),
            &mut rng(62),
        )
        .unwrap();
        assert_eq!(single.tests, capped.tests);
        assert_eq!(single.confusion, capped.confusion);
    }

    #[test]
    fn pilot_estimate_noiseless_inversion() {
        // all-clean sample with alpha = 0 pins the observed fraction at the
        // clamp boundary; a mixed sample recovers the rate
        let pop = Population::generate(10_000, 0.01, 71).unwrap();
        let members: Vec<u32> = (0..10_000).collect();
        let est = estimate_pilot_rate(&pop, &members, 12, err_paper(), &mut rng(72)).unwrap();
        assert!((est.rate - 0.01).abs() < 0.005, "estimate {}", est.rate);
        assert_eq!(est.batch_tests, 10_000 / 12);
    }

    #[test]
    fn pilot_estimate_clamps_pathological_samples() {
        // fully infected sample with beta = 0: every batch positive, the
        // observed fraction clamps at the boundary and the estimate caps
        let pop = Population::generate(1_000, 1.0, 81).unwrap();
        let members: Vec<u32> = (0..1_000).collect();
        let err = ErrorModel::new(0.01, 0.0).unwrap();
        let est = estimate_pilot_rate(&pop, &members, 10, err, &mut rng(82)).unwrap();
        assert_eq!(est.rate, PILOT_RATE_MAX);
    }

    #[test]
    fn pilot_estimate_needs_one_full_batch() {
        let pop = Population::generate(5, 0.1, 91).unwrap();
        let members: Vec<u32> = (0..5).collect();
        assert!(matches!(
            estimate_pilot_rate(&pop, &members, 10, err_paper(), &mut rng(92)),
            Err(Error::SampleTooSmall { .. })
        ));
    }

    #[test]
    fn pilot_estimate_calibration() {
        // 10,000-person pilots at p = .01, pool size 12: estimate within
        // +/- .004 of the truth in at least 95% of seeded trials
        let mut hits = 0;
        let trials = 200;
        for trial in 0..trials {
            let pop = Population::generate(10_000, 0.01, 1000 + trial).unwrap();
            let members: Vec<u32> = (0..10_000).collect();
            let est =
                estimate_pilot_rate(&pop, &members, 12, err_paper(), &mut rng(2000 + trial))
                    .unwrap();
            if (est.rate - 0.01).abs() <= 0.004 {
                hits += 1;
            }
        }
        assert!(hits >= 190, "only {hits}/{trials} trials within tolerance");
    }

    #[test]
    fn sequential_test_expectation_matches_model() {
        use crate::plan::sequential_model;
        let err = err_paper();
        let p = 0.05;
        let pop = Population::generate(200_000, p, 101).unwrap();
        let mut tally = TestTally::default();
        let mut r = rng(102);
        for person in 0..pop.len() {
            sequential_tests(pop.infected(person), 3, err, &mut r, &mut tally);
        }
        let mean = tally.individual as f64 / pop.len() as f64;
        let expected = sequential_model(p, err).expected_tests_per_person;
        assert!((mean - expected).abs() < 0.01, "mean {mean} vs {expected}");
    }
}
