//! Experiment orchestration: every (strategy, rate) cell for a configured
//! number of repetitions, with per-repetition seeds derived deterministically
//! from the master seed. Repetitions run in parallel; aggregation follows
//! repetition index order, so a report is a pure function of its spec.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{summarize, AccuracyMeasures};
use crate::plan::DEFAULT_RATE_CUTOFF;
use crate::prob::ErrorModel;
use crate::sim::{
    estimate_pilot_rate, run_strategy_with_rate, Population, Strategy, StrategyOutcome,
};

/// Optional pre-round trial that estimates the infection rate from a pooled
/// subsample before pool sizes are planned. Its tests are charged to the
/// pooled-test count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PilotSpec {
    pub enabled: bool,
    pub sample_size: usize,
    pub initial_batch_size: u32,
}

impl Default for PilotSpec {
    fn default() -> Self {
        Self { enabled: false, sample_size: 10_000, initial_batch_size: 10 }
    }
}

/// Full experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub population_size: usize,
    pub infection_rates: Vec<f64>,
    pub err: ErrorModel,
    pub strategies: Vec<Strategy>,
    pub repetitions: usize,
    pub master_seed: u64,
    pub pilot: PilotSpec,
    pub rate_cutoff: f64,
}

impl ExperimentSpec {
    /// Protocol behind the headline comparison tables: N = 100,000, the five
    /// reference rates, all six strategies, 100 repetitions.
    pub fn paper_protocol(err: ErrorModel, master_seed: u64) -> Self {
        Self {
            population_size: 100_000,
            infection_rates: vec![0.001, 0.01, 0.03, 0.05, 0.10],
            err,
            strategies: Strategy::paper_set(),
            repetitions: 100,
            master_seed,
            pilot: PilotSpec::default(),
            rate_cutoff: DEFAULT_RATE_CUTOFF,
        }
    }
}

/// Mean and sample standard deviation of an always-defined quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stats {
    pub mean: f64,
    pub std_dev: f64,
}

fn stats(values: impl Iterator<Item = f64> + Clone) -> Stats {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = if n > 1.0 {
        values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Stats { mean, std_dev: var.sqrt() }
}

/// Mean and sample standard deviation over the repetitions where the measure
/// was defined; `None` when it never was.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureStats {
    pub mean: Option<f64>,
    pub std_dev: Option<f64>,
}

fn measure_stats(values: &[Option<f64>]) -> MeasureStats {
    let defined: Vec<f64> = values.iter().flatten().copied().collect();
    if defined.is_empty() {
        return MeasureStats { mean: None, std_dev: None };
    }
    let s = stats(defined.iter().copied());
    MeasureStats { mean: Some(s.mean), std_dev: Some(s.std_dev) }
}

/// Aggregated results for one (strategy, rate) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellReport {
    pub strategy: Strategy,
    pub rate: f64,
    pub accuracy: MeasureStats,
    pub sensitivity: MeasureStats,
    pub specificity: MeasureStats,
    pub ppv: MeasureStats,
    pub npv: MeasureStats,
    pub total_tests: Stats,
    pub batch_tests: Stats,
    pub individual_tests: Stats,
}

impl CellReport {
    pub fn label(&self) -> &'static str {
        self.strategy.label()
    }
}

/// Aggregated results for the whole grid, in (strategy, rate) config order.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub population_size: usize,
    pub repetitions: usize,
    pub master_seed: u64,
    pub err: ErrorModel,
    pub cells: Vec<CellReport>,
}

impl SimulationReport {
    pub fn cell(&self, label: &str, rate: f64) -> Option<&CellReport> {
        self.cells
            .iter()
            .find(|c| c.label() == label && c.rate == rate)
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable seed derivation: fold the coordinates into the master seed.
pub fn derive_seed(parts: &[u64]) -> u64 {
    let mut acc = 0x243F_6A88_85A3_08D3;
    for &part in parts {
        acc = splitmix64(acc ^ part);
    }
    acc
}

const POPULATION_STREAM: u64 = 1;
const TEST_STREAM: u64 = 2;

/// One repetition of one cell.
fn run_repetition(
    spec: &ExperimentSpec,
    strategy: &Strategy,
    strategy_index: usize,
    rate: f64,
    repetition: usize,
) -> Result<(StrategyOutcome, AccuracyMeasures)> {
    let rep_seed = derive_seed(&[
        spec.master_seed,
        strategy_index as u64,
        rate.to_bits(),
        repetition as u64,
    ]);
    let pop = Population::generate(
        spec.population_size,
        rate,
        derive_seed(&[rep_seed, POPULATION_STREAM]),
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[rep_seed, TEST_STREAM]));

    let mut pilot_tests = 0u64;
    let planning_rate = if spec.pilot.enabled && strategy.uses_planning_rate() {
        let sample: Vec<u32> =
            (0..spec.pilot.sample_size.min(pop.len()) as u32).collect();
        let estimate =
            estimate_pilot_rate(&pop, &sample, spec.pilot.initial_batch_size, spec.err, &mut rng)?;
        pilot_tests = estimate.batch_tests;
        estimate.rate
    } else {
        rate
    };

    let mut outcome = run_strategy_with_rate(
        &pop,
        strategy,
        spec.err,
        planning_rate,
        spec.rate_cutoff,
        &mut rng,
    )?;
    outcome.tests.batch += pilot_tests;
    let measures = summarize(&outcome.confusion);
    Ok((outcome, measures))
}

/// Run the whole grid. Every cell runs `spec.repetitions` times; repetitions
/// execute in parallel but are aggregated in index order, so the report is
/// deterministic for a fixed spec.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<SimulationReport> {
    if spec.repetitions == 0 {
        return Err(Error::EmptyExperiment { what: "repetition" });
    }
    if spec.strategies.is_empty() {
        return Err(Error::EmptyExperiment { what: "strategy" });
    }
    if spec.infection_rates.is_empty() {
        return Err(Error::EmptyExperiment { what: "infection rate" });
    }
    for strategy in &spec.strategies {
        strategy.validate()?;
    }
    for &rate in &spec.infection_rates {
        if !(0.0..=1.0).contains(&rate) {
            return Err(Error::InvalidProbability { name: "infection rate", value: rate });
        }
    }

    let mut cells = Vec::with_capacity(spec.strategies.len() * spec.infection_rates.len());
    for (strategy_index, strategy) in spec.strategies.iter().enumerate() {
        for &rate in &spec.infection_rates {
            let runs: Result<Vec<(StrategyOutcome, AccuracyMeasures)>> = (0..spec.repetitions)
                .into_par_iter()
                .map(|rep| {
                    run_repetition(spec, strategy, strategy_index, rate, rep).map_err(|e| {
                        Error::Simulation {
                            strategy: strategy.label().to_string(),
                            rate,
                            repetition: rep,
                            source: Box::new(e),
                        }
                    })
                })
                .collect();
            let runs = runs?;

            let pick = |f: fn(&AccuracyMeasures) -> Option<f64>| -> MeasureStats {
                let values: Vec<Option<f64>> = runs.iter().map(|(_, m)| f(m)).collect();
                measure_stats(&values)
            };
            cells.push(CellReport {
                strategy: *strategy,
                rate,
                accuracy: pick(|m| m.accuracy),
                sensitivity: pick(|m| m.sensitivity),
                specificity: pick(|m| m.specificity),
                ppv: pick(|m| m.ppv),
                npv: pick(|m| m.npv),
                total_tests: stats(runs.iter().map(|(o, _)| o.tests.total() as f64)),
                batch_tests: stats(runs.iter().map(|(o, _)| o.tests.batch as f64)),
                individual_tests: stats(runs.iter().map(|(o, _)| o.tests.individual as f64)),
            });
        }
    }

    Ok(SimulationReport {
        population_size: spec.population_size,
        repetitions: spec.repetitions,
        master_seed: spec.master_seed,
        err: spec.err,
        cells,
    })
}
