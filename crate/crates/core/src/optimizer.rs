//! Expected-test minimization over the integer pool size.
//!
//! For infection rate `p` and error model `(alpha, beta)` the expected number
//! of tests per person when pooling at size `n` (one pooled test per batch,
//! then one test per member of each positive batch) is
//!
//! ```text
//! t(n) = 1/n + 1 - beta - (1 - alpha - beta) q^n,      q = 1 - p.
//! ```
//!
//! The real-valued first-order condition `x q^{x/2} = [-(1-a-b) ln q]^{-1/2}`
//! is solved with the secant method and the integer optimum taken as the
//! better of floor/ceil. The objective is unimodal up to a second stationary
//! point (a local max) after which it decays toward its `1 - beta` tail, so
//! the search targets the interior minimum, which is the one the procedure
//! uses.

use crate::error::{Error, Result};
use crate::prob::{ErrorModel, InfectionModel};

/// Largest pool size considered; covers rates down to well below 1e-4.
pub const MAX_BATCH_SIZE: u32 = 1000;

/// Inputs to the expected-test objective. The population scale cancels in the
/// argmin but keeps [`expected_tests`] in absolute units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveSpec {
    pub infection: InfectionModel,
    pub err: ErrorModel,
    pub population: f64,
}

impl ObjectiveSpec {
    pub fn new(p: f64, err: ErrorModel, population: f64) -> Result<Self> {
        if !(population > 0.0) {
            return Err(Error::InvalidProbability { name: "population", value: population });
        }
        Ok(Self { infection: InfectionModel::new(p)?, err, population })
    }

    /// Spec with unit population, for per-person quantities.
    pub fn per_person(p: f64, err: ErrorModel) -> Result<Self> {
        Self::new(p, err, 1.0)
    }
}

/// Integer optimum together with the real stationary point it refines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalBatch {
    /// Integer minimizer, at least 2.
    pub size: u32,
    /// Root of the first-order condition; `size` is its floor or ceiling.
    pub stationary_point: f64,
    /// Objective value at `size`, per person.
    pub tests_per_person: f64,
}

/// Expected tests per person at pool size `n`.
pub fn tests_per_person(n: u32, p: f64, err: ErrorModel) -> f64 {
    let infection = InfectionModel::new(p).expect("valid rate");
    1.0 / f64::from(n) + 1.0 - err.beta() - err.youden_index() * infection.clean_pow(n)
}

/// Expected total tests for the whole population at pool size `n`.
pub fn expected_tests(n: u32, spec: &ObjectiveSpec) -> f64 {
    spec.population * tests_per_person(n, spec.infection.rate(), spec.err)
}

/// Signed residual of the first-order condition at real pool size `x`:
/// `x q^{x/2} - [-(1 - alpha - beta) ln q]^{-1/2}`. Zero at the optimizer.
pub fn stationarity_residual(x: f64, spec: &ObjectiveSpec) -> Result<f64> {
    let q = spec.infection.clean_rate();
    if q >= 1.0 || q <= 0.0 {
        return Err(Error::NoFiniteOptimum);
    }
    let target = (-spec.err.youden_index() * q.ln()).powf(-0.5);
    Ok(x * q.powf(x / 2.0) - target)
}

/// Secant iteration on the stationarity residual. Returns the root when the
/// step shrinks below tolerance, `None` when iterations run out or the
/// iterate wanders out of (0, MAX].
fn secant_root(spec: &ObjectiveSpec) -> Option<f64> {
    let p = spec.infection.rate();
    let mut x0 = 2.0;
    let mut x1 = (2.0 / p.sqrt()).clamp(2.0, f64::from(MAX_BATCH_SIZE));
    if (x1 - x0).abs() < 1e-3 {
        x1 = x0 + 1.0;
    }
    let mut f0 = stationarity_residual(x0, spec).ok()?;
    for _ in 0..200 {
        let f1 = stationarity_residual(x1, spec).ok()?;
        let denom = f1 - f0;
        if denom == 0.0 {
            return None;
        }
        let x2 = x1 - f1 * (x1 - x0) / denom;
        if !x2.is_finite() || x2 <= 0.0 || x2 > 4.0 * f64::from(MAX_BATCH_SIZE) {
            return None;
        }
        if (x2 - x1).abs() < 1e-8 {
            return Some(x2);
        }
        x0 = x1;
        f0 = f1;
        x1 = x2;
    }
    None
}

/// First local minimum of t(n) over integers n >= 2: walk up while the
/// objective decreases. This is the integer twin of the interior stationary
/// point; the eventual decay toward the `1 - beta` tail at huge n is not a
/// usable operating point.
fn scan_first_local_min(p: f64, err: ErrorModel) -> (u32, f64) {
    let mut best_n = 2;
    let mut best_t = tests_per_person(2, p, err);
    for n in 3..=MAX_BATCH_SIZE {
        let t = tests_per_person(n, p, err);
        if t < best_t {
            best_n = n;
            best_t = t;
        } else {
            break;
        }
    }
    (best_n, best_t)
}

/// Interior optimum without the is-it-worth-pooling check. The secant-refined
/// integer is cross-checked for local optimality; any disagreement falls back
/// to the scan.
pub(crate) fn interior_optimum(p: f64, err: ErrorModel) -> OptimalBatch {
    let spec = ObjectiveSpec::per_person(p, err).expect("valid rate");
    if let Some(x) = secant_root(&spec) {
        let lo = (x.floor() as u32).clamp(2, MAX_BATCH_SIZE);
        let hi = (x.ceil() as u32).clamp(2, MAX_BATCH_SIZE);
        let t_lo = tests_per_person(lo, p, err);
        let t_hi = tests_per_person(hi, p, err);
        let (size, tests) = if t_lo <= t_hi { (lo, t_lo) } else { (hi, t_hi) };
        let left_ok = size == 2 || tests <= tests_per_person(size - 1, p, err);
        let right_ok =
            size == MAX_BATCH_SIZE || tests <= tests_per_person(size + 1, p, err);
        if left_ok && right_ok {
            return OptimalBatch { size, stationary_point: x, tests_per_person: tests };
        }
    }
    let (size, tests) = scan_first_local_min(p, err);
    OptimalBatch { size, stationary_point: f64::from(size), tests_per_person: tests }
}

/// Integer pool size minimizing the expected number of tests.
///
/// Solves the first-order condition by the secant method, then compares the
/// objective at the two neighbouring integers (ties go to the smaller pool).
/// Falls back to an integer scan when the secant iteration fails to converge.
/// Errors with `BatchingNotBeneficial` when even the optimum needs at least
/// one test per person.
pub fn optimal_batch_size(spec: &ObjectiveSpec) -> Result<OptimalBatch> {
    let p = spec.infection.rate();
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::NoFiniteOptimum);
    }
    let best = interior_optimum(p, spec.err);
    if best.tests_per_person >= 1.0 {
        return Err(Error::BatchingNotBeneficial { tests_per_person: best.tests_per_person });
    }
    Ok(best)
}
