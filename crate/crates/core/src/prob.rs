//! Closed-form probabilities for pooled-test outcomes under a binomial
//! infection model, with and without per-test errors.
//!
//! A pool ("batch") of `n` samples tests negative with probability
//! `(1 - alpha - beta) q^n + beta` where `q` is the per-person probability of
//! being uninfected, `alpha` the false positive rate and `beta` the false
//! negative rate of a single assay. Everything else in the crate is built on
//! that identity and its branch-conditional refinements.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Outcome of one pooled test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BatchResult {
    Negative,
    Positive,
}

impl BatchResult {
    /// ASCII sign used in plan renderings: `-` or `+`.
    pub fn sign(self) -> char {
        match self {
            BatchResult::Negative => '-',
            BatchResult::Positive => '+',
        }
    }
}

/// Per-assay error rates: false positive rate `alpha`, false negative rate `beta`.
///
/// Requires `0 <= alpha < 1`, `0 <= beta < 1` and `alpha + beta < 1` so that the
/// batch-negative rate is invertible in `q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawErrorModel", into = "RawErrorModel")]
pub struct ErrorModel {
    alpha: f64,
    beta: f64,
}

#[derive(Serialize, Deserialize)]
struct RawErrorModel {
    alpha: f64,
    beta: f64,
}

impl TryFrom<RawErrorModel> for ErrorModel {
    type Error = Error;
    fn try_from(raw: RawErrorModel) -> Result<Self> {
        ErrorModel::new(raw.alpha, raw.beta)
    }
}

impl From<ErrorModel> for RawErrorModel {
    fn from(err: ErrorModel) -> Self {
        RawErrorModel { alpha: err.alpha, beta: err.beta }
    }
}

impl ErrorModel {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let ok = (0.0..1.0).contains(&alpha) && (0.0..1.0).contains(&beta) && alpha + beta < 1.0;
        if ok {
            Ok(Self { alpha, beta })
        } else {
            Err(Error::InvalidErrorRates { alpha, beta })
        }
    }

    /// Error-free assay (`alpha = beta = 0`).
    pub fn perfect() -> Self {
        Self { alpha: 0.0, beta: 0.0 }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Youden index `1 - alpha - beta`, the assay's discriminating power.
    pub fn youden_index(&self) -> f64 {
        1.0 - self.alpha - self.beta
    }

    /// Probability an infected person is caught by up to `cap` sequential
    /// tests (positive at the first positive): `1 - beta^cap`.
    pub fn sequential_sensitivity(&self, cap: u32) -> f64 {
        1.0 - self.beta.powi(cap as i32)
    }

    /// Probability an uninfected person is flagged by up to `cap` sequential
    /// tests: `1 - (1 - alpha)^cap`.
    pub fn sequential_false_positive_rate(&self, cap: u32) -> f64 {
        1.0 - (1.0 - self.alpha).powi(cap as i32)
    }
}

/// Population infection rate `p` and its complement `q = 1 - p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfectionModel {
    p: f64,
}

impl InfectionModel {
    pub fn new(p: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&p) {
            Ok(Self { p })
        } else {
            Err(Error::InvalidProbability { name: "infection rate", value: p })
        }
    }

    pub fn rate(&self) -> f64 {
        self.p
    }

    /// `q = 1 - p`.
    pub fn clean_rate(&self) -> f64 {
        1.0 - self.p
    }

    /// `q^n`, computed as `exp(n ln(1 - p))` so it stays accurate for small `p`
    /// and the large pool sizes that show up at low infection rates.
    pub fn clean_pow(&self, n: u32) -> f64 {
        if self.p == 0.0 {
            1.0
        } else if self.p == 1.0 {
            0.0
        } else {
            (f64::from(n) * (-self.p).ln_1p()).exp()
        }
    }
}

/// Probability of `k` positives in a pool of `n` with infection rate `p`.
pub fn binom_pmf(n: u32, p: f64, k: u32) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability { name: "p", value: p });
    }
    if k > n {
        return Err(Error::CountOutOfRange { k, n });
    }
    if p == 0.0 {
        return Ok(if k == 0 { 1.0 } else { 0.0 });
    }
    if p == 1.0 {
        return Ok(if k == n { 1.0 } else { 0.0 });
    }
    // ln C(n, k) accumulated termwise; n stays small enough that the loop is cheap.
    let mut ln_choose = 0.0;
    for i in 1..=k {
        ln_choose += (f64::from(n - k + i) / f64::from(i)).ln();
    }
    let ln_pmf =
        ln_choose + f64::from(k) * p.ln() + f64::from(n - k) * (-p).ln_1p();
    Ok(ln_pmf.exp())
}

/// Probability that a pool of `n` tests negative: `(1 - alpha - beta) q^n + beta`.
///
/// With a perfect assay this degenerates to `q^n`.
pub fn p_batch_negative(n: u32, q: f64, err: ErrorModel) -> f64 {
    debug_assert!((0.0..=1.0).contains(&q));
    err.youden_index() * q.powf(f64::from(n)) + err.beta()
}

/// Probability that a pool of `n` tests positive: `(1 - beta) - (1 - alpha - beta) q^n`.
pub fn p_batch_positive(n: u32, q: f64, err: ErrorModel) -> f64 {
    debug_assert!((0.0..=1.0).contains(&q));
    (1.0 - err.beta()) - err.youden_index() * q.powf(f64::from(n))
}

/// Both pooled-test outcome probabilities; they sum to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchOutcomeProbs {
    pub negative: f64,
    pub positive: f64,
}

pub fn batch_outcome_probs(n: u32, q: f64, err: ErrorModel) -> BatchOutcomeProbs {
    BatchOutcomeProbs {
        negative: p_batch_negative(n, q, err),
        positive: p_batch_positive(n, q, err),
    }
}

/// Recover `q` from an observed batch-negative rate `a` at pool size `n`:
/// `q = ((a - beta) / (1 - alpha - beta))^(1/n)`.
///
/// Round-trips with [`p_batch_negative`]. The rate must lie in
/// `[beta, 1 - alpha]`; the endpoints map to the degenerate `q = 0` and
/// `q = 1`.
pub fn invert_batch_negative_rate(a: f64, n: u32, err: ErrorModel) -> Result<f64> {
    let min = err.beta();
    let max = 1.0 - err.alpha();
    if a < min || a > max {
        return Err(Error::RateNotInvertible { rate: a, min, max });
    }
    Ok(((a - min) / err.youden_index()).powf(1.0 / f64::from(n)))
}

/// One subpopulation's state going into a round: infection rate, expected
/// head count, and the pool size used for that round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundState {
    pub infection_rate: f64,
    pub population: f64,
    pub batch_size: u32,
}

impl RoundState {
    pub fn new(infection_rate: f64, population: f64, batch_size: u32) -> Self {
        Self { infection_rate, population, batch_size }
    }
}

/// Next-round quantities for one branch of a batch outcome: expected
/// subpopulation size, updated infection rate, and the probability that a
/// batch landing in this branch contained at least one infected member.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundTransition {
    pub population: f64,
    pub infection_rate: f64,
    pub infected_batch_prob: f64,
}

/// Branch update for pools that tested NEGATIVE.
///
/// `N_i = N (1-alpha-beta) q^n + N beta`, `r_i = beta (1-q^n) / p_neg`, and
/// `p_i = p r_i / (1 - q^n)`, which simplifies to `p beta / p_neg`. The
/// simplified form is the continuous extension at `p = 0`, where the raw
/// ratio is 0/0.
pub fn subpop_after_negative(prev: &RoundState, err: ErrorModel) -> RoundTransition {
    let infection = InfectionModel::new(prev.infection_rate).expect("valid rate");
    let qn = infection.clean_pow(prev.batch_size);
    let p_neg = err.youden_index() * qn + err.beta();
    let infected_batch_prob = if p_neg > 0.0 {
        err.beta() * (1.0 - qn) / p_neg
    } else {
        0.0
    };
    let infection_rate = if p_neg > 0.0 {
        prev.infection_rate * err.beta() / p_neg
    } else {
        prev.infection_rate
    };
    RoundTransition {
        population: prev.population * p_neg,
        infection_rate,
        infected_batch_prob,
    }
}

/// Branch update for pools that tested POSITIVE.
///
/// `N_i = N [(1-beta) - (1-alpha-beta) q^n]`,
/// `r_i = (1-beta)(1-q^n) / p_pos`, `p_i = p (1-beta) / p_pos`.
pub fn subpop_after_positive(prev: &RoundState, err: ErrorModel) -> RoundTransition {
    let infection = InfectionModel::new(prev.infection_rate).expect("valid rate");
    let qn = infection.clean_pow(prev.batch_size);
    let p_pos = (1.0 - err.beta()) - err.youden_index() * qn;
    let infected_batch_prob = if p_pos > 0.0 {
        (1.0 - err.beta()) * (1.0 - qn) / p_pos
    } else {
        0.0
    };
    let infection_rate = if p_pos > 0.0 {
        prev.infection_rate * (1.0 - err.beta()) / p_pos
    } else {
        0.0
    };
    RoundTransition {
        population: prev.population * p_pos,
        infection_rate,
        infected_batch_prob,
    }
}
