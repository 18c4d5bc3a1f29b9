//! Diagnostic accuracy for one-step pooled testing and Bayes predictive
//! values.
//!
//! One-step pooling (negative pool clears everyone, positive pool triggers an
//! individual test per member) has sensitivity `(1 - beta)^2 = 1 - beta(2 - beta)`
//! regardless of pool size or prevalence, and specificity
//! `(1 - alpha + alpha beta) + alpha (1 - alpha - beta) (1 - p)^(n-1)`.

use crate::error::{Error, Result};
use crate::prob::ErrorModel;

/// Test-versus-truth tally. Cells are `f64` so the same type carries both
/// simulated counts and analytic probabilities. Measures with an empty
/// denominator come back as `None` rather than a silent zero.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConfusionMatrix {
    pub true_positive: f64,
    pub false_positive: f64,
    pub true_negative: f64,
    pub false_negative: f64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> f64 {
        self.true_positive + self.false_positive + self.true_negative + self.false_negative
    }

    fn ratio(num: f64, denom: f64) -> Option<f64> {
        if denom > 0.0 {
            Some(num / denom)
        } else {
            None
        }
    }

    pub fn accuracy(&self) -> Option<f64> {
        Self::ratio(self.true_positive + self.true_negative, self.total())
    }

    pub fn sensitivity(&self) -> Option<f64> {
        Self::ratio(self.true_positive, self.true_positive + self.false_negative)
    }

    pub fn specificity(&self) -> Option<f64> {
        Self::ratio(self.true_negative, self.true_negative + self.false_positive)
    }

    pub fn ppv(&self) -> Option<f64> {
        Self::ratio(self.true_positive, self.true_positive + self.false_positive)
    }

    pub fn npv(&self) -> Option<f64> {
        Self::ratio(self.true_negative, self.true_negative + self.false_negative)
    }
}

/// The five summary measures; `None` marks an undefined (0/0) cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccuracyMeasures {
    pub accuracy: Option<f64>,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub ppv: Option<f64>,
    pub npv: Option<f64>,
}

/// Summarize a confusion matrix into the standard measures.
pub fn summarize(cm: &ConfusionMatrix) -> AccuracyMeasures {
    AccuracyMeasures {
        accuracy: cm.accuracy(),
        sensitivity: cm.sensitivity(),
        specificity: cm.specificity(),
        ppv: cm.ppv(),
        npv: cm.npv(),
    }
}

/// Sensitivity of one-step pooled testing: `1 - beta(2 - beta)`.
///
/// Depends on neither the pool size nor the infection rate: an infected
/// person is found only when both their pool test and their follow-up
/// individual test come back positive.
pub fn single_batch_sensitivity(err: ErrorModel) -> f64 {
    1.0 - err.beta() * (2.0 - err.beta())
}

/// Specificity of one-step pooled testing at pool size `n` and rate `p`:
/// `(1 - alpha + alpha beta) + alpha (1 - alpha - beta) (1 - p)^(n-1)`.
pub fn single_batch_specificity(n: u32, p: f64, err: ErrorModel) -> f64 {
    let a = err.alpha();
    let b = err.beta();
    (1.0 - a + a * b) + a * err.youden_index() * (1.0 - p).powi(n as i32 - 1)
}

/// Positive and negative predictive values by Bayes' rule.
///
/// `PPV = Se p / (Se p + (1 - Sp)(1 - p))`,
/// `NPV = Sp (1 - p) / (Sp (1 - p) + (1 - Se) p)`.
pub fn ppv_npv(p: f64, sensitivity: f64, specificity: f64) -> Result<(f64, f64)> {
    let ppv_denom = sensitivity * p + (1.0 - specificity) * (1.0 - p);
    let npv_denom = specificity * (1.0 - p) + (1.0 - sensitivity) * p;
    if ppv_denom <= 0.0 {
        return Err(Error::UndefinedMeasure { name: "PPV" });
    }
    if npv_denom <= 0.0 {
        return Err(Error::UndefinedMeasure { name: "NPV" });
    }
    Ok((sensitivity * p / ppv_denom, specificity * (1.0 - p) / npv_denom))
}

/// Predictive values of one-step pooled testing, composing
/// [`single_batch_sensitivity`] and [`single_batch_specificity`] through
/// Bayes' rule.
pub fn single_batch_ppv_npv(n: u32, p: f64, err: ErrorModel) -> Result<(f64, f64)> {
    ppv_npv(p, single_batch_sensitivity(err), single_batch_specificity(n, p, err))
}
