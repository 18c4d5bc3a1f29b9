//! Experiment configuration file format. Flags override file values; the
//! effective configuration is echoed next to the outputs so a run can be
//! reproduced from its artifacts alone.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use batchscreen::{ErrorModel, ExperimentSpec, PilotSpec, Strategy};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_population")]
    pub population_size: usize,
    #[serde(default = "default_rates")]
    pub infection_rates: Vec<f64>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "Strategy::paper_set")]
    pub strategies: Vec<Strategy>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default = "default_seed")]
    pub master_seed: u64,
    #[serde(default)]
    pub pilot: PilotSpec,
    #[serde(default = "default_p_cut")]
    pub p_cut: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

fn default_population() -> usize {
    100_000
}

fn default_rates() -> Vec<f64> {
    vec![0.001, 0.01, 0.03, 0.05, 0.10]
}

fn default_alpha() -> f64 {
    0.01
}

fn default_beta() -> f64 {
    0.15
}

fn default_repetitions() -> usize {
    100
}

fn default_seed() -> u64 {
    20200501
}

fn default_p_cut() -> f64 {
    0.30
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            population_size: default_population(),
            infection_rates: default_rates(),
            alpha: default_alpha(),
            beta: default_beta(),
            strategies: Strategy::paper_set(),
            repetitions: default_repetitions(),
            master_seed: default_seed(),
            pilot: PilotSpec::default(),
            p_cut: default_p_cut(),
            out_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Restrict to the requested strategy labels, keeping config-file
    /// parameters for labels that are present and falling back to defaults
    /// for ones that are not.
    pub fn select_strategies(&mut self, labels: &str) -> Result<()> {
        let mut selected = Vec::new();
        for label in labels.split(',').filter(|l| !l.trim().is_empty()) {
            let existing = self
                .strategies
                .iter()
                .find(|s| s.label().eq_ignore_ascii_case(label.trim()));
            match existing {
                Some(s) => selected.push(*s),
                None => match Strategy::from_label(label) {
                    Some(s) => selected.push(s),
                    None => bail!("unknown strategy label {label:?} (expected A-F)"),
                },
            }
        }
        if selected.is_empty() {
            bail!("strategy selection {labels:?} is empty");
        }
        self.strategies = selected;
        Ok(())
    }

    pub fn to_spec(&self) -> Result<ExperimentSpec> {
        let err = ErrorModel::new(self.alpha, self.beta)?;
        Ok(ExperimentSpec {
            population_size: self.population_size,
            infection_rates: self.infection_rates.clone(),
            err,
            strategies: self.strategies.clone(),
            repetitions: self.repetitions,
            master_seed: self.master_seed,
            pilot: self.pilot,
            rate_cutoff: self.p_cut,
        })
    }
}
