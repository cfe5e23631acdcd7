//! Run configuration: one JSON document, with long command-line flags
//! overriding individual fields.

use std::path::{Path, PathBuf};

use ghrain::diag::{ReturnPeriodConfig, ValidationConfig};
use ghrain::infer::{McmcConfig, PriorSpec};
use ghrain::model::ArmaGarchParams;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::ingest::IngestionConfig;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub daily: IngestionConfig,
    /// Weekly series CSV (`date, rainfall, <covariates>`) used instead of daily ingestion.
    pub weekly: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReturnsConfig {
    pub n_sims: usize,
    pub horizon: usize,
    pub levels: Vec<f64>,
    /// Taken from ingestion when absent, else 26.
    pub weeks_per_year: Option<f64>,
    pub reference_periods: Vec<f64>,
    pub seed: u64,
}

impl Default for ReturnsConfig {
    fn default() -> Self {
        let d = ReturnPeriodConfig::default();
        Self {
            n_sims: d.n_sims,
            horizon: d.horizon,
            levels: d.levels,
            weeks_per_year: None,
            reference_periods: d.reference_periods,
            seed: d.seed,
        }
    }
}

impl ReturnsConfig {
    pub fn resolve(&self, weeks_per_year: Option<f64>) -> ReturnPeriodConfig {
        let d = ReturnPeriodConfig::default();
        ReturnPeriodConfig {
            n_sims: self.n_sims,
            horizon: self.horizon,
            levels: self.levels.clone(),
            weeks_per_year: self.weeks_per_year.or(weeks_per_year).unwrap_or(d.weeks_per_year),
            reference_periods: self.reference_periods.clone(),
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidationSettings {
    pub n_replicates: usize,
    pub max_lag: usize,
    pub qq_points: usize,
    pub spell_thresholds: Vec<f64>,
}

impl Default for ValidationSettings {
    fn default() -> Self {
        let d = ValidationConfig::default();
        Self { n_replicates: d.n_replicates, max_lag: d.max_lag, qq_points: d.qq_points, spell_thresholds: d.spell_thresholds }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareConfig {
    pub gp_thresholds: Vec<f64>,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self { gp_thresholds: vec![150.0, 200.0, 250.0] }
    }
}

/// Parameters of an AR(1)-ARCH(1) model with GH innovations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Truths {
    pub a0: f64,
    pub a1: f64,
    pub betas: Vec<f64>,
    pub alpha0: f64,
    pub alpha1: f64,
    pub lambda: f64,
    pub psi: f64,
    pub tau: f64,
}

impl Default for Truths {
    fn default() -> Self {
        Self { a0: 5.0, a1: 0.5, betas: Vec::new(), alpha0: 13.0, alpha1: 0.2, lambda: -0.2, psi: 0.25, tau: 15.0 }
    }
}

impl Truths {
    pub fn to_params(&self) -> Result<ArmaGarchParams> {
        ArmaGarchParams::ar1_arch1(
            self.a0,
            self.a1,
            self.betas.clone(),
            self.alpha0,
            self.alpha1,
            self.lambda,
            self.psi,
            self.tau,
        )
        .map_err(|e| CliError::Config(format!("invalid truths: {e}")))
    }

    /// Values in the layout order `a0, a1, betas.., alpha0, alpha1, lambda, psi, tau`.
    pub fn values(&self) -> Vec<f64> {
        let mut v = vec![self.a0, self.a1];
        v.extend(&self.betas);
        v.extend([self.alpha0, self.alpha1, self.lambda, self.psi, self.tau]);
        v
    }

    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        match key {
            "a0" => self.a0 = value,
            "a1" => self.a1 = value,
            "alpha0" => self.alpha0 = value,
            "alpha1" => self.alpha1 = value,
            "lambda" => self.lambda = value,
            "psi" => self.psi = value,
            "tau" => self.tau = value,
            _ => match key.strip_prefix("beta").and_then(|i| i.parse::<usize>().ok()) {
                Some(i) if i >= 1 && i <= self.betas.len() + 1 => {
                    if i > self.betas.len() {
                        self.betas.push(value);
                    } else {
                        self.betas[i - 1] = value;
                    }
                }
                _ => return Err(CliError::Config(format!("unknown parameter {key:?}"))),
            },
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub truths: Truths,
    pub seasons: usize,
    pub start_year: i32,
    /// Names of synthetic monthly indices, one per coefficient in `truths.betas`.
    pub covariates: Vec<String>,
    /// Month-to-month autocorrelation of the synthetic indices.
    pub covariate_persistence: f64,
    pub seed: u64,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            truths: Truths::default(),
            seasons: 125,
            start_year: 1890,
            covariates: Vec::new(),
            covariate_persistence: 0.9,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimstudyConfig {
    pub truths: Truths,
    pub length: usize,
    /// When set, `a0` is moved so the long-run zero fraction matches this value.
    pub censor_target: Option<f64>,
    pub replicates: usize,
    pub seed: u64,
}

impl Default for SimstudyConfig {
    fn default() -> Self {
        Self { truths: Truths::default(), length: 3200, censor_target: None, replicates: 1, seed: 1 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataConfig,
    pub mcmc: McmcConfig,
    pub priors: PriorSpec,
    pub returns: ReturnsConfig,
    pub validation: ValidationSettings,
    pub compare: CompareConfig,
    pub simulate: SimulateConfig,
    pub simstudy: SimstudyConfig,
    /// Directory written by `fit`.
    pub chain: Option<PathBuf>,
    pub output: Option<PathBuf>,
    /// Worker threads for parallel work; all available cores when absent.
    pub workers: Option<usize>,
}

fn anchor(path: &mut PathBuf, base: &Path) {
    if path.is_relative() {
        *path = base.join(&*path);
    }
}

impl RunConfig {
    /// Parse a config file; relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.rebase(base);
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        let d = &mut self.data;
        for p in d.daily.input.iter_mut().chain(d.weekly.iter_mut()).chain(self.chain.iter_mut()).chain(self.output.iter_mut()) {
            anchor(p, base);
        }
        for c in &mut d.daily.covariates {
            anchor(&mut c.path, base);
        }
    }

    /// Make every path absolute so a saved config reproduces the run from anywhere.
    pub fn absolutize(&mut self) -> Result<()> {
        let cwd = std::env::current_dir()?;
        self.rebase(&cwd);
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.mcmc;
        if m.iterations < m.burn_in {
            return Err(CliError::Config(format!(
                "iterations ({}) must be at least burn_in ({})",
                m.iterations, m.burn_in
            )));
        }
        if m.thinning == 0 {
            return Err(CliError::Config("thinning must be at least 1".into()));
        }
        self.priors.validate()?;
        if self.workers == Some(0) {
            return Err(CliError::Config("workers must be at least 1".into()));
        }
        Ok(())
    }
}
