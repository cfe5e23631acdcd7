//! Command-line interface. Every flag overrides the matching config field.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ghrain::infer::{AugmentationScheme, NormalPrior, PriorSpec};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::ingest::CovariateSource;

#[derive(Debug, Parser)]
#[command(name = "ghrain", version, about = "Censored AR-ARCH models with GH innovations for weekly rainfall")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Aggregate daily rainfall into the weekly series and report counts.
    Ingest(Overrides),
    /// Fit the model by MCMC and write the chain and posterior summary.
    Fit(Overrides),
    /// Simulate synthetic daily rainfall (and monthly indices) from given parameters.
    Simulate(Overrides),
    /// Posterior-predictive checks: QQ pairs, return periods, ACF and spells.
    Validate(Overrides),
    /// Return-period bands of the fitted model against GP and GW baselines.
    Compare(Overrides),
    /// Simulate at known parameters, refit and report interval coverage.
    Simstudy(Overrides),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Ingest(_) => "ingest",
            Command::Fit(_) => "fit",
            Command::Simulate(_) => "simulate",
            Command::Validate(_) => "validate",
            Command::Compare(_) => "compare",
            Command::Simstudy(_) => "simstudy",
        }
    }

    pub fn overrides(&self) -> &Overrides {
        match self {
            Command::Ingest(o)
            | Command::Fit(o)
            | Command::Simulate(o)
            | Command::Validate(o)
            | Command::Compare(o)
            | Command::Simstudy(o) => o,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PriorPreset {
    Default,
    Moderate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Augmentation {
    Forward,
    Corrected,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Seed for every random stream of the command.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,

    /// Daily rainfall CSV.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Weekly series CSV, used instead of daily ingestion.
    #[arg(long)]
    pub weekly: Option<PathBuf>,
    #[arg(long)]
    pub date_column: Option<String>,
    #[arg(long)]
    pub date_format: Option<String>,
    #[arg(long)]
    pub rainfall_column: Option<String>,
    /// Comma-separated season months, e.g. 11,12,1,2,3,4.
    #[arg(long, value_delimiter = ',')]
    pub season_months: Option<Vec<u32>>,
    /// Monthly index as NAME=PATH; repeatable, replaces configured indices.
    #[arg(long = "covariate")]
    pub covariates: Vec<String>,
    /// Keep climate indices in their original units.
    #[arg(long)]
    pub no_standardize: bool,

    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub burn_in: Option<usize>,
    #[arg(long)]
    pub thinning: Option<usize>,
    #[arg(long, value_enum)]
    pub augmentation: Option<Augmentation>,
    #[arg(long)]
    pub store_latents: bool,
    /// Replace the configured priors with a preset.
    #[arg(long, value_enum)]
    pub priors: Option<PriorPreset>,
    /// Prior scale for alpha0, for data in large units.
    #[arg(long)]
    pub alpha0_prior_scale: Option<f64>,

    /// Directory written by `fit`.
    #[arg(long)]
    pub chain: Option<PathBuf>,
    #[arg(long)]
    pub n_sims: Option<usize>,
    #[arg(long)]
    pub horizon: Option<usize>,
    #[arg(long)]
    pub weeks_per_year: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub reference_periods: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub gp_thresholds: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub spell_thresholds: Option<Vec<f64>>,
    #[arg(long)]
    pub replicates: Option<usize>,

    /// Parameter value as KEY=VALUE (a0, a1, beta1.., alpha0, alpha1, lambda, psi, tau); repeatable.
    #[arg(long = "truth")]
    pub truths: Vec<String>,
    /// Simulated series length (simstudy).
    #[arg(long)]
    pub length: Option<usize>,
    /// Target zero fraction for simstudy; moves a0.
    #[arg(long)]
    pub censor_target: Option<f64>,
    /// Number of simulated seasons (simulate).
    #[arg(long)]
    pub seasons: Option<usize>,
    #[arg(long)]
    pub start_year: Option<i32>,
    /// Names of synthetic monthly indices (simulate).
    #[arg(long = "synthetic-covariate")]
    pub synthetic_covariates: Vec<String>,
}

fn key_value(s: &str) -> Result<(&str, &str)> {
    s.split_once('=')
        .map(|(k, v)| (k.trim(), v.trim()))
        .filter(|(k, v)| !k.is_empty() && !v.is_empty())
        .ok_or_else(|| CliError::Config(format!("expected KEY=VALUE, got {s:?}")))
}

impl Overrides {
    /// The config file (if any) with these flags applied.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        self.apply(&mut cfg)?;
        cfg.absolutize()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&self, cfg: &mut RunConfig) -> Result<()> {
        fn set<T: Clone>(dst: &mut T, src: &Option<T>) {
            if let Some(v) = src {
                *dst = v.clone();
            }
        }
        if let Some(s) = self.seed {
            cfg.mcmc.seed = s;
            cfg.returns.seed = s;
            cfg.simulate.seed = s;
            cfg.simstudy.seed = s;
        }
        if self.output.is_some() {
            cfg.output = self.output.clone();
        }
        if self.workers.is_some() {
            cfg.workers = self.workers;
        }

        let daily = &mut cfg.data.daily;
        if self.input.is_some() {
            daily.input = self.input.clone();
            cfg.data.weekly = None;
        }
        if self.weekly.is_some() {
            cfg.data.weekly = self.weekly.clone();
        }
        set(&mut daily.date_column, &self.date_column);
        set(&mut daily.date_format, &self.date_format);
        set(&mut daily.rainfall_column, &self.rainfall_column);
        set(&mut daily.season_months, &self.season_months);
        if !self.covariates.is_empty() {
            daily.covariates = self
                .covariates
                .iter()
                .map(|s| {
                    let (name, path) = key_value(s)?;
                    Ok(CovariateSource {
                        path: PathBuf::from(path),
                        name: name.to_string(),
                        date_column: "date".into(),
                        value_column: None,
                    })
                })
                .collect::<Result<_>>()?;
        }
        if self.no_standardize {
            daily.standardize = false;
        }

        let m = &mut cfg.mcmc;
        set(&mut m.iterations, &self.iterations);
        set(&mut m.burn_in, &self.burn_in);
        set(&mut m.thinning, &self.thinning);
        if let Some(a) = self.augmentation {
            m.augmentation = match a {
                Augmentation::Forward => AugmentationScheme::Forward,
                Augmentation::Corrected => AugmentationScheme::Corrected,
            };
        }
        if self.store_latents {
            m.store_latents = true;
        }
        match self.priors {
            Some(PriorPreset::Default) => cfg.priors = PriorSpec::default(),
            Some(PriorPreset::Moderate) => cfg.priors = PriorSpec::moderate(),
            None => {}
        }
        if let Some(s) = self.alpha0_prior_scale {
            cfg.priors.alpha0 = NormalPrior::new(cfg.priors.alpha0.location, s);
        }

        if self.chain.is_some() {
            cfg.chain = self.chain.clone();
        }
        let r = &mut cfg.returns;
        set(&mut r.n_sims, &self.n_sims);
        set(&mut r.horizon, &self.horizon);
        if self.weeks_per_year.is_some() {
            r.weeks_per_year = self.weeks_per_year;
        }
        set(&mut r.reference_periods, &self.reference_periods);
        set(&mut cfg.compare.gp_thresholds, &self.gp_thresholds);
        set(&mut cfg.validation.spell_thresholds, &self.spell_thresholds);

        let study = &mut cfg.simstudy;
        set(&mut study.replicates, &self.replicates);
        set(&mut study.length, &self.length);
        if self.censor_target.is_some() {
            study.censor_target = self.censor_target;
        }
        let sim = &mut cfg.simulate;
        set(&mut sim.seasons, &self.seasons);
        set(&mut sim.start_year, &self.start_year);
        if !self.synthetic_covariates.is_empty() {
            sim.covariates = self.synthetic_covariates.clone();
        }
        for kv in &self.truths {
            let (k, v) = key_value(kv)?;
            let v: f64 = v.parse().map_err(|_| CliError::Config(format!("bad number in {kv:?}")))?;
            cfg.simulate.truths.set(k, v)?;
            cfg.simstudy.truths.set(k, v)?;
        }
        Ok(())
    }
}
