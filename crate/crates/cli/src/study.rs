//! Simulation study: simulate at known parameters, refit, and check which
//! posterior intervals contain the truth.

use ghrain::diag::simulate_series;
use ghrain::infer::{run_mcmc, summarize, ChainSummary, McmcConfig, PriorSpec};
use ghrain::model::{simulate_latent, CensoredSeries};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{SimstudyConfig, Truths};
use crate::error::{CliError, Result};

/// Parameters kept strictly positive by the sampler.
const POSITIVE: [&str; 3] = ["alpha0", "alpha1", "psi"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryRow {
    pub replicate: usize,
    pub parameter: String,
    pub truth: f64,
    pub mean: f64,
    pub sd: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub contained: bool,
    /// A positive parameter whose posterior mean is within two posterior
    /// standard deviations of zero.
    pub at_boundary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateOutcome {
    pub replicate: usize,
    pub censored_fraction: f64,
    pub contained: usize,
    pub parameters: usize,
    pub summary: ChainSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    /// Truths used, after any censoring calibration of `a0`.
    pub truths: Truths,
    pub rows: Vec<RecoveryRow>,
    pub replicates: Vec<ReplicateOutcome>,
}

impl StudyReport {
    pub fn rows_for(&self, replicate: usize) -> impl Iterator<Item = &RecoveryRow> {
        self.rows.iter().filter(move |r| r.replicate == replicate)
    }
}

fn stream(seed: u64, k: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    rng
}

/// Long-run fraction of non-positive latent values at the given truths,
/// with a fixed random stream so the fraction is monotone in `a0`.
fn zero_fraction(truths: &Truths, steps: usize, seed: u64) -> Result<f64> {
    let mut t = truths.clone();
    t.betas.clear();
    let p = t.to_params()?;
    let y = simulate_latent(&p, &[], steps, &mut stream(seed, 7))?.y;
    Ok(y.iter().filter(|&&v| v <= 0.0).count() as f64 / steps as f64)
}

/// `a0` giving a zero fraction of `target` at the other truths.
pub fn calibrate_a0(truths: &Truths, target: f64, seed: u64) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) {
        return Err(CliError::Config(format!("censor target {target} must lie in (0, 1)")));
    }
    const STEPS: usize = 100_000;
    let f = |a0: f64| zero_fraction(&Truths { a0, ..truths.clone() }, STEPS, seed);
    let scale = if truths.alpha1 < 1.0 { (truths.alpha0 / (1.0 - truths.alpha1)).sqrt() } else { truths.alpha0.sqrt() };
    let (mut lo, mut hi) = (truths.a0, truths.a0);
    let mut step = scale;
    while f(lo)? < target {
        lo -= step;
        step *= 2.0;
        if step > 1e12 * scale {
            return Err(CliError::Core(ghrain::Error::Numerical("cannot bracket the censoring target".into())));
        }
    }
    step = scale;
    while f(hi)? > target {
        hi += step;
        step *= 2.0;
        if step > 1e12 * scale {
            return Err(CliError::Core(ghrain::Error::Numerical("cannot bracket the censoring target".into())));
        }
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Simulated series for replicate `r`: iid standard normal covariates named
/// `x1, x2, ...`, one per coefficient.
pub fn study_series(truths: &Truths, length: usize, seed: u64, r: usize) -> Result<CensoredSeries> {
    let params = truths.to_params()?;
    let mut rng = stream(seed, r as u64);
    let names: Vec<String> = (1..=truths.betas.len()).map(|i| format!("x{i}")).collect();
    let rows: Vec<Vec<f64>> =
        (0..length).map(|_| (0..names.len()).map(|_| StandardNormal.sample(&mut rng)).collect()).collect();
    Ok(simulate_series(&params, length, &names, &rows, &mut rng)?)
}

fn recovery(replicate: usize, truths: &Truths, summary: &ChainSummary) -> Vec<RecoveryRow> {
    summary
        .parameters
        .iter()
        .zip(truths.values())
        .map(|(p, truth)| RecoveryRow {
            replicate,
            parameter: p.name.clone(),
            truth,
            mean: p.mean,
            sd: p.sd,
            ci_lower: p.lower,
            ci_upper: p.upper,
            contained: p.contains(truth),
            at_boundary: POSITIVE.contains(&p.name.as_str()) && p.mean <= 2.0 * p.sd,
        })
        .collect()
}

/// Run every replicate (in parallel) and collect the recovery table.
/// Replicate `r` simulates on stream `r` of `study.seed` and samples with
/// MCMC seed `mcmc.seed + r`.
pub fn run_study(study: &SimstudyConfig, priors: &PriorSpec, mcmc: &McmcConfig) -> Result<(StudyReport, Vec<CensoredSeries>)> {
    if study.replicates == 0 || study.length < 10 {
        return Err(CliError::Config("simulation study needs replicates >= 1 and length >= 10".into()));
    }
    let mut truths = study.truths.clone();
    if let Some(p) = study.censor_target {
        truths.a0 = calibrate_a0(&truths, p, study.seed)?;
    }
    let outcomes = (0..study.replicates)
        .into_par_iter()
        .map(|r| {
            let series = study_series(&truths, study.length, study.seed, r)?;
            let chain = run_mcmc(&series, priors, &McmcConfig { seed: mcmc.seed.wrapping_add(r as u64), ..mcmc.clone() })?;
            let summary = summarize(&chain)?;
            Ok((series, summary))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut replicates = Vec::new();
    let mut all_series = Vec::new();
    for (r, (series, summary)) in outcomes.into_iter().enumerate() {
        let rec = recovery(r, &truths, &summary);
        replicates.push(ReplicateOutcome {
            replicate: r,
            censored_fraction: series.censored_fraction(),
            contained: rec.iter().filter(|x| x.contained).count(),
            parameters: rec.len(),
            summary,
        });
        rows.extend(rec);
        all_series.push(series);
    }
    Ok((StudyReport { truths, rows, replicates }, all_series))
}
