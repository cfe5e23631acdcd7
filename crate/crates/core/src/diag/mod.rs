//! Posterior-predictive diagnostics: simulated ensembles, return-period
//! curves with credible bands, dependence and spell-length summaries, QQ
//! pairs and comparisons against GP and GW tail fits.
//!
//! Return periods are in years: a level `x` has period
//! `1 / (w · P(weekly sum > x))` with `w` in-season weeks per year.

mod compare;
mod dependence;
mod io;
mod returns;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use compare::{compare_baselines, baseline_curves, BaselineComparison, ReturnLevelBand};
pub use dependence::{
    acf, compare_acf, compare_spells, spell_distributions, AcfComparison, SpellComparison, SpellDistribution,
    SpellKind,
};
pub use io::{write_acf_csv, write_curves_csv, write_qq_csv, write_return_levels_csv, write_spells_csv};
pub use returns::{
    empirical_return_periods, return_period_curve, CurveSource, EmpiricalTail, GhReturnPeriods, ReturnPeriodConfig,
    ReturnPeriodCurve,
};

use crate::error::{Error, Result};
use crate::infer::Chain;
use crate::model::{simulate_latent, ArmaGarchParams, CensoredSeries};
use crate::stats;

/// Forward-simulate the censored process. Covariate rows beyond those
/// supplied are zero.
pub fn simulate_series<R: rand::Rng + ?Sized>(
    params: &ArmaGarchParams,
    length: usize,
    covariate_names: &[String],
    covariates: &[Vec<f64>],
    rng: &mut R,
) -> Result<CensoredSeries> {
    if covariate_names.len() != params.betas.len() {
        return Err(Error::Config(format!(
            "{} covariate names for {} coefficients",
            covariate_names.len(),
            params.betas.len()
        )));
    }
    let y = simulate_latent(params, covariates, length, rng)?.y;
    let rows = (0..length)
        .map(|t| covariates.get(t).cloned().unwrap_or_else(|| vec![0.0; params.betas.len()]))
        .collect();
    let mut s = CensoredSeries::from_values(y.iter().map(|v| v.max(0.0)).collect())?;
    s.covariate_names = covariate_names.to_vec();
    s.covariates = rows;
    Ok(s)
}

/// Posterior draw used by simulation `k` of `n`: evenly spread over the chain.
fn draw_index(chain: &Chain, k: usize, n: usize) -> usize {
    k * chain.len() / n
}

fn stream(seed: u64, k: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    rng
}

/// Map `f` over `n_sims` simulated censored paths, one posterior draw each.
/// Simulation `k` uses its own random stream, so results do not depend on
/// the thread count.
pub(crate) fn map_ensemble<T, F>(
    chain: &Chain,
    n_sims: usize,
    length: usize,
    covariates: &[Vec<f64>],
    seed: u64,
    f: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(Vec<f64>) -> T + Sync,
{
    if chain.is_empty() {
        return Err(Error::Config("posterior-predictive simulation needs a non-empty chain".into()));
    }
    (0..n_sims)
        .into_par_iter()
        .map(|k| {
            let params = chain.params_at(draw_index(chain, k, n_sims))?;
            let mut rng = stream(seed, k);
            let y = simulate_latent(&params, covariates, length, &mut rng)?.y;
            Ok(f(y.into_iter().map(|v| v.max(0.0)).collect()))
        })
        .collect()
}

/// `n_sims` censored series of `length` steps from the posterior predictive.
pub fn simulate_ensemble(
    chain: &Chain,
    n_sims: usize,
    length: usize,
    covariates: &[Vec<f64>],
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    map_ensemble(chain, n_sims, length, covariates, seed, |y| y)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QqPoint {
    pub prob: f64,
    pub empirical: f64,
    pub model: f64,
}

/// Quantile pairs of the positive parts of `observed` and `model_sample` on
/// the grid `(i − ½)/n_points`.
pub fn qq_points(observed: &[f64], model_sample: &[f64], n_points: usize) -> Result<Vec<QqPoint>> {
    let pos = |xs: &[f64]| -> Vec<f64> {
        let mut v: Vec<f64> = xs.iter().copied().filter(|&x| x > 0.0).collect();
        v.sort_by(f64::total_cmp);
        v
    };
    let (e, m) = (pos(observed), pos(model_sample));
    if e.is_empty() || m.is_empty() || n_points == 0 {
        return Err(Error::Data("QQ comparison needs positive values on both sides".into()));
    }
    Ok((0..n_points)
        .map(|i| {
            let prob = (i as f64 + 0.5) / n_points as f64;
            QqPoint { prob, empirical: stats::quantile_sorted(&e, prob), model: stats::quantile_sorted(&m, prob) }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ValidationConfig {
    pub return_periods: ReturnPeriodConfig,
    /// Ensemble size for QQ, ACF and spell comparisons.
    pub n_replicates: usize,
    pub max_lag: usize,
    pub qq_points: usize,
    pub spell_thresholds: Vec<f64>,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            return_periods: ReturnPeriodConfig::default(),
            n_replicates: 200,
            max_lag: 20,
            qq_points: 100,
            spell_thresholds: vec![10.0, 50.0],
        }
    }
}

/// Data behind the six validation panels.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationBundle {
    pub qq: Vec<QqPoint>,
    pub return_periods: GhReturnPeriods,
    pub empirical: ReturnPeriodCurve,
    pub acf: Vec<AcfComparison>,
    pub spells: Vec<SpellComparison>,
}

pub fn validate(series: &CensoredSeries, chain: &Chain, config: &ValidationConfig) -> Result<ValidationBundle> {
    let rp = &config.return_periods;
    let replicates =
        simulate_ensemble(chain, config.n_replicates, series.len(), &series.covariates, rp.seed.wrapping_add(1))?;
    let pooled: Vec<f64> = replicates.iter().flatten().copied().collect();
    Ok(ValidationBundle {
        qq: qq_points(&series.observed, &pooled, config.qq_points)?,
        return_periods: return_period_curve(chain, series, rp)?,
        empirical: empirical_return_periods(&series.observed, rp.weeks_per_year)?,
        acf: compare_acf(&series.observed, &replicates, config.max_lag)?,
        spells: compare_spells(&series.observed, &replicates, &config.spell_thresholds),
    })
}
