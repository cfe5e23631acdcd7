//! Synthetic daily rainfall and monthly indices from known parameters.
//!
//! The weekly process is simulated on the season calendar used by
//! ingestion, then each weekly total is spread over a random number of wet
//! days. Days after the last complete week of a season are dry, so ingesting
//! the daily record returns the simulated weekly series up to rounding.

use chrono::{Datelike, NaiveDate};
use ghrain::diag::simulate_series;
use ghrain::model::CensoredSeries;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::config::SimulateConfig;
use crate::error::{CliError, Result};
use crate::ingest::Season;

/// A monthly index keyed by `(year, month)`, in calendar order.
pub type MonthlySeries = Vec<((i32, u32), f64)>;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticRecord {
    pub daily: Vec<(NaiveDate, f64)>,
    /// Weekly totals with raw (unstandardized) index values.
    pub weekly: CensoredSeries,
    pub monthly: Vec<(String, MonthlySeries)>,
}

fn stream(seed: u64, k: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    rng
}

fn next_month((y, m): (i32, u32)) -> (i32, u32) {
    if m == 12 {
        (y + 1, 1)
    } else {
        (y, m + 1)
    }
}

/// Stationary Gaussian AR(1) with unit variance over consecutive months.
fn synthetic_index(first: (i32, u32), last: (i32, u32), phi: f64, rng: &mut ChaCha8Rng) -> MonthlySeries {
    let mut out = Vec::new();
    let mut month = first;
    let mut x: f64 = StandardNormal.sample(rng);
    loop {
        out.push((month, x));
        if month == last {
            return out;
        }
        month = next_month(month);
        let e: f64 = StandardNormal.sample(rng);
        x = phi * x + (1.0 - phi * phi).sqrt() * e;
    }
}

/// Spread `total` over a uniformly chosen number of the 7 days with
/// exponential weights.
fn split_week<R: Rng>(total: f64, rng: &mut R) -> [f64; 7] {
    let mut days = [0.0; 7];
    if total <= 0.0 {
        return days;
    }
    let wet = rng.random_range(1..=7);
    let idx = sample(rng, 7, wet);
    let w: Vec<f64> = (0..wet).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = w.iter().sum();
    for (k, i) in idx.iter().enumerate() {
        days[i] = total * w[k] / s;
    }
    days
}

pub fn synthesize(config: &SimulateConfig, season: &Season) -> Result<SyntheticRecord> {
    let truths = &config.truths;
    if config.covariates.len() != truths.betas.len() {
        return Err(CliError::Config(format!(
            "{} synthetic covariates for {} coefficients",
            config.covariates.len(),
            truths.betas.len()
        )));
    }
    if config.seasons == 0 {
        return Err(CliError::Config("need at least one season".into()));
    }
    if !(config.covariate_persistence.abs() < 1.0) {
        return Err(CliError::Config("covariate persistence must lie in (-1, 1)".into()));
    }
    let params = truths.to_params()?;

    let calendar: Vec<Vec<NaiveDate>> =
        (0..config.seasons).map(|s| season.days(config.start_year + s as i32)).collect();
    let starts: Vec<NaiveDate> =
        calendar.iter().flat_map(|days| days.chunks_exact(7).map(|w| w[0]).collect::<Vec<_>>()).collect();
    let first = calendar[0][0];
    let last = *calendar.last().and_then(|d| d.last()).expect("non-empty season");

    let mut cov_rng = stream(config.seed, 1);
    let monthly: Vec<(String, MonthlySeries)> = config
        .covariates
        .iter()
        .map(|name| {
            let series = synthetic_index(
                (first.year(), first.month()),
                (last.year(), last.month()),
                config.covariate_persistence,
                &mut cov_rng,
            );
            (name.clone(), series)
        })
        .collect();
    let rows: Vec<Vec<f64>> = starts
        .iter()
        .map(|d| {
            monthly
                .iter()
                .map(|(_, s)| s.iter().find(|(k, _)| *k == (d.year(), d.month())).expect("month generated").1)
                .collect()
        })
        .collect();

    let mut sim_rng = stream(config.seed, 0);
    let sim = simulate_series(&params, starts.len(), &config.covariates, &rows, &mut sim_rng)?;
    let weekly = CensoredSeries::new(starts, sim.observed, config.covariates.clone(), rows)?;

    let mut day_rng = stream(config.seed, 2);
    let mut daily = Vec::new();
    let mut t = 0;
    for days in &calendar {
        for chunk in days.chunks(7) {
            if chunk.len() == 7 {
                let split = split_week(weekly.observed[t], &mut day_rng);
                t += 1;
                daily.extend(chunk.iter().copied().zip(split));
            } else {
                daily.extend(chunk.iter().map(|&d| (d, 0.0)));
            }
        }
    }
    Ok(SyntheticRecord { daily, weekly, monthly })
}
