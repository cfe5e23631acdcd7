use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats;

/// Sample autocorrelations at lags `0..=max_lag`.
pub fn acf(values: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = values.len();
    if n <= max_lag {
        return Err(Error::Data(format!("series of length {n} is too short for lag {max_lag}")));
    }
    let m = stats::mean(values);
    let c0: f64 = values.iter().map(|x| (x - m).powi(2)).sum();
    if !(c0 > 0.0) {
        return Err(Error::Domain("autocorrelation of a constant series is undefined".into()));
    }
    Ok((0..=max_lag)
        .map(|k| (0..n - k).map(|t| (values[t] - m) * (values[t + k] - m)).sum::<f64>() / c0)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcfComparison {
    pub lag: usize,
    pub observed: f64,
    pub sim_mean: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Observed ACF against the 95% range over simulated replicates; constant
/// replicates are skipped.
pub fn compare_acf(observed: &[f64], sims: &[Vec<f64>], max_lag: usize) -> Result<Vec<AcfComparison>> {
    let obs = acf(observed, max_lag)?;
    let sim: Vec<Vec<f64>> = sims.iter().filter_map(|s| acf(s, max_lag).ok()).collect();
    if sim.is_empty() {
        return Err(Error::Numerical("no simulated replicate has a defined ACF".into()));
    }
    Ok((0..=max_lag)
        .map(|k| {
            let col: Vec<f64> = sim.iter().map(|r| r[k]).collect();
            let q = stats::quantiles(&col, &[0.025, 0.975]);
            AcfComparison { lag: k, observed: obs[k], sim_mean: stats::mean(&col), lower: q[0], upper: q[1] }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpellKind {
    /// Weeks with rainfall above the threshold.
    Over,
    /// Weeks with rainfall at or below the threshold.
    AtOrBelow,
    /// Weeks with no rain.
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpellDistribution {
    pub kind: SpellKind,
    pub threshold: f64,
    /// Distinct run lengths, ascending, with their counts.
    pub lengths: Vec<usize>,
    pub counts: Vec<usize>,
}

impl SpellDistribution {
    pub fn weeks(&self) -> usize {
        self.lengths.iter().zip(&self.counts).map(|(l, c)| l * c).sum()
    }

    pub fn count(&self, length: usize) -> usize {
        self.lengths.iter().position(|&l| l == length).map_or(0, |i| self.counts[i])
    }
}

fn runs(values: &[f64], kind: SpellKind, threshold: f64) -> SpellDistribution {
    let hit = |x: f64| match kind {
        SpellKind::Over => x > threshold,
        SpellKind::AtOrBelow => x <= threshold,
        SpellKind::Zero => x == 0.0,
    };
    let mut table = BTreeMap::new();
    let mut run = 0;
    for &x in values {
        if hit(x) {
            run += 1;
        } else if run > 0 {
            *table.entry(run).or_insert(0) += 1;
            run = 0;
        }
    }
    if run > 0 {
        *table.entry(run).or_insert(0) += 1;
    }
    SpellDistribution {
        kind,
        threshold,
        lengths: table.keys().copied().collect(),
        counts: table.values().copied().collect(),
    }
}

/// Run-length tables: over and at-or-below each threshold, then dry spells.
pub fn spell_distributions(values: &[f64], thresholds: &[f64]) -> Vec<SpellDistribution> {
    let mut out = Vec::new();
    for &u in thresholds {
        out.push(runs(values, SpellKind::Over, u));
        out.push(runs(values, SpellKind::AtOrBelow, u));
    }
    out.push(runs(values, SpellKind::Zero, 0.0));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpellComparison {
    pub kind: SpellKind,
    pub threshold: f64,
    pub length: usize,
    pub observed: usize,
    pub sim_mean: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Observed run counts per length against the spread over replicates.
pub fn compare_spells(observed: &[f64], sims: &[Vec<f64>], thresholds: &[f64]) -> Vec<SpellComparison> {
    let obs = spell_distributions(observed, thresholds);
    let sim: Vec<Vec<SpellDistribution>> = sims.iter().map(|s| spell_distributions(s, thresholds)).collect();
    let mut out = Vec::new();
    for (j, o) in obs.iter().enumerate() {
        let longest = sim
            .iter()
            .filter_map(|s| s[j].lengths.last().copied())
            .chain(o.lengths.last().copied())
            .max()
            .unwrap_or(0);
        for length in 1..=longest {
            let counts: Vec<f64> = sim.iter().map(|s| s[j].count(length) as f64).collect();
            let observed = o.count(length);
            let (mean, lower, upper) = if counts.is_empty() {
                (f64::NAN, f64::NAN, f64::NAN)
            } else {
                let q = stats::quantiles(&counts, &[0.025, 0.975]);
                (stats::mean(&counts), q[0], q[1])
            };
            if observed == 0 && mean == 0.0 {
                continue;
            }
            out.push(SpellComparison { kind: o.kind, threshold: o.threshold, length, observed, sim_mean: mean, lower, upper });
        }
    }
    out
}
