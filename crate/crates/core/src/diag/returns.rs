use serde::{Deserialize, Serialize};

use super::{map_ensemble, ReturnLevelBand};
use crate::error::{Error, Result};
use crate::infer::Chain;
use crate::model::CensoredSeries;
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CurveSource {
    Gh,
    Gp { threshold: f64 },
    Gw,
    Empirical,
}

impl std::fmt::Display for CurveSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CurveSource::Gh => write!(f, "GH"),
            CurveSource::Gp { threshold } => write!(f, "GP@{threshold}"),
            CurveSource::Gw => write!(f, "GW"),
            CurveSource::Empirical => write!(f, "empirical"),
        }
    }
}

/// Return periods (years) over a level grid with a pointwise 95% band.
/// Infinite periods mark levels beyond the simulated record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnPeriodCurve {
    pub source: CurveSource,
    pub levels: Vec<f64>,
    pub periods: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl ReturnPeriodCurve {
    pub fn open_ended(&self) -> Vec<bool> {
        self.periods.iter().map(|p| p.is_infinite()).collect()
    }
}

/// Exceedance probabilities of a sample by the Weibull plotting position:
/// the value of (tie-averaged) descending rank `m` among `n` has exceedance
/// probability `m / (n + 1)`; `ln p` is linear in the level between
/// consecutive distinct values.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalTail {
    /// Distinct values, descending, with their exceedance probabilities.
    points: Vec<(f64, f64)>,
}

impl EmpiricalTail {
    pub fn new(values: &[f64]) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("empirical tail needs a non-empty finite sample".into()));
        }
        let mut v = values.to_vec();
        v.sort_by(|a, b| b.total_cmp(a));
        let n1 = v.len() as f64 + 1.0;
        let mut points = Vec::new();
        let mut i = 0;
        while i < v.len() {
            let mut j = i;
            while j + 1 < v.len() && v[j + 1] == v[i] {
                j += 1;
            }
            let rank = (i + j) as f64 / 2.0 + 1.0;
            points.push((v[i], rank / n1));
            i = j + 1;
        }
        Ok(Self { points })
    }

    /// `(level, exceedance probability)`, levels descending.
    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// `P(X > x)`; `None` above the sample maximum.
    pub fn exceedance(&self, x: f64) -> Option<f64> {
        let pts = &self.points;
        if x > pts[0].0 {
            return None;
        }
        let k = pts.partition_point(|p| p.0 >= x);
        if k >= pts.len() {
            return Some(pts[pts.len() - 1].1);
        }
        if k == 0 {
            return Some(pts[0].1);
        }
        let (x0, p0) = pts[k - 1];
        let (x1, p1) = pts[k];
        let t = (x0 - x) / (x0 - x1);
        Some((p0.ln() + t * (p1.ln() - p0.ln())).exp())
    }

    /// Level exceeded with probability `p`; `None` when `p` is below the
    /// smallest plotting position.
    pub fn level(&self, p: f64) -> Option<f64> {
        let pts = &self.points;
        if p < pts[0].1 {
            return None;
        }
        let k = pts.partition_point(|q| q.1 <= p);
        if k >= pts.len() {
            return Some(pts[pts.len() - 1].0);
        }
        let (x0, p0) = pts[k - 1];
        let (x1, p1) = pts[k];
        let t = (p.ln() - p0.ln()) / (p1.ln() - p0.ln());
        Some(x0 + t * (x1 - x0))
    }
}

/// Plotting-position return periods of the positive values of a series.
pub fn empirical_return_periods(values: &[f64], weeks_per_year: f64) -> Result<ReturnPeriodCurve> {
    let tail = EmpiricalTail::new(values)?;
    let mut pts: Vec<(f64, f64)> =
        tail.points().iter().filter(|p| p.0 > 0.0).map(|&(x, p)| (x, 1.0 / (weeks_per_year * p))).collect();
    pts.reverse();
    let periods: Vec<f64> = pts.iter().map(|p| p.1).collect();
    Ok(ReturnPeriodCurve {
        source: CurveSource::Empirical,
        levels: pts.iter().map(|p| p.0).collect(),
        lower: periods.clone(),
        upper: periods.clone(),
        periods,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReturnPeriodConfig {
    pub n_sims: usize,
    /// Weeks per simulated path.
    pub horizon: usize,
    /// Level grid; derived from the observed series when empty.
    pub levels: Vec<f64>,
    pub weeks_per_year: f64,
    /// Periods (years) at which return-level bands are reported.
    pub reference_periods: Vec<f64>,
    pub seed: u64,
}

impl Default for ReturnPeriodConfig {
    fn default() -> Self {
        Self {
            n_sims: 1000,
            horizon: 100_000,
            levels: Vec::new(),
            weeks_per_year: 26.0,
            reference_periods: vec![10.0, 50.0, 100.0],
            seed: 1,
        }
    }
}

impl ReturnPeriodConfig {
    /// Sixty levels from the median positive observation to 1.5 times the maximum.
    pub fn level_grid(&self, observed: &[f64]) -> Vec<f64> {
        if !self.levels.is_empty() {
            return self.levels.clone();
        }
        let pos: Vec<f64> = observed.iter().copied().filter(|&x| x > 0.0).collect();
        if pos.is_empty() {
            return Vec::new();
        }
        let lo = stats::quantiles(&pos, &[0.5])[0];
        let hi = 1.5 * pos.iter().copied().fold(f64::MIN, f64::max);
        (0..60).map(|i| lo + (hi - lo) * i as f64 / 59.0).collect()
    }

    fn validate(&self) -> Result<()> {
        if self.n_sims == 0 || self.horizon == 0 || !(self.weeks_per_year > 0.0) {
            return Err(Error::Config(format!("invalid return-period settings {self:?}")));
        }
        Ok(())
    }
}

/// Quantile of sorted values that may end in `+∞`.
fn quantile_with_inf(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let (lo, hi) = (h.floor() as usize, h.ceil() as usize);
    if sorted[lo] == sorted[hi] {
        sorted[lo]
    } else if sorted[hi].is_infinite() {
        f64::INFINITY
    } else {
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

fn band(mut xs: Vec<f64>) -> (f64, f64, f64) {
    xs.sort_by(f64::total_cmp);
    (quantile_with_inf(&xs, 0.5), quantile_with_inf(&xs, 0.025), quantile_with_inf(&xs, 0.975))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GhReturnPeriods {
    /// Median period across simulations, with the 2.5%/97.5% band.
    pub curve: ReturnPeriodCurve,
    pub return_levels: Vec<ReturnLevelBand>,
}

/// GH return periods from posterior-predictive simulation. Each simulation
/// uses one posterior draw (spread evenly over the chain), runs `horizon`
/// weeks with covariates at zero and yields its own empirical return-period
/// curve; bands are quantiles across simulations.
pub fn return_period_curve(
    chain: &Chain,
    series: &CensoredSeries,
    config: &ReturnPeriodConfig,
) -> Result<GhReturnPeriods> {
    config.validate()?;
    let levels = config.level_grid(&series.observed);
    let w = config.weeks_per_year;
    let refs = &config.reference_periods;
    let per_sim = map_ensemble(chain, config.n_sims, config.horizon, &[], config.seed, |y| {
        let tail = EmpiricalTail::new(&y).expect("simulated values are finite");
        let periods: Vec<f64> =
            levels.iter().map(|&x| tail.exceedance(x).map_or(f64::INFINITY, |p| 1.0 / (w * p))).collect();
        let rl: Vec<f64> = refs.iter().map(|&t| tail.level(1.0 / (w * t)).unwrap_or(f64::INFINITY)).collect();
        (periods, rl)
    })?;
    let (mut periods, mut lower, mut upper) = (Vec::new(), Vec::new(), Vec::new());
    for i in 0..levels.len() {
        let (m, l, u) = band(per_sim.iter().map(|s| s.0[i]).collect());
        periods.push(m);
        lower.push(l);
        upper.push(u);
    }
    let return_levels = refs
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let (m, l, u) = band(per_sim.iter().map(|s| s.1[j]).collect());
            ReturnLevelBand { source: CurveSource::Gh, period: t, estimate: m, lower: l, upper: u, width: u - l }
        })
        .collect();
    Ok(GhReturnPeriods {
        curve: ReturnPeriodCurve { source: CurveSource::Gh, levels, periods, lower, upper },
        return_levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn largest_value_period() {
        // 10 seasons of 26 weeks
        let xs: Vec<f64> = (1..=260).map(|i| i as f64).collect();
        let c = empirical_return_periods(&xs, 26.0).unwrap();
        assert_eq!(*c.levels.last().unwrap(), 260.0);
        assert!((c.periods.last().unwrap() - 261.0 / 26.0).abs() < 1e-12);
        assert!(c.periods.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn ties_share_averaged_rank() {
        let t = EmpiricalTail::new(&[5.0, 3.0, 3.0, 1.0]).unwrap();
        assert_eq!(t.points(), &[(5.0, 0.2), (3.0, 0.5), (1.0, 0.8)]);
    }

    #[test]
    fn exceedance_and_level_are_inverse() {
        let xs: Vec<f64> = (0..100).map(|i| ((i * 37) % 100) as f64 * 0.7 + 0.1).collect();
        let t = EmpiricalTail::new(&xs).unwrap();
        assert!(t.exceedance(1e3).is_none());
        for x in [5.0, 20.3, 50.0, 69.0] {
            let p = t.exceedance(x).unwrap();
            assert!((t.level(p).unwrap() - x).abs() < 1e-9);
        }
        let mut last = 1.0;
        for i in 0..300 {
            let p = t.exceedance(i as f64 * 0.23).unwrap();
            assert!(p <= last);
            last = p;
        }
    }

    #[test]
    fn exponential_points_follow_analytic_curve() {
        use rand::SeedableRng;
        use rand_distr::{Distribution, Exp1};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let xs: Vec<f64> = (0..5000).map(|_| Exp1.sample(&mut rng)).collect();
        let t = EmpiricalTail::new(&xs).unwrap();
        for (m, &(x, p)) in t.points().iter().enumerate().skip(24).take(1000) {
            let rel = (p.ln() + x).abs();
            assert!(rel < 4.0 / ((m + 1) as f64).sqrt(), "rank {}: ln p {} vs {}", m + 1, p.ln(), -x);
        }
    }

    #[test]
    fn infinite_quantiles() {
        let v = [1.0, 2.0, f64::INFINITY, f64::INFINITY];
        assert_eq!(quantile_with_inf(&v, 0.0), 1.0);
        assert_eq!(quantile_with_inf(&v, 0.5), f64::INFINITY);
        assert_eq!(quantile_with_inf(&v, 1.0), f64::INFINITY);
        assert_eq!(quantile_with_inf(&v, 1.0 / 3.0), 2.0);
    }
}
