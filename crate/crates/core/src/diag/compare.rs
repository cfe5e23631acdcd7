use serde::{Deserialize, Serialize};

use super::returns::{empirical_return_periods, return_period_curve, CurveSource, ReturnPeriodConfig, ReturnPeriodCurve};
use crate::dist::{fit_gp_exceedances, fit_gw, LogTail};
use crate::error::Result;
use crate::infer::Chain;
use crate::model::CensoredSeries;

const Z975: f64 = 1.959963984540054;

/// Return level at a fixed period with its 95% band, in level units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnLevelBand {
    pub source: CurveSource,
    pub period: f64,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineComparison {
    pub curves: Vec<ReturnPeriodCurve>,
    pub return_levels: Vec<ReturnLevelBand>,
}

impl BaselineComparison {
    pub fn band(&self, source: CurveSource, period: f64) -> Option<&ReturnLevelBand> {
        self.return_levels.iter().find(|b| b.source == source && b.period == period)
    }

    /// Whether the GH band at `period` is narrower than every GP band.
    pub fn gh_narrower_than_gp(&self, period: f64) -> Option<bool> {
        let gh = self.band(CurveSource::Gh, period)?.width;
        let gp: Vec<f64> = self
            .return_levels
            .iter()
            .filter(|b| matches!(b.source, CurveSource::Gp { .. }) && b.period == period)
            .map(|b| b.width)
            .collect();
        (!gp.is_empty()).then(|| gp.iter().all(|&w| gh < w))
    }
}

/// Smallest level `x ≥ lo` with `f(x) = target` for decreasing `f`;
/// NaN when `f(lo)` is already below the target, `+∞` when never reached.
fn solve_level<F: Fn(f64) -> f64>(f: F, target: f64, lo: f64) -> f64 {
    if f(lo) < target {
        return f64::NAN;
    }
    let mut a = lo;
    let mut b = lo.abs().max(1.0) * 2.0;
    let mut doublings = 0;
    while f(b) >= target {
        a = b;
        b *= 2.0;
        doublings += 1;
        if doublings > 200 {
            return f64::INFINITY;
        }
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if f(m) >= target {
            a = m;
        } else {
            b = m;
        }
        if b - a <= 1e-12 * b.abs() {
            break;
        }
    }
    0.5 * (a + b)
}

fn delta_curve<F: Fn(f64) -> LogTail>(source: CurveSource, levels: &[f64], w: f64, tail: F) -> ReturnPeriodCurve {
    let period = |lp: f64| 1.0 / (w * lp.exp());
    let (mut periods, mut lower, mut upper) = (Vec::new(), Vec::new(), Vec::new());
    for &x in levels {
        let t = tail(x);
        periods.push(period(t.log_prob));
        lower.push(period(t.log_prob + Z975 * t.std_error));
        upper.push(period(t.log_prob - Z975 * t.std_error));
    }
    ReturnPeriodCurve { source, levels: levels.to_vec(), periods, lower, upper }
}

fn delta_band<F: Fn(f64) -> LogTail>(source: CurveSource, period: f64, w: f64, lo: f64, tail: F) -> ReturnLevelBand {
    let target = -(w * period).ln();
    let estimate = solve_level(|x| tail(x).log_prob, target, lo);
    let lower = solve_level(|x| { let t = tail(x); t.log_prob - Z975 * t.std_error }, target, lo);
    let upper = solve_level(|x| { let t = tail(x); t.log_prob + Z975 * t.std_error }, target, lo);
    ReturnLevelBand { source, period, estimate, lower, upper, width: upper - lower }
}

/// GP fits at each threshold and a GW fit to the positive values, with
/// delta-method bands on the log exceedance probability.
pub fn baseline_curves(
    values: &[f64],
    thresholds: &[f64],
    levels: &[f64],
    config: &ReturnPeriodConfig,
) -> Result<(Vec<ReturnPeriodCurve>, Vec<ReturnLevelBand>)> {
    let w = config.weeks_per_year;
    let (mut curves, mut bands) = (Vec::new(), Vec::new());
    for &u in thresholds {
        let fit = fit_gp_exceedances(values, u)?;
        let source = CurveSource::Gp { threshold: u };
        let above: Vec<f64> = levels.iter().copied().filter(|&x| x >= u).collect();
        curves.push(delta_curve(source, &above, w, |x| fit.log_tail(x)));
        for &t in &config.reference_periods {
            bands.push(delta_band(source, t, w, u, |x| fit.log_tail(x)));
        }
    }
    let gw = fit_gw(values)?;
    let start = values.iter().copied().filter(|&x| x > 0.0).fold(f64::INFINITY, f64::min);
    curves.push(delta_curve(CurveSource::Gw, levels, w, |x| gw.log_tail(x)));
    for &t in &config.reference_periods {
        bands.push(delta_band(CurveSource::Gw, t, w, start, |x| gw.log_tail(x)));
    }
    Ok((curves, bands))
}

/// GH posterior-predictive curve overlaid with GP and GW baselines and the
/// empirical plotting positions.
pub fn compare_baselines(
    series: &CensoredSeries,
    chain: &Chain,
    gp_thresholds: &[f64],
    config: &ReturnPeriodConfig,
) -> Result<BaselineComparison> {
    let gh = return_period_curve(chain, series, config)?;
    let (base_curves, base_bands) = baseline_curves(&series.observed, gp_thresholds, &gh.curve.levels, config)?;
    let mut curves = vec![gh.curve];
    curves.extend(base_curves);
    curves.push(empirical_return_periods(&series.observed, config.weeks_per_year)?);
    let mut return_levels = gh.return_levels;
    return_levels.extend(base_bands);
    Ok(BaselineComparison { curves, return_levels })
}
