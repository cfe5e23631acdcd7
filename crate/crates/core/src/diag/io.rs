//! Plot-ready CSV output. Numbers use shortest round-trip formatting.

use std::path::Path;

use super::{AcfComparison, QqPoint, ReturnLevelBand, ReturnPeriodCurve, SpellComparison};
use crate::error::Result;

fn num(v: f64) -> String {
    format!("{v:?}")
}

/// Long format: `source, level, period, lower, upper`.
pub fn write_curves_csv(curves: &[ReturnPeriodCurve], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["source", "level", "period", "lower", "upper"])?;
    for c in curves {
        for i in 0..c.levels.len() {
            w.write_record([c.source.to_string(), num(c.levels[i]), num(c.periods[i]), num(c.lower[i]), num(c.upper[i])])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_return_levels_csv(bands: &[ReturnLevelBand], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["source", "period", "estimate", "lower", "upper", "width"])?;
    for b in bands {
        w.write_record([
            b.source.to_string(),
            num(b.period),
            num(b.estimate),
            num(b.lower),
            num(b.upper),
            num(b.width),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_qq_csv(points: &[QqPoint], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["prob", "empirical", "model"])?;
    for q in points {
        w.write_record([num(q.prob), num(q.empirical), num(q.model)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_acf_csv(rows: &[AcfComparison], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["lag", "observed", "sim_mean", "lower", "upper"])?;
    for r in rows {
        w.write_record([r.lag.to_string(), num(r.observed), num(r.sim_mean), num(r.lower), num(r.upper)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_spells_csv(rows: &[SpellComparison], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["kind", "threshold", "length", "observed", "sim_mean", "lower", "upper"])?;
    for r in rows {
        w.write_record([
            format!("{:?}", r.kind),
            num(r.threshold),
            r.length.to_string(),
            r.observed.to_string(),
            num(r.sim_mean),
            num(r.lower),
            num(r.upper),
        ])?;
    }
    w.flush()?;
    Ok(())
}
