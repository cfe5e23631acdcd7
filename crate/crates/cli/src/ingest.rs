//! Daily rainfall ingestion: season filtering, 7-day aggregation and the
//! join of monthly climate indices.
//!
//! Each season is split into consecutive 7-day blocks starting at its first
//! recorded day. A block enters the weekly series only when all seven days
//! are present and in season, so a trailing partial week (or a block with a
//! missing day) is dropped and accounted for in the report.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::{Datelike, Days, NaiveDate};
use ghrain::model::CensoredSeries;
use ghrain::stats;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestionConfig {
    /// Daily rainfall CSV with a header row.
    pub input: Option<PathBuf>,
    pub date_column: String,
    /// chrono format of the daily dates.
    pub date_format: String,
    /// Rainfall column, in mm.
    pub rainfall_column: String,
    /// Calendar months (1-12) forming one contiguous, possibly wrapping, season.
    pub season_months: Vec<u32>,
    pub covariates: Vec<CovariateSource>,
    /// Rescale each index to zero mean and unit variance over the weeks.
    pub standardize: bool,
}

impl Default for IngestionConfig {
    fn default() -> Self {
        Self {
            input: None,
            date_column: "date".into(),
            date_format: "%Y-%m-%d".into(),
            rainfall_column: "rainfall".into(),
            season_months: vec![11, 12, 1, 2, 3, 4],
            covariates: Vec::new(),
            standardize: true,
        }
    }
}

/// A monthly climate index with dates as `YYYY-MM` or `YYYY-MM-DD`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CovariateSource {
    pub path: PathBuf,
    pub name: String,
    #[serde(default = "default_date_column")]
    pub date_column: String,
    /// Value column; the second column when absent.
    #[serde(default)]
    pub value_column: Option<String>,
}

fn default_date_column() -> String {
    "date".into()
}

/// The months of a season and the month it starts in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Season {
    start: u32,
    months: [bool; 13],
}

impl Season {
    pub fn from_months(months: &[u32]) -> Result<Self> {
        let mut set = [false; 13];
        for &m in months {
            if !(1..=12).contains(&m) || set[m as usize] {
                return Err(CliError::Config(format!("season months {months:?} must be distinct values in 1..=12")));
            }
            set[m as usize] = true;
        }
        if months.is_empty() {
            return Err(CliError::Config("season needs at least one month".into()));
        }
        let prev = |m: u32| if m == 1 { 12 } else { m - 1 };
        let starts: Vec<u32> = (1..=12).filter(|&m| set[m as usize] && !set[prev(m) as usize]).collect();
        let start = match starts.as_slice() {
            [] => months[0],
            [s] => *s,
            _ => return Err(CliError::Config(format!("season months {months:?} are not one contiguous block"))),
        };
        Ok(Self { start, months: set })
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.months[date.month() as usize]
    }

    /// Calendar year in which the season containing `date` began.
    pub fn season_year(&self, date: NaiveDate) -> i32 {
        if date.month() >= self.start {
            date.year()
        } else {
            date.year() - 1
        }
    }

    pub fn start_month(&self) -> u32 {
        self.start
    }

    /// Every day of the season beginning in `year`.
    pub fn days(&self, year: i32) -> Vec<NaiveDate> {
        let mut d = NaiveDate::from_ymd_opt(year, self.start, 1).expect("valid month start");
        let mut out = Vec::new();
        while self.contains(d) && self.season_year(d) == year && out.len() < 366 {
            out.push(d);
            d = d.checked_add_days(Days::new(1)).expect("date in range");
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovariateReport {
    pub name: String,
    pub months_read: usize,
    /// Mean and standard deviation over the weeks before standardization.
    pub mean: f64,
    pub sd: f64,
    pub standardized: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub days_read: usize,
    pub in_season_days: usize,
    pub in_season_total: f64,
    pub seasons: usize,
    pub weeks: usize,
    pub censored_weeks: usize,
    pub censored_fraction: f64,
    pub weekly_total: f64,
    /// Incomplete 7-day blocks (trailing partial weeks and blocks with gaps).
    pub dropped_blocks: usize,
    pub dropped_days: usize,
    pub dropped_total: f64,
    pub weeks_per_year: f64,
    pub first_week: Option<NaiveDate>,
    pub last_week: Option<NaiveDate>,
    pub covariates: Vec<CovariateReport>,
}

fn parse_err(path: &Path, line: u64, msg: impl std::fmt::Display) -> CliError {
    CliError::Data(format!("{}: line {line}: {msg}", path.display()))
}

fn column(headers: &csv::StringRecord, name: &str, path: &Path) -> Result<usize> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| CliError::Data(format!("{}: no column named {name:?}", path.display())))
}

fn reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Daily values sorted by date; duplicate dates and negative rain are errors.
pub fn read_daily(config: &IngestionConfig, path: &Path) -> Result<Vec<(NaiveDate, f64)>> {
    let mut r = reader(path)?;
    let headers = r.headers()?.clone();
    let (di, ri) = (column(&headers, &config.date_column, path)?, column(&headers, &config.rainfall_column, path)?);
    let mut days: BTreeMap<NaiveDate, (f64, u64)> = BTreeMap::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |i: usize| rec.get(i).ok_or_else(|| parse_err(path, line, "missing field"));
        let raw_date = field(di)?;
        let date = NaiveDate::parse_from_str(raw_date, &config.date_format)
            .map_err(|e| parse_err(path, line, format!("unparseable date {raw_date:?} ({e})")))?;
        let raw_rain = field(ri)?;
        let rain: f64 =
            raw_rain.parse().map_err(|_| parse_err(path, line, format!("unparseable rainfall {raw_rain:?}")))?;
        if !rain.is_finite() || rain < 0.0 {
            return Err(parse_err(path, line, format!("rainfall {rain} must be finite and non-negative")));
        }
        if let Some((_, first)) = days.insert(date, (rain, line)) {
            return Err(parse_err(path, line, format!("date {date} already given on line {first}")));
        }
    }
    Ok(days.into_iter().map(|(d, (v, _))| (d, v)).collect())
}

fn parse_month(raw: &str) -> Option<(i32, u32)> {
    let d = NaiveDate::parse_from_str(raw, "%Y-%m-%d")
        .or_else(|_| NaiveDate::parse_from_str(&format!("{raw}-01"), "%Y-%m-%d"))
        .ok()?;
    Some((d.year(), d.month()))
}

/// Monthly index values keyed by `(year, month)`.
pub fn read_monthly(source: &CovariateSource) -> Result<BTreeMap<(i32, u32), f64>> {
    let path = &source.path;
    let mut r = reader(path)?;
    let headers = r.headers()?.clone();
    let di = column(&headers, &source.date_column, path)?;
    let vi = match &source.value_column {
        Some(name) => column(&headers, name, path)?,
        None => (0..headers.len())
            .find(|&i| i != di)
            .ok_or_else(|| CliError::Data(format!("{}: no value column", path.display())))?,
    };
    let mut out = BTreeMap::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let line = rec.position().map_or(0, |p| p.line());
        let raw_date = rec.get(di).unwrap_or("");
        let month = parse_month(raw_date).ok_or_else(|| parse_err(path, line, format!("unparseable month {raw_date:?}")))?;
        let raw = rec.get(vi).unwrap_or("");
        let v: f64 = raw
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| parse_err(path, line, format!("unparseable value {raw:?}")))?;
        if out.insert(month, v).is_some() {
            return Err(parse_err(path, line, format!("month {}-{:02} given twice", month.0, month.1)));
        }
    }
    Ok(out)
}

struct Weekly {
    starts: Vec<NaiveDate>,
    sums: Vec<f64>,
    seasons: usize,
    dropped_blocks: usize,
    dropped_days: usize,
    dropped_total: f64,
}

/// Sum in-season days into complete 7-day blocks, season by season.
fn aggregate(days: &[(NaiveDate, f64)], season: &Season) -> Weekly {
    let mut by_season: BTreeMap<i32, Vec<(NaiveDate, f64)>> = BTreeMap::new();
    for &(d, v) in days {
        by_season.entry(season.season_year(d)).or_default().push((d, v));
    }
    let mut w = Weekly { starts: Vec::new(), sums: Vec::new(), seasons: 0, dropped_blocks: 0, dropped_days: 0, dropped_total: 0.0 };
    for obs in by_season.values() {
        let first = obs[0].0;
        let mut blocks: BTreeMap<i64, (usize, f64)> = BTreeMap::new();
        for &(d, v) in obs {
            let e = blocks.entry((d - first).num_days() / 7).or_insert((0, 0.0));
            e.0 += 1;
            e.1 += v;
        }
        let before = w.sums.len();
        for (k, (count, sum)) in blocks {
            if count == 7 {
                w.starts.push(first.checked_add_days(Days::new(7 * k as u64)).expect("date in range"));
                w.sums.push(sum);
            } else {
                w.dropped_blocks += 1;
                w.dropped_days += count;
                w.dropped_total += sum;
            }
        }
        if w.sums.len() > before {
            w.seasons += 1;
        }
    }
    w
}

/// Standardize or copy the weekly values of one index.
fn join_covariate(
    source: &CovariateSource,
    weeks: &[NaiveDate],
    standardize: bool,
) -> Result<(Vec<f64>, CovariateReport)> {
    let monthly = read_monthly(source)?;
    let mut vals = Vec::with_capacity(weeks.len());
    for d in weeks {
        let key = (d.year(), d.month());
        let v = monthly.get(&key).ok_or_else(|| {
            CliError::Data(format!("covariate {} has no value for month {}-{:02}", source.name, key.0, key.1))
        })?;
        vals.push(*v);
    }
    let mean = stats::mean(&vals);
    let sd = if vals.len() > 1 { stats::variance(&vals).sqrt() } else { 0.0 };
    if standardize {
        if !(sd > 0.0) {
            return Err(CliError::Data(format!("covariate {} is constant over the weeks", source.name)));
        }
        for v in &mut vals {
            *v = (*v - mean) / sd;
        }
    }
    let report = CovariateReport { name: source.name.clone(), months_read: monthly.len(), mean, sd, standardized: standardize };
    Ok((vals, report))
}

/// Read, filter, aggregate and join; the weekly series is censored wherever
/// a week's total is exactly zero.
pub fn ingest(config: &IngestionConfig) -> Result<(CensoredSeries, IngestReport)> {
    let path = config.input.as_deref().ok_or_else(|| CliError::Config("no daily input file given".into()))?;
    let season = Season::from_months(&config.season_months)?;
    let mut sources = config.covariates.clone();
    sources.sort_by(|a, b| a.name.cmp(&b.name));
    if let Some(w) = sources.windows(2).find(|w| w[0].name == w[1].name) {
        return Err(CliError::Config(format!("covariate {} listed twice", w[0].name)));
    }

    let days = read_daily(config, path)?;
    let in_season: Vec<(NaiveDate, f64)> = days.iter().copied().filter(|(d, _)| season.contains(*d)).collect();
    let weekly = aggregate(&in_season, &season);
    if weekly.sums.is_empty() {
        return Err(CliError::Data(format!("{}: no complete in-season week", path.display())));
    }

    let mut columns = Vec::new();
    let mut reports = Vec::new();
    for s in &sources {
        let (vals, rep) = join_covariate(s, &weekly.starts, config.standardize)?;
        columns.push(vals);
        reports.push(rep);
    }
    let rows: Vec<Vec<f64>> = (0..weekly.sums.len()).map(|t| columns.iter().map(|c| c[t]).collect()).collect();
    let names = sources.iter().map(|s| s.name.clone()).collect();
    let series = CensoredSeries::new(weekly.starts.clone(), weekly.sums.clone(), names, rows)?;

    let report = IngestReport {
        days_read: days.len(),
        in_season_days: in_season.len(),
        in_season_total: in_season.iter().map(|d| d.1).sum(),
        seasons: weekly.seasons,
        weeks: series.len(),
        censored_weeks: series.censored_count(),
        censored_fraction: series.censored_fraction(),
        weekly_total: weekly.sums.iter().sum(),
        dropped_blocks: weekly.dropped_blocks,
        dropped_days: weekly.dropped_days,
        dropped_total: weekly.dropped_total,
        weeks_per_year: series.len() as f64 / weekly.seasons as f64,
        first_week: weekly.starts.first().copied(),
        last_week: weekly.starts.last().copied(),
        covariates: reports,
    };
    Ok((series, report))
}
