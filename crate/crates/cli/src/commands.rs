//! The `ingest`, `fit`, `simulate`, `validate`, `compare` and `simstudy` commands.

use std::fs;
use std::path::{Path, PathBuf};

use ghrain::diag::{
    compare_baselines, validate, write_acf_csv, write_curves_csv, write_qq_csv, write_return_levels_csv,
    write_spells_csv, CurveSource, ValidationConfig,
};
use ghrain::infer::{read_chain, run_mcmc, summarize, write_chain, write_summary_csv, Chain, ChainSummary, PriorSpec};
use ghrain::model::CensoredSeries;
use serde_json::json;

use crate::args::{Cli, Command};
use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::ingest::{ingest, IngestReport, Season};
use crate::manifest::RunManifest;
use crate::study::run_study;
use crate::synth::synthesize;

pub const SERIES_FILE: &str = "series.csv";
pub const CHAIN_DIR: &str = "chain";

/// Parse-independent entry point used by the binary.
pub fn run(cli: Cli) -> Result<()> {
    let cfg = cli.command.overrides().resolve()?;
    if let Some(n) = cfg.workers {
        // a pool may already exist when called repeatedly in one process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match cli.command {
        Command::Ingest(_) => cmd_ingest(&cfg),
        Command::Fit(_) => cmd_fit(&cfg).map(|_| ()),
        Command::Simulate(_) => cmd_simulate(&cfg),
        Command::Validate(_) => cmd_validate(&cfg),
        Command::Compare(_) => cmd_compare(&cfg),
        Command::Simstudy(_) => cmd_simstudy(&cfg),
    }
}

fn output_dir(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = cfg.output.clone().ok_or_else(|| CliError::Config("no output directory given (--output)".into()))?;
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

/// The weekly series with the files it came from.
pub struct LoadedSeries {
    pub series: CensoredSeries,
    pub report: Option<IngestReport>,
    pub inputs: Vec<PathBuf>,
}

impl LoadedSeries {
    pub fn weeks_per_year(&self) -> Option<f64> {
        self.report.as_ref().map(|r| r.weeks_per_year)
    }
}

pub fn load_series(cfg: &RunConfig) -> Result<LoadedSeries> {
    if let Some(path) = &cfg.data.weekly {
        let series = CensoredSeries::read_csv(path)?;
        return Ok(LoadedSeries { series, report: None, inputs: vec![path.clone()] });
    }
    let daily = &cfg.data.daily;
    if daily.input.is_none() {
        return Err(CliError::Config("no input data: give --input (daily) or --weekly".into()));
    }
    let (series, report) = ingest(daily)?;
    let mut inputs: Vec<PathBuf> = daily.input.iter().cloned().collect();
    let mut covs = daily.covariates.clone();
    covs.sort_by(|a, b| a.name.cmp(&b.name));
    inputs.extend(covs.into_iter().map(|c| c.path));
    Ok(LoadedSeries { series, report: Some(report), inputs })
}

fn load_chain(cfg: &RunConfig) -> Result<(Chain, Vec<PathBuf>)> {
    let dir = cfg.chain.clone().ok_or_else(|| CliError::Config("no chain directory given (--chain)".into()))?;
    let chain = read_chain(&dir)?;
    let mut files = vec![dir.join("draws.csv"), dir.join("manifest.json")];
    if dir.join("latents.csv").exists() {
        files.push(dir.join("latents.csv"));
    }
    Ok((chain, files))
}

fn check_match(chain: &Chain, series: &CensoredSeries) -> Result<()> {
    if chain.covariate_names != series.covariate_names {
        return Err(CliError::Data(format!(
            "chain covariates {:?} do not match data covariates {:?}",
            chain.covariate_names, series.covariate_names
        )));
    }
    Ok(())
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn print_ingest(r: &IngestReport) {
    println!(
        "{} weeks from {} in-season days over {} seasons; {} censored ({:.1}%); {} incomplete blocks dropped ({} days, {} mm)",
        r.weeks,
        r.in_season_days,
        r.seasons,
        r.censored_weeks,
        100.0 * r.censored_fraction,
        r.dropped_blocks,
        r.dropped_days,
        r.dropped_total
    );
}

pub fn cmd_ingest(cfg: &RunConfig) -> Result<()> {
    let out = output_dir(cfg)?;
    let data = load_series(cfg)?;
    data.series.write_csv(&out.join(SERIES_FILE))?;
    if let Some(r) = &data.report {
        write_json(&out.join("ingest.json"), r)?;
        print_ingest(r);
    }
    let mut m = RunManifest::new("ingest", cfg, &data.inputs, json!({ "ingest": data.report }))?;
    m.outputs = vec![SERIES_FILE.into(), "ingest.json".into()];
    m.write(&out)
}

fn prior_for<'a>(priors: &'a PriorSpec, name: &str) -> Option<&'a ghrain::infer::NormalPrior> {
    Some(match name {
        "a0" => &priors.a0,
        "a1" => &priors.a1,
        "alpha0" => &priors.alpha0,
        "alpha1" => &priors.alpha1,
        "lambda" => &priors.lambda,
        "psi" => &priors.psi,
        "tau" => &priors.tau,
        n if n.starts_with("beta_") => &priors.beta,
        _ => return None,
    })
}

/// Parameters whose posterior mean sits more than two prior scales from the
/// prior location, where the prior is likely pulling the fit.
pub fn prior_conflicts(summary: &ChainSummary, priors: &PriorSpec) -> Vec<String> {
    summary
        .parameters
        .iter()
        .filter_map(|p| {
            let prior = prior_for(priors, &p.name)?;
            let z = (p.mean - prior.location).abs() / prior.scale;
            (z > 2.0).then(|| {
                format!(
                    "posterior mean of {} ({}) lies {z:.1} prior scales from the prior location {}; \
                     the prior is informative at this data scale",
                    p.name, p.mean, prior.location
                )
            })
        })
        .collect()
}

fn print_summary(summary: &ChainSummary) {
    println!("{:<16} {:>14} {:>14} {:>14}", "parameter", "mean", "ci_lower", "ci_upper");
    for p in &summary.parameters {
        println!("{:<16} {:>14.5} {:>14.5} {:>14.5}", p.name, p.mean, p.lower, p.upper);
    }
    let rates: Vec<String> = summary.acceptance.iter().map(|(b, r)| format!("{b} {r:.2}")).collect();
    println!("acceptance: {}", rates.join(", "));
}

pub fn cmd_fit(cfg: &RunConfig) -> Result<ChainSummary> {
    let out = output_dir(cfg)?;
    let data = load_series(cfg)?;
    let chain = run_mcmc(&data.series, &cfg.priors, &cfg.mcmc)?;
    let summary = summarize(&chain)?;
    write_chain(&chain, &out.join(CHAIN_DIR))?;
    write_summary_csv(&summary, &out.join("summary.csv"))?;
    write_json(&out.join("summary.json"), &summary)?;
    data.series.write_csv(&out.join(SERIES_FILE))?;
    if let Some(r) = &data.report {
        write_json(&out.join("ingest.json"), r)?;
        print_ingest(r);
    }
    let warnings = prior_conflicts(&summary, &cfg.priors);
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    print_summary(&summary);
    let report = json!({ "ingest": data.report, "summary": summary, "warnings": warnings });
    let mut m = RunManifest::new("fit", cfg, &data.inputs, report)?;
    m.outputs = ["chain/draws.csv", "chain/manifest.json", "summary.csv", "summary.json", SERIES_FILE]
        .map(String::from)
        .to_vec();
    m.write(&out)?;
    Ok(summary)
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<()> {
    let out = output_dir(cfg)?;
    let daily_cfg = &cfg.data.daily;
    let season = Season::from_months(&daily_cfg.season_months)?;
    let rec = synthesize(&cfg.simulate, &season)?;

    let daily_path = out.join("daily.csv");
    let mut w = csv::Writer::from_path(&daily_path)?;
    w.write_record([daily_cfg.date_column.as_str(), daily_cfg.rainfall_column.as_str()])?;
    for (d, v) in &rec.daily {
        w.write_record([d.format(&daily_cfg.date_format).to_string(), format!("{v:?}")])?;
    }
    w.flush()?;
    let mut outputs = vec!["daily.csv".to_string(), SERIES_FILE.to_string()];
    let mut covariates = Vec::new();
    for (name, months) in &rec.monthly {
        let file = format!("{name}.csv");
        let mut w = csv::Writer::from_path(out.join(&file))?;
        w.write_record(["date", "value"])?;
        for ((y, m), v) in months {
            w.write_record([format!("{y}-{m:02}"), format!("{v:?}")])?;
        }
        w.flush()?;
        covariates.push(json!({ "path": file, "name": name }));
        outputs.push(file);
    }
    rec.weekly.write_csv(&out.join(SERIES_FILE))?;

    // ready-made config for fitting the synthetic record
    let mut fit = serde_json::to_value(daily_cfg)?;
    fit["input"] = json!("daily.csv");
    fit["covariates"] = json!(covariates);
    write_json(&out.join("fit_config.json"), &json!({ "data": { "daily": fit } }))?;
    outputs.push("fit_config.json".into());

    let report = json!({
        "weeks": rec.weekly.len(),
        "days": rec.daily.len(),
        "censored_fraction": rec.weekly.censored_fraction(),
    });
    println!(
        "{} days, {} weeks, {:.1}% censored",
        rec.daily.len(),
        rec.weekly.len(),
        100.0 * rec.weekly.censored_fraction()
    );
    let mut m = RunManifest::new("simulate", cfg, &[], report)?;
    m.outputs = outputs;
    m.write(&out)
}

pub fn cmd_validate(cfg: &RunConfig) -> Result<()> {
    let out = output_dir(cfg)?;
    let data = load_series(cfg)?;
    let (chain, chain_files) = load_chain(cfg)?;
    check_match(&chain, &data.series)?;
    let vc = ValidationConfig {
        return_periods: cfg.returns.resolve(data.weeks_per_year()),
        n_replicates: cfg.validation.n_replicates,
        max_lag: cfg.validation.max_lag,
        qq_points: cfg.validation.qq_points,
        spell_thresholds: cfg.validation.spell_thresholds.clone(),
    };
    let b = validate(&data.series, &chain, &vc)?;
    write_qq_csv(&b.qq, &out.join("qq.csv"))?;
    write_curves_csv(&[b.return_periods.curve.clone(), b.empirical.clone()], &out.join("return_periods.csv"))?;
    write_return_levels_csv(&b.return_periods.return_levels, &out.join("return_levels.csv"))?;
    write_acf_csv(&b.acf, &out.join("acf.csv"))?;
    write_spells_csv(&b.spells, &out.join("spells.csv"))?;

    let acf_inside = b.acf.iter().skip(1).filter(|r| r.lower <= r.observed && r.observed <= r.upper).count();
    let spells_inside =
        b.spells.iter().filter(|r| r.lower <= r.observed as f64 && r.observed as f64 <= r.upper).count();
    let report = json!({
        "weeks_per_year": vc.return_periods.weeks_per_year,
        "acf_lags_inside_band": acf_inside,
        "acf_lags": b.acf.len().saturating_sub(1),
        "spell_rows_inside_band": spells_inside,
        "spell_rows": b.spells.len(),
        "return_levels": b.return_periods.return_levels,
    });
    write_json(&out.join("validation.json"), &report)?;
    println!("ACF: {acf_inside}/{} lags inside the 95% band", b.acf.len().saturating_sub(1));
    println!("spells: {spells_inside}/{} run-length counts inside the 95% band", b.spells.len());
    let mut inputs = data.inputs.clone();
    inputs.extend(chain_files);
    let mut m = RunManifest::new("validate", cfg, &inputs, report)?;
    m.outputs = ["qq.csv", "return_periods.csv", "return_levels.csv", "acf.csv", "spells.csv", "validation.json"]
        .map(String::from)
        .to_vec();
    m.write(&out)
}

pub fn cmd_compare(cfg: &RunConfig) -> Result<()> {
    let out = output_dir(cfg)?;
    let data = load_series(cfg)?;
    let (chain, chain_files) = load_chain(cfg)?;
    check_match(&chain, &data.series)?;
    let rp = cfg.returns.resolve(data.weeks_per_year());
    let cmp = compare_baselines(&data.series, &chain, &cfg.compare.gp_thresholds, &rp)?;
    write_curves_csv(&cmp.curves, &out.join("curves.csv"))?;
    write_return_levels_csv(&cmp.return_levels, &out.join("band_widths.csv"))?;

    println!("{:<12} {:>8} {:>14} {:>14} {:>14} {:>14}", "source", "period", "estimate", "lower", "upper", "width");
    for b in &cmp.return_levels {
        println!(
            "{:<12} {:>8} {:>14.3} {:>14.3} {:>14.3} {:>14.3}",
            b.source.to_string(),
            b.period,
            b.estimate,
            b.lower,
            b.upper,
            b.width
        );
    }
    let narrower: Vec<serde_json::Value> = rp
        .reference_periods
        .iter()
        .map(|&t| {
            json!({
                "period": t,
                "gh_width": cmp.band(CurveSource::Gh, t).map(|b| b.width),
                "gh_narrower_than_every_gp": cmp.gh_narrower_than_gp(t),
            })
        })
        .collect();
    let report = json!({ "weeks_per_year": rp.weeks_per_year, "return_levels": cmp.return_levels, "gh_vs_gp": narrower });
    write_json(&out.join("comparison.json"), &report)?;
    let mut inputs = data.inputs.clone();
    inputs.extend(chain_files);
    let mut m = RunManifest::new("compare", cfg, &inputs, report)?;
    m.outputs = ["curves.csv", "band_widths.csv", "comparison.json"].map(String::from).to_vec();
    m.write(&out)
}

pub fn cmd_simstudy(cfg: &RunConfig) -> Result<()> {
    let out = output_dir(cfg)?;
    let (report, series) = run_study(&cfg.simstudy, &cfg.priors, &cfg.mcmc)?;
    let mut outputs = vec!["recovery.csv".to_string(), "recovery.json".to_string()];
    for (r, s) in series.iter().enumerate() {
        let name = format!("series_{r}.csv");
        s.write_csv(&out.join(&name))?;
        outputs.push(name);
    }
    let mut w = csv::Writer::from_path(out.join("recovery.csv"))?;
    w.write_record(["replicate", "parameter", "truth", "mean", "sd", "ci_lower", "ci_upper", "contained", "at_boundary"])?;
    for row in &report.rows {
        w.write_record([
            row.replicate.to_string(),
            row.parameter.clone(),
            format!("{:?}", row.truth),
            format!("{:?}", row.mean),
            format!("{:?}", row.sd),
            format!("{:?}", row.ci_lower),
            format!("{:?}", row.ci_upper),
            row.contained.to_string(),
            row.at_boundary.to_string(),
        ])?;
    }
    w.flush()?;
    write_json(&out.join("recovery.json"), &report)?;

    for rep in &report.replicates {
        println!(
            "replicate {}: {:.1}% censored, {}/{} intervals contain the truth",
            rep.replicate,
            100.0 * rep.censored_fraction,
            rep.contained,
            rep.parameters
        );
        println!("{:<16} {:>10} {:>12} {:>12} {:>12}  flags", "parameter", "truth", "mean", "ci_lower", "ci_upper");
        for row in report.rows_for(rep.replicate) {
            let mut flags = Vec::new();
            if !row.contained {
                flags.push("missed");
            }
            if row.at_boundary {
                flags.push("boundary");
            }
            println!(
                "{:<16} {:>10.4} {:>12.4} {:>12.4} {:>12.4}  {}",
                row.parameter,
                row.truth,
                row.mean,
                row.ci_lower,
                row.ci_upper,
                flags.join(",")
            );
        }
    }
    let mut m = RunManifest::new("simstudy", cfg, &[], serde_json::to_value(&report)?)?;
    m.outputs = outputs;
    m.write(&out)
}
