use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use chrono::{Days, NaiveDate};
use ghrain_cli::commands::{cmd_fit, load_series};
use ghrain_cli::config::{RunConfig, SimulateConfig, Truths};
use ghrain_cli::ingest::{ingest, CovariateSource, IngestionConfig, Season};
use ghrain_cli::manifest::{digest_file, RunManifest};
use ghrain_cli::synth::synthesize;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ghrain"))
}

fn bundled() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/synthetic")
}

fn write_daily(path: &Path, rows: &[(NaiveDate, f64)]) {
    let mut s = String::from("date,rainfall\n");
    for (d, v) in rows {
        s.push_str(&format!("{d},{v}\n"));
    }
    fs::write(path, s).unwrap();
}

fn days_from(start: NaiveDate, values: &[f64]) -> Vec<(NaiveDate, f64)> {
    values.iter().enumerate().map(|(i, &v)| (start.checked_add_days(Days::new(i as u64)).unwrap(), v)).collect()
}

fn config_for(input: &Path) -> IngestionConfig {
    IngestionConfig { input: Some(input.to_path_buf()), ..Default::default() }
}

#[test]
fn fourteen_days_of_one_mm_make_two_weeks() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("d.csv");
    write_daily(&p, &days_from(NaiveDate::from_ymd_opt(2000, 11, 1).unwrap(), &[1.0; 14]));
    let (s, r) = ingest(&config_for(&p)).unwrap();
    assert_eq!(s.observed, vec![7.0, 7.0]);
    assert_eq!(s.censored_count(), 0);
    assert_eq!((r.weeks, r.dropped_blocks), (2, 0));
}

#[test]
fn all_zero_week_is_censored() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("d.csv");
    let mut v = vec![0.0; 7];
    v.extend([2.0; 7]);
    write_daily(&p, &days_from(NaiveDate::from_ymd_opt(2000, 12, 3).unwrap(), &v));
    let (s, _) = ingest(&config_for(&p)).unwrap();
    assert_eq!(s.observed, vec![0.0, 14.0]);
    assert_eq!(s.censored_mask, vec![true, false]);
}

#[test]
fn out_of_season_days_are_ignored() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("d.csv");
    // 1 May to 30 Nov: only November is in season
    let v: Vec<f64> = (0..214).map(|i| i as f64).collect();
    write_daily(&p, &days_from(NaiveDate::from_ymd_opt(2001, 5, 1).unwrap(), &v));
    let (s, r) = ingest(&config_for(&p)).unwrap();
    assert_eq!(r.in_season_days, 30);
    assert_eq!(s.len(), 4);
    assert_eq!(s.timestamps[0], NaiveDate::from_ymd_opt(2001, 11, 1).unwrap());
    assert_eq!((r.dropped_blocks, r.dropped_days), (1, 2));
}

#[test]
fn bad_rows_report_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("d.csv");
    fs::write(&p, "date,rainfall\n2000-11-01,1.0\n2000-11-02,abc\n").unwrap();
    let e = ingest(&config_for(&p)).unwrap_err().to_string();
    assert!(e.contains("line 3") && e.contains("abc"), "{e}");

    fs::write(&p, "date,rainfall\n2000-11-01,1.0\n2000-13-02,1.0\n").unwrap();
    assert!(ingest(&config_for(&p)).unwrap_err().to_string().contains("line 3"));

    fs::write(&p, "date,rainfall\n2000-11-01,1.0\n2000-11-02,1.0\n2000-11-03,-0.5\n").unwrap();
    let e = ingest(&config_for(&p)).unwrap_err();
    assert!(e.to_string().contains("line 4"), "{e}");
    assert_eq!(e.exit_code(), 3);

    fs::write(&p, "date,rainfall\n2000-11-01,1.0\n2000-11-01,2.0\n").unwrap();
    assert!(ingest(&config_for(&p)).unwrap_err().to_string().contains("already given on line 2"));
}

#[test]
fn missing_covariate_month_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("d.csv");
    write_daily(&p, &days_from(NaiveDate::from_ymd_opt(2000, 11, 1).unwrap(), &[1.0; 70]));
    let c = dir.path().join("soi.csv");
    fs::write(&c, "date,soi\n2000-11,0.5\n2000-12,-0.5\n").unwrap();
    let mut cfg = config_for(&p);
    cfg.covariates = vec![CovariateSource { path: c, name: "soi".into(), date_column: "date".into(), value_column: None }];
    let e = ingest(&cfg).unwrap_err().to_string();
    assert!(e.contains("soi") && e.contains("2001-01"), "{e}");
}

#[test]
fn ingestion_is_idempotent_and_ignores_covariate_order() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("d.csv");
    let v: Vec<f64> = (0..120).map(|i| ((i * 7919) % 13) as f64 * 0.5).collect();
    write_daily(&p, &days_from(NaiveDate::from_ymd_opt(2000, 11, 1).unwrap(), &v));
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    fs::write(&a, "date,value\n2000-11,1\n2000-12,2\n2001-01,4\n2001-02,3\n").unwrap();
    fs::write(&b, "month,idx\n2000-11-01,-1\n2000-12-01,0.5\n2001-01-01,0.25\n2001-02-01,2\n").unwrap();
    let src = |path: &Path, name: &str, date: &str| CovariateSource {
        path: path.to_path_buf(),
        name: name.into(),
        date_column: date.into(),
        value_column: None,
    };
    let mut cfg = config_for(&p);
    cfg.covariates = vec![src(&a, "alpha", "date"), src(&b, "beta", "month")];
    let first = ingest(&cfg).unwrap();
    assert_eq!(first, ingest(&cfg).unwrap());
    cfg.covariates.reverse();
    let swapped = ingest(&cfg).unwrap();
    assert_eq!(first, swapped);
    let s = &first.0;
    assert_eq!(s.covariate_names, vec!["alpha", "beta"]);
    let col: Vec<f64> = s.covariates.iter().map(|r| r[0]).collect();
    assert!(ghrain::stats::mean(&col).abs() < 1e-12);
    assert!((ghrain::stats::variance(&col) - 1.0).abs() < 1e-12);

    cfg.standardize = false;
    let (raw, _) = ingest(&cfg).unwrap();
    assert_eq!(raw.covariates[0], vec![1.0, -1.0]);
}

#[test]
fn weekly_sums_conserve_seasonal_rain() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("d.csv");
    let season = Season::from_months(&[10, 11, 12, 1, 2, 3]).unwrap();
    let mut rows = Vec::new();
    for year in 1990..1996 {
        for (i, d) in season.days(year).into_iter().enumerate() {
            // a gap every season, and some dry stretches
            if i == 40 + (year as usize % 5) {
                continue;
            }
            let v = if (i / 9) % 3 == 0 { 0.0 } else { ((i * 31 + year as usize) % 17) as f64 * 0.3 };
            rows.push((d, v));
        }
    }
    // out-of-season days must not count
    rows.push((NaiveDate::from_ymd_opt(1996, 6, 1).unwrap(), 99.0));
    write_daily(&p, &rows);
    let mut cfg = config_for(&p);
    cfg.season_months = vec![10, 11, 12, 1, 2, 3];
    let (s, r) = ingest(&cfg).unwrap();
    let total: f64 = s.observed.iter().sum();
    assert!((total + r.dropped_total - r.in_season_total).abs() < 1e-9 * r.in_season_total);
    assert_eq!(r.weeks * 7 + r.dropped_days, r.in_season_days);
    assert_eq!(r.seasons, 6);
    assert!(r.dropped_blocks >= 6);
    assert!(s.censored_count() > 0);
}

#[test]
fn simulated_daily_record_ingests_back() {
    let dir = tempfile::tempdir().unwrap();
    let season = Season::from_months(&[11, 12, 1, 2, 3, 4]).unwrap();
    let cfg = SimulateConfig {
        seasons: 6,
        truths: Truths { a0: 1.0, betas: vec![2.0], ..Default::default() },
        covariates: vec!["nino".into()],
        ..Default::default()
    };
    let rec = synthesize(&cfg, &season).unwrap();
    assert!(rec.weekly.censored_count() > 0);
    let p = dir.path().join("d.csv");
    write_daily(&p, &rec.daily);
    let c = dir.path().join("nino.csv");
    let mut text = String::from("date,value\n");
    for ((y, m), v) in &rec.monthly[0].1 {
        text.push_str(&format!("{y}-{m:02},{v:?}\n"));
    }
    fs::write(&c, text).unwrap();
    let mut icfg = config_for(&p);
    icfg.covariates = vec![CovariateSource { path: c, name: "nino".into(), date_column: "date".into(), value_column: None }];
    icfg.standardize = false;
    let (s, r) = ingest(&icfg).unwrap();
    assert_eq!(s.timestamps, rec.weekly.timestamps);
    assert_eq!(s.censored_mask, rec.weekly.censored_mask);
    assert_eq!(s.covariates, rec.weekly.covariates);
    for (a, b) in s.observed.iter().zip(&rec.weekly.observed) {
        assert!((a - b).abs() <= 1e-9 * b.max(1.0));
    }
    assert_eq!(r.dropped_total, 0.0);
    assert_eq!(r.weeks_per_year, s.len() as f64 / 6.0);
}

#[test]
fn bundled_record_has_brisbane_scale() {
    let cfg = RunConfig::load(&bundled().join("config.json")).unwrap();
    let data = load_series(&cfg).unwrap();
    let r = data.report.unwrap();
    assert!((22_000..23_500).contains(&r.in_season_days));
    // complete weeks only: at most one partial block per season is lost
    let full = r.in_season_days / 7;
    assert!(r.weeks <= full && r.weeks + r.seasons >= full, "{} weeks", r.weeks);
    assert_eq!(data.series.covariate_names, vec!["nino34"]);
}

fn small_fit_args(out: &Path) -> Vec<String> {
    [
        "fit",
        "--config",
        bundled().join("config.json").to_str().unwrap(),
        "--iterations",
        "400",
        "--burn-in",
        "200",
        "--output",
        out.to_str().unwrap(),
    ]
    .map(String::from)
    .to_vec()
}

#[test]
fn fit_on_bundled_data_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    let st = bin().args(small_fit_args(&a)).output().unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    let summary = fs::read_to_string(a.join("summary.csv")).unwrap();
    assert!(summary.starts_with("parameter,mean,sd,ci_lower,ci_upper\n"), "{summary}");
    assert!(summary.contains("\nbeta_nino34,"));
    assert!(a.join("chain/draws.csv").exists());

    assert!(bin().args(small_fit_args(&b)).status().unwrap().success());
    assert_eq!(summary, fs::read_to_string(b.join("summary.csv")).unwrap());

    // the saved config alone reproduces the run
    let st = bin()
        .args(["fit", "--config", a.join("config.json").to_str().unwrap(), "--output", c.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(st.success());
    assert_eq!(summary, fs::read_to_string(c.join("summary.csv")).unwrap());

    let m: RunManifest = serde_json::from_str(&fs::read_to_string(a.join("run_manifest.json")).unwrap()).unwrap();
    assert_eq!(m.command, "fit");
    assert_eq!(m.inputs.len(), 2);
    for d in &m.inputs {
        assert_eq!(digest_file(&d.path).unwrap(), *d);
    }
    assert_eq!(m.config.mcmc.iterations, 400);
}

#[test]
fn iterations_below_burn_in_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["fit", "--weekly", "x.csv", "--iterations", "10", "--burn-in", "20", "--output"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("burn_in"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = bin().args(["fit", "--input", "/nonexistent/rain.csv", "--output"]).arg(dir.path()).output().unwrap();
    assert_eq!(missing.status.code(), Some(3));
    let bad_cfg = dir.path().join("c.json");
    fs::write(&bad_cfg, r#"{"mcmc": {"iterations": "many"}}"#).unwrap();
    let out = bin().args(["fit", "--config"]).arg(&bad_cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let no_out = bin().args(["ingest", "--input", "x.csv"]).output().unwrap();
    assert_eq!(no_out.status.code(), Some(2));
    assert_eq!(bin().args(["fit", "--bogus"]).output().unwrap().status.code(), Some(2));
}

#[test]
fn validate_and_compare_write_their_bundles() {
    let dir = tempfile::tempdir().unwrap();
    let fit = dir.path().join("fit");
    assert!(bin().args(small_fit_args(&fit)).status().unwrap().success());
    let common = |cmd: &str, out: &Path| {
        bin()
            .args([cmd, "--config", fit.join("config.json").to_str().unwrap(), "--chain", fit.join("chain").to_str().unwrap()])
            .args(["--n-sims", "40", "--horizon", "4000", "--output", out.to_str().unwrap()])
            .output()
            .unwrap()
    };
    let v = dir.path().join("v");
    let o = common("validate", &v);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["qq.csv", "return_periods.csv", "return_levels.csv", "acf.csv", "spells.csv", "validation.json", "run_manifest.json"] {
        assert!(v.join(f).exists(), "{f}");
    }
    let rp = fs::read_to_string(v.join("return_periods.csv")).unwrap();
    assert!(rp.contains("\nGH,") && rp.contains("\nempirical,"));

    let c = dir.path().join("c");
    let o = common("compare", &c);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let widths = fs::read_to_string(c.join("band_widths.csv")).unwrap();
    for src in ["GH,", "GP@150,", "GP@200,", "GP@250,", "GW,"] {
        assert!(widths.contains(&format!("\n{src}100.0,")), "{src}");
    }
    let m: RunManifest = serde_json::from_str(&fs::read_to_string(c.join("run_manifest.json")).unwrap()).unwrap();
    assert_eq!(m.inputs.len(), 4);
    assert!((m.report["weeks_per_year"].as_f64().unwrap() - 3155.0 / 125.0).abs() < 1e-12);
}

#[test]
fn fit_in_process_returns_summary() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::load(&bundled().join("config.json")).unwrap();
    cfg.mcmc.iterations = 200;
    cfg.mcmc.burn_in = 100;
    cfg.output = Some(dir.path().to_path_buf());
    let s = cmd_fit(&cfg).unwrap();
    assert_eq!(s.draws, 100);
    assert_eq!(s.parameters.len(), 8);
}

fn simstudy(out: &Path, extra: &[&str]) -> serde_json::Value {
    let o = bin()
        .args(["simstudy", "--length", "400", "--output"])
        .arg(out)
        .args(extra)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(&fs::read_to_string(out.join("recovery.json")).unwrap()).unwrap()
}

#[test]
fn simstudy_is_seeded_and_flags_boundaries() {
    let dir = tempfile::tempdir().unwrap();
    let run = ["--iterations", "1500", "--burn-in", "700"];
    let a = simstudy(&dir.path().join("a"), &run);
    let b = simstudy(&dir.path().join("b"), &run);
    assert_eq!(a, b);
    assert_eq!(
        fs::read_to_string(dir.path().join("a/recovery.csv")).unwrap(),
        fs::read_to_string(dir.path().join("b/recovery.csv")).unwrap()
    );
    assert_eq!(a["rows"].as_array().unwrap().len(), 7);

    let z = simstudy(&dir.path().join("z"), &[&run[..], &["--truth", "alpha1=0"]].concat());
    let row = z["rows"].as_array().unwrap().iter().find(|r| r["parameter"] == "alpha1").unwrap().clone();
    assert_eq!(row["truth"], 0.0);
    assert_eq!(row["at_boundary"], true, "{row}");
    assert!(row["ci_upper"].as_f64().unwrap() < 0.2);
}

#[test]
fn simstudy_censor_target_moves_a0() {
    let dir = tempfile::tempdir().unwrap();
    let r = simstudy(&dir.path().join("c"), &["--censor-target", "0.08", "--iterations", "300", "--burn-in", "100"]);
    let a0 = r["truths"]["a0"].as_f64().unwrap();
    assert!(a0 < 5.0 && a0 > 0.0, "{a0}");
    let frac = r["replicates"][0]["censored_fraction"].as_f64().unwrap();
    assert!((frac - 0.08).abs() < 0.04, "{frac}");
}
