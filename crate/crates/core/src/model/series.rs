use std::path::Path;

use chrono::{Days, NaiveDate};

use crate::error::{Error, Result};

/// Weekly rainfall with zeros treated as censored values of a latent process.
#[derive(Debug, Clone, PartialEq)]
pub struct CensoredSeries {
    pub timestamps: Vec<NaiveDate>,
    pub observed: Vec<f64>,
    pub censored_mask: Vec<bool>,
    pub covariate_names: Vec<String>,
    /// One row of covariate values per step.
    pub covariates: Vec<Vec<f64>>,
}

impl CensoredSeries {
    pub fn new(
        timestamps: Vec<NaiveDate>,
        observed: Vec<f64>,
        covariate_names: Vec<String>,
        covariates: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let n = observed.len();
        if timestamps.len() != n {
            return Err(Error::Data(format!("{} timestamps for {n} observations", timestamps.len())));
        }
        if let Some(w) = timestamps.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::Data(format!("timestamps not increasing at step {}", w + 1)));
        }
        if let Some(t) = observed.iter().position(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::Data(format!("observation {t} is {} (must be finite and >= 0)", observed[t])));
        }
        let m = covariate_names.len();
        if covariates.len() != n && !(m == 0 && covariates.is_empty()) {
            return Err(Error::Data(format!("{} covariate rows for {n} observations", covariates.len())));
        }
        let covariates = if covariates.is_empty() { vec![Vec::new(); n] } else { covariates };
        for (t, row) in covariates.iter().enumerate() {
            if row.len() != m {
                return Err(Error::Data(format!("covariate row {t} has {} values, expected {m}", row.len())));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::Data(format!("missing or non-finite covariate at step {t}")));
            }
        }
        let censored_mask = observed.iter().map(|&x| x == 0.0).collect();
        Ok(Self { timestamps, observed, censored_mask, covariate_names, covariates })
    }

    /// Series without covariates on consecutive weeks from an arbitrary origin.
    pub fn from_values(observed: Vec<f64>) -> Result<Self> {
        let start = NaiveDate::from_ymd_opt(2000, 1, 3).expect("valid date");
        let timestamps = (0..observed.len())
            .map(|i| start.checked_add_days(Days::new(7 * i as u64)).expect("date in range"))
            .collect();
        Self::new(timestamps, observed, Vec::new(), Vec::new())
    }

    pub fn len(&self) -> usize {
        self.observed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observed.is_empty()
    }

    pub fn n_covariates(&self) -> usize {
        self.covariate_names.len()
    }

    pub fn censored_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&t| self.censored_mask[t]).collect()
    }

    pub fn censored_count(&self) -> usize {
        self.censored_mask.iter().filter(|&&c| c).count()
    }

    pub fn censored_fraction(&self) -> f64 {
        self.censored_count() as f64 / self.len() as f64
    }

    /// The latent series with censored steps replaced by `fill`, in order.
    pub fn complete(&self, fill: &[f64]) -> Result<Vec<f64>> {
        if fill.len() != self.censored_count() {
            return Err(Error::Data(format!(
                "{} latent values for {} censored steps",
                fill.len(),
                self.censored_count()
            )));
        }
        let mut it = fill.iter();
        self.observed
            .iter()
            .zip(&self.censored_mask)
            .enumerate()
            .map(|(t, (&x, &c))| {
                if !c {
                    return Ok(x);
                }
                let v = *it.next().expect("length checked");
                if v > 0.0 || !v.is_finite() {
                    return Err(Error::Data(format!("latent value {v} at censored step {t} must be <= 0")));
                }
                Ok(v)
            })
            .collect()
    }

    /// Write as CSV with columns `date, rainfall, <covariates...>`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["date".to_string(), "rainfall".to_string()];
        header.extend(self.covariate_names.iter().cloned());
        w.write_record(&header)?;
        for t in 0..self.len() {
            let mut rec = vec![self.timestamps[t].to_string(), format!("{:?}", self.observed[t])];
            rec.extend(self.covariates[t].iter().map(|v| format!("{v:?}")));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Read a series written by [`CensoredSeries::write_csv`].
    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let headers = r.headers()?.clone();
        if headers.len() < 2 {
            return Err(Error::Data(format!("{}: expected columns date, rainfall", path.display())));
        }
        let names: Vec<String> = headers.iter().skip(2).map(str::to_string).collect();
        let (mut dates, mut obs, mut cov) = (Vec::new(), Vec::new(), Vec::new());
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let line = i + 2;
            let bad = |what: &str| Error::Data(format!("{}: line {line}: bad {what}", path.display()));
            dates.push(NaiveDate::parse_from_str(&rec[0], "%Y-%m-%d").map_err(|_| bad("date"))?);
            obs.push(rec[1].trim().parse::<f64>().map_err(|_| bad("rainfall"))?);
            cov.push(
                (2..rec.len())
                    .map(|j| rec[j].trim().parse::<f64>().map_err(|_| bad("covariate")))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        Self::new(dates, obs, names, cov)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mask_follows_zeros() {
        let s = CensoredSeries::from_values(vec![1.0, 0.0, 3.0, 0.0]).unwrap();
        assert_eq!(s.censored_mask, vec![false, true, false, true]);
        assert_eq!(s.censored_indices(), vec![1, 3]);
        assert_eq!(s.complete(&[-0.5, -1.0]).unwrap(), vec![1.0, -0.5, 3.0, -1.0]);
        assert!(s.complete(&[0.5, -1.0]).is_err());
        assert!(s.complete(&[-0.5]).is_err());
    }

    #[test]
    fn rejects_negative_rain() {
        assert!(CensoredSeries::from_values(vec![1.0, -0.1]).is_err());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        let s = CensoredSeries::new(
            CensoredSeries::from_values(vec![0.0; 3]).unwrap().timestamps,
            vec![0.1 + 0.2, 0.0, 1e-300],
            vec!["nino".into()],
            vec![vec![1.0 / 3.0], vec![-2.5], vec![0.0]],
        )
        .unwrap();
        s.write_csv(&p).unwrap();
        assert_eq!(CensoredSeries::read_csv(&p).unwrap(), s);
    }
}
