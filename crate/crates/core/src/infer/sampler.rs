//! Adaptive block random-walk Metropolis–Hastings on an unconstrained
//! parameter vector.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Random stream used by all samplers; seeded explicitly for reproducibility.
pub type McmcRng = ChaCha8Rng;

/// A log density on the unconstrained scale, possibly with auxiliary state
/// (such as augmented latent values) refreshed once per sweep.
pub trait Target {
    fn log_density(&mut self, u: &[f64]) -> Result<f64>;

    fn refresh(&mut self, _u: &[f64], _rng: &mut McmcRng) -> Result<()> {
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockProposal {
    pub name: String,
    pub indices: Vec<usize>,
    /// Multiplier on the shape factor.
    pub scale: f64,
    /// Lower-triangular shape factor, row-major.
    pub cholesky: Vec<Vec<f64>>,
    /// Whether the shape has been replaced by an empirical covariance.
    pub covariance_learned: bool,
}

impl BlockProposal {
    pub fn diagonal(name: &str, indices: Vec<usize>, sds: &[f64]) -> Self {
        let d = indices.len();
        let cholesky = (0..d).map(|i| (0..d).map(|j| if i == j { sds[i] } else { 0.0 }).collect()).collect();
        Self { name: name.to_string(), indices, scale: 1.0, cholesky, covariance_learned: false }
    }

    fn propose(&self, u: &[f64], rng: &mut McmcRng) -> Vec<f64> {
        let z: Vec<f64> = (0..self.indices.len()).map(|_| rng.sample(StandardNormal)).collect();
        let mut out = u.to_vec();
        for (r, &i) in self.indices.iter().enumerate() {
            let step: f64 = (0..=r).map(|c| self.cholesky[r][c] * z[c]).sum();
            out[i] += self.scale * step;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProposalSpec {
    pub blocks: Vec<BlockProposal>,
    /// Iterations between adaptation updates.
    pub window: usize,
    pub target_acceptance: f64,
    /// Learn each block's proposal shape from burn-in draws.
    pub adapt_covariance: bool,
}

impl ProposalSpec {
    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.window == 0 || !(self.target_acceptance > 0.0 && self.target_acceptance < 1.0) {
            return Err(Error::Config("adaptation window must be positive and target in (0, 1)".into()));
        }
        for b in &self.blocks {
            if !(b.scale > 0.0) || b.indices.iter().any(|&i| i >= dim) {
                return Err(Error::Config(format!("invalid proposal block {}", b.name)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Acceptance {
    pub accepted: u64,
    pub proposed: u64,
}

impl Acceptance {
    pub fn rate(&self) -> f64 {
        if self.proposed == 0 {
            f64::NAN
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }
}

#[derive(Debug, Clone)]
pub struct SamplerState {
    pub u: Vec<f64>,
    pub log_density: f64,
}

/// One Metropolis–Hastings update of a single block.
pub fn mh_step<T: Target>(
    state: &mut SamplerState,
    block: &BlockProposal,
    target: &mut T,
    rng: &mut McmcRng,
) -> Result<bool> {
    let proposal = block.propose(&state.u, rng);
    let lp = target.log_density(&proposal)?;
    let log_u = (1.0 - rng.random::<f64>()).ln();
    if lp > f64::NEG_INFINITY && log_u < lp - state.log_density {
        state.u = proposal;
        state.log_density = lp;
        Ok(true)
    } else {
        Ok(false)
    }
}

fn empirical_cholesky(history: &[Vec<f64>], indices: &[usize]) -> Option<Vec<Vec<f64>>> {
    let d = indices.len();
    let n = history.len() as f64;
    let mean = DVector::from_fn(d, |i, _| history.iter().map(|h| h[indices[i]]).sum::<f64>() / n);
    let mut cov = DMatrix::zeros(d, d);
    for h in history {
        let x = DVector::from_fn(d, |i, _| h[indices[i]] - mean[i]);
        cov += &x * x.transpose();
    }
    cov /= n - 1.0;
    for i in 0..d {
        cov[(i, i)] = cov[(i, i)] * (1.0 + 1e-6) + 1e-12;
    }
    let l = cov.cholesky()?.l();
    Some((0..d).map(|i| (0..d).map(|j| l[(i, j)]).collect()).collect())
}

/// Rescale each block toward the target acceptance rate; optionally replace
/// the proposal shape by the empirical covariance of `history`.
///
/// A block accepting more often than the target gets a larger scale, and
/// vice versa.
pub fn adapt_proposals(
    spec: &ProposalSpec,
    window_rates: &[f64],
    history: Option<&[Vec<f64>]>,
) -> ProposalSpec {
    let mut out = spec.clone();
    for (b, &rate) in out.blocks.iter_mut().zip(window_rates) {
        if rate.is_finite() {
            b.scale *= (2.0 * (rate - spec.target_acceptance)).exp();
        }
        let d = b.indices.len();
        if let Some(h) = history.filter(|h| spec.adapt_covariance && h.len() >= 50 * d) {
            if let Some(l) = empirical_cholesky(h, &b.indices) {
                b.cholesky = l;
                if !b.covariance_learned {
                    b.scale = 2.38 / (d as f64).sqrt();
                    b.covariance_learned = true;
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunLength {
    pub iterations: usize,
    pub burn_in: usize,
    pub thinning: usize,
}

#[derive(Debug, Clone)]
pub struct SamplerRun {
    /// Retained draws on the unconstrained scale.
    pub draws: Vec<Vec<f64>>,
    pub log_density: Vec<f64>,
    pub proposals: ProposalSpec,
    pub acceptance: Vec<Acceptance>,
    pub burn_in_acceptance: Vec<Acceptance>,
}

/// Run the sampler: each iteration refreshes the target, then updates every
/// block once. Proposals adapt during burn-in only; `on_retain` sees the
/// target after each retained iteration.
pub fn run_sampler<T: Target, F: FnMut(&T)>(
    target: &mut T,
    start: Vec<f64>,
    proposals: ProposalSpec,
    length: RunLength,
    rng: &mut McmcRng,
    mut on_retain: F,
) -> Result<SamplerRun> {
    proposals.validate(start.len())?;
    if length.burn_in > length.iterations || length.thinning == 0 {
        return Err(Error::Config(format!(
            "need burn_in <= iterations and thinning >= 1, got {:?}",
            length
        )));
    }
    let nb = proposals.blocks.len();
    let mut spec = proposals;
    let mut state = SamplerState { u: start, log_density: f64::NEG_INFINITY };
    let mut window = vec![Acceptance::default(); nb];
    let mut burn = vec![Acceptance::default(); nb];
    let mut post = vec![Acceptance::default(); nb];
    let mut history: Vec<Vec<f64>> = Vec::new();
    let mut draws = Vec::new();
    let mut lps = Vec::new();

    for it in 0..length.iterations {
        let wrap = |e: Error| match e {
            Error::Numerical(m) => Error::Numerical(format!("iteration {it}: {m}")),
            other => other,
        };
        target.refresh(&state.u, rng).map_err(wrap)?;
        state.log_density = target.log_density(&state.u).map_err(wrap)?;
        if state.log_density == f64::NEG_INFINITY {
            return Err(Error::Numerical(format!(
                "iteration {it}: current state has zero posterior density"
            )));
        }
        let burning = it < length.burn_in;
        for b in 0..nb {
            let accepted = mh_step(&mut state, &spec.blocks[b], target, rng).map_err(wrap)?;
            let counters = if burning { &mut burn[b] } else { &mut post[b] };
            counters.proposed += 1;
            counters.accepted += accepted as u64;
            window[b].proposed += 1;
            window[b].accepted += accepted as u64;
        }
        if burning {
            history.push(state.u.clone());
            if (it + 1) % spec.window == 0 {
                let rates: Vec<f64> = window.iter().map(Acceptance::rate).collect();
                let recent = &history[history.len() / 2..];
                spec = adapt_proposals(&spec, &rates, Some(recent));
                window = vec![Acceptance::default(); nb];
            }
        } else if (it - length.burn_in) % length.thinning == 0 {
            draws.push(state.u.clone());
            lps.push(state.log_density);
            on_retain(target);
        }
    }
    Ok(SamplerRun { draws, log_density: lps, proposals: spec, acceptance: post, burn_in_acceptance: burn })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{quad, stats};
    use rand::SeedableRng;

    /// Posterior of (mean, log sd) for a small normal sample under flat priors.
    struct Toy {
        data: Vec<f64>,
    }

    impl Toy {
        fn lp(&self, m: f64, s: f64) -> f64 {
            let sd = s.exp();
            self.data.iter().map(|x| -0.5 * ((x - m) / sd).powi(2) - s).sum::<f64>()
        }
    }

    impl Target for Toy {
        fn log_density(&mut self, u: &[f64]) -> Result<f64> {
            Ok(self.lp(u[0], u[1]))
        }
    }

    fn toy() -> Toy {
        Toy { data: vec![1.2, -0.3, 0.8, 2.1, 0.4, 1.7, -0.9, 0.6, 1.1, 0.2, 2.6, 0.9] }
    }

    fn spec(sds: &[f64]) -> ProposalSpec {
        ProposalSpec {
            blocks: vec![BlockProposal::diagonal("both", vec![0, 1], sds)],
            window: 100,
            target_acceptance: 0.3,
            adapt_covariance: true,
        }
    }

    #[test]
    fn tiny_steps_are_always_accepted() {
        let mut t = toy();
        let mut rng = McmcRng::seed_from_u64(1);
        let mut s = spec(&[1e-9, 1e-9]);
        s.adapt_covariance = false;
        let len = RunLength { iterations: 500, burn_in: 0, thinning: 1 };
        let run = run_sampler(&mut t, vec![0.5, 0.0], s, len, &mut rng, |_| {}).unwrap();
        assert!(run.acceptance[0].rate() > 0.99);
    }

    #[test]
    fn adaptation_direction() {
        let s = spec(&[1.0, 1.0]);
        assert!(adapt_proposals(&s, &[0.8], None).blocks[0].scale > 1.0);
        assert!(adapt_proposals(&s, &[0.05], None).blocks[0].scale < 1.0);
    }

    #[test]
    fn burn_in_only_run_is_empty() {
        let mut t = toy();
        let mut rng = McmcRng::seed_from_u64(2);
        let len = RunLength { iterations: 300, burn_in: 300, thinning: 1 };
        let run = run_sampler(&mut t, vec![0.5, 0.0], spec(&[0.3, 0.3]), len, &mut rng, |_| {}).unwrap();
        assert!(run.draws.is_empty());
    }

    #[test]
    fn chain_matches_quadrature_posterior() {
        let t0 = toy();
        // marginal of the mean by nested quadrature over log sd
        let marginal = |m: f64| {
            quad::integrate(|s| (t0.lp(m, s) + 10.0).exp(), -4.0, 3.0, 1e-14, 1e-11).unwrap().value
        };
        let (lo, hi) = (-3.0, 4.0);
        let z = quad::integrate(marginal, lo, hi, 1e-12, 1e-11).unwrap().value;
        let cdf = |m: f64| quad::integrate(marginal, lo, m, 1e-12, 1e-11).unwrap().value / z;

        let mut t = toy();
        let mut rng = McmcRng::seed_from_u64(3);
        let len = RunLength { iterations: 205_000, burn_in: 5_000, thinning: 1 };
        let run = run_sampler(&mut t, vec![0.0, 0.0], spec(&[0.1, 0.1]), len, &mut rng, |_| {}).unwrap();
        let ms: Vec<f64> = run.draws.iter().map(|d| d[0]).collect();
        for p in [0.025, 0.25, 0.5, 0.75, 0.975] {
            let q = stats::quantiles(&ms, &[p])[0];
            assert!((cdf(q) - p).abs() < 0.02, "p {p}: quadrature cdf {}", cdf(q));
        }
        let thinned: Vec<f64> = ms.iter().step_by(50).copied().collect();
        let d = stats::ks_statistic(&thinned, cdf);
        assert!(d < stats::ks_critical(thinned.len(), 0.05), "KS {d}");
    }
}
