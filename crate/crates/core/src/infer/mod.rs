//! Bayesian inference for the AR(1)-ARCH(1) model with standardized GH
//! innovations: priors, censored-data augmentation, adaptive block
//! Metropolis–Hastings and posterior summaries.
//!
//! Sampling happens on an unconstrained scale where `α0`, `α1` and `ψ` are
//! log-transformed; the Jacobian of that transform is included in the target
//! so priors stay on the natural scale.

mod io;
mod sampler;

use rand::SeedableRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use io::{read_chain, write_chain, write_summary_csv, ChainManifest};
pub use sampler::{
    adapt_proposals, mh_step, run_sampler, Acceptance, BlockProposal, McmcRng, ProposalSpec, RunLength,
    SamplerRun, SamplerState, Target,
};

use crate::dist::{GhLaw, GhTruncation};
use crate::error::{Error, Result};
use crate::model::{log_likelihood, run_recursion, ArmaGarchParams, CensoredSeries, Path};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalPrior {
    pub location: f64,
    pub scale: f64,
}

impl NormalPrior {
    pub const fn new(location: f64, scale: f64) -> Self {
        Self { location, scale }
    }

    fn log_density(&self, x: f64) -> f64 {
        -0.5 * ((x - self.location) / self.scale).powi(2)
    }
}

/// Normal priors on the mean-process coefficients, λ and τ; normal priors
/// truncated to `(0, ∞)` on `α0`, `α1` and `ψ`. Normalizing constants are
/// dropped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PriorSpec {
    pub a0: NormalPrior,
    pub a1: NormalPrior,
    /// Applied to every covariate coefficient.
    pub beta: NormalPrior,
    pub alpha0: NormalPrior,
    pub alpha1: NormalPrior,
    pub lambda: NormalPrior,
    pub psi: NormalPrior,
    pub tau: NormalPrior,
}

impl Default for PriorSpec {
    fn default() -> Self {
        let wide = NormalPrior::new(0.0, 100.0);
        Self {
            a0: wide,
            a1: wide,
            beta: wide,
            alpha0: wide,
            alpha1: wide,
            lambda: NormalPrior::new(0.0, 10.0),
            psi: wide,
            tau: wide,
        }
    }
}

impl PriorSpec {
    /// A second, tighter hyperparameter set used for sensitivity checks:
    /// scales of 10 on the mean and GARCH parameters, 1 on `a1` and `α1`,
    /// 3 on λ, 5 on ψ and 30 on τ, with `α0` and `ψ` centred at 1.
    pub fn moderate() -> Self {
        Self {
            a0: NormalPrior::new(0.0, 10.0),
            a1: NormalPrior::new(0.0, 1.0),
            beta: NormalPrior::new(0.0, 10.0),
            alpha0: NormalPrior::new(1.0, 10.0),
            alpha1: NormalPrior::new(0.0, 1.0),
            lambda: NormalPrior::new(0.0, 3.0),
            psi: NormalPrior::new(1.0, 5.0),
            tau: NormalPrior::new(0.0, 30.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.a0, self.a1, self.beta, self.alpha0, self.alpha1, self.lambda, self.psi, self.tau];
        if all.iter().any(|p| !(p.scale > 0.0 && p.scale.is_finite() && p.location.is_finite())) {
            return Err(Error::Config(format!("prior scales must be positive and finite: {self:?}")));
        }
        Ok(())
    }

    /// Log prior density of a natural-scale vector laid out by `layout`.
    pub fn log_density(&self, layout: &ParamLayout, x: &[f64]) -> f64 {
        let m = layout.n_covariates();
        if x[layout.alpha0()] <= 0.0 || x[layout.alpha1()] <= 0.0 || x[layout.psi()] <= 0.0 {
            return f64::NEG_INFINITY;
        }
        self.a0.log_density(x[0])
            + self.a1.log_density(x[1])
            + x[2..2 + m].iter().map(|&b| self.beta.log_density(b)).sum::<f64>()
            + self.alpha0.log_density(x[layout.alpha0()])
            + self.alpha1.log_density(x[layout.alpha1()])
            + self.lambda.log_density(x[layout.lambda()])
            + self.psi.log_density(x[layout.psi()])
            + self.tau.log_density(x[layout.tau()])
    }
}

/// Block structure of the sampler.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Block {
    /// `a0`, `a1` and the covariate coefficients.
    Mean,
    /// `α0`, `α1`.
    Garch,
    /// `λ`, `ψ`, `τ`, always proposed jointly.
    Gh,
}

impl Block {
    pub const ALL: [Block; 3] = [Block::Mean, Block::Garch, Block::Gh];

    pub fn name(&self) -> &'static str {
        match self {
            Block::Mean => "mean",
            Block::Garch => "garch",
            Block::Gh => "gh",
        }
    }
}

/// Parameter vector `[a0, a1, β.., α0, α1, λ, ψ, τ]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamLayout {
    pub covariate_names: Vec<String>,
}

impl ParamLayout {
    pub fn new(covariate_names: Vec<String>) -> Self {
        Self { covariate_names }
    }

    pub fn n_covariates(&self) -> usize {
        self.covariate_names.len()
    }

    pub fn dim(&self) -> usize {
        7 + self.n_covariates()
    }

    pub fn alpha0(&self) -> usize {
        2 + self.n_covariates()
    }
    pub fn alpha1(&self) -> usize {
        3 + self.n_covariates()
    }
    pub fn lambda(&self) -> usize {
        4 + self.n_covariates()
    }
    pub fn psi(&self) -> usize {
        5 + self.n_covariates()
    }
    pub fn tau(&self) -> usize {
        6 + self.n_covariates()
    }

    pub fn names(&self) -> Vec<String> {
        let mut v = vec!["a0".to_string(), "a1".to_string()];
        v.extend(self.covariate_names.iter().map(|c| format!("beta_{c}")));
        v.extend(["alpha0", "alpha1", "lambda", "psi", "tau"].map(String::from));
        v
    }

    pub fn block_indices(&self, block: Block) -> Vec<usize> {
        match block {
            Block::Mean => (0..2 + self.n_covariates()).collect(),
            Block::Garch => vec![self.alpha0(), self.alpha1()],
            Block::Gh => vec![self.lambda(), self.psi(), self.tau()],
        }
    }

    fn is_log(&self, i: usize) -> bool {
        i == self.alpha0() || i == self.alpha1() || i == self.psi()
    }

    pub fn to_unconstrained(&self, x: &[f64]) -> Vec<f64> {
        x.iter().enumerate().map(|(i, &v)| if self.is_log(i) { v.ln() } else { v }).collect()
    }

    pub fn from_unconstrained(&self, u: &[f64]) -> Vec<f64> {
        u.iter().enumerate().map(|(i, &v)| if self.is_log(i) { v.exp() } else { v }).collect()
    }

    /// `ln |dx/du|` at `u`.
    pub fn log_jacobian(&self, u: &[f64]) -> f64 {
        u[self.alpha0()] + u[self.alpha1()] + u[self.psi()]
    }

    pub fn to_params(&self, x: &[f64]) -> Result<ArmaGarchParams> {
        if x.len() != self.dim() {
            return Err(Error::Config(format!("expected {} parameters, got {}", self.dim(), x.len())));
        }
        let m = self.n_covariates();
        ArmaGarchParams::ar1_arch1(
            x[0],
            x[1],
            x[2..2 + m].to_vec(),
            x[self.alpha0()],
            x[self.alpha1()],
            x[self.lambda()],
            x[self.psi()],
            x[self.tau()],
        )
    }

    pub fn from_params(&self, p: &ArmaGarchParams) -> Result<Vec<f64>> {
        if p.ar.len() > 1 || !p.ma.is_empty() || p.arch.len() > 1 || !p.garch.is_empty() {
            return Err(Error::Config("inference supports AR(1)-ARCH(1) only".into()));
        }
        if p.betas.len() != self.n_covariates() {
            return Err(Error::Config(format!(
                "{} covariate coefficients for {} covariates",
                p.betas.len(),
                self.n_covariates()
            )));
        }
        let mut x = vec![p.a0, p.a1()];
        x.extend(&p.betas);
        x.extend([p.alpha0, p.alpha1(), p.gh.lambda, p.gh.psi, p.gh.tau]);
        Ok(x)
    }
}

/// How censored values are refreshed before each parameter sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum AugmentationScheme {
    /// Fresh forward draws from the truncated conditional law given the past.
    Forward,
    /// Forward draws used as Metropolis proposals, accepted against the
    /// conditional densities of the later steps that depend on the value.
    #[default]
    Corrected,
}

fn draw_below<R: rand::Rng + ?Sized>(
    trunc: &mut GhTruncation,
    t: usize,
    mu: f64,
    sigma: f64,
    params: &ArmaGarchParams,
    rng: &mut R,
) -> Result<f64> {
    let upper = -mu / sigma;
    let z = trunc.sample_below(upper, rng).map_err(|e| match e {
        Error::NegligibleMass { mass, .. } => Error::Numerical(format!(
            "censored step {t}: mass {mass:e} of the innovation law below {upper} \
             (mu = {mu}, sigma = {sigma}, params {params:?})"
        )),
        other => other,
    })?;
    Ok((mu + sigma * z).min(0.0))
}

/// Fill every censored step by walking the series forward and drawing `y_t`
/// from its conditional law truncated to `(−∞, 0]`, using earlier fills as
/// history.
pub fn augment_censored<R: rand::Rng + ?Sized>(
    params: &ArmaGarchParams,
    series: &CensoredSeries,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let mut fill = Vec::with_capacity(series.censored_count());
    if fill.capacity() == 0 {
        return Ok(fill);
    }
    let mut trunc = GhTruncation::new(params.gh)?;
    run_recursion(params, &series.covariates, series.len(), |t, mu, sigma| {
        if !series.censored_mask[t] {
            return Ok(series.observed[t]);
        }
        let y = draw_below(&mut trunc, t, mu, sigma, params, rng)?;
        fill.push(y);
        Ok(y)
    })?;
    Ok(fill)
}

/// One forward sweep over the censored steps that leaves the conditional
/// law of the fills given the parameters and data invariant. At each step a
/// forward draw replaces the current value with probability
/// `min(1, f(later | new) / f(later | current))`, where `later` are the
/// steps whose conditional law involves `y_t`.
pub fn resample_censored<R: rand::Rng + ?Sized>(
    params: &ArmaGarchParams,
    series: &CensoredSeries,
    current: &[f64],
    rng: &mut R,
) -> Result<Vec<f64>> {
    let mut fill = current.to_vec();
    if fill.is_empty() {
        return Ok(fill);
    }
    let law = GhLaw::new(params.gh)?;
    let mut trunc = GhTruncation::new(params.gh)?;
    let mut path = Path::new(params, &series.covariates, series.complete(current)?)?;
    let n = series.len();
    for (k, t) in series.censored_indices().into_iter().enumerate() {
        let (mu, sigma) = path.conditional(t);
        let proposal = draw_below(&mut trunc, t, mu, sigma, params, rng)?;
        let end = path.influence().map_or(n, |w| (t + 1 + w).min(n));
        let old = path.log_density(&law, t + 1, end);
        let saved = (path.y[t], path.eps[t..end].to_vec(), path.sigma2[t..end].to_vec());
        path.y[t] = proposal;
        path.refresh(t, end);
        let new = path.log_density(&law, t + 1, end);
        if (1.0 - rng.random::<f64>()).ln() < new - old {
            fill[k] = proposal;
        } else {
            path.y[t] = saved.0;
            path.eps[t..end].copy_from_slice(&saved.1);
            path.sigma2[t..end].copy_from_slice(&saved.2);
        }
    }
    Ok(fill)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McmcConfig {
    /// Total iterations, burn-in included.
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub thinning: usize,
    /// Keep every retained fill vector, not only their running mean.
    pub store_latents: bool,
    /// Natural-scale starting vector; derived from the data when absent.
    pub initial: Option<Vec<f64>>,
    pub window: usize,
    pub target_acceptance: f64,
    pub adapt_covariance: bool,
    pub augmentation: AugmentationScheme,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            iterations: 10_000,
            burn_in: 3_000,
            seed: 1,
            thinning: 1,
            store_latents: false,
            initial: None,
            window: 100,
            target_acceptance: 0.3,
            adapt_covariance: true,
            augmentation: AugmentationScheme::Corrected,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockAcceptance {
    pub block: Block,
    pub burn_in: Acceptance,
    pub retained: Acceptance,
}

/// Retained posterior draws on the natural scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    pub names: Vec<String>,
    pub covariate_names: Vec<String>,
    pub draws: Vec<Vec<f64>>,
    pub log_posterior: Vec<f64>,
    /// Censored step indices, the columns of the latent fills.
    pub censored_indices: Vec<usize>,
    /// Per-draw fills; empty unless requested.
    pub augmented_latents: Vec<Vec<f64>>,
    /// Mean fill over retained iterations.
    pub latent_mean: Vec<f64>,
    pub acceptance: Vec<BlockAcceptance>,
    pub config: McmcConfig,
    pub priors: PriorSpec,
    /// Frozen post-burn-in proposals on the unconstrained scale.
    pub proposals: ProposalSpec,
}

impl Chain {
    /// A chain holding only draws, for summarizing externally produced samples.
    pub fn from_draws(names: Vec<String>, draws: Vec<Vec<f64>>) -> Self {
        Self {
            names,
            covariate_names: Vec::new(),
            log_posterior: vec![f64::NAN; draws.len()],
            draws,
            censored_indices: Vec::new(),
            augmented_latents: Vec::new(),
            latent_mean: Vec::new(),
            acceptance: Vec::new(),
            config: McmcConfig::default(),
            priors: PriorSpec::default(),
            proposals: ProposalSpec { blocks: Vec::new(), window: 100, target_acceptance: 0.3, adapt_covariance: false },
        }
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn layout(&self) -> ParamLayout {
        ParamLayout::new(self.covariate_names.clone())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.names.iter().position(|n| n == name)?;
        Some(self.draws.iter().map(|d| d[j]).collect())
    }

    pub fn params_at(&self, k: usize) -> Result<ArmaGarchParams> {
        let d = self.draws.get(k).ok_or_else(|| Error::Config(format!("no draw {k}")))?;
        self.layout().to_params(d)
    }

    pub fn posterior_mean(&self) -> Result<ArmaGarchParams> {
        if self.is_empty() {
            return Err(Error::Config("empty chain".into()));
        }
        let mean: Vec<f64> =
            (0..self.names.len()).map(|j| stats::mean(&self.draws.iter().map(|d| d[j]).collect::<Vec<_>>())).collect();
        self.layout().to_params(&mean)
    }
}

struct Posterior<'a> {
    series: &'a CensoredSeries,
    scheme: AugmentationScheme,
    priors: &'a PriorSpec,
    layout: ParamLayout,
    fill: Vec<f64>,
}

impl Posterior<'_> {
    fn evaluate(&self, u: &[f64]) -> Result<f64> {
        let x = self.layout.from_unconstrained(u);
        let prior = self.priors.log_density(&self.layout, &x);
        if prior == f64::NEG_INFINITY {
            return Ok(prior);
        }
        let Ok(params) = self.layout.to_params(&x) else {
            return Ok(f64::NEG_INFINITY);
        };
        let ll = log_likelihood(&params, self.series, &self.fill)?;
        let lp = ll + prior + self.layout.log_jacobian(u);
        Ok(if lp.is_nan() { f64::NEG_INFINITY } else { lp })
    }
}

impl Target for Posterior<'_> {
    fn log_density(&mut self, u: &[f64]) -> Result<f64> {
        // numerical breakdown at a proposed point rejects it
        match self.evaluate(u) {
            Err(Error::Numerical(_) | Error::Domain(_)) => Ok(f64::NEG_INFINITY),
            other => other,
        }
    }

    fn refresh(&mut self, u: &[f64], rng: &mut McmcRng) -> Result<()> {
        let params = self.layout.to_params(&self.layout.from_unconstrained(u))?;
        self.fill = if self.scheme == AugmentationScheme::Corrected && self.fill.len() == self.series.censored_count() {
            resample_censored(&params, self.series, &self.fill, rng)?
        } else {
            augment_censored(&params, self.series, rng)?
        };
        Ok(())
    }
}

/// Least-squares AR(1) start with a moderately skewed GH law.
pub fn default_start(series: &CensoredSeries) -> Result<Vec<f64>> {
    let n = series.len();
    let m = series.n_covariates();
    if n < 3 + m {
        return Err(Error::Data(format!("series of length {n} is too short to fit")));
    }
    let p = 2 + m;
    let mut xtx = nalgebra::DMatrix::<f64>::zeros(p, p);
    let mut xty = nalgebra::DVector::<f64>::zeros(p);
    for t in 1..n {
        let mut row = vec![1.0, series.observed[t - 1]];
        row.extend(&series.covariates[t]);
        for i in 0..p {
            xty[i] += row[i] * series.observed[t];
            for j in 0..p {
                xtx[(i, j)] += row[i] * row[j];
            }
        }
    }
    for i in 0..p {
        xtx[(i, i)] += 1e-8;
    }
    let coef = xtx
        .cholesky()
        .ok_or_else(|| Error::Data("covariates are collinear".into()))?
        .solve(&xty);
    let mut x: Vec<f64> = coef.iter().copied().collect();
    x[1] = x[1].clamp(-0.9, 0.9);
    let resid: Vec<f64> = (1..n)
        .map(|t| {
            let fit = x[0]
                + x[1] * series.observed[t - 1]
                + x[2..].iter().zip(&series.covariates[t]).map(|(b, u)| b * u).sum::<f64>();
            series.observed[t] - fit
        })
        .collect();
    let v = stats::variance(&resid).max(1e-6);
    x.extend([0.8 * v, 0.2, 0.5, 1.0, 1.0]);
    Ok(x)
}

fn initial_proposals(layout: &ParamLayout, series: &CensoredSeries, x0: &[f64], config: &McmcConfig) -> ProposalSpec {
    let n = series.len() as f64;
    let sd_y = stats::variance(&series.observed).sqrt().max(1e-3);
    let coef = 0.5 * sd_y / n.sqrt();
    let mut mean_sds = vec![coef, 0.5 / n.sqrt()];
    mean_sds.extend(std::iter::repeat_n(coef, layout.n_covariates()));
    let sds = |b: Block| -> Vec<f64> {
        match b {
            Block::Mean => mean_sds.clone(),
            Block::Garch => vec![0.05, 0.1],
            Block::Gh => vec![0.1, 0.1, 0.1 * x0[layout.tau()].abs().max(1.0)],
        }
    };
    ProposalSpec {
        blocks: Block::ALL
            .iter()
            .map(|&b| BlockProposal::diagonal(b.name(), layout.block_indices(b), &sds(b)))
            .collect(),
        window: config.window,
        target_acceptance: config.target_acceptance,
        adapt_covariance: config.adapt_covariance,
    }
}

/// Run one chain: per iteration, augment the censored steps, then update
/// the mean, GARCH and GH blocks in turn.
pub fn run_mcmc(series: &CensoredSeries, priors: &PriorSpec, config: &McmcConfig) -> Result<Chain> {
    priors.validate()?;
    let layout = ParamLayout::new(series.covariate_names.clone());
    let x0 = match &config.initial {
        Some(x) => x.clone(),
        None => default_start(series)?,
    };
    if x0.len() != layout.dim() {
        return Err(Error::Config(format!("initial vector has {} entries, expected {}", x0.len(), layout.dim())));
    }
    let proposals = initial_proposals(&layout, series, &x0, config);
    let u0 = layout.to_unconstrained(&x0);
    let mut rng = McmcRng::seed_from_u64(config.seed);
    let mut target = Posterior { series, scheme: config.augmentation, priors, layout: layout.clone(), fill: Vec::new() };
    // the start must be usable before the first augmentation
    target.refresh(&u0, &mut rng).map_err(|e| Error::Config(format!("unusable initial values {x0:?}: {e}")))?;
    if target.evaluate(&u0)? == f64::NEG_INFINITY {
        return Err(Error::Config(format!("initial values {x0:?} have zero posterior density")));
    }

    let mut latents = Vec::new();
    let mut latent_sum = vec![0.0; series.censored_count()];
    let mut retained = 0usize;
    let length = RunLength { iterations: config.iterations, burn_in: config.burn_in, thinning: config.thinning };
    let run = run_sampler(&mut target, u0, proposals, length, &mut rng, |t| {
        retained += 1;
        for (s, v) in latent_sum.iter_mut().zip(&t.fill) {
            *s += v;
        }
        if config.store_latents {
            latents.push(t.fill.clone());
        }
    })?;
    let latent_mean = if retained == 0 { Vec::new() } else { latent_sum.iter().map(|s| s / retained as f64).collect() };
    Ok(Chain {
        names: layout.names(),
        covariate_names: layout.covariate_names.clone(),
        draws: run.draws.iter().map(|u| layout.from_unconstrained(u)).collect(),
        log_posterior: run.log_density,
        censored_indices: series.censored_indices(),
        augmented_latents: latents,
        latent_mean,
        acceptance: Block::ALL
            .iter()
            .enumerate()
            .map(|(b, &block)| BlockAcceptance {
                block,
                burn_in: run.burn_in_acceptance[b],
                retained: run.acceptance[b],
            })
            .collect(),
        config: config.clone(),
        priors: *priors,
        proposals: run.proposals,
    })
}

/// Independent chains, one per seed, run concurrently.
pub fn run_chains(
    series: &CensoredSeries,
    priors: &PriorSpec,
    config: &McmcConfig,
    seeds: &[u64],
) -> Result<Vec<Chain>> {
    seeds
        .par_iter()
        .map(|&seed| run_mcmc(series, priors, &McmcConfig { seed, ..config.clone() }))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSummary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    /// 2.5% quantile.
    pub lower: f64,
    /// 97.5% quantile.
    pub upper: f64,
}

impl ParamSummary {
    fn of(name: &str, xs: &[f64]) -> Self {
        let q = stats::quantiles(xs, &[0.025, 0.975]);
        let sd = if xs.len() > 1 { stats::variance(xs).sqrt() } else { 0.0 };
        Self { name: name.to_string(), mean: stats::mean(xs), sd, lower: q[0], upper: q[1] }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stationarity {
    /// Posterior probability that the variance process is weakly stationary.
    pub prob_stationary: f64,
    /// Posterior of `α0 / (1 − α1)` over the stationary draws.
    pub unconditional_variance: Option<ParamSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSummary {
    pub draws: usize,
    pub parameters: Vec<ParamSummary>,
    pub acceptance: Vec<(String, f64)>,
    pub stationarity: Option<Stationarity>,
}

impl ChainSummary {
    pub fn get(&self, name: &str) -> Option<&ParamSummary> {
        self.parameters.iter().find(|p| p.name == name)
    }
}

pub fn summarize(chain: &Chain) -> Result<ChainSummary> {
    if chain.is_empty() {
        return Err(Error::Config("cannot summarize an empty chain".into()));
    }
    let parameters = chain
        .names
        .iter()
        .enumerate()
        .map(|(j, n)| ParamSummary::of(n, &chain.draws.iter().map(|d| d[j]).collect::<Vec<_>>()))
        .collect();
    let acceptance = chain.acceptance.iter().map(|a| (a.block.name().to_string(), a.retained.rate())).collect();
    let stationarity = match (chain.column("alpha0"), chain.column("alpha1")) {
        (Some(a0), Some(a1)) => {
            let uv: Vec<f64> = (0..chain.len())
                .filter(|&k| a1[k] < 1.0)
                .map(|k| a0[k] / (1.0 - a1[k]))
                .collect();
            Some(Stationarity {
                prob_stationary: uv.len() as f64 / chain.len() as f64,
                unconditional_variance: (!uv.is_empty()).then(|| ParamSummary::of("unconditional_variance", &uv)),
            })
        }
        _ => None,
    };
    Ok(ChainSummary { draws: chain.len(), parameters, acceptance, stationarity })
}
