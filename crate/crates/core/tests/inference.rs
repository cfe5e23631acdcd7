use ghrain::infer::{run_mcmc, summarize, McmcConfig, McmcRng, PriorSpec};
use ghrain::model::{simulate_latent, ArmaGarchParams, CensoredSeries};
use ghrain::stats;
use rand::SeedableRng;

#[test]
fn posterior_mean_fills_track_true_latents() {
    let truth = ArmaGarchParams::ar1_arch1(1.9, 0.5, vec![], 13.0, 0.2, -0.2, 0.25, 15.0).unwrap();
    let mut rng = McmcRng::seed_from_u64(21);
    let y = simulate_latent(&truth, &[], 1500, &mut rng).unwrap().y;
    let series = CensoredSeries::from_values(y.iter().map(|v| v.max(0.0)).collect()).unwrap();
    let frac = series.censored_fraction();
    assert!((0.05..0.12).contains(&frac), "censored fraction {frac}");

    let cfg = McmcConfig { iterations: 3000, burn_in: 1000, seed: 22, ..Default::default() };
    let chain = run_mcmc(&series, &PriorSpec::default(), &cfg).unwrap();
    let hidden: Vec<f64> = chain.censored_indices.iter().map(|&t| y[t]).collect();
    let rho = stats::rank_correlation(&chain.latent_mean, &hidden);
    assert!(rho > 0.3, "rank correlation {rho}");

    let s = summarize(&chain).unwrap();
    for (_, rate) in &s.acceptance {
        assert!((0.15..=0.45).contains(rate), "{:?}", s.acceptance);
    }
}
