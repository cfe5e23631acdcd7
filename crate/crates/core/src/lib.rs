//! Censored ARMA-GARCH model with generalized hyperbolic innovations for
//! weekly rainfall, with Bayesian inference by adaptive Metropolis–Hastings.

pub mod diag;
pub mod dist;
pub mod error;
pub mod infer;
pub mod model;
pub mod optim;
pub mod quad;
pub mod specfun;
pub mod stats;

pub use error::{Error, Result};
