//! Joint inference of conditional-independence graphs across related
//! environments.
//!
//! Each environment's observations are mapped to a latent Gaussian through
//! per-variable discrete Weibull marginals (or used directly when Gaussian).
//! The latent precision matrices follow G-Wishart laws on environment-specific
//! graphs, and the graphs share a probit random-graph prior driven by edge
//! covariates and low-dimensional environment embeddings.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bdmcmc;
pub mod config;
pub mod copula;
pub mod dataset;
pub mod error;
pub mod graph;
pub mod gwishart;
pub mod io;
pub mod marginals;
pub mod normal;
pub mod random_graph;
pub mod rng;
pub mod sampler;
pub mod sim;
pub mod truncnorm;

pub use error::{Error, Result};
