//! Discrete Weibull regression marginals.
//!
//! Each node `j` has a count distribution with CDF
//! `F(y | x) = 1 - q(x)^((y + 1)^b(x))`, `logit q(x) = x·eta`,
//! `log b(x) = x·gamma`. Observed counts map to half-open intervals of the
//! latent Gaussian scale through the probit of consecutive CDF values.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal;
use crate::rng::{purpose, StreamKey};

/// CDF values within `CDF_EPS` of 1 are treated as saturated before the
/// probit transform.
pub const CDF_EPS: f64 = 1e-12;

/// `|x·eta|` bound keeping `q` inside `(CDF_EPS, 1 - CDF_EPS)`.
pub const LOGIT_BOUND: f64 = 27.631_021_115_928_547;

/// `|x·gamma|` bound: `b` stays inside `(e^-20, e^20)`.
pub const LOG_B_BOUND: f64 = 20.0;

fn check_params(q: f64, b: f64) -> Result<()> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain(format!("discrete Weibull q must lie in (0, 1), got {q}")));
    }
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::Domain(format!("discrete Weibull b must be positive, got {b}")));
    }
    Ok(())
}

/// `F(y) = 1 - q^((y+1)^b)`, with `F(y) = 0` for every `y < 0`.
pub fn dw_cdf(y: i64, q: f64, b: f64) -> Result<f64> {
    check_params(q, b)?;
    Ok(cdf_unchecked(y, q.ln(), b))
}

#[inline]
fn cdf_unchecked(y: i64, log_q: f64, b: f64) -> f64 {
    if y < 0 {
        0.0
    } else {
        -((y as f64 + 1.0).powf(b) * log_q).exp_m1()
    }
}

/// Probability mass, computed as the exact difference of consecutive CDF
/// values.
pub fn dw_pmf(y: u64, q: f64, b: f64) -> Result<f64> {
    check_params(q, b)?;
    let log_q = q.ln();
    let y = y as i64;
    Ok(cdf_unchecked(y, log_q, b) - cdf_unchecked(y - 1, log_q, b))
}

/// Log mass from the factorisation `q^(y^b) (1 - q^((y+1)^b - y^b))`, which
/// keeps precision deep in the tail.
#[inline]
fn log_pmf_unchecked(y: u64, log_q: f64, b: f64) -> f64 {
    let lo = if y == 0 { 0.0 } else { (y as f64).powf(b) };
    let hi = (y as f64 + 1.0).powf(b);
    lo * log_q + (-((hi - lo) * log_q).exp_m1()).ln()
}

/// Smallest `y` with `F(y) >= u`.
pub fn dw_quantile(u: f64, q: f64, b: f64) -> Result<u64> {
    check_params(q, b)?;
    if !(0.0..1.0).contains(&u) {
        return Err(Error::Domain(format!("quantile level must lie in [0, 1), got {u}")));
    }
    let log_q = q.ln();
    let guess = ((-u).ln_1p() / log_q).powf(1.0 / b) - 1.0;
    let mut y = if guess.is_finite() && guess > 0.0 { guess.ceil().min(9.0e15) as i64 } else { 0 };
    while y > 0 && cdf_unchecked(y - 1, log_q, b) >= u {
        y -= 1;
    }
    while cdf_unchecked(y, log_q, b) < u {
        y += 1;
    }
    Ok(y as u64)
}

#[inline]
fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

#[inline]
fn clamp_logit(lin: f64) -> f64 {
    lin.clamp(-LOGIT_BOUND, LOGIT_BOUND)
}

/// `ln q` for a logit-scale linear predictor.
#[inline]
fn log_q_of(lin: f64) -> f64 {
    -softplus(-clamp_logit(lin))
}

#[inline]
fn b_of(lin: f64) -> f64 {
    lin.clamp(-LOG_B_BOUND, LOG_B_BOUND).exp()
}

/// Node covariates: one row per sample, first column the intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeCovariates {
    names: Vec<String>,
    design: DMatrix<f64>,
}

impl NodeCovariates {
    pub fn new(names: Vec<String>, design: DMatrix<f64>) -> Result<Self> {
        if names.len() != design.ncols() {
            return Err(Error::Dimension(format!("{} covariate names for {} design columns", names.len(), design.ncols())));
        }
        if design.ncols() == 0 || design.column(0).iter().any(|&v| v != 1.0) {
            return Err(Error::Domain("first design column must be the all-ones intercept".into()));
        }
        if design.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("design matrix contains missing or non-finite values".into()));
        }
        Ok(NodeCovariates { names, design })
    }

    pub fn intercept_only(n: usize) -> Self {
        NodeCovariates { names: vec!["intercept".into()], design: DMatrix::from_element(n, 1, 1.0) }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn design(&self) -> &DMatrix<f64> {
        &self.design
    }

    pub fn n_samples(&self) -> usize {
        self.design.nrows()
    }

    /// Number of coefficients per link (intercept included).
    pub fn dim(&self) -> usize {
        self.design.ncols()
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.design.row(i).iter().copied().collect()
    }

    /// Row subset, used to split a pooled design per environment.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        NodeCovariates { names: self.names.clone(), design: self.design.select_rows(rows) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DwRegression {
    pub otu_index: usize,
    pub eta: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl DwRegression {
    pub fn new(otu_index: usize, eta: Vec<f64>, gamma: Vec<f64>) -> Result<Self> {
        if eta.len() != gamma.len() || eta.is_empty() {
            return Err(Error::Dimension(format!("eta has {} coefficients, gamma has {}", eta.len(), gamma.len())));
        }
        Ok(DwRegression { otu_index, eta, gamma })
    }

    /// Intercept-only marginal with the given `(q, b)`.
    pub fn constant(otu_index: usize, q: f64, b: f64) -> Result<Self> {
        check_params(q, b)?;
        DwRegression::new(otu_index, vec![(q / (1.0 - q)).ln()], vec![b.ln()])
    }

    pub fn dim(&self) -> usize {
        self.eta.len()
    }

    pub fn link_params(&self, x_row: &[f64]) -> Result<(f64, f64)> {
        link_params(self, x_row)
    }
}

/// `(q, b)` at covariate row `x_row`. The logit predictor is clamped to
/// `±LOGIT_BOUND` and the log predictor of `b` to `±LOG_B_BOUND`.
pub fn link_params(reg: &DwRegression, x_row: &[f64]) -> Result<(f64, f64)> {
    if x_row.len() != reg.eta.len() {
        return Err(Error::Dimension(format!("covariate row of length {} for {} coefficients", x_row.len(), reg.eta.len())));
    }
    let lin_q: f64 = x_row.iter().zip(&reg.eta).map(|(x, e)| x * e).sum();
    let lin_b: f64 = x_row.iter().zip(&reg.gamma).map(|(x, g)| x * g).sum();
    Ok((1.0 / (1.0 + (-clamp_logit(lin_q)).exp()), b_of(lin_b)))
}

/// Half-open latent interval `(lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatentInterval {
    pub lower: f64,
    pub upper: f64,
}

impl LatentInterval {
    pub const UNBOUNDED: LatentInterval = LatentInterval { lower: f64::NEG_INFINITY, upper: f64::INFINITY };

    #[inline]
    pub fn contains(&self, z: f64) -> bool {
        self.lower < z && z <= self.upper
    }
}

/// Latent threshold `probit(F(y))`; saturated CDF values map to `+inf`.
fn threshold(y: i64, log_q: f64, b: f64) -> f64 {
    if y < 0 {
        return f64::NEG_INFINITY;
    }
    // Upper-tail thresholds go through the survival function: near F = 1 the
    // CDF loses resolution and consecutive counts would share a threshold.
    let log_s = (y as f64 + 1.0).powf(b) * log_q;
    let s = log_s.exp();
    if s <= CDF_EPS {
        f64::INFINITY
    } else if s < 0.5 {
        -normal::probit(s)
    } else {
        normal::probit(-log_s.exp_m1())
    }
}

/// Latent interval of count `y` under the marginal at `x_row`.
///
/// Thresholds of consecutive counts are shared, so intervals tile the real
/// line up to the first count whose CDF saturates at `1 - CDF_EPS`. Counts
/// beyond that point (model probability below `CDF_EPS`) all map to
/// `(probit(1 - CDF_EPS), +inf]`.
pub fn latent_interval(y: u64, reg: &DwRegression, x_row: &[f64]) -> Result<LatentInterval> {
    let (q, b) = link_params(reg, x_row)?;
    Ok(interval_for(y, q.ln(), b))
}

fn interval_for(y: u64, log_q: f64, b: f64) -> LatentInterval {
    let y = y as i64;
    let upper = threshold(y, log_q, b);
    let mut lower = threshold(y - 1, log_q, b);
    if lower == f64::INFINITY {
        lower = normal::probit(1.0 - CDF_EPS);
    }
    LatentInterval { lower, upper }
}

/// Count whose latent interval contains `z`.
pub fn count_for_latent(z: f64, reg: &DwRegression, x_row: &[f64]) -> Result<u64> {
    let (q, b) = link_params(reg, x_row)?;
    let log_q = q.ln();
    let mut y = dw_quantile(normal::cdf(z).min(1.0 - f64::EPSILON), q, b)?;
    // settle rounding at the boundaries on the latent scale itself
    loop {
        let iv = interval_for(y, log_q, b);
        if z > iv.upper {
            y += 1;
        } else if z <= iv.lower && y > 0 && threshold(y as i64 - 1, log_q, b) >= z {
            y -= 1;
        } else {
            return Ok(y);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MhConfig {
    pub iterations: usize,
    pub proposal_sd: f64,
    pub burn_in_fraction: f64,
    pub seed: u64,
}

impl Default for MhConfig {
    fn default() -> Self {
        MhConfig { iterations: 50_000, proposal_sd: 0.05, burn_in_fraction: 0.75, seed: 1 }
    }
}

impl MhConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations < 2 {
            return Err(Error::Config("marginal iterations must be at least 2".into()));
        }
        if !(self.proposal_sd > 0.0) {
            return Err(Error::Config("proposal_sd must be positive".into()));
        }
        if !(self.burn_in_fraction > 0.0 && self.burn_in_fraction < 1.0) {
            return Err(Error::Config("burn_in_fraction must lie in (0, 1)".into()));
        }
        Ok(())
    }

    fn burn_in(&self) -> usize {
        ((self.burn_in_fraction * self.iterations as f64).floor() as usize).min(self.iterations - 1)
    }
}

/// Acceptance band that proposal-scale adaptation aims for during burn-in.
pub const TARGET_ACCEPTANCE: (f64, f64) = (0.23, 0.44);
/// Post-burn-in acceptance outside this band raises a warning.
pub const ACCEPTABLE_ACCEPTANCE: (f64, f64) = (0.1, 0.6);
const ADAPT_WINDOW: usize = 50;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarginalFit {
    /// `[eta..., gamma...]` per iteration, burn-in included.
    pub trace: Vec<Vec<f64>>,
    pub burn_in: usize,
    pub posterior_mean: DwRegression,
    pub posterior_sd_eta: Vec<f64>,
    pub posterior_sd_gamma: Vec<f64>,
    pub acceptance_rate: f64,
    pub final_proposal_sd: f64,
    pub warning: Option<String>,
}

/// Unnormalised log posterior under independent `N(0, 1)` priors.
pub fn log_posterior(counts: &[u64], x: &NodeCovariates, eta: &[f64], gamma: &[f64]) -> Result<f64> {
    if counts.len() != x.n_samples() {
        return Err(Error::Dimension(format!("{} counts for {} covariate rows", counts.len(), x.n_samples())));
    }
    if eta.len() != x.dim() || gamma.len() != x.dim() {
        return Err(Error::Dimension("coefficient length differs from design width".into()));
    }
    let design = x.design();
    let mut lp = -0.5 * (eta.iter().map(|v| v * v).sum::<f64>() + gamma.iter().map(|v| v * v).sum::<f64>());
    for (i, &y) in counts.iter().enumerate() {
        let row = design.row(i);
        let lin_q: f64 = row.iter().zip(eta).map(|(a, b)| a * b).sum();
        let lin_b: f64 = row.iter().zip(gamma).map(|(a, b)| a * b).sum();
        lp += log_pmf_unchecked(y, log_q_of(lin_q), b_of(lin_b));
    }
    Ok(lp)
}

/// Componentwise random-walk Metropolis–Hastings for one node's
/// `(eta, gamma)`. The shared proposal scale adapts during burn-in towards
/// [`TARGET_ACCEPTANCE`]; summaries use the post-burn-in draws only.
pub fn fit_marginal_mh(otu_index: usize, counts: &[u64], x: &NodeCovariates, cfg: &MhConfig) -> Result<MarginalFit> {
    cfg.validate()?;
    let n = counts.len();
    if n != x.n_samples() {
        return Err(Error::Dimension(format!("{n} counts for {} covariate rows", x.n_samples())));
    }
    let mut distinct: Vec<u64> = counts.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::DegenerateData(format!(
            "node {otu_index} has {} distinct count value(s); at least 3 are required",
            distinct.len()
        )));
    }

    let m = x.dim();
    let design = x.design();
    // nonzero rows per design column: dummy columns touch few samples
    let nonzero: Vec<Vec<usize>> = (0..m).map(|c| (0..n).filter(|&i| design[(i, c)] != 0.0).collect()).collect();

    let mean = counts.iter().sum::<u64>() as f64 / n as f64;
    let mut theta = vec![0.0; 2 * m];
    theta[0] = mean.max(0.05).ln();
    let mut lin_q: Vec<f64> = vec![theta[0]; n];
    let mut lin_b: Vec<f64> = vec![0.0; n];
    let mut ll: Vec<f64> = (0..n).map(|i| log_pmf_unchecked(counts[i], log_q_of(lin_q[i]), b_of(lin_b[i]))).collect();

    let mut rng = StreamKey::new(cfg.seed).child(purpose::MARGINAL).child(otu_index as u64).rng();
    let burn_in = cfg.burn_in();
    let mut sd = cfg.proposal_sd;
    let mut trace = Vec::with_capacity(cfg.iterations);
    let (mut window_acc, mut window_tot) = (0usize, 0usize);
    let (mut kept_acc, mut kept_tot) = (0usize, 0usize);
    let mut new_ll: Vec<f64> = Vec::with_capacity(n);

    for it in 0..cfg.iterations {
        for c in 0..2 * m {
            let step: f64 = rng.sample::<f64, _>(StandardNormal) * sd;
            let proposal = theta[c] + step;
            let (col, is_q) = if c < m { (c, true) } else { (c - m, false) };
            let rows = &nonzero[col];
            new_ll.clear();
            let mut delta = -0.5 * (proposal * proposal - theta[c] * theta[c]);
            for &i in rows {
                let shift = step * design[(i, col)];
                let v = if is_q {
                    log_pmf_unchecked(counts[i], log_q_of(lin_q[i] + shift), b_of(lin_b[i]))
                } else {
                    log_pmf_unchecked(counts[i], log_q_of(lin_q[i]), b_of(lin_b[i] + shift))
                };
                delta += v - ll[i];
                new_ll.push(v);
            }
            let accept = delta.is_finite() && (delta >= 0.0 || rng.random::<f64>().ln() < delta);
            if accept {
                theta[c] = proposal;
                for (&i, &v) in rows.iter().zip(&new_ll) {
                    let shift = step * design[(i, col)];
                    if is_q {
                        lin_q[i] += shift;
                    } else {
                        lin_b[i] += shift;
                    }
                    ll[i] = v;
                }
            }
            if it < burn_in {
                window_tot += 1;
                window_acc += usize::from(accept);
            } else {
                kept_tot += 1;
                kept_acc += usize::from(accept);
            }
        }
        if it < burn_in && (it + 1) % ADAPT_WINDOW == 0 {
            let rate = window_acc as f64 / window_tot as f64;
            if rate < TARGET_ACCEPTANCE.0 {
                sd *= 0.8;
            } else if rate > TARGET_ACCEPTANCE.1 {
                sd *= 1.25;
            }
            window_acc = 0;
            window_tot = 0;
        }
        trace.push(theta.clone());
    }

    let kept = &trace[burn_in..];
    let k = kept.len() as f64;
    let mean_v: Vec<f64> = (0..2 * m).map(|c| kept.iter().map(|t| t[c]).sum::<f64>() / k).collect();
    let sd_v: Vec<f64> = (0..2 * m)
        .map(|c| {
            let mu = mean_v[c];
            let var = kept.iter().map(|t| (t[c] - mu).powi(2)).sum::<f64>() / (k - 1.0).max(1.0);
            var.sqrt()
        })
        .collect();
    let acceptance_rate = kept_acc as f64 / kept_tot.max(1) as f64;
    let warning = if acceptance_rate < ACCEPTABLE_ACCEPTANCE.0 || acceptance_rate > ACCEPTABLE_ACCEPTANCE.1 {
        let msg = format!("node {otu_index}: post-burn-in acceptance rate {acceptance_rate:.3} outside [0.1, 0.6]");
        log::warn!("{msg}");
        Some(msg)
    } else {
        None
    };

    Ok(MarginalFit {
        posterior_mean: DwRegression::new(otu_index, mean_v[..m].to_vec(), mean_v[m..].to_vec())?,
        posterior_sd_eta: sd_v[..m].to_vec(),
        posterior_sd_gamma: sd_v[m..].to_vec(),
        trace,
        burn_in,
        acceptance_rate,
        final_proposal_sd: sd,
        warning,
    })
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_unstable_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// GMPR library-size factors for a samples × OTUs count matrix.
///
/// For each pair of samples the statistic is the median of abundance ratios
/// over OTUs observed in both; a sample's factor is the geometric mean of
/// its pair statistics, the trivial self-ratio of 1 included. Pairs without
/// co-observed OTUs are skipped.
pub fn gmpr_size_factors(counts: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = counts.nrows();
    for i in 0..n {
        if !counts.row(i).iter().any(|&v| v > 0.0) {
            return Err(Error::Isolation(i));
        }
    }
    let rows: Vec<Vec<f64>> = (0..n).map(|i| counts.row(i).iter().copied().collect()).collect();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut log_sum = 0.0;
            let mut used = 1usize; // self-ratio
            let mut ratios = Vec::with_capacity(counts.ncols());
            for j in 0..n {
                if j == i {
                    continue;
                }
                ratios.clear();
                ratios.extend(rows[i].iter().zip(&rows[j]).filter(|(a, b)| **a > 0.0 && **b > 0.0).map(|(a, b)| a / b));
                if ratios.is_empty() {
                    continue;
                }
                log_sum += median(&mut ratios).ln();
                used += 1;
            }
            if used == 1 && n > 1 {
                Err(Error::Isolation(i))
            } else {
                Ok((log_sum / used as f64).exp())
            }
        })
        .collect()
}
