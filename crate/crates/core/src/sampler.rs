//! The structural MCMC loop, posterior summaries and diagnostics.
//!
//! Each iteration runs a `Theta` sweep (skipped for the independent baseline)
//! and then, environment by environment, a latent sweep, a precision draw and
//! the birth-death moves. Every random draw comes from a stream addressed by
//! `(seed, purpose, iteration, environment label[, row])`, so a chain is
//! reproducible under any thread layout and resumes from its state alone.

use nalgebra::{DMatrix, Matrix2, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::bdmcmc::{bd_step, BdScheme, BdState, EdgeAccumulator, EdgePrior, GraphTally, RateBounds};
use crate::copula::{gibbs_update_z, LatentGaussianState};
use crate::error::{Error, Result};
use crate::graph::{pair_count, pairs, Graph, GraphEnsemble};
use crate::gwishart::{sample_gwishart_with, CompletionSettings, GWishartParams, PrecisionMatrix};
use crate::random_graph::{edge_probabilities_from_gram, gibbs_update_theta, EdgeCovariates, ErPrior, Location, RandomGraphParams};
use crate::rng::{label_key, purpose, StreamKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Rgm,
    IndependentEr,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Retention {
    /// Keep the last `floor(fraction * iterations)` iterations.
    Fraction(f64),
    /// Keep the last `n` iterations.
    Last(usize),
}

impl Retention {
    pub fn retained(&self, iterations: usize) -> usize {
        match *self {
            Retention::Fraction(f) => ((f * iterations as f64).floor() as usize).min(iterations),
            Retention::Last(n) => n.min(iterations),
        }
    }
}

pub const DEFAULT_ER_SPARSITY: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McmcConfig {
    pub structural_iterations: usize,
    pub retention: Retention,
    pub seed: u64,
    /// Iterations between checkpoints and drift windows; 0 disables both.
    pub checkpoint_every: usize,
    pub mode: Mode,
    pub er_sparsity: Option<f64>,
    pub bd_moves_per_iteration: usize,
    pub bd_scheme: BdScheme,
    pub rate_bounds: RateBounds,
    pub completion: CompletionSettings,
    /// Max-norm shift in windowed edge probabilities that triggers a warning.
    pub drift_tolerance: f64,
    /// Keep weighted visit counts of whole graphs (small node sets only).
    pub track_graphs: bool,
}

impl Default for McmcConfig {
    fn default() -> Self {
        McmcConfig::simulation()
    }
}

impl McmcConfig {
    /// 10 000 iterations, last quarter retained.
    pub fn simulation() -> Self {
        McmcConfig {
            structural_iterations: 10_000,
            retention: Retention::Fraction(0.25),
            seed: 1,
            checkpoint_every: 1000,
            mode: Mode::Rgm,
            er_sparsity: None,
            bd_moves_per_iteration: 1,
            bd_scheme: BdScheme::default(),
            rate_bounds: RateBounds::default(),
            completion: CompletionSettings::default(),
            drift_tolerance: 0.05,
            track_graphs: false,
        }
    }

    /// 3 000 000 iterations, last 7 500 retained.
    pub fn real_data() -> Self {
        McmcConfig {
            structural_iterations: 3_000_000,
            retention: Retention::Last(7_500),
            checkpoint_every: 2_500,
            ..McmcConfig::simulation()
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "simulation" => Ok(McmcConfig::simulation()),
            "real-data" | "real_data" => Ok(McmcConfig::real_data()),
            other => Err(Error::Config(format!("unknown preset `{other}` (expected simulation or real-data)"))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Retention::Fraction(f) = self.retention {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::Config(format!("retain fraction must lie in (0, 1], got {f}")));
            }
        }
        if self.bd_moves_per_iteration == 0 {
            return Err(Error::Config("at least one birth-death move per iteration is required".into()));
        }
        if !(self.rate_bounds.min > 0.0 && self.rate_bounds.min <= 1.0 && self.rate_bounds.max >= 1.0) {
            return Err(Error::Config("rate bounds must satisfy 0 < min <= 1 <= max".into()));
        }
        if !(self.drift_tolerance > 0.0) {
            return Err(Error::Config("drift tolerance must be positive".into()));
        }
        self.er_prior()?;
        Ok(())
    }

    pub fn er_prior(&self) -> Result<ErPrior> {
        ErPrior::new(self.er_sparsity.unwrap_or(DEFAULT_ER_SPARSITY))
    }

    pub fn retained(&self) -> usize {
        self.retention.retained(self.structural_iterations)
    }

    /// First iteration (0-based) that enters the posterior accumulation.
    pub fn first_retained(&self) -> usize {
        self.structural_iterations - self.retained()
    }
}

/// Everything the structural loop conditions on.
#[derive(Debug, Clone)]
pub struct ModelData {
    pub environments: Vec<String>,
    pub node_names: Vec<String>,
    pub latent: Vec<LatentGaussianState>,
    pub edge_covariates: EdgeCovariates,
}

impl ModelData {
    pub fn new(
        environments: Vec<String>,
        node_names: Vec<String>,
        latent: Vec<LatentGaussianState>,
        edge_covariates: EdgeCovariates,
    ) -> Result<Self> {
        let p = node_names.len();
        if environments.len() != latent.len() || environments.is_empty() {
            return Err(Error::Dimension(format!("{} environment labels for {} latent blocks", environments.len(), latent.len())));
        }
        let mut sorted = environments.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != environments.len() {
            return Err(Error::Validation("environment labels must be unique".into()));
        }
        if latent.iter().any(|l| l.p() != p) || edge_covariates.p() != p {
            return Err(Error::Dimension(format!("every block must have {p} columns")));
        }
        if p < 2 {
            return Err(Error::Dimension("at least two nodes are required".into()));
        }
        Ok(ModelData { environments, node_names, latent, edge_covariates })
    }

    pub fn p(&self) -> usize {
        self.node_names.len()
    }

    pub fn b(&self) -> usize {
        self.environments.len()
    }

    /// The data restricted to the listed environments, in the given order.
    pub fn subset(&self, labels: &[&str]) -> Result<Self> {
        let mut envs = Vec::new();
        let mut latent = Vec::new();
        for l in labels {
            let k = self.environments.iter().position(|e| e == l).ok_or_else(|| Error::Validation(format!("unknown environment `{l}`")))?;
            envs.push(self.environments[k].clone());
            latent.push(self.latent[k].clone());
        }
        ModelData::new(envs, self.node_names.clone(), latent, self.edge_covariates.clone())
    }
}

/// Retained `Theta` draws, one row per iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaTrace {
    pub names: Vec<String>,
    pub iterations: Vec<usize>,
    pub values: Vec<Vec<f64>>,
}

/// Complete, serialisable chain state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainState {
    pub iteration: usize,
    pub theta: RandomGraphParams,
    pub graphs: Vec<Graph>,
    pub omegas: Vec<PrecisionMatrix>,
    /// Row-major latent values per environment.
    pub latent: Vec<Vec<f64>>,
    pub accumulators: Vec<EdgeAccumulator>,
    pub graph_tallies: Option<Vec<GraphTally>>,
    pub window: Vec<EdgeAccumulator>,
    pub previous_window: Option<Vec<Vec<f64>>>,
    pub last_drift: Option<f64>,
    pub trace: ThetaTrace,
    pub bd_proposed: Vec<u64>,
    pub bd_accepted: Vec<u64>,
    pub warnings: Vec<String>,
}

pub struct Chain<'a> {
    data: &'a ModelData,
    cfg: McmcConfig,
    latent: Vec<LatentGaussianState>,
    state: ChainState,
    prior: GWishartParams,
}

impl<'a> Chain<'a> {
    pub fn new(data: &'a ModelData, cfg: McmcConfig) -> Result<Self> {
        cfg.validate()?;
        let (p, b) = (data.p(), data.b());
        let d = data.edge_covariates.d();
        let state = ChainState {
            iteration: 0,
            theta: RandomGraphParams::initial(b, d),
            graphs: vec![Graph::empty(p); b],
            omegas: vec![PrecisionMatrix::identity(p); b],
            latent: data.latent.iter().map(|l| flatten(&l.z())).collect(),
            accumulators: vec![EdgeAccumulator::new(p); b],
            graph_tallies: cfg.track_graphs.then(|| vec![GraphTally::default(); b]),
            window: vec![EdgeAccumulator::new(p); b],
            previous_window: None,
            last_drift: None,
            trace: ThetaTrace {
                names: RandomGraphParams::initial(b, d).parameter_names(&data.environments, data.edge_covariates.names()),
                iterations: Vec::new(),
                values: Vec::new(),
            },
            bd_proposed: vec![0; b],
            bd_accepted: vec![0; b],
            warnings: Vec::new(),
        };
        Ok(Chain { data, latent: data.latent.clone(), cfg, state, prior: GWishartParams::standard(p) })
    }

    /// Restores a chain from a saved state over the same data.
    pub fn resume(data: &'a ModelData, cfg: McmcConfig, state: ChainState) -> Result<Self> {
        let mut chain = Chain::new(data, cfg)?;
        let b = data.b();
        if state.graphs.len() != b || state.omegas.len() != b || state.latent.len() != b || state.accumulators.len() != b {
            return Err(Error::Validation("checkpoint does not match the dataset's environments".into()));
        }
        for (l, z) in chain.latent.iter_mut().zip(&state.latent) {
            if z.len() != l.n() * l.p() {
                return Err(Error::Validation("checkpoint latent block does not match the dataset".into()));
            }
            l.set_z(&DMatrix::from_row_slice(l.n(), l.p(), z))?;
        }
        if state.iteration > chain.cfg.structural_iterations {
            return Err(Error::Validation(format!(
                "checkpoint is at iteration {} beyond the configured {}",
                state.iteration, chain.cfg.structural_iterations
            )));
        }
        chain.state = state;
        Ok(chain)
    }

    pub fn state(&self) -> &ChainState {
        &self.state
    }

    pub fn config(&self) -> &McmcConfig {
        &self.cfg
    }

    pub fn iteration(&self) -> usize {
        self.state.iteration
    }

    pub fn is_finished(&self) -> bool {
        self.state.iteration >= self.cfg.structural_iterations
    }

    /// Runs one full iteration.
    pub fn step(&mut self) -> Result<()> {
        let t = self.state.iteration as u64;
        let root = StreamKey::new(self.cfg.seed);
        let data = self.data;
        let b = data.b();
        let retained = self.state.iteration >= self.cfg.first_retained();
        let er = self.cfg.er_prior()?;

        if self.cfg.mode == Mode::Rgm {
            let ensemble = GraphEnsemble::new(self.state.graphs.clone())?;
            let mut rng = root.child(purpose::THETA).child(t).rng();
            self.state.theta = gibbs_update_theta(&ensemble, &self.state.theta, &data.edge_covariates, &mut rng)?;
        }

        for k in 0..b {
            let env = label_key(&data.environments[k]);
            gibbs_update_z(&mut self.latent[k], &self.state.omegas[k], root.child(purpose::LATENT_Z).child(t).child(env))?;
            let posterior =
                GWishartParams::new(self.prior.delta() + self.latent[k].n() as f64, self.prior.scale() + self.latent[k].scatter())?;
            let mut rng = root.child(purpose::OMEGA).child(t).child(env).rng();
            let omega = sample_gwishart_with(&self.state.graphs[k], &posterior, &self.cfg.completion, &mut rng)?;

            let log_odds = match self.cfg.mode {
                Mode::Rgm => {
                    let ensemble = GraphEnsemble::new(self.state.graphs.clone())?;
                    EdgePrior::Rgm { theta: &self.state.theta, w: &data.edge_covariates, ensemble: &ensemble }.log_odds(k, data.p())
                }
                Mode::IndependentEr => EdgePrior::Er(er).log_odds(k, data.p()),
            };
            let mut state = BdState::new(self.state.graphs[k].clone(), omega, k)?;
            let mut rng = root.child(purpose::BIRTH_DEATH).child(t).child(env).rng();
            for _ in 0..self.cfg.bd_moves_per_iteration {
                let step = bd_step(
                    &state,
                    &posterior,
                    self.prior.delta(),
                    &log_odds,
                    self.cfg.rate_bounds,
                    self.cfg.bd_scheme,
                    &self.cfg.completion,
                    &mut rng,
                )?;
                if retained {
                    self.state.accumulators[k].add(&state.graph, &state.omega, step.weight);
                    self.state.window[k].add(&state.graph, &state.omega, step.weight);
                    if let Some(t) = &mut self.state.graph_tallies {
                        t[k].add(&state.graph, step.weight);
                    }
                }
                self.state.bd_proposed[k] += 1;
                self.state.bd_accepted[k] += u64::from(step.accepted);
                state = step.next;
            }
            self.state.graphs[k] = state.graph;
            self.state.omegas[k] = state.omega;
            self.state.latent[k] = flatten(&self.latent[k].z());
        }

        if retained && self.cfg.mode == Mode::Rgm {
            self.state.trace.iterations.push(self.state.iteration);
            self.state.trace.values.push(self.state.theta.values());
        }
        self.state.iteration += 1;
        if retained && self.at_checkpoint() {
            self.close_window()?;
        }
        Ok(())
    }

    fn at_checkpoint(&self) -> bool {
        self.cfg.checkpoint_every > 0 && self.state.iteration.is_multiple_of(self.cfg.checkpoint_every)
    }

    fn close_window(&mut self) -> Result<()> {
        if self.state.window.iter().any(|w| w.states() == 0) {
            return Ok(());
        }
        let probs = self.state.window.iter().map(EdgeAccumulator::pair_probabilities).collect::<Result<Vec<_>>>()?;
        if let Some(prev) = &self.state.previous_window {
            let drift = prev.iter().flatten().zip(probs.iter().flatten()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            self.state.last_drift = Some(drift);
            if drift > self.cfg.drift_tolerance {
                let msg = format!(
                    "edge probabilities moved by {drift:.3} between the windows ending at iterations {} and {}",
                    self.state.iteration - self.cfg.checkpoint_every,
                    self.state.iteration
                );
                log::warn!("possible non-convergence: {msg}");
                self.state.warnings.push(msg);
            }
        }
        self.state.previous_window = Some(probs);
        self.state.window = vec![EdgeAccumulator::new(self.data.p()); self.data.b()];
        Ok(())
    }

    /// Runs to completion, or until `stop_after` further iterations. Calls
    /// `on_checkpoint` every `checkpoint_every` iterations and at the end.
    pub fn run(&mut self, stop_after: Option<usize>, mut on_checkpoint: impl FnMut(&ChainState) -> Result<()>) -> Result<()> {
        let end = match stop_after {
            Some(n) => (self.state.iteration + n).min(self.cfg.structural_iterations),
            None => self.cfg.structural_iterations,
        };
        while self.state.iteration < end {
            self.step()?;
            if self.at_checkpoint() {
                on_checkpoint(&self.state)?;
            }
        }
        if !self.at_checkpoint() {
            on_checkpoint(&self.state)?;
        }
        Ok(())
    }

    pub fn summary(&self) -> Result<PosteriorSummary> {
        PosteriorSummary::from_state(self.data, &self.cfg, &self.state)
    }
}

fn flatten(m: &DMatrix<f64>) -> Vec<f64> {
    let (n, p) = m.shape();
    (0..n).flat_map(|i| (0..p).map(move |j| m[(i, j)])).collect()
}

/// Runs a chain to completion and summarises it.
pub fn fit(data: &ModelData, cfg: &McmcConfig) -> Result<PosteriorSummary> {
    let mut chain = Chain::new(data, cfg.clone())?;
    chain.run(None, |_| Ok(()))?;
    chain.summary()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub mode: Mode,
    pub environments: Vec<String>,
    pub node_names: Vec<String>,
    pub iterations: usize,
    pub retained: usize,
    pub edge_probabilities: Vec<DMatrix<f64>>,
    pub partial_correlations: Vec<DMatrix<f64>>,
    /// Mean posterior edge probability per environment.
    pub sparsity: Vec<f64>,
    /// Mean over pairs of the retained-sample variance of the edge indicator.
    pub indicator_variance: Vec<f64>,
    pub bd_acceptance: Vec<f64>,
    /// Posterior mass of each visited graph, when tracked.
    pub graph_posteriors: Option<Vec<Vec<(String, f64)>>>,
    pub theta_trace: Option<ThetaTrace>,
    pub theta_mean: Option<RandomGraphParams>,
    /// Posterior mean of `c_k . c_k'`.
    pub gram_mean: Option<DMatrix<f64>>,
    /// Posterior mean of the locations after orthogonal alignment of every
    /// draw to the leading two-dimensional embedding of `gram_mean`.
    pub aligned_locations: Option<Vec<Location>>,
    pub last_drift: Option<f64>,
    pub warnings: Vec<String>,
}

impl PosteriorSummary {
    pub fn from_state(data: &ModelData, cfg: &McmcConfig, state: &ChainState) -> Result<Self> {
        if state.accumulators.iter().any(|a| a.states() == 0) {
            return Err(Error::EmptyHistory(format!("no retained iterations after {} iterations", state.iteration)));
        }
        let edge_probabilities = state.accumulators.iter().map(EdgeAccumulator::edge_probabilities).collect::<Result<Vec<_>>>()?;
        let partial_correlations = state.accumulators.iter().map(EdgeAccumulator::mean_partial_correlations).collect::<Result<Vec<_>>>()?;
        let mut sparsity = Vec::new();
        let mut indicator_variance = Vec::new();
        for acc in &state.accumulators {
            let pp = acc.pair_probabilities()?;
            let m = pp.len().max(1) as f64;
            sparsity.push(pp.iter().sum::<f64>() / m);
            indicator_variance.push(pp.iter().map(|q| q * (1.0 - q)).sum::<f64>() / m);
        }
        let bd_acceptance =
            state.bd_proposed.iter().zip(&state.bd_accepted).map(|(&n, &a)| if n == 0 { 0.0 } else { a as f64 / n as f64 }).collect();

        let (theta_trace, theta_mean, gram_mean, aligned_locations) = if cfg.mode == Mode::Rgm && !state.trace.values.is_empty() {
            let b = data.b();
            let d = data.edge_covariates.d();
            let draws: Vec<RandomGraphParams> = state.trace.values.iter().map(|v| unflatten(v, b, d)).collect();
            let n = draws.len() as f64;
            let mut mean = vec![0.0; state.trace.names.len()];
            for v in &state.trace.values {
                for (m, x) in mean.iter_mut().zip(v) {
                    *m += x / n;
                }
            }
            let mut gram = DMatrix::zeros(b, b);
            for t in &draws {
                gram += t.gram() / n;
            }
            let aligned = procrustes_mean(&draws, &gram);
            (Some(state.trace.clone()), Some(unflatten(&mean, b, d)), Some(gram), Some(aligned))
        } else {
            (None, None, None, None)
        };

        Ok(PosteriorSummary {
            mode: cfg.mode,
            environments: data.environments.clone(),
            node_names: data.node_names.clone(),
            iterations: state.iteration,
            retained: state.accumulators[0].states() / cfg.bd_moves_per_iteration,
            edge_probabilities,
            partial_correlations,
            sparsity,
            indicator_variance,
            bd_acceptance,
            graph_posteriors: state
                .graph_tallies
                .as_ref()
                .map(|ts| ts.iter().map(GraphTally::probabilities).collect::<Result<Vec<_>>>())
                .transpose()?,
            theta_trace,
            theta_mean,
            gram_mean,
            aligned_locations,
            last_drift: state.last_drift,
            warnings: state.warnings.clone(),
        })
    }
}

impl PosteriorSummary {
    /// Probit edge probabilities from the posterior-mean `alpha`, `beta` and
    /// Gram matrix, conditioning on `graphs`. `None` outside RGM mode.
    pub fn probit_probabilities(&self, w: &EdgeCovariates, graphs: &[Graph]) -> Result<Option<Vec<DMatrix<f64>>>> {
        let (Some(theta), Some(gram)) = (&self.theta_mean, &self.gram_mean) else {
            return Ok(None);
        };
        let ensemble = GraphEnsemble::new(graphs.to_vec())?;
        let p = ensemble.p();
        let mut out = Vec::with_capacity(graphs.len());
        for k in 0..graphs.len() {
            let probs = edge_probabilities_from_gram(k, &ensemble, &theta.alpha, &theta.beta, gram, w)?;
            let mut m = DMatrix::zeros(p, p);
            for (e, (i, j)) in pairs(p).enumerate() {
                m[(i, j)] = probs[e];
                m[(j, i)] = probs[e];
            }
            out.push(m);
        }
        Ok(Some(out))
    }
}

fn unflatten(v: &[f64], b: usize, d: usize) -> RandomGraphParams {
    RandomGraphParams {
        alpha: v[..b].to_vec(),
        beta: v[b..b + d].to_vec(),
        c: (0..b).map(|k| [v[b + d + 2 * k], v[b + d + 2 * k + 1]]).collect(),
    }
}

/// Target configuration `V sqrt(L)` from the two leading eigenpairs of `gram`.
fn embedding(gram: &DMatrix<f64>) -> Vec<Location> {
    let b = gram.nrows();
    let eig = SymmetricEigen::new(gram.clone());
    let mut order: Vec<usize> = (0..b).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
    (0..b)
        .map(|k| {
            let mut loc = [0.0; 2];
            for (dim, &idx) in order.iter().take(2).enumerate() {
                loc[dim] = eig.eigenvectors[(k, idx)] * eig.eigenvalues[idx].max(0.0).sqrt();
            }
            loc
        })
        .collect()
}

/// Orthogonal `Q` minimising `|C Q - T|` (Frobenius).
fn procrustes_rotation(c: &[Location], target: &[Location]) -> Matrix2<f64> {
    let mut m = Matrix2::<f64>::zeros();
    for (x, y) in c.iter().zip(target) {
        for r in 0..2 {
            for s in 0..2 {
                m[(r, s)] += x[r] * y[s];
            }
        }
    }
    let svd = m.svd(true, true);
    let (u, vt) = (svd.u.expect("requested U"), svd.v_t.expect("requested V^T"));
    u * vt
}

fn procrustes_mean(draws: &[RandomGraphParams], gram: &DMatrix<f64>) -> Vec<Location> {
    let target = embedding(gram);
    let b = target.len();
    let mut mean = vec![[0.0; 2]; b];
    for t in draws {
        let q = procrustes_rotation(&t.c, &target);
        // row vectors: c_k^T Q
        let rotated = t.transform_locations(&q.transpose());
        for (m, c) in mean.iter_mut().zip(&rotated.c) {
            m[0] += c[0] / draws.len() as f64;
            m[1] += c[1] / draws.len() as f64;
        }
    }
    mean
}

/// Cross-environment statistics of a posterior summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkStats {
    pub threshold: f64,
    /// `|A ∩ B| / |A ∪ B|` over edges with probability above the threshold;
    /// 1 when both sets are empty.
    pub sharing: DMatrix<f64>,
    /// Pearson correlation of mean partial correlations over all pairs.
    pub partial_correlation_agreement: DMatrix<f64>,
    pub sparsity: Vec<f64>,
    pub high_probability_edges: Vec<usize>,
}

pub fn summarize(summary: &PosteriorSummary, threshold: f64) -> Result<NetworkStats> {
    if summary.edge_probabilities.is_empty() {
        return Err(Error::EmptyHistory("summary has no environments".into()));
    }
    let p = summary.node_names.len();
    let b = summary.edge_probabilities.len();
    let high: Vec<Vec<bool>> = summary.edge_probabilities.iter().map(|m| pairs(p).map(|(i, j)| m[(i, j)] > threshold).collect()).collect();
    let pcs: Vec<Vec<f64>> = summary.partial_correlations.iter().map(|m| pairs(p).map(|(i, j)| m[(i, j)]).collect()).collect();
    let sharing = DMatrix::from_fn(b, b, |x, y| jaccard(&high[x], &high[y]));
    let agreement = DMatrix::from_fn(b, b, |x, y| if x == y { 1.0 } else { pearson(&pcs[x], &pcs[y]) });
    Ok(NetworkStats {
        threshold,
        sharing,
        partial_correlation_agreement: agreement,
        sparsity: summary.sparsity.clone(),
        high_probability_edges: high.iter().map(|h| h.iter().filter(|&&v| v).count()).collect(),
    })
}

fn jaccard(a: &[bool], b: &[bool]) -> f64 {
    let inter = a.iter().zip(b).filter(|(x, y)| **x && **y).count();
    let union = a.iter().zip(b).filter(|(x, y)| **x || **y).count();
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        if a == b {
            1.0
        } else {
            f64::NAN
        }
    } else {
        sab / (saa * sbb).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    /// `(fpr, tpr)` from `(0, 0)` to `(1, 1)`.
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
}

/// ROC of edge probabilities against a true graph, sweeping every distinct
/// probability as a threshold.
pub fn roc_curve(edge_probs: &DMatrix<f64>, truth: &Graph) -> Result<RocCurve> {
    let p = truth.p();
    if edge_probs.shape() != (p, p) {
        return Err(Error::Dimension(format!("{}×{} probabilities against a graph on {p} nodes", edge_probs.nrows(), edge_probs.ncols())));
    }
    let positives = truth.edge_count();
    let negatives = pair_count(p) - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::DegenerateTruth(format!("true graph has {positives} of {} possible edges", pair_count(p))));
    }
    let mut scored: Vec<(f64, bool)> = pairs(p).map(|(i, j)| (edge_probs[(i, j)], truth.has_edge(i, j))).collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut idx = 0;
    while idx < scored.len() {
        let level = scored[idx].0;
        while idx < scored.len() && scored[idx].0 == level {
            if scored[idx].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            idx += 1;
        }
        points.push((fp as f64 / negatives as f64, tp as f64 / positives as f64));
    }
    let auc = points.windows(2).map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0).sum();
    Ok(RocCurve { points, auc })
}
