//! Continuous-time birth-death moves over one environment's graph.
//!
//! Toggling pair `e = (i, j)` has log posterior ratio
//!
//! ```text
//! log H = log prior_odds - log(I(G+e) / I(G))
//!       + log(a11) / 2 + log(2 pi / D*_jj) / 2
//!       + (D*_ij a11 - D*_jj m_ij)^2 / (2 a11 D*_jj)
//! ```
//!
//! for a birth, and `-log H` for a death, where with `S = Omega^-1`,
//! `a11 = s_jj / det S_ee` and `m_ij = omega_ij + s_ij / det S_ee` are the
//! Schur-complement pieces of the Cholesky factor that orders `i, j` last,
//! and `D* = D + zᵀz`. The prior normalising-constant ratio uses the
//! identity-scale closed form `2 sqrt(pi) Gamma((delta + c + 1) / 2) /
//! Gamma((delta + c) / 2)` with `c` the number of common neighbours.
//!
//! Rates are `min(1, H)` for the chosen direction, so birth and death rates
//! of the same pair always have ratio `H`. See [`BdScheme`] for how a jump
//! becomes a chain step.

use nalgebra::{Cholesky, DMatrix};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::graph::{pair_count, pairs, Graph, GraphEnsemble};
use crate::gwishart::{partial_correlations, sample_gwishart_with, CompletionSettings, GWishartParams, PrecisionMatrix};
use crate::normal;
use crate::random_graph::{linear_predictors, EdgeCovariates, ErPrior, RandomGraphParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BdState {
    pub graph: Graph,
    pub omega: PrecisionMatrix,
    pub waiting_time: f64,
    pub environment: usize,
}

impl BdState {
    pub fn new(graph: Graph, omega: PrecisionMatrix, environment: usize) -> Result<Self> {
        if graph.p() != omega.p() {
            return Err(Error::Dimension(format!("graph on {} nodes, precision is {}×{}", graph.p(), omega.p(), omega.p())));
        }
        Ok(BdState { graph, omega, waiting_time: 1.0, environment })
    }
}

/// Prior on one environment's graph, conditional on everything else.
#[derive(Debug, Clone, Copy)]
pub enum EdgePrior<'a> {
    Rgm { theta: &'a RandomGraphParams, w: &'a EdgeCovariates, ensemble: &'a GraphEnsemble },
    Er(ErPrior),
}

impl EdgePrior<'_> {
    /// Log prior odds of presence for every pair of environment `k`.
    pub fn log_odds(&self, k: usize, p: usize) -> Vec<f64> {
        match self {
            EdgePrior::Rgm { theta, w, ensemble } => linear_predictors(k, ensemble, theta, w).into_iter().map(normal::log_odds).collect(),
            EdgePrior::Er(er) => vec![er.log_odds(); pair_count(p)],
        }
    }
}

/// `p_e / (1 - p_e)` under the probit prior.
pub fn edge_prior_odds(k: usize, pair: (usize, usize), ensemble: &GraphEnsemble, theta: &RandomGraphParams, w: &EdgeCovariates) -> f64 {
    normal::log_odds(crate::random_graph::linear_predictor(k, pair, ensemble, theta, w)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateBounds {
    pub min: f64,
    pub max: f64,
}

impl Default for RateBounds {
    fn default() -> Self {
        RateBounds { min: 1e-12, max: 1e12 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToggleRate {
    pub pair: (usize, usize),
    /// Log posterior ratio of the toggled state to the current one.
    pub log_ratio: f64,
    pub rate: f64,
}

/// `ln(I(G+e) / I(G))` for identity scale.
pub fn log_normalizing_ratio(delta: f64, common_neighbors: usize) -> f64 {
    let a = delta + common_neighbors as f64;
    (2.0 * std::f64::consts::PI.sqrt()).ln() + ln_gamma(0.5 * (a + 1.0)) - ln_gamma(0.5 * a)
}

fn neighbor_sets(graph: &Graph) -> Vec<Vec<u64>> {
    let p = graph.p();
    let words = p.div_ceil(64);
    let mut sets = vec![vec![0u64; words]; p];
    for (i, j) in graph.edge_list() {
        sets[i][j / 64] |= 1 << (j % 64);
        sets[j][i / 64] |= 1 << (i % 64);
    }
    sets
}

/// Rates of every single-pair toggle from `(graph, omega)`.
///
/// `posterior` is `W_G(delta + n, D + zᵀz)`, `prior_delta` the prior shape,
/// and `log_prior_odds` the per-pair log odds of presence.
pub fn birth_death_rates(
    graph: &Graph,
    omega: &PrecisionMatrix,
    posterior: &GWishartParams,
    prior_delta: f64,
    log_prior_odds: &[f64],
    bounds: RateBounds,
) -> Result<Vec<ToggleRate>> {
    let p = graph.p();
    if omega.p() != p || posterior.p() != p || log_prior_odds.len() != pair_count(p) {
        return Err(Error::Dimension(format!(
            "graph on {p} nodes with {}×{} precision, {}×{} scale and {} prior odds",
            omega.p(),
            omega.p(),
            posterior.p(),
            posterior.p(),
            log_prior_odds.len()
        )));
    }
    let sigma = Cholesky::new(omega.as_matrix().clone())
        .ok_or_else(|| Error::NotPositiveDefinite("precision matrix in rate computation".into()))?
        .inverse();
    let k = omega.as_matrix();
    let ds = posterior.scale();
    let nb = neighbor_sets(graph);
    let all: Vec<(usize, (usize, usize))> = pairs(p).enumerate().collect();
    let rates = all
        .par_iter()
        .map(|&(e, (i, j))| {
            let det = sigma[(i, i)] * sigma[(j, j)] - sigma[(i, j)] * sigma[(i, j)];
            let a11 = sigma[(j, j)] / det;
            let m_ij = k[(i, j)] + sigma[(i, j)] / det;
            let (dij, djj) = (ds[(i, j)], ds[(j, j)]);
            let quad = dij * a11 - djj * m_ij;
            let common = nb[i].iter().zip(&nb[j]).map(|(a, b)| (a & b).count_ones() as usize).sum();
            let log_birth = log_prior_odds[e] - log_normalizing_ratio(prior_delta, common)
                + 0.5 * a11.ln()
                + 0.5 * (2.0 * std::f64::consts::PI / djj).ln()
                + quad * quad / (2.0 * a11 * djj);
            let log_ratio = if graph.has_pair(e) { -log_birth } else { log_birth };
            let rate = if log_ratio.is_nan() { bounds.min } else { log_ratio.min(0.0).exp().clamp(bounds.min, bounds.max) };
            ToggleRate { pair: (i, j), log_ratio, rate }
        })
        .collect::<Vec<_>>();
    let clamped = rates.iter().filter(|r| r.rate == bounds.min).count();
    if clamped > 0 {
        log::debug!("{clamped} toggle rates clamped to {:e}", bounds.min);
    }
    Ok(rates)
}

/// How a birth-death move is turned into a chain step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BdScheme {
    /// Toggle chosen proportional to its rate, with `Omega` moved by the
    /// one-entry Cholesky map and the move accepted with probability
    /// `min(1, Lambda / Lambda')`. Every iteration carries unit weight. Exact
    /// under any interleaving with other posterior-invariant updates.
    #[default]
    Corrected,
    /// Always jump, redraw `Omega` from its posterior under the new graph and
    /// weight the departing state by its expected holding time `1 / Lambda`.
    WaitingTime,
}

/// Outcome of one birth-death step.
#[derive(Debug, Clone, PartialEq)]
pub struct BdStep {
    /// Expected holding time `1 / sum(rates)` of the input state.
    pub held: f64,
    /// Weight of the input state in the posterior accumulation.
    pub weight: f64,
    pub toggled: (usize, usize),
    pub added: bool,
    pub accepted: bool,
    pub next: BdState,
}

/// Moves `omega` between `G` and `G` with `pair` toggled, keeping every
/// Cholesky entry of the ordering that puts `pair` last except the one
/// linking the pair. A birth draws that entry from its conditional under the
/// posterior scale; a death sets it so that `omega_ij = 0`.
pub fn perturb_precision<R: Rng + ?Sized>(
    omega: &PrecisionMatrix,
    pair: (usize, usize),
    birth: bool,
    posterior: &GWishartParams,
    rng: &mut R,
) -> Result<PrecisionMatrix> {
    let (i, j) = if pair.0 < pair.1 { pair } else { (pair.1, pair.0) };
    let k = omega.as_matrix();
    let sigma =
        Cholesky::new(k.clone()).ok_or_else(|| Error::NotPositiveDefinite("precision matrix in birth-death move".into()))?.inverse();
    let det = sigma[(i, i)] * sigma[(j, j)] - sigma[(i, j)] * sigma[(i, j)];
    let phi_ii = (sigma[(j, j)] / det).sqrt();
    let m_ij = k[(i, j)] + sigma[(i, j)] / det;
    let old = (k[(i, j)] - m_ij) / phi_ii;
    let ds = posterior.scale();
    let new = if birth {
        let z: f64 = rng.sample(StandardNormal);
        -ds[(i, j)] * phi_ii / ds[(j, j)] + z / ds[(j, j)].sqrt()
    } else {
        -m_ij / phi_ii
    };
    let mut next = k.clone();
    let kij = if birth { m_ij + phi_ii * new } else { 0.0 };
    next[(i, j)] = kij;
    next[(j, i)] = kij;
    next[(j, j)] = k[(j, j)] - old * old + new * new;
    PrecisionMatrix::new(next)
}

/// One birth-death step from `state` under `scheme`.
#[allow(clippy::too_many_arguments)]
pub fn bd_step<R: Rng + ?Sized>(
    state: &BdState,
    posterior: &GWishartParams,
    prior_delta: f64,
    log_prior_odds: &[f64],
    bounds: RateBounds,
    scheme: BdScheme,
    completion: &CompletionSettings,
    rng: &mut R,
) -> Result<BdStep> {
    if state.graph.p() < 2 {
        return Err(Error::Dimension("birth-death moves need at least two nodes".into()));
    }
    let rates = birth_death_rates(&state.graph, &state.omega, posterior, prior_delta, log_prior_odds, bounds)?;
    let (toggled, held) = select_toggle(&rates, rng);
    let mut graph = state.graph.clone();
    graph.toggle(toggled.0, toggled.1);
    let added = graph.has_edge(toggled.0, toggled.1);
    match scheme {
        BdScheme::WaitingTime => {
            let omega = sample_gwishart_with(&graph, posterior, completion, rng)?;
            Ok(BdStep {
                held,
                weight: held,
                toggled,
                added,
                accepted: true,
                next: BdState { graph, omega, waiting_time: held, environment: state.environment },
            })
        }
        BdScheme::Corrected => {
            let omega = perturb_precision(&state.omega, toggled, added, posterior, rng)?;
            let back = birth_death_rates(&graph, &omega, posterior, prior_delta, log_prior_odds, bounds)?;
            let total_back: f64 = back.iter().map(|r| r.rate).sum();
            // acceptance min(1, Lambda / Lambda') with Lambda = 1 / held
            let accepted = rng.random::<f64>() * held * total_back < 1.0;
            let next = if accepted {
                BdState { graph, omega, waiting_time: 1.0, environment: state.environment }
            } else {
                BdState { waiting_time: 1.0, ..state.clone() }
            };
            Ok(BdStep { held, weight: 1.0, toggled, added, accepted, next })
        }
    }
}

/// Categorical draw proportional to `rate`; returns the pair and `1 / total`.
pub fn select_toggle<R: Rng + ?Sized>(rates: &[ToggleRate], rng: &mut R) -> ((usize, usize), f64) {
    let total: f64 = rates.iter().map(|r| r.rate).sum();
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for r in rates {
        acc += r.rate;
        if target < acc {
            return (r.pair, 1.0 / total);
        }
    }
    (rates.last().expect("at least one candidate pair").pair, 1.0 / total)
}

/// Waiting-time-weighted sums of edge indicators and partial correlations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeAccumulator {
    p: usize,
    states: usize,
    total_weight: f64,
    edge_weight: Vec<f64>,
    pcor_weight: Vec<f64>,
}

impl EdgeAccumulator {
    pub fn new(p: usize) -> Self {
        EdgeAccumulator { p, states: 0, total_weight: 0.0, edge_weight: vec![0.0; pair_count(p)], pcor_weight: vec![0.0; pair_count(p)] }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn add(&mut self, graph: &Graph, omega: &PrecisionMatrix, weight: f64) {
        debug_assert!(weight > 0.0);
        let pc = partial_correlations(omega);
        for (e, (i, j)) in pairs(self.p).enumerate() {
            if graph.has_pair(e) {
                self.edge_weight[e] += weight;
            }
            self.pcor_weight[e] += weight * pc[(i, j)];
        }
        self.total_weight += weight;
        self.states += 1;
    }

    pub fn merge(&mut self, other: &EdgeAccumulator) -> Result<()> {
        if other.p != self.p {
            return Err(Error::Dimension("accumulators over different node sets".into()));
        }
        for (a, b) in self.edge_weight.iter_mut().zip(&other.edge_weight) {
            *a += b;
        }
        for (a, b) in self.pcor_weight.iter_mut().zip(&other.pcor_weight) {
            *a += b;
        }
        self.total_weight += other.total_weight;
        self.states += other.states;
        Ok(())
    }

    fn check(&self) -> Result<()> {
        if self.states == 0 {
            return Err(Error::EmptyHistory("no retained states".into()));
        }
        Ok(())
    }

    /// Per-pair posterior edge probabilities in pair order.
    pub fn pair_probabilities(&self) -> Result<Vec<f64>> {
        self.check()?;
        Ok(self.edge_weight.iter().map(|w| (w / self.total_weight).clamp(0.0, 1.0)).collect())
    }

    /// Symmetric matrix with zero diagonal.
    pub fn edge_probabilities(&self) -> Result<DMatrix<f64>> {
        let probs = self.pair_probabilities()?;
        Ok(symmetric(self.p, &probs, 0.0))
    }

    /// Weighted mean partial correlations; unit diagonal.
    pub fn mean_partial_correlations(&self) -> Result<DMatrix<f64>> {
        self.check()?;
        let means: Vec<f64> = self.pcor_weight.iter().map(|w| w / self.total_weight).collect();
        Ok(symmetric(self.p, &means, 1.0))
    }
}

fn symmetric(p: usize, upper: &[f64], diagonal: f64) -> DMatrix<f64> {
    let mut m = DMatrix::from_element(p, p, 0.0);
    for (e, (i, j)) in pairs(p).enumerate() {
        m[(i, j)] = upper[e];
        m[(j, i)] = upper[e];
    }
    m.fill_diagonal(diagonal);
    m
}

/// Weighted visit frequencies of whole graphs, keyed by the pair-order
/// indicator string (`"0110..."`). Intended for small node sets.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GraphTally {
    weights: BTreeMap<String, f64>,
    total_weight: f64,
}

impl GraphTally {
    pub fn key(graph: &Graph) -> String {
        graph.indicators().iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    pub fn add(&mut self, graph: &Graph, weight: f64) {
        *self.weights.entry(GraphTally::key(graph)).or_insert(0.0) += weight;
        self.total_weight += weight;
    }

    pub fn merge(&mut self, other: &GraphTally) {
        for (k, w) in &other.weights {
            *self.weights.entry(k.clone()).or_insert(0.0) += w;
        }
        self.total_weight += other.total_weight;
    }

    /// Normalised posterior mass of every visited graph, in key order.
    pub fn probabilities(&self) -> Result<Vec<(String, f64)>> {
        if self.total_weight <= 0.0 {
            return Err(Error::EmptyHistory("no retained graphs".into()));
        }
        Ok(self.weights.iter().map(|(k, w)| (k.clone(), w / self.total_weight)).collect())
    }
}

/// Waiting-time-weighted edge probabilities of a retained history.
pub fn accumulate_posterior(history: &[BdState]) -> Result<DMatrix<f64>> {
    let first = history.first().ok_or_else(|| Error::EmptyHistory("no retained states".into()))?;
    let mut acc = EdgeAccumulator::new(first.graph.p());
    for s in history {
        acc.add(&s.graph, &s.omega, s.waiting_time);
    }
    acc.edge_probabilities()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamKey;

    fn state(graph: Graph) -> BdState {
        let p = graph.p();
        BdState::new(graph, PrecisionMatrix::identity(p), 0).unwrap()
    }

    #[test]
    fn odds_examples() {
        let ens = GraphEnsemble::empty(3, 2);
        let zero = RandomGraphParams::new(vec![0.0; 2], vec![], vec![[0.0; 2]; 2]).unwrap();
        assert!((edge_prior_odds(0, (0, 1), &ens, &zero, &EdgeCovariates::none(3)) - 1.0).abs() < 1e-15);
        let er = EdgePrior::Er(ErPrior::new(0.068).unwrap());
        let lo = er.log_odds(0, 3);
        assert!(lo.iter().all(|&v| (v.exp() - 0.072_961_373_390_557_94).abs() < 1e-14));

        let coupled = RandomGraphParams::new(vec![-1.0; 2], vec![], vec![[1.0, 0.0], [0.8, 0.0]]).unwrap();
        let mut with = GraphEnsemble::empty(3, 2);
        with.graph_mut(1).set_edge(0, 2, true);
        let w = EdgeCovariates::none(3);
        assert!(edge_prior_odds(0, (0, 2), &with, &coupled, &w) > edge_prior_odds(0, (0, 2), &ens, &coupled, &w));
    }

    #[test]
    fn birth_and_death_rates_are_reciprocal_ratios() {
        let mut rng = StreamKey::new(1).rng();
        let g = Graph::from_edges(4, &[(0, 1), (1, 2)]).unwrap();
        let z = DMatrix::from_fn(20, 4, |i, j| ((i * 5 + j * 7) % 9) as f64 / 4.0 - 1.0);
        let post = GWishartParams::standard(4).posterior(&z).unwrap();
        let omega = crate::gwishart::sample_gwishart(&g, &post, &mut rng).unwrap();
        let odds = vec![-0.3; pair_count(4)];
        let here = birth_death_rates(&g, &omega, &post, 3.0, &odds, RateBounds::default()).unwrap();
        for r in &here {
            let e = crate::graph::pair_index(r.pair.0, r.pair.1, 4);
            // the ratio depends only on omega and the neighbourhood, which toggling e keeps
            let mut toggled = g.clone();
            toggled.toggle(r.pair.0, r.pair.1);
            let back = birth_death_rates(&toggled, &omega, &post, 3.0, &odds, RateBounds::default()).unwrap();
            assert!((r.log_ratio + back[e].log_ratio).abs() < 1e-12);
        }
    }

    #[test]
    fn doubling_prior_odds_doubles_a_small_rate() {
        let g = Graph::empty(3);
        let post = GWishartParams::standard(3);
        let base = vec![-6.0; 3];
        let doubled: Vec<f64> = base.iter().map(|v| v + 2f64.ln()).collect();
        let a = birth_death_rates(&g, &PrecisionMatrix::identity(3), &post, 3.0, &base, RateBounds::default()).unwrap();
        let b = birth_death_rates(&g, &PrecisionMatrix::identity(3), &post, 3.0, &doubled, RateBounds::default()).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!(x.rate < 0.5);
            assert!((y.rate / x.rate - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn selection_follows_rates() {
        let rates = [ToggleRate { pair: (0, 1), log_ratio: 0.0, rate: 1.0 }, ToggleRate { pair: (0, 2), log_ratio: 0.0, rate: 3.0 }];
        let mut rng = StreamKey::new(2).rng();
        let n = 40_000;
        let mut second = 0;
        for _ in 0..n {
            let (pair, held) = select_toggle(&rates, &mut rng);
            assert_eq!(held, 0.25);
            second += usize::from(pair == (0, 2));
        }
        let frac = second as f64 / n as f64;
        assert!((frac - 0.75).abs() < 4.0 * (0.75f64 * 0.25 / n as f64).sqrt());
        let one = [rates[0]];
        assert_eq!(select_toggle(&one, &mut rng), ((0, 1), 1.0));
    }

    #[test]
    fn step_keeps_zero_pattern() {
        let mut rng = StreamKey::new(3).rng();
        let z = DMatrix::from_fn(30, 5, |i, j| ((i * 3 + j * 11) % 13) as f64 / 6.0 - 1.0);
        let post = GWishartParams::standard(5).posterior(&z).unwrap();
        let mut st = state(Graph::empty(5));
        for _ in 0..50 {
            let scheme = if st.graph.edge_count().is_multiple_of(2) { BdScheme::Corrected } else { BdScheme::WaitingTime };
            let step =
                bd_step(&st, &post, 3.0, &[-1.0; 10], RateBounds::default(), scheme, &CompletionSettings::default(), &mut rng).unwrap();
            assert!(step.held > 0.0);
            assert!(step.next.omega.respects(&step.next.graph, 1e-10));
            st = step.next;
        }
    }

    #[test]
    fn perturbation_round_trip() {
        let mut rng = StreamKey::new(8).rng();
        let g = Graph::from_edges(4, &[(0, 1), (1, 3), (2, 3)]).unwrap();
        let z = DMatrix::from_fn(15, 4, |i, j| ((i * 7 + j * 5) % 11) as f64 / 5.0 - 1.0);
        let post = GWishartParams::standard(4).posterior(&z).unwrap();
        let k = crate::gwishart::sample_gwishart(&g, &post, &mut rng).unwrap();
        let born = perturb_precision(&k, (0, 2), true, &post, &mut rng).unwrap();
        let mut g2 = g.clone();
        g2.toggle(0, 2);
        assert!(born.respects(&g2, 1e-12));
        let back = perturb_precision(&born, (0, 2), false, &post, &mut rng).unwrap();
        assert!((back.as_matrix() - k.as_matrix()).amax() < 1e-10);
        // the move keeps the toggle's own ratio, so rates reverse exactly
        let odds = vec![-0.5; 6];
        let r1 = birth_death_rates(&g, &k, &post, 3.0, &odds, RateBounds::default()).unwrap();
        let r2 = birth_death_rates(&g2, &born, &post, 3.0, &odds, RateBounds::default()).unwrap();
        assert!((r1[1].log_ratio + r2[1].log_ratio).abs() < 1e-9);
    }

    #[test]
    fn accumulation_examples() {
        let full = Graph::complete(3);
        let empty = Graph::empty(3);
        let mut a = state(full.clone());
        a.waiting_time = 1.0;
        let mut b = state(empty);
        b.waiting_time = 3.0;
        let probs = accumulate_posterior(&[a.clone(), b]).unwrap();
        assert_eq!(probs[(0, 1)], 0.25);
        assert_eq!(probs[(1, 1)], 0.0);
        assert_eq!(accumulate_posterior(&[a.clone(), a]).unwrap()[(0, 2)], 1.0);
        assert!(matches!(accumulate_posterior(&[]), Err(Error::EmptyHistory(_))));
    }

    #[test]
    fn strong_pair_is_born_first() {
        // z_1 = z_0 + noise: the (0, 1) birth dominates null births
        let mut wins = 0;
        let reps = 40;
        for r in 0..reps {
            let mut rng = StreamKey::new(100 + r).rng();
            let n = 500;
            let z = DMatrix::from_fn(n, 5, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal));
            let mut z = z;
            for i in 0..n {
                z[(i, 1)] = 0.8 * z[(i, 0)] + 0.6 * z[(i, 1)];
            }
            let post = GWishartParams::standard(5).posterior(&z).unwrap();
            let g = Graph::empty(5);
            let omega = crate::gwishart::sample_gwishart(&g, &post, &mut rng).unwrap();
            let rates = birth_death_rates(&g, &omega, &post, 3.0, &[0.0; 10], RateBounds::default()).unwrap();
            let strong = rates[0].log_ratio;
            wins += usize::from(rates[1..].iter().all(|r| r.log_ratio < strong));
        }
        assert!(wins as f64 >= 0.95 * reps as f64, "{wins}/{reps}");
    }
}
