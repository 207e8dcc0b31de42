//! Latent probit network prior over graph ensembles.
//!
//! The edge `e` is present in environment `k` with probability
//! `Phi(alpha_k + w_e . beta + c_k . s_ke)` where
//! `s_ke = sum_{k' != k} c_k' 1{e in G_k'}`. Parameters are updated by
//! latent-normal data augmentation followed by conjugate normal draws.

use nalgebra::{Cholesky, DMatrix, DVector, Matrix2, Vector2};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{pair_count, pair_index, pairs, GraphEnsemble};
use crate::{normal, truncnorm};

/// Variance of the independent normal prior on every entry of `Theta`.
pub const PRIOR_VARIANCE: f64 = 10.0;

/// Initial sparsity guess used to place `alpha`.
pub const INITIAL_SPARSITY: f64 = 0.05;

pub type Location = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomGraphParams {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub c: Vec<Location>,
}

impl RandomGraphParams {
    pub fn new(alpha: Vec<f64>, beta: Vec<f64>, c: Vec<Location>) -> Result<Self> {
        if alpha.len() != c.len() {
            return Err(Error::Dimension(format!("{} intercepts but {} latent locations", alpha.len(), c.len())));
        }
        let all = alpha.iter().chain(&beta).chain(c.iter().flatten());
        if all.into_iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("random-graph parameters must be finite".into()));
        }
        Ok(RandomGraphParams { alpha, beta, c })
    }

    /// `alpha_k = probit(INITIAL_SPARSITY)`, everything else zero.
    pub fn initial(b: usize, d: usize) -> Self {
        RandomGraphParams { alpha: vec![normal::probit(INITIAL_SPARSITY); b], beta: vec![0.0; d], c: vec![[0.0; 2]; b] }
    }

    pub fn environments(&self) -> usize {
        self.alpha.len()
    }

    pub fn covariate_dim(&self) -> usize {
        self.beta.len()
    }

    /// Inner products `c_k . c_k'`, the identified part of the locations.
    pub fn gram(&self) -> DMatrix<f64> {
        let b = self.c.len();
        DMatrix::from_fn(b, b, |i, j| dot2(self.c[i], self.c[j]))
    }

    /// Applies the 2×2 matrix `q` to every location.
    pub fn transform_locations(&self, q: &Matrix2<f64>) -> Self {
        let c = self
            .c
            .iter()
            .map(|ck| {
                let v = q * Vector2::new(ck[0], ck[1]);
                [v[0], v[1]]
            })
            .collect();
        RandomGraphParams { c, ..self.clone() }
    }

    /// Flattened values in [`Self::parameter_names`] order.
    pub fn values(&self) -> Vec<f64> {
        self.alpha.iter().chain(&self.beta).chain(self.c.iter().flatten()).copied().collect()
    }

    pub fn parameter_names(&self, environments: &[String], covariates: &[String]) -> Vec<String> {
        let mut names: Vec<String> = environments.iter().map(|e| format!("alpha[{e}]")).collect();
        names.extend(covariates.iter().map(|w| format!("beta[{w}]")));
        for e in environments {
            names.push(format!("c1[{e}]"));
            names.push(format!("c2[{e}]"));
        }
        names
    }

    fn check(&self, ensemble: &GraphEnsemble, w: &EdgeCovariates) -> Result<()> {
        if self.alpha.len() != ensemble.len() {
            return Err(Error::Dimension(format!("{} environments in parameters, {} graphs", self.alpha.len(), ensemble.len())));
        }
        if self.beta.len() != w.d() {
            return Err(Error::Dimension(format!("{} coefficients for {} edge covariates", self.beta.len(), w.d())));
        }
        if w.p() != ensemble.p() {
            return Err(Error::Dimension(format!("edge covariates on {} nodes, graphs on {}", w.p(), ensemble.p())));
        }
        Ok(())
    }
}

#[inline]
fn dot2(a: Location, b: Location) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Per-pair covariate vectors, stored pair-major in linear pair order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeCovariates {
    p: usize,
    names: Vec<String>,
    values: Vec<f64>,
}

impl EdgeCovariates {
    /// `values` has one row per pair in linear pair order.
    pub fn new(p: usize, names: Vec<String>, values: &DMatrix<f64>) -> Result<Self> {
        if values.nrows() != pair_count(p) || values.ncols() != names.len() {
            return Err(Error::Dimension(format!(
                "edge covariates are {}×{}, expected {}×{}",
                values.nrows(),
                values.ncols(),
                pair_count(p),
                names.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("edge covariates must be finite".into()));
        }
        let d = names.len();
        let flat = (0..values.nrows()).flat_map(|r| (0..d).map(move |c| (r, c))).map(|rc| values[rc]).collect();
        Ok(EdgeCovariates { p, names, values: flat })
    }

    /// No covariates (`d = 0`).
    pub fn none(p: usize) -> Self {
        EdgeCovariates { p, names: Vec::new(), values: Vec::new() }
    }

    /// Builds covariates from a symmetric function of the node pair.
    pub fn from_fn(p: usize, names: Vec<String>, mut f: impl FnMut(usize, usize) -> Vec<f64>) -> Result<Self> {
        let d = names.len();
        let mut m = DMatrix::zeros(pair_count(p), d);
        for (idx, (i, j)) in pairs(p).enumerate() {
            let row = f(i, j);
            if row.len() != d {
                return Err(Error::Dimension(format!("covariate row for ({i}, {j}) has length {}", row.len())));
            }
            for (c, v) in row.into_iter().enumerate() {
                m[(idx, c)] = v;
            }
        }
        EdgeCovariates::new(p, names, &m)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn d(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    #[inline]
    pub fn row(&self, pair: usize) -> &[f64] {
        let d = self.d();
        &self.values[pair * d..(pair + 1) * d]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &[f64] {
        self.row(pair_index(i, j, self.p))
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        let d = self.d();
        DMatrix::from_fn(pair_count(self.p), d, |r, c| self.values[r * d + c])
    }

    /// `w_e . beta` for every pair.
    pub fn offsets(&self, beta: &[f64]) -> Vec<f64> {
        (0..pair_count(self.p)).map(|e| self.row(e).iter().zip(beta).map(|(a, b)| a * b).sum()).collect()
    }
}

/// `S_e = sum_k c_k 1{e in G_k}` for every pair.
fn location_sums(ensemble: &GraphEnsemble, c: &[Location]) -> Vec<Location> {
    let mut s = vec![[0.0; 2]; pair_count(ensemble.p())];
    for (g, ck) in ensemble.graphs().iter().zip(c) {
        for (e, se) in s.iter_mut().enumerate() {
            if g.has_pair(e) {
                se[0] += ck[0];
                se[1] += ck[1];
            }
        }
    }
    s
}

/// `alpha_k + w_e . beta + c_k . s_ke` for the pair `(i, j)`.
pub fn linear_predictor(k: usize, pair: (usize, usize), ensemble: &GraphEnsemble, theta: &RandomGraphParams, w: &EdgeCovariates) -> f64 {
    let e = pair_index(pair.0, pair.1, ensemble.p());
    let wb: f64 = w.row(e).iter().zip(&theta.beta).map(|(a, b)| a * b).sum();
    let mut s = [0.0; 2];
    for (kk, g) in ensemble.graphs().iter().enumerate() {
        if kk != k && g.has_pair(e) {
            s[0] += theta.c[kk][0];
            s[1] += theta.c[kk][1];
        }
    }
    theta.alpha[k] + wb + dot2(theta.c[k], s)
}

/// Prior probability of the edge `pair` in environment `k` given the other graphs.
pub fn edge_probability(k: usize, pair: (usize, usize), ensemble: &GraphEnsemble, theta: &RandomGraphParams, w: &EdgeCovariates) -> f64 {
    normal::cdf(linear_predictor(k, pair, ensemble, theta, w))
}

/// Linear predictors of every pair in environment `k`, in pair order.
pub fn linear_predictors(k: usize, ensemble: &GraphEnsemble, theta: &RandomGraphParams, w: &EdgeCovariates) -> Vec<f64> {
    let sums = location_sums(ensemble, &theta.c);
    let g = ensemble.graph(k);
    let ck = theta.c[k];
    w.offsets(&theta.beta)
        .into_iter()
        .zip(&sums)
        .enumerate()
        .map(|(e, (wb, se))| {
            let own = if g.has_pair(e) { ck } else { [0.0; 2] };
            let s = [se[0] - own[0], se[1] - own[1]];
            theta.alpha[k] + wb + dot2(ck, s)
        })
        .collect()
}

/// Probit edge probabilities of environment `k` computed from `alpha`,
/// `beta` and the Gram matrix `gram[(k, k')] = c_k . c_k'` alone, the
/// rotation-invariant part of the locations. Pair order.
pub fn edge_probabilities_from_gram(
    k: usize,
    ensemble: &GraphEnsemble,
    alpha: &[f64],
    beta: &[f64],
    gram: &DMatrix<f64>,
    w: &EdgeCovariates,
) -> Result<Vec<f64>> {
    let b = ensemble.len();
    if alpha.len() != b || gram.shape() != (b, b) || beta.len() != w.d() || w.p() != ensemble.p() || k >= b {
        return Err(Error::Dimension("alpha, beta, Gram matrix and graphs disagree".into()));
    }
    let wb = w.offsets(beta);
    Ok((0..pair_count(ensemble.p()))
        .map(|e| {
            let coupling: f64 = (0..b).filter(|&kk| kk != k && ensemble.graph(kk).has_pair(e)).map(|kk| gram[(k, kk)]).sum();
            normal::cdf(alpha[k] + wb[e] + coupling)
        })
        .collect())
}

/// Constant-probability baseline prior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErPrior {
    sparsity: f64,
}

impl ErPrior {
    pub fn new(sparsity: f64) -> Result<Self> {
        if !(sparsity > 0.0 && sparsity < 1.0) {
            return Err(Error::Domain(format!("edge probability must lie in (0, 1), got {sparsity}")));
        }
        Ok(ErPrior { sparsity })
    }

    pub fn probability(&self) -> f64 {
        self.sparsity
    }

    pub fn odds(&self) -> f64 {
        self.sparsity / (1.0 - self.sparsity)
    }

    pub fn log_odds(&self) -> f64 {
        self.odds().ln()
    }
}

pub fn er_prior_probability(sparsity: f64) -> Result<ErPrior> {
    ErPrior::new(sparsity)
}

/// Which blocks of `Theta` a sweep redraws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThetaUpdate {
    pub alpha: bool,
    pub beta: bool,
    pub c: bool,
}

impl Default for ThetaUpdate {
    fn default() -> Self {
        ThetaUpdate { alpha: true, beta: true, c: true }
    }
}

/// One full Gibbs sweep over `Theta`: augmentation, then `alpha`, `beta`,
/// `c_1..c_B`.
pub fn gibbs_update_theta<R: Rng + ?Sized>(
    ensemble: &GraphEnsemble,
    theta: &RandomGraphParams,
    w: &EdgeCovariates,
    rng: &mut R,
) -> Result<RandomGraphParams> {
    gibbs_update_theta_with(ensemble, theta, w, ThetaUpdate::default(), rng)
}

pub fn gibbs_update_theta_with<R: Rng + ?Sized>(
    ensemble: &GraphEnsemble,
    theta: &RandomGraphParams,
    w: &EdgeCovariates,
    update: ThetaUpdate,
    rng: &mut R,
) -> Result<RandomGraphParams> {
    theta.check(ensemble, w)?;
    let b = ensemble.len();
    let np = pair_count(ensemble.p());
    let d = w.d();
    let mut next = theta.clone();
    if np == 0 || b == 0 {
        return Ok(next);
    }

    let y = |k: usize, e: usize| ensemble.graph(k).has_pair(e);
    let mut sums = location_sums(ensemble, &next.c);
    // s_ke: location sum over other environments
    let cross = |sums: &[Location], c: &[Location], k: usize, e: usize| -> Location {
        let se = sums[e];
        if y(k, e) {
            [se[0] - c[k][0], se[1] - c[k][1]]
        } else {
            se
        }
    };

    let mut wb = w.offsets(&next.beta);
    let mut u = vec![0.0; b * np];
    for k in 0..b {
        for e in 0..np {
            let eta = next.alpha[k] + wb[e] + dot2(next.c[k], cross(&sums, &next.c, k, e));
            u[k * np + e] = if y(k, e) {
                truncnorm::sample(rng, eta, 1.0, 0.0, f64::INFINITY)
            } else {
                truncnorm::sample(rng, eta, 1.0, f64::NEG_INFINITY, 0.0)
            };
        }
    }

    if update.alpha {
        for k in 0..b {
            let resid: f64 = (0..np).map(|e| u[k * np + e] - wb[e] - dot2(next.c[k], cross(&sums, &next.c, k, e))).sum();
            let prec = 1.0 / PRIOR_VARIANCE + np as f64;
            let z: f64 = rng.sample(StandardNormal);
            next.alpha[k] = resid / prec + z / prec.sqrt();
        }
    }

    if update.beta && d > 0 {
        let mut prec = DMatrix::<f64>::identity(d, d) / PRIOR_VARIANCE;
        let mut rhs = DVector::<f64>::zeros(d);
        for e in 0..np {
            let we = DVector::from_column_slice(w.row(e));
            prec += (&we * we.transpose()) * b as f64;
            let r: f64 = (0..b).map(|k| u[k * np + e] - next.alpha[k] - dot2(next.c[k], cross(&sums, &next.c, k, e))).sum();
            rhs += we * r;
        }
        next.beta = conjugate_draw(prec, rhs, rng)?.iter().copied().collect();
        wb = w.offsets(&next.beta);
    }

    if update.c {
        for k in 0..b {
            let ck = next.c[k];
            let mut prec = Matrix2::<f64>::identity() / PRIOR_VARIANCE;
            let mut rhs = Vector2::<f64>::zeros();
            for e in 0..np {
                // environment k's own observation: design s_ke
                let s = cross(&sums, &next.c, k, e);
                let sv = Vector2::new(s[0], s[1]);
                prec += sv * sv.transpose();
                rhs += sv * (u[k * np + e] - next.alpha[k] - wb[e]);
                if !y(k, e) {
                    continue;
                }
                // c_k enters every other environment's predictor through this edge
                for kk in 0..b {
                    if kk == k {
                        continue;
                    }
                    let ckk = next.c[kk];
                    let s_other = cross(&sums, &next.c, kk, e);
                    let rest = [s_other[0] - ck[0], s_other[1] - ck[1]];
                    let xv = Vector2::new(ckk[0], ckk[1]);
                    prec += xv * xv.transpose();
                    rhs += xv * (u[kk * np + e] - next.alpha[kk] - wb[e] - dot2(ckk, rest));
                }
            }
            let draw =
                conjugate_draw(DMatrix::from_iterator(2, 2, prec.iter().copied()), DVector::from_iterator(2, rhs.iter().copied()), rng)?;
            let new_ck = [draw[0], draw[1]];
            for (e, se) in sums.iter_mut().enumerate() {
                if y(k, e) {
                    se[0] += new_ck[0] - ck[0];
                    se[1] += new_ck[1] - ck[1];
                }
            }
            next.c[k] = new_ck;
        }
    }
    Ok(next)
}

/// Draw from `N(prec^-1 rhs, prec^-1)`.
fn conjugate_draw<R: Rng + ?Sized>(prec: DMatrix<f64>, rhs: DVector<f64>, rng: &mut R) -> Result<DVector<f64>> {
    let n = rhs.len();
    let chol = Cholesky::new(prec).ok_or_else(|| Error::NotPositiveDefinite("conjugate posterior precision".into()))?;
    let mean = chol.solve(&rhs);
    let z = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
    // L^T x = z gives x ~ N(0, prec^-1)
    let x = chol.l().transpose().solve_upper_triangular(&z).expect("Cholesky factor has a positive diagonal");
    Ok(mean + x)
}

/// Runs `sweeps` single-site Gibbs sweeps of the edge indicators starting
/// from empty graphs. Sweeps visit environments in order, then pairs.
pub fn sample_graph_ensemble<R: Rng + ?Sized>(
    p: usize,
    theta: &RandomGraphParams,
    w: &EdgeCovariates,
    sweeps: usize,
    rng: &mut R,
) -> Result<GraphEnsemble> {
    if sweeps == 0 {
        return Err(Error::Config("graph-ensemble sampling needs at least one sweep".into()));
    }
    let b = theta.environments();
    let mut ensemble = GraphEnsemble::empty(p, b);
    theta.check(&ensemble, w)?;
    let wb = w.offsets(&theta.beta);
    let mut sums = vec![[0.0; 2]; pair_count(p)];
    for _ in 0..sweeps {
        for k in 0..b {
            let ck = theta.c[k];
            for (e, se) in sums.iter_mut().enumerate() {
                let present = ensemble.graph(k).has_pair(e);
                let own = if present { ck } else { [0.0; 2] };
                let s = [se[0] - own[0], se[1] - own[1]];
                let prob = normal::cdf(theta.alpha[k] + wb[e] + dot2(ck, s));
                let next = rng.random::<f64>() < prob;
                if next != present {
                    let sign = if next { 1.0 } else { -1.0 };
                    se[0] += sign * ck[0];
                    se[1] += sign * ck[1];
                    ensemble.graph_mut(k).set_pair(e, next);
                }
            }
        }
    }
    Ok(ensemble)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::rng::StreamKey;

    fn scalar_w(p: usize, v: f64) -> EdgeCovariates {
        EdgeCovariates::from_fn(p, vec!["w".into()], |_, _| vec![v]).unwrap()
    }

    #[test]
    fn gram_form_matches_locations() {
        let p = 6;
        let mut ensemble = GraphEnsemble::empty(p, 3);
        for (k, edges) in [vec![(0, 1), (2, 3)], vec![(0, 1), (4, 5), (1, 2)], vec![(2, 3), (0, 5)]].into_iter().enumerate() {
            for (i, j) in edges {
                ensemble.graph_mut(k).set_edge(i, j, true);
            }
        }
        let theta = RandomGraphParams::new(vec![-1.0, 0.3, -2.0], vec![0.7], vec![[0.5, -1.2], [1.1, 0.4], [-0.3, 0.9]]).unwrap();
        let w = EdgeCovariates::from_fn(p, vec!["w".into()], |i, j| vec![(i + 2 * j) as f64 / 10.0]).unwrap();
        for k in 0..3 {
            let via_gram = edge_probabilities_from_gram(k, &ensemble, &theta.alpha, &theta.beta, &theta.gram(), &w).unwrap();
            for (e, (i, j)) in pairs(p).enumerate() {
                assert!((via_gram[e] - edge_probability(k, (i, j), &ensemble, &theta, &w)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn probability_examples() {
        let ens = GraphEnsemble::empty(4, 2);
        let zero = RandomGraphParams::new(vec![0.0, 0.0], vec![], vec![[0.0; 2]; 2]).unwrap();
        assert_eq!(edge_probability(0, (0, 1), &ens, &zero, &EdgeCovariates::none(4)), 0.5);

        let t = RandomGraphParams::new(vec![-2.0, 0.0], vec![0.0], vec![[1.0, 0.0], [1.0, 0.0]]).unwrap();
        let p = edge_probability(0, (1, 2), &ens, &t, &scalar_w(4, 0.3));
        assert!((p - 0.022_750_131_948_179_21).abs() < 1e-15);

        // cross term c_0 . c_1 = 0.5 with the edge present in environment 1
        let mut ens = GraphEnsemble::empty(4, 2);
        ens.graph_mut(1).set_edge(1, 2, true);
        let t = RandomGraphParams::new(vec![-2.0, 0.0], vec![2.5], vec![[1.0, 0.0], [0.5, 3.0]]).unwrap();
        let p = edge_probability(0, (1, 2), &ens, &t, &scalar_w(4, 0.4));
        assert!((p - 0.308_537_538_725_986_9).abs() < 1e-15);
    }

    #[test]
    fn bulk_predictors_match_single_pair() {
        let mut rng = StreamKey::new(1).rng();
        let t = RandomGraphParams::new(vec![-1.0, 0.3, -0.5], vec![1.2, -0.7], vec![[0.4, -1.0], [0.9, 0.2], [-0.3, 0.8]]).unwrap();
        let w = EdgeCovariates::from_fn(6, vec!["a".into(), "b".into()], |i, j| vec![(i * j) as f64 / 10.0, (i + j) as f64 / 7.0]).unwrap();
        let ens = sample_graph_ensemble(6, &t, &w, 5, &mut rng).unwrap();
        for k in 0..3 {
            let bulk = linear_predictors(k, &ens, &t, &w);
            for (e, (i, j)) in pairs(6).enumerate() {
                assert!((bulk[e] - linear_predictor(k, (i, j), &ens, &t, &w)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn er_prior() {
        assert!(ErPrior::new(0.0).is_err());
        assert!(ErPrior::new(1.0).is_err());
        assert_eq!(ErPrior::new(0.5).unwrap().odds(), 1.0);
        let er = er_prior_probability(0.068).unwrap();
        assert_eq!(er.probability(), 0.068);
        assert!((er.odds() - 0.072_961_373_390_557_94).abs() < 1e-15);
    }

    #[test]
    fn extreme_intercepts() {
        let mut rng = StreamKey::new(2).rng();
        let w = EdgeCovariates::none(20);
        let low = RandomGraphParams::new(vec![-10.0; 3], vec![], vec![[0.0; 2]; 3]).unwrap();
        let ens = sample_graph_ensemble(20, &low, &w, 10, &mut rng).unwrap();
        assert!(ens.graphs().iter().all(|g| g.edge_count() == 0));
        let high = RandomGraphParams::new(vec![10.0; 3], vec![], vec![[0.0; 2]; 3]).unwrap();
        let ens = sample_graph_ensemble(20, &high, &w, 10, &mut rng).unwrap();
        assert!(ens.graphs().iter().all(|g| *g == Graph::complete(20)));
    }

    #[test]
    fn zero_design_gives_prior_draw_for_c() {
        // no edges anywhere: every design row for c_1 vanishes
        let ens = GraphEnsemble::empty(5, 2);
        let t = RandomGraphParams::new(vec![-1.0, -1.0], vec![], vec![[0.0; 2], [0.7, -0.2]]).unwrap();
        let update = ThetaUpdate { alpha: false, beta: false, c: true };
        let mut rng = StreamKey::new(3).rng();
        let n = 20_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let next = gibbs_update_theta_with(&ens, &t, &EdgeCovariates::none(5), update, &mut rng).unwrap();
            s += next.c[0][0];
            s2 += next.c[0][0] * next.c[0][0];
        }
        let mean = s / n as f64;
        let var = s2 / n as f64 - mean * mean;
        assert!(mean.abs() < 4.0 * (PRIOR_VARIANCE / n as f64).sqrt());
        assert!((var / PRIOR_VARIANCE - 1.0).abs() < 0.05);
    }

    #[test]
    fn factorizes_without_coupling() {
        let mut rng = StreamKey::new(4).rng();
        let alpha = [-1.0, 0.5];
        let t = RandomGraphParams::new(alpha.to_vec(), vec![], vec![[0.0; 2]; 2]).unwrap();
        let w = EdgeCovariates::none(30);
        let reps = 40;
        let mut counts = [0usize; 2];
        for _ in 0..reps {
            let ens = sample_graph_ensemble(30, &t, &w, 1, &mut rng).unwrap();
            for k in 0..2 {
                counts[k] += ens.graph(k).edge_count();
            }
        }
        let n = (reps * pair_count(30)) as f64;
        for k in 0..2 {
            let p = normal::cdf(alpha[k]);
            let se = (p * (1.0 - p) / n).sqrt();
            assert!((counts[k] as f64 / n - p).abs() < 4.0 * se);
        }
    }
}
