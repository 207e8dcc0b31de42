//! G-Wishart sampling of precision matrices.
//!
//! `W_G(delta, D)` has density proportional to
//! `|K|^((delta - 2) / 2) exp(-tr(D K) / 2)` on positive-definite `K` with
//! `k_ij = 0` for every non-edge of `G`. On the complete graph this is a
//! Wishart with `delta + p - 1` degrees of freedom and scale `D^-1`.
//!
//! Draws follow the exact iterative sampler: a Wishart draw is inverted to a
//! covariance, which is then completed under the graph's zero pattern by
//! cyclic neighbourhood regressions until a fixed point is reached.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GWishartParams {
    delta: f64,
    scale: DMatrix<f64>,
}

impl GWishartParams {
    pub fn new(delta: f64, scale: DMatrix<f64>) -> Result<Self> {
        if !(delta >= 3.0) {
            return Err(Error::Domain(format!("G-Wishart shape must be at least 3, got {delta}")));
        }
        check_spd(&scale, "G-Wishart scale")?;
        Ok(GWishartParams { delta, scale })
    }

    /// `W_G(3, I_p)`.
    pub fn standard(p: usize) -> Self {
        GWishartParams { delta: 3.0, scale: DMatrix::identity(p, p) }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn scale(&self) -> &DMatrix<f64> {
        &self.scale
    }

    pub fn p(&self) -> usize {
        self.scale.nrows()
    }

    /// Conjugate update with latent rows `z` (n × p): `(delta + n, D + zᵀz)`.
    pub fn posterior(&self, z: &DMatrix<f64>) -> Result<GWishartParams> {
        if z.ncols() != self.p() {
            return Err(Error::Dimension(format!("data has {} columns, prior is {}×{}", z.ncols(), self.p(), self.p())));
        }
        Ok(GWishartParams { delta: self.delta + z.nrows() as f64, scale: &self.scale + z.transpose() * z })
    }
}

fn check_spd(m: &DMatrix<f64>, what: &str) -> Result<Cholesky<f64, Dyn>> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("{what} is not square")));
    }
    for i in 0..m.nrows() {
        for j in 0..i {
            let (a, b) = (m[(i, j)], m[(j, i)]);
            if (a - b).abs() > 1e-9 * (1.0 + a.abs().max(b.abs())) {
                return Err(Error::Domain(format!("{what} is not symmetric at ({i}, {j})")));
            }
        }
    }
    Cholesky::new(m.clone()).ok_or_else(|| Error::NotPositiveDefinite(what.to_string()))
}

/// A symmetric positive-definite precision matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecisionMatrix(DMatrix<f64>);

impl PrecisionMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        check_spd(&m, "precision matrix")?;
        Ok(PrecisionMatrix(m))
    }

    pub fn identity(p: usize) -> Self {
        PrecisionMatrix(DMatrix::identity(p, p))
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn p(&self) -> usize {
        self.0.nrows()
    }

    pub fn covariance(&self) -> DMatrix<f64> {
        Cholesky::new(self.0.clone()).expect("precision matrices are positive definite").inverse()
    }

    /// True when every non-edge entry is within `band` of zero.
    pub fn respects(&self, graph: &Graph, band: f64) -> bool {
        crate::graph::pairs(self.p()).all(|(i, j)| graph.has_edge(i, j) || (self.0[(i, j)].abs() <= band && self.0[(j, i)].abs() <= band))
    }
}

/// Tolerances for the completion step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompletionSettings {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub zero_band: f64,
}

impl Default for CompletionSettings {
    fn default() -> Self {
        CompletionSettings { tolerance: 1e-8, max_iterations: 1000, zero_band: 1e-10 }
    }
}

/// Wishart draw with `df` degrees of freedom and scale `L Lᵀ` (Bartlett).
pub fn sample_wishart<R: Rng + ?Sized>(df: f64, scale_chol: &DMatrix<f64>, rng: &mut R) -> DMatrix<f64> {
    let p = scale_chol.nrows();
    let mut a = DMatrix::<f64>::zeros(p, p);
    for i in 0..p {
        let chi = ChiSquared::new(df - i as f64).expect("df exceeds p - 1");
        a[(i, i)] = chi.sample(rng).sqrt();
        for j in 0..i {
            a[(i, j)] = rng.sample(StandardNormal);
        }
    }
    let la = scale_chol * a;
    &la * la.transpose()
}

/// Draw from `W_G(delta, D)`.
pub fn sample_gwishart<R: Rng + ?Sized>(graph: &Graph, params: &GWishartParams, rng: &mut R) -> Result<PrecisionMatrix> {
    sample_gwishart_with(graph, params, &CompletionSettings::default(), rng)
}

/// Draw from the conjugate posterior `W_G(delta + n, D + zᵀz)`.
pub fn sample_gwishart_posterior<R: Rng + ?Sized>(
    graph: &Graph,
    z: &DMatrix<f64>,
    prior: &GWishartParams,
    rng: &mut R,
) -> Result<PrecisionMatrix> {
    sample_gwishart_with(graph, &prior.posterior(z)?, &CompletionSettings::default(), rng)
}

pub fn sample_gwishart_with<R: Rng + ?Sized>(
    graph: &Graph,
    params: &GWishartParams,
    settings: &CompletionSettings,
    rng: &mut R,
) -> Result<PrecisionMatrix> {
    let p = params.p();
    if graph.p() != p {
        return Err(Error::Dimension(format!("graph on {} nodes, parameters are {p}×{p}", graph.p())));
    }
    let d_inv = Cholesky::new(params.scale.clone()).ok_or_else(|| Error::NotPositiveDefinite("G-Wishart scale".into()))?.inverse();
    let l = Cholesky::new(symmetrized(d_inv)).ok_or_else(|| Error::NotPositiveDefinite("inverse G-Wishart scale".into()))?.l();
    let k = sample_wishart(params.delta + p as f64 - 1.0, &l, rng);
    if graph.edge_count() == crate::graph::pair_count(p) {
        return PrecisionMatrix::new(symmetrized(k));
    }

    let sigma = Cholesky::new(k).ok_or_else(|| Error::NotPositiveDefinite("Wishart draw".into()))?.inverse();
    let w = complete_covariance(graph, &sigma, settings)?;
    let mut omega = Cholesky::new(w).ok_or_else(|| Error::NotPositiveDefinite("completed covariance".into()))?.inverse();
    for (i, j) in crate::graph::pairs(p) {
        if !graph.has_edge(i, j) {
            omega[(i, j)] = 0.0;
            omega[(j, i)] = 0.0;
        }
    }
    PrecisionMatrix::new(symmetrized(omega))
}

fn symmetrized(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// Covariance agreeing with `sigma` on the diagonal and on edges, whose
/// inverse vanishes on non-edges.
fn complete_covariance(graph: &Graph, sigma: &DMatrix<f64>, settings: &CompletionSettings) -> Result<DMatrix<f64>> {
    let p = sigma.nrows();
    let neighbors: Vec<Vec<usize>> = (0..p).map(|j| graph.neighbors(j).collect()).collect();
    let mut w = sigma.clone();
    let mut change = f64::INFINITY;
    for _ in 0..settings.max_iterations {
        change = 0.0;
        for j in 0..p {
            let nb = &neighbors[j];
            if nb.is_empty() {
                for l in 0..p {
                    if l != j {
                        change = change.max(w[(l, j)].abs());
                        w[(l, j)] = 0.0;
                        w[(j, l)] = 0.0;
                    }
                }
                continue;
            }
            let w_nn = DMatrix::from_fn(nb.len(), nb.len(), |a, b| w[(nb[a], nb[b])]);
            let s = DVector::from_iterator(nb.len(), nb.iter().map(|&a| sigma[(a, j)]));
            let coef = Cholesky::new(w_nn)
                .ok_or_else(|| Error::NotPositiveDefinite("neighbourhood covariance during completion".into()))?
                .solve(&s);
            for l in 0..p {
                if l == j {
                    continue;
                }
                let v: f64 = nb.iter().zip(coef.iter()).map(|(&a, c)| w[(l, a)] * c).sum();
                change = change.max((v - w[(l, j)]).abs());
                w[(l, j)] = v;
                w[(j, l)] = v;
            }
        }
        if change < settings.tolerance {
            return Ok(w);
        }
    }
    Err(Error::Convergence { iterations: settings.max_iterations, change })
}

/// `pi_ij = -omega_ij / sqrt(omega_ii omega_jj)`; unit diagonal.
pub fn partial_correlations(omega: &PrecisionMatrix) -> DMatrix<f64> {
    let m = omega.as_matrix();
    let p = m.nrows();
    DMatrix::from_fn(p, p, |i, j| if i == j { 1.0 } else { -m[(i, j)] / (m[(i, i)] * m[(j, j)]).sqrt() })
}
