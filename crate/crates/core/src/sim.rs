//! Synthetic multi-environment data from the full generative model.
//!
//! `Theta` and the edge covariate are drawn once, the graph ensemble comes
//! from repeated single-site Gibbs sweeps under the probit prior, each
//! precision is a `W_G(3, I)` draw, and observations are Gaussian rows with
//! covariance `Omega^-1`. Count data pushes standardised rows through the
//! normal CDF and a discrete Weibull quantile.

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{DataKind, Dataset, EnvironmentData};
use crate::error::{Error, Result};
use crate::graph::{Graph, GraphEnsemble};
use crate::gwishart::{sample_gwishart, GWishartParams, PrecisionMatrix};
use crate::io::{file_stem, parse_err, parse_f64, LabeledMatrix};
use crate::marginals::{count_for_latent, DwRegression};
use crate::random_graph::{edge_probability, sample_graph_ensemble, EdgeCovariates, RandomGraphParams};
use crate::rng::{purpose, StreamKey};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub n: usize,
    pub p: usize,
    pub b: usize,
    pub alpha_mean: f64,
    pub alpha_sd: f64,
    pub w_low: f64,
    pub w_high: f64,
    pub beta: f64,
    /// Standard deviation of each location coordinate.
    pub c_sd: f64,
    pub ensemble_sweeps: usize,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n: 346,
            p: 87,
            b: 13,
            alpha_mean: -2.0,
            alpha_sd: 1.0,
            w_low: -0.5,
            w_high: 0.5,
            beta: 2.5,
            c_sd: 0.3,
            ensemble_sweeps: 100,
            seed: 1,
        }
    }
}

impl SimConfig {
    /// The desk-scale instance: `p = 20`, `B = 4`, `n = 150`.
    pub fn scaled() -> Self {
        SimConfig { n: 150, p: 20, b: 4, ..SimConfig::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 2 || self.b == 0 {
            return Err(Error::Config(format!("need p >= 2 and B >= 1, got p = {}, B = {}", self.p, self.b)));
        }
        if self.n < crate::dataset::MIN_SAMPLES {
            return Err(Error::Config(format!("n = {} is below the minimum of {}", self.n, crate::dataset::MIN_SAMPLES)));
        }
        if !(self.alpha_sd >= 0.0 && self.c_sd >= 0.0 && self.w_low <= self.w_high) {
            return Err(Error::Config("scales must be non-negative and w_low <= w_high".into()));
        }
        if self.ensemble_sweeps == 0 {
            return Err(Error::Config("at least one ensemble sweep is required".into()));
        }
        Ok(())
    }

    pub fn labels(&self) -> Vec<String> {
        (1..=self.b).map(|k| format!("env{k}")).collect()
    }

    pub fn otu_ids(&self) -> Vec<String> {
        (1..=self.p).map(|j| format!("otu{j}")).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub environments: Vec<String>,
    pub node_names: Vec<String>,
    pub theta: RandomGraphParams,
    pub w: EdgeCovariates,
    pub graphs: Vec<Graph>,
    pub precisions: Vec<PrecisionMatrix>,
}

impl GroundTruth {
    /// Probit edge probabilities at the true `Theta` and graphs.
    pub fn edge_probabilities(&self) -> Result<Vec<DMatrix<f64>>> {
        probit_probabilities(&self.theta, &self.w, &self.graphs)
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut writer = csv::Writer::from_path(dir.join("theta.csv")).map_err(|e| parse_err(&dir.join("theta.csv"), e.to_string()))?;
        let names = self.theta.parameter_names(&self.environments, self.w.names());
        let csv_err = |e: csv::Error| parse_err(&dir.join("theta.csv"), e.to_string());
        writer.write_record(["parameter", "value"]).map_err(csv_err)?;
        for (n, v) in names.iter().zip(self.theta.values()) {
            writer.write_record([n.clone(), v.to_string()]).map_err(csv_err)?;
        }
        writer.flush()?;
        let mut labels = String::new();
        for (k, env) in self.environments.iter().enumerate() {
            let stem = format!("{:02}_{}", k + 1, file_stem(env));
            let ids = self.node_names.clone();
            LabeledMatrix::new("otu_id", ids.clone(), ids.clone(), self.graphs[k].to_adjacency())?
                .write(&dir.join(format!("graph_{stem}.tsv")))?;
            LabeledMatrix::new("otu_id", ids.clone(), ids, self.precisions[k].as_matrix().clone())?
                .write(&dir.join(format!("precision_{stem}.tsv")))?;
            labels.push_str(&format!("{env}\t{stem}\n"));
        }
        fs::write(dir.join("environments.tsv"), labels)?;
        Ok(())
    }

    /// Reads the true graphs written by [`GroundTruth::write`], keyed by label.
    pub fn read_graphs(dir: &Path) -> Result<Vec<(String, Vec<String>, Graph)>> {
        let index = dir.join("environments.tsv");
        let text = fs::read_to_string(&index).map_err(|e| parse_err(&index, e.to_string()))?;
        let mut out = Vec::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let (label, stem) = line.split_once('\t').ok_or_else(|| parse_err(&index, format!("malformed line `{line}`")))?;
            let m = LabeledMatrix::read(&dir.join(format!("graph_{stem}.tsv")))?;
            out.push((label.to_owned(), m.col_ids, Graph::from_adjacency(&m.values)?));
        }
        Ok(out)
    }

    pub fn read_theta(dir: &Path) -> Result<Vec<(String, f64)>> {
        let path = dir.join("theta.csv");
        let mut reader = csv::Reader::from_path(&path).map_err(|e| parse_err(&path, e.to_string()))?;
        let mut out = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| parse_err(&path, e.to_string()))?;
            out.push((rec[0].to_owned(), parse_f64(&path, &rec[1], &rec[0])?));
        }
        Ok(out)
    }
}

/// Probit edge probabilities for every environment given `Theta` and the
/// ensemble the coupling term conditions on.
pub fn probit_probabilities(theta: &RandomGraphParams, w: &EdgeCovariates, graphs: &[Graph]) -> Result<Vec<DMatrix<f64>>> {
    let ensemble = GraphEnsemble::new(graphs.to_vec())?;
    let p = w.p();
    Ok((0..graphs.len())
        .map(|k| DMatrix::from_fn(p, p, |i, j| if i == j { 0.0 } else { edge_probability(k, (i.min(j), i.max(j)), &ensemble, theta, w) }))
        .collect())
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub dataset: Dataset,
    pub truth: GroundTruth,
}

/// `Theta`, `w`, graphs and precisions of the generative model.
pub fn simulate_truth(cfg: &SimConfig) -> Result<GroundTruth> {
    cfg.validate()?;
    let mut rng = StreamKey::new(cfg.seed).child(purpose::SIM_THETA).rng();
    let alpha_dist = Normal::new(cfg.alpha_mean, cfg.alpha_sd).map_err(|e| Error::Config(e.to_string()))?;
    let alpha: Vec<f64> = (0..cfg.b).map(|_| alpha_dist.sample(&mut rng)).collect();
    let c: Vec<[f64; 2]> = (0..cfg.b)
        .map(|_| {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            [cfg.c_sd * a, cfg.c_sd * b]
        })
        .collect();
    truth_given_theta(cfg, RandomGraphParams::new(alpha, vec![cfg.beta], c)?)
}

/// Ground truth under a fixed `Theta` (one edge covariate); the `alpha`,
/// `beta` and `c_sd` fields of `cfg` are ignored.
pub fn truth_given_theta(cfg: &SimConfig, theta: RandomGraphParams) -> Result<GroundTruth> {
    cfg.validate()?;
    if theta.environments() != cfg.b || theta.covariate_dim() != 1 {
        return Err(Error::Dimension(format!("Theta must cover {} environments and one edge covariate", cfg.b)));
    }
    let root = StreamKey::new(cfg.seed);
    let mut rng = root.child(purpose::SIM_THETA).child(1).rng();
    let w = if cfg.w_low == cfg.w_high {
        EdgeCovariates::from_fn(cfg.p, vec!["w".into()], |_, _| vec![cfg.w_low])?
    } else {
        let u = Uniform::new(cfg.w_low, cfg.w_high).map_err(|e| Error::Config(e.to_string()))?;
        EdgeCovariates::from_fn(cfg.p, vec!["w".into()], |_, _| vec![u.sample(&mut rng)])?
    };

    let mut rng = root.child(purpose::SIM_GRAPHS).rng();
    let graphs = sample_graph_ensemble(cfg.p, &theta, &w, cfg.ensemble_sweeps, &mut rng)?.into_graphs();

    let prior = GWishartParams::standard(cfg.p);
    let precisions = graphs
        .par_iter()
        .enumerate()
        .map(|(k, g)| sample_gwishart(g, &prior, &mut root.child(purpose::SIM_OMEGA).child(k as u64).rng()))
        .collect::<Result<Vec<_>>>()?;
    Ok(GroundTruth { environments: cfg.labels(), node_names: cfg.otu_ids(), theta, w, graphs, precisions })
}

/// `n` rows with covariance `Omega^-1`: `x = L^-T e` for `Omega = L Lᵀ`.
fn gaussian_rows(omega: &PrecisionMatrix, n: usize, key: StreamKey) -> Result<DMatrix<f64>> {
    let p = omega.p();
    let chol = omega.as_matrix().clone().cholesky().ok_or_else(|| Error::NotPositiveDefinite("simulated precision".into()))?;
    let lt = chol.l().transpose();
    let mut rng = key.rng();
    let mut out = DMatrix::zeros(n, p);
    for i in 0..n {
        let e = DVector::from_fn(p, |_, _| rng.sample::<f64, _>(StandardNormal));
        let x = lt.solve_upper_triangular(&e).expect("triangular factor has a positive diagonal");
        out.row_mut(i).copy_from(&x.transpose());
    }
    Ok(out)
}

fn gaussian_blocks(cfg: &SimConfig, truth: &GroundTruth) -> Result<Vec<DMatrix<f64>>> {
    let root = StreamKey::new(cfg.seed).child(purpose::SIM_DATA);
    truth.precisions.par_iter().enumerate().map(|(k, omega)| gaussian_rows(omega, cfg.n, root.child(k as u64))).collect()
}

fn sample_ids(label: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{label}_s{i}")).collect()
}

/// Gaussian observations plus the full ground truth.
pub fn simulate(cfg: &SimConfig) -> Result<Simulation> {
    gaussian_simulation(cfg, simulate_truth(cfg)?)
}

/// [`simulate`] under a fixed `Theta`.
pub fn simulate_given_theta(cfg: &SimConfig, theta: RandomGraphParams) -> Result<Simulation> {
    gaussian_simulation(cfg, truth_given_theta(cfg, theta)?)
}

fn gaussian_simulation(cfg: &SimConfig, truth: GroundTruth) -> Result<Simulation> {
    let blocks = gaussian_blocks(cfg, &truth)?;
    let environments = truth
        .environments
        .iter()
        .zip(blocks)
        .map(|(label, values)| EnvironmentData::new(label.clone(), sample_ids(label, cfg.n), values))
        .collect::<Result<Vec<_>>>()?;
    let mut dataset = Dataset::new(DataKind::Gaussian, truth.node_names.clone(), environments)?;
    dataset.edge_covariates = Some(truth.w.clone());
    Ok(Simulation { dataset, truth })
}

#[derive(Debug, Clone)]
pub struct CountSimulation {
    pub dataset: Dataset,
    pub truth: GroundTruth,
    /// Standardised latent rows that generated the counts, per environment.
    pub latent: Vec<DMatrix<f64>>,
}

/// Counts through intercept-only discrete Weibull marginals, one per node.
pub fn simulate_counts(cfg: &SimConfig, marginals: &[DwRegression]) -> Result<CountSimulation> {
    if marginals.len() != cfg.p || marginals.iter().any(|m| m.dim() != 1) {
        return Err(Error::Dimension(format!("need {} intercept-only marginals", cfg.p)));
    }
    let truth = simulate_truth(cfg)?;
    let mut latent = gaussian_blocks(cfg, &truth)?;
    let mut environments = Vec::new();
    for (k, z) in latent.iter_mut().enumerate() {
        let sd = truth.precisions[k].covariance().diagonal().map(f64::sqrt);
        for j in 0..cfg.p {
            z.column_mut(j).unscale_mut(sd[j]);
        }
        let mut counts = DMatrix::zeros(cfg.n, cfg.p);
        for i in 0..cfg.n {
            for j in 0..cfg.p {
                counts[(i, j)] = count_for_latent(z[(i, j)], &marginals[j], &[1.0])? as f64;
            }
        }
        let label = &truth.environments[k];
        environments.push(EnvironmentData::new(label.clone(), sample_ids(label, cfg.n), counts)?);
    }
    let mut dataset = Dataset::new(DataKind::Counts, truth.node_names.clone(), environments)?;
    dataset.edge_covariates = Some(truth.w.clone());
    Ok(CountSimulation { dataset, truth, latent })
}
