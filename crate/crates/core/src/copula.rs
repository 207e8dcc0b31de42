//! Latent Gaussian layer and its truncated-normal Gibbs sweep.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gwishart::PrecisionMatrix;
use crate::marginals::{latent_interval, DwRegression, LatentInterval, NodeCovariates};
use crate::normal;
use crate::rng::StreamKey;
use crate::truncnorm;

/// Probability used in place of an infinite endpoint when placing the
/// initial latent value.
const INIT_TAIL: f64 = 1e-6;

/// Row-major `n × p` interval bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentIntervals {
    n: usize,
    p: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl LatentIntervals {
    pub fn new(n: usize, p: usize, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != n * p || upper.len() != n * p {
            return Err(Error::Dimension(format!("interval bounds must have {} entries", n * p)));
        }
        if let Some(i) = (0..n * p).find(|&i| !(lower[i] < upper[i])) {
            return Err(Error::Domain(format!("empty latent interval ({}, {}] at cell {i}", lower[i], upper[i])));
        }
        Ok(LatentIntervals { n, p, lower, upper })
    }

    pub fn unbounded(n: usize, p: usize) -> Self {
        LatentIntervals { n, p, lower: vec![f64::NEG_INFINITY; n * p], upper: vec![f64::INFINITY; n * p] }
    }

    /// Intervals of the counts `y` (n × p) under frozen marginals; `x` holds
    /// the matching covariate rows.
    pub fn from_counts(y: &DMatrix<f64>, marginals: &[DwRegression], x: &NodeCovariates) -> Result<Self> {
        let (n, p) = y.shape();
        if marginals.len() != p || x.n_samples() != n {
            return Err(Error::Dimension(format!(
                "{n}×{p} counts with {} marginals and {} covariate rows",
                marginals.len(),
                x.n_samples()
            )));
        }
        let mut lower = vec![0.0; n * p];
        let mut upper = vec![0.0; n * p];
        for i in 0..n {
            let row = x.row(i);
            for j in 0..p {
                let v = y[(i, j)];
                if !(v >= 0.0 && v.fract() == 0.0 && v < 2f64.powi(53)) {
                    return Err(Error::Domain(format!("observation ({i}, {j}) = {v} is not a count")));
                }
                let iv = latent_interval(v as u64, &marginals[j], &row)?;
                lower[i * p + j] = iv.lower;
                upper[i * p + j] = iv.upper;
            }
        }
        LatentIntervals::new(n, p, lower, upper)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> LatentInterval {
        let c = i * self.p + j;
        LatentInterval { lower: self.lower[c], upper: self.upper[c] }
    }
}

/// Latent matrix of one environment. Observed (Gaussian) data carry no
/// intervals and are never resampled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentGaussianState {
    n: usize,
    p: usize,
    z: Vec<f64>,
    intervals: Option<LatentIntervals>,
}

impl LatentGaussianState {
    /// Starts every cell at the probit of its probability-space midpoint.
    pub fn censored(intervals: LatentIntervals) -> Self {
        let z =
            intervals.lower.iter().zip(&intervals.upper).map(|(&lo, &hi)| initial_value(LatentInterval { lower: lo, upper: hi })).collect();
        LatentGaussianState { n: intervals.n, p: intervals.p, z, intervals: Some(intervals) }
    }

    pub fn observed(data: &DMatrix<f64>) -> Result<Self> {
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("observations must be finite".into()));
        }
        let (n, p) = data.shape();
        Ok(LatentGaussianState { n, p, z: row_major(data), intervals: None })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn is_observed(&self) -> bool {
        self.intervals.is_none()
    }

    pub fn intervals(&self) -> Option<&LatentIntervals> {
        self.intervals.as_ref()
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.z[i * self.p + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.z[i * self.p..(i + 1) * self.p]
    }

    pub fn z(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.p, &self.z)
    }

    /// `zᵀz`.
    pub fn scatter(&self) -> DMatrix<f64> {
        let z = self.z();
        z.tr_mul(&z)
    }

    /// Replaces the latent values after checking containment.
    pub fn set_z(&mut self, z: &DMatrix<f64>) -> Result<()> {
        if z.shape() != (self.n, self.p) {
            return Err(Error::Dimension("latent matrix shape changed".into()));
        }
        let flat = row_major(z);
        if let Some(iv) = &self.intervals {
            for (c, &v) in flat.iter().enumerate() {
                if !(iv.lower[c] < v && v <= iv.upper[c]) {
                    return Err(Error::Domain(format!("latent value {v} outside its interval at cell {c}")));
                }
            }
        }
        self.z = flat;
        Ok(())
    }

    /// True when every cell lies in its interval.
    pub fn is_consistent(&self) -> bool {
        match &self.intervals {
            None => true,
            Some(iv) => self.z.iter().enumerate().all(|(c, &v)| iv.lower[c] < v && v <= iv.upper[c]),
        }
    }
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    let (n, p) = m.shape();
    (0..n).flat_map(|i| (0..p).map(move |j| (i, j))).map(|ij| m[ij]).collect()
}

fn initial_value(iv: LatentInterval) -> f64 {
    let lo = if iv.lower == f64::NEG_INFINITY { INIT_TAIL } else { normal::cdf(iv.lower) };
    let hi = if iv.upper == f64::INFINITY { 1.0 - INIT_TAIL } else { normal::cdf(iv.upper) };
    let z = normal::probit(0.5 * (lo + hi));
    if iv.contains(z) {
        return z;
    }
    match (iv.lower.is_finite(), iv.upper.is_finite()) {
        (true, true) => {
            let mid = 0.5 * (iv.lower + iv.upper);
            if iv.contains(mid) {
                mid
            } else {
                iv.upper
            }
        }
        (true, false) => iv.lower + 1.0,
        (false, true) => iv.upper - 1.0,
        (false, false) => 0.0,
    }
}

/// Mean and variance of `z_j` given the rest of the row under `N(0, omega^-1)`.
pub fn conditional_moments(omega: &PrecisionMatrix, z_row: &[f64], j: usize) -> Result<(f64, f64)> {
    let m = omega.as_matrix();
    if z_row.len() != m.nrows() || j >= z_row.len() {
        return Err(Error::Dimension(format!("row of length {} against {}×{} precision", z_row.len(), m.nrows(), m.ncols())));
    }
    let wjj = m[(j, j)];
    if !(wjj > 0.0) {
        return Err(Error::NotPositiveDefinite(format!("diagonal entry {j} is {wjj}")));
    }
    let s: f64 = (0..z_row.len()).filter(|&l| l != j).map(|l| m[(j, l)] * z_row[l]).sum();
    Ok((-s / wjj, 1.0 / wjj))
}

/// One sweep over every cell: rows in parallel, coordinates ascending within
/// a row. Row `i` draws from `key.child(i)`.
pub fn gibbs_update_z(state: &mut LatentGaussianState, omega: &PrecisionMatrix, key: StreamKey) -> Result<()> {
    let p = state.p;
    if omega.p() != p {
        return Err(Error::Dimension(format!("{p} latent columns against a {}×{} precision", omega.p(), omega.p())));
    }
    let Some(iv) = &state.intervals else {
        return Ok(());
    };
    let m = omega.as_matrix();
    let w: Vec<f64> = (0..p).flat_map(|j| (0..p).map(move |l| (j, l))).map(|jl| m[jl]).collect();
    if let Some(j) = (0..p).find(|&j| !(w[j * p + j] > 0.0)) {
        return Err(Error::NotPositiveDefinite(format!("diagonal entry {j} is {}", w[j * p + j])));
    }
    state.z.par_chunks_mut(p.max(1)).enumerate().for_each(|(i, row)| {
        let mut rng = key.child(i as u64).rng();
        for j in 0..p {
            let wj = &w[j * p..(j + 1) * p];
            let wjj = wj[j];
            let s: f64 = wj.iter().zip(row.iter()).map(|(a, b)| a * b).sum::<f64>() - wjj * row[j];
            let c = i * p + j;
            row[j] = truncnorm::sample(&mut rng, -s / wjj, (1.0 / wjj).sqrt(), iv.lower[c], iv.upper[c]);
        }
    });
    Ok(())
}

/// Magic bytes of the latent dump format.
pub const DUMP_MAGIC: [u8; 4] = *b"RGMZ";

/// Writes `z` as a 16-byte header (magic, `n` u32 LE, `p` u32 LE, dtype u32
/// LE where 1 = f64) followed by row-major little-endian f64 values.
pub fn write_z_dump(path: &Path, z: &DMatrix<f64>) -> Result<()> {
    let (n, p) = z.shape();
    let dim = |v: usize| u32::try_from(v).map_err(|_| Error::Dimension(format!("{v} does not fit the dump header")));
    let mut buf = Vec::with_capacity(16 + 8 * n * p);
    buf.extend_from_slice(&DUMP_MAGIC);
    buf.extend_from_slice(&dim(n)?.to_le_bytes());
    buf.extend_from_slice(&dim(p)?.to_le_bytes());
    buf.extend_from_slice(&1u32.to_le_bytes());
    for v in row_major(z) {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    std::fs::File::create(path)?.write_all(&buf)?;
    Ok(())
}

pub fn read_z_dump(path: &Path) -> Result<DMatrix<f64>> {
    let mut buf = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut buf)?;
    if buf.len() < 16 || buf[..4] != DUMP_MAGIC {
        return Err(Error::parse(path, "not a latent dump"));
    }
    let word = |o: usize| u32::from_le_bytes(buf[o..o + 4].try_into().expect("4-byte slice")) as usize;
    let (n, p, dtype) = (word(4), word(8), word(12));
    if dtype != 1 {
        return Err(Error::parse(path, format!("unsupported dtype {dtype}")));
    }
    if buf.len() != 16 + 8 * n * p {
        return Err(Error::parse(path, format!("expected {} value bytes, found {}", 8 * n * p, buf.len() - 16)));
    }
    let vals: Vec<f64> = buf[16..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk"))).collect();
    Ok(DMatrix::from_row_slice(n, p, &vals))
}
