//! Multi-environment datasets: on-disk layout, validation, taxonomy edge
//! covariates and the pooled count-regression design.
//!
//! A dataset directory holds
//!
//! - `dataset.toml`: `kind` (`counts` or `gaussian`) and the ordered
//!   `[[environments]]` entries (`label`, `file`);
//! - one TSV per environment: header `sample_id` then OTU ids, one row per
//!   sample;
//! - optionally `metadata.tsv` (`sample_id`, `environment`, `library_size`),
//!   `taxonomy.tsv` (`otu_id` then the six taxonomy levels) and
//!   `edge_covariates.tsv` (`otu_a`, `otu_b`, then one column per covariate).

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::copula::{LatentGaussianState, LatentIntervals};
use crate::error::{Error, Result};
use crate::graph::{pair_count, pair_index, pairs};
use crate::io::{file_stem, parse_err, parse_f64, read_table, write_table, LabeledMatrix, Table};
use crate::marginals::{fit_marginal_mh, gmpr_size_factors, DwRegression, MhConfig, NodeCovariates};
use crate::random_graph::EdgeCovariates;
use crate::sampler::ModelData;

pub const MIN_SAMPLES: usize = 10;
pub const TAXONOMY_LEVELS: [&str; 6] = ["phylum", "class", "order", "family", "genus", "species"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataKind {
    Counts,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentData {
    pub label: String,
    pub sample_ids: Vec<String>,
    /// Samples × OTUs.
    pub values: DMatrix<f64>,
    pub library_size: Option<Vec<f64>>,
}

impl EnvironmentData {
    pub fn new(label: impl Into<String>, sample_ids: Vec<String>, values: DMatrix<f64>) -> Result<Self> {
        if sample_ids.len() != values.nrows() {
            return Err(Error::Dimension(format!("{} sample ids for {} rows", sample_ids.len(), values.nrows())));
        }
        Ok(EnvironmentData { label: label.into(), sample_ids, values, library_size: None })
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    fn select_samples(&self, keep: &[usize]) -> Self {
        EnvironmentData {
            label: self.label.clone(),
            sample_ids: keep.iter().map(|&i| self.sample_ids[i].clone()).collect(),
            values: self.values.select_rows(keep),
            library_size: self.library_size.as_ref().map(|l| keep.iter().map(|&i| l[i]).collect()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaxonomyTable {
    pub otu_ids: Vec<String>,
    /// One entry per OTU, levels in [`TAXONOMY_LEVELS`] order; empty means unknown.
    pub levels: Vec<[String; 6]>,
}

impl TaxonomyTable {
    pub fn new(otu_ids: Vec<String>, levels: Vec<[String; 6]>) -> Result<Self> {
        if otu_ids.len() != levels.len() {
            return Err(Error::Dimension(format!("{} OTU ids for {} taxonomy rows", otu_ids.len(), levels.len())));
        }
        let unique: HashSet<&String> = otu_ids.iter().collect();
        if unique.len() != otu_ids.len() {
            return Err(Error::Validation("taxonomy lists an OTU more than once".into()));
        }
        Ok(TaxonomyTable { otu_ids, levels })
    }

    /// Rows rearranged to follow `ids`.
    pub fn reorder(&self, ids: &[String]) -> Result<Self> {
        let index: HashMap<&String, usize> = self.otu_ids.iter().enumerate().map(|(i, id)| (id, i)).collect();
        let levels = ids
            .iter()
            .map(|id| {
                index.get(id).map(|&i| self.levels[i].clone()).ok_or_else(|| Error::Validation(format!("OTU `{id}` has no taxonomy row")))
            })
            .collect::<Result<Vec<_>>>()?;
        TaxonomyTable::new(ids.to_vec(), levels)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let table = read_table(path)?;
        let mut cols = Vec::new();
        for name in std::iter::once("otu_id").chain(TAXONOMY_LEVELS) {
            cols.push(table.column(name).ok_or_else(|| parse_err(path, format!("missing column `{name}`")))?);
        }
        let mut ids = Vec::new();
        let mut levels = Vec::new();
        for row in &table.rows {
            ids.push(row[cols[0]].clone());
            levels.push(std::array::from_fn(|l| row[cols[l + 1]].trim().to_owned()));
        }
        TaxonomyTable::new(ids, levels)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let header = std::iter::once("otu_id").chain(TAXONOMY_LEVELS).map(str::to_owned).collect();
        let rows =
            self.otu_ids.iter().zip(&self.levels).map(|(id, lv)| std::iter::once(id.clone()).chain(lv.iter().cloned()).collect()).collect();
        write_table(path, &Table { header, rows })
    }
}

/// Six same-level indicators per pair; an empty level never matches.
pub fn taxonomy_edge_covariates(tax: &TaxonomyTable) -> Result<EdgeCovariates> {
    let p = tax.otu_ids.len();
    let names = TAXONOMY_LEVELS.iter().map(|s| s.to_string()).collect();
    EdgeCovariates::from_fn(p, names, |i, j| {
        (0..6)
            .map(|l| {
                let (a, b) = (&tax.levels[i][l], &tax.levels[j][l]);
                f64::from(u8::from(!a.is_empty() && a == b))
            })
            .collect()
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub kind: DataKind,
    pub otu_ids: Vec<String>,
    pub environments: Vec<EnvironmentData>,
    pub taxonomy: Option<TaxonomyTable>,
    pub edge_covariates: Option<EdgeCovariates>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    kind: DataKind,
    environments: Vec<ManifestEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestEntry {
    label: String,
    file: String,
}

impl Dataset {
    pub fn new(kind: DataKind, otu_ids: Vec<String>, environments: Vec<EnvironmentData>) -> Result<Self> {
        let ds = Dataset { kind, otu_ids, environments, taxonomy: None, edge_covariates: None };
        ds.check_structure()?;
        Ok(ds)
    }

    pub fn p(&self) -> usize {
        self.otu_ids.len()
    }

    pub fn labels(&self) -> Vec<String> {
        self.environments.iter().map(|e| e.label.clone()).collect()
    }

    /// Structural invariants: shared OTU columns, unique labels and sample
    /// ids, at least [`MIN_SAMPLES`] samples per environment.
    pub fn check_structure(&self) -> Result<()> {
        let p = self.p();
        if self.environments.is_empty() {
            return Err(Error::Validation("dataset has no environments".into()));
        }
        if p < 2 {
            return Err(Error::Validation("dataset needs at least two OTUs".into()));
        }
        if self.otu_ids.iter().collect::<HashSet<_>>().len() != p {
            return Err(Error::Validation("OTU ids must be unique".into()));
        }
        let mut labels = HashSet::new();
        let mut samples = HashSet::new();
        for env in &self.environments {
            if !labels.insert(&env.label) {
                return Err(Error::Validation(format!("environment `{}` appears twice", env.label)));
            }
            if env.values.ncols() != p {
                return Err(Error::Dimension(format!("environment `{}` has {} columns for {p} OTUs", env.label, env.values.ncols())));
            }
            if env.n() < MIN_SAMPLES {
                return Err(Error::Validation(format!(
                    "environment `{}` has {} samples; at least {MIN_SAMPLES} are required",
                    env.label,
                    env.n()
                )));
            }
            if env.library_size.as_ref().is_some_and(|l| l.len() != env.n()) {
                return Err(Error::Dimension(format!("environment `{}` library sizes do not match its samples", env.label)));
            }
            for s in &env.sample_ids {
                if !samples.insert(s) {
                    return Err(Error::Validation(format!("sample id `{s}` appears twice")));
                }
            }
        }
        if let Some(t) = &self.taxonomy {
            if t.otu_ids != self.otu_ids {
                return Err(Error::Validation("taxonomy rows must follow the dataset's OTU order".into()));
            }
        }
        if let Some(w) = &self.edge_covariates {
            if w.p() != p {
                return Err(Error::Dimension(format!("edge covariates cover {} nodes, dataset has {p}", w.p())));
            }
        }
        Ok(())
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut entries = Vec::new();
        for (k, env) in self.environments.iter().enumerate() {
            let file = format!("{:02}_{}.tsv", k + 1, file_stem(&env.label));
            LabeledMatrix::new("sample_id", env.sample_ids.clone(), self.otu_ids.clone(), env.values.clone())?.write(&dir.join(&file))?;
            entries.push(ManifestEntry { label: env.label.clone(), file });
        }
        let manifest = Manifest { kind: self.kind, environments: entries };
        let text = toml::to_string(&manifest).map_err(|e| Error::Config(e.to_string()))?;
        fs::write(dir.join("dataset.toml"), text)?;

        if self.environments.iter().any(|e| e.library_size.is_some()) {
            let header = ["sample_id", "environment", "library_size"].map(str::to_owned).to_vec();
            let mut rows = Vec::new();
            for env in &self.environments {
                for (i, s) in env.sample_ids.iter().enumerate() {
                    let lib = env.library_size.as_ref().map(|l| l[i].to_string()).unwrap_or_default();
                    rows.push(vec![s.clone(), env.label.clone(), lib]);
                }
            }
            write_table(&dir.join("metadata.tsv"), &Table { header, rows })?;
        }
        if let Some(t) = &self.taxonomy {
            t.write(&dir.join("taxonomy.tsv"))?;
        }
        if let Some(w) = &self.edge_covariates {
            write_edge_covariates(&dir.join("edge_covariates.tsv"), &self.otu_ids, w)?;
        }
        Ok(())
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let manifest_path = dir.join("dataset.toml");
        let text = fs::read_to_string(&manifest_path).map_err(|e| parse_err(&manifest_path, e.to_string()))?;
        let manifest: Manifest = toml::from_str(&text).map_err(|e| parse_err(&manifest_path, e.to_string()))?;
        let mut otu_ids: Option<Vec<String>> = None;
        let mut environments = Vec::new();
        for entry in &manifest.environments {
            let path = dir.join(&entry.file);
            let m = LabeledMatrix::read(&path)?;
            match &otu_ids {
                None => otu_ids = Some(m.col_ids.clone()),
                Some(ids) if *ids != m.col_ids => {
                    return Err(Error::Dimension(format!("{}: OTU columns differ from the first environment's", path.display())))
                }
                Some(_) => {}
            }
            environments.push(EnvironmentData::new(entry.label.clone(), m.row_ids, m.values)?);
        }
        let otu_ids = otu_ids.ok_or_else(|| parse_err(&manifest_path, "no environments listed"))?;

        let meta = dir.join("metadata.tsv");
        if meta.exists() {
            read_library_sizes(&meta, &mut environments)?;
        }
        let mut ds = Dataset { kind: manifest.kind, otu_ids, environments, taxonomy: None, edge_covariates: None };
        let tax = dir.join("taxonomy.tsv");
        if tax.exists() {
            ds.taxonomy = Some(TaxonomyTable::read(&tax)?.reorder(&ds.otu_ids)?);
        }
        let w = dir.join("edge_covariates.tsv");
        if w.exists() {
            ds.edge_covariates = Some(read_edge_covariates(&w, &ds.otu_ids)?);
        }
        ds.check_structure()?;
        Ok(ds)
    }

    /// Edge covariates in effect: explicit ones, else taxonomy-derived, else none.
    pub fn effective_edge_covariates(&self) -> Result<EdgeCovariates> {
        match (&self.edge_covariates, &self.taxonomy) {
            (Some(w), _) => Ok(w.clone()),
            (None, Some(t)) => taxonomy_edge_covariates(t),
            (None, None) => Ok(EdgeCovariates::none(self.p())),
        }
    }

    /// Drops the samples and OTUs flagged in `report`.
    pub fn apply_filters(&self, report: &ValidationReport) -> Result<Self> {
        let drop_samples: HashSet<&str> = report.low_read_samples.iter().map(|s| s.sample_id.as_str()).collect();
        let drop_otus: HashSet<&str> = report.low_variation_otus.iter().map(|o| o.otu_id.as_str()).collect();
        let keep_cols: Vec<usize> = (0..self.p()).filter(|&j| !drop_otus.contains(self.otu_ids[j].as_str())).collect();
        let environments = self
            .environments
            .iter()
            .map(|env| {
                let keep: Vec<usize> = (0..env.n()).filter(|&i| !drop_samples.contains(env.sample_ids[i].as_str())).collect();
                let mut e = env.select_samples(&keep);
                e.values = e.values.select_columns(&keep_cols);
                e
            })
            .collect();
        let otu_ids: Vec<String> = keep_cols.iter().map(|&j| self.otu_ids[j].clone()).collect();
        let mut ds = Dataset {
            kind: self.kind,
            otu_ids: otu_ids.clone(),
            environments,
            taxonomy: self.taxonomy.as_ref().map(|t| t.reorder(&otu_ids)).transpose()?,
            edge_covariates: None,
        };
        if let Some(w) = &self.edge_covariates {
            ds.edge_covariates =
                Some(EdgeCovariates::from_fn(otu_ids.len(), w.names().to_vec(), |i, j| w.get(keep_cols[i], keep_cols[j]).to_vec())?);
        }
        ds.check_structure()?;
        Ok(ds)
    }

    /// Latent states and edge covariates for the structural sampler. Count
    /// data needs fitted marginals; Gaussian data is used as observed.
    pub fn model_data(&self, marginals: Option<&MarginalSet>) -> Result<ModelData> {
        self.check_structure()?;
        let latent = match (self.kind, marginals) {
            (DataKind::Gaussian, _) => {
                self.environments.iter().map(|e| LatentGaussianState::observed(&e.values)).collect::<Result<Vec<_>>>()?
            }
            (DataKind::Counts, None) => {
                return Err(Error::Config("count data needs fitted marginals (run fit-marginals first)".into()));
            }
            (DataKind::Counts, Some(set)) => {
                if set.otu_ids != self.otu_ids {
                    return Err(Error::Validation("marginal fits do not match the dataset's OTUs".into()));
                }
                let design = CountDesign::build(self, &set.reference)?;
                if design.covariates.names() != set.design_names.as_slice() {
                    return Err(Error::Validation("marginal fits were made with a different design".into()));
                }
                let regs: Vec<DwRegression> = set.fits.iter().map(|f| f.regression.clone()).collect();
                self.environments
                    .iter()
                    .enumerate()
                    .map(|(k, env)| {
                        let x = design.covariates.select_rows(&design.rows[k]);
                        Ok(LatentGaussianState::censored(LatentIntervals::from_counts(&env.values, &regs, &x)?))
                    })
                    .collect::<Result<Vec<_>>>()?
            }
        };
        ModelData::new(self.labels(), self.otu_ids.clone(), latent, self.effective_edge_covariates()?)
    }
}

fn read_library_sizes(path: &Path, environments: &mut [EnvironmentData]) -> Result<()> {
    let table = read_table(path)?;
    let sid = table.column("sample_id").ok_or_else(|| parse_err(path, "missing column `sample_id`"))?;
    let Some(lib) = table.column("library_size") else {
        return Ok(());
    };
    let mut sizes = HashMap::new();
    for row in &table.rows {
        if !row[lib].trim().is_empty() {
            sizes.insert(row[sid].clone(), parse_f64(path, &row[lib], "library_size")?);
        }
    }
    for env in environments {
        let found: Vec<Option<f64>> = env.sample_ids.iter().map(|s| sizes.get(s).copied()).collect();
        if found.iter().all(Option::is_some) {
            env.library_size = Some(found.into_iter().flatten().collect());
        } else if found.iter().any(Option::is_some) {
            return Err(parse_err(path, format!("environment `{}` has library sizes for only some samples", env.label)));
        }
    }
    Ok(())
}

fn write_edge_covariates(path: &Path, otu_ids: &[String], w: &EdgeCovariates) -> Result<()> {
    let mut header = vec!["otu_a".to_owned(), "otu_b".to_owned()];
    header.extend(w.names().iter().cloned());
    let rows = pairs(otu_ids.len())
        .map(|(i, j)| {
            let mut row = vec![otu_ids[i].clone(), otu_ids[j].clone()];
            row.extend(w.get(i, j).iter().map(|v| v.to_string()));
            row
        })
        .collect();
    write_table(path, &Table { header, rows })
}

fn read_edge_covariates(path: &Path, otu_ids: &[String]) -> Result<EdgeCovariates> {
    let table = read_table(path)?;
    if table.header.len() < 2 || table.header[0] != "otu_a" || table.header[1] != "otu_b" {
        return Err(parse_err(path, "header must start with `otu_a`, `otu_b`"));
    }
    let p = otu_ids.len();
    let d = table.header.len() - 2;
    let index: HashMap<&String, usize> = otu_ids.iter().enumerate().map(|(i, id)| (id, i)).collect();
    let mut values = DMatrix::from_element(pair_count(p), d, f64::NAN);
    for row in &table.rows {
        let (Some(&a), Some(&b)) = (index.get(&row[0]), index.get(&row[1])) else {
            return Err(parse_err(path, format!("unknown OTU pair `{}`, `{}`", row[0], row[1])));
        };
        if a == b {
            return Err(parse_err(path, format!("self pair `{}`", row[0])));
        }
        let e = pair_index(a.min(b), a.max(b), p);
        for c in 0..d {
            values[(e, c)] = parse_f64(path, &row[c + 2], &table.header[c + 2])?;
        }
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(parse_err(path, "every OTU pair needs a row"));
    }
    EdgeCovariates::new(p, table.header[2..].to_vec(), &values)
}

/// Filters applied by [`validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ValidationConfig {
    pub min_reads: f64,
    pub min_distinct: usize,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        ValidationConfig { min_reads: 500.0, min_distinct: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowReadSample {
    pub environment: String,
    pub sample_id: String,
    pub reads: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowVariationOtu {
    pub otu_id: String,
    pub environment: String,
    pub distinct_values: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub low_read_samples: Vec<LowReadSample>,
    pub low_variation_otus: Vec<LowVariationOtu>,
    pub problems: Vec<String>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.low_read_samples.is_empty() && self.low_variation_otus.is_empty() && self.problems.is_empty()
    }
}

/// Flags samples below the read threshold (counts only), OTUs with fewer
/// than `min_distinct` distinct values in some environment (after the read
/// filter), and malformed observations.
pub fn validate(ds: &Dataset, cfg: &ValidationConfig) -> ValidationReport {
    let mut report = ValidationReport::default();
    if let Err(e) = ds.check_structure() {
        report.problems.push(e.to_string());
    }
    for env in &ds.environments {
        if env.values.ncols() != ds.p() {
            continue;
        }
        let mut keep = Vec::new();
        for i in 0..env.n() {
            let row = env.values.row(i);
            if row.iter().any(|v| !v.is_finite()) {
                report.problems.push(format!("sample `{}` has non-finite values", env.sample_ids[i]));
            }
            if ds.kind == DataKind::Counts {
                if row.iter().any(|&v| v < 0.0 || v.fract() != 0.0) {
                    report.problems.push(format!("sample `{}` has values that are not counts", env.sample_ids[i]));
                }
                let reads: f64 = row.iter().sum();
                if reads < cfg.min_reads {
                    report.low_read_samples.push(LowReadSample {
                        environment: env.label.clone(),
                        sample_id: env.sample_ids[i].clone(),
                        reads,
                    });
                    continue;
                }
            }
            keep.push(i);
        }
        for (j, otu) in ds.otu_ids.iter().enumerate() {
            let distinct: HashSet<u64> = keep.iter().map(|&i| env.values[(i, j)].to_bits()).collect();
            if distinct.len() < cfg.min_distinct {
                report.low_variation_otus.push(LowVariationOtu {
                    otu_id: otu.clone(),
                    environment: env.label.clone(),
                    distinct_values: distinct.len(),
                });
            }
        }
    }
    report
}

/// Pooled design for the count marginals: intercept, centred log size
/// factor `L`, one dummy per non-reference environment and its `L`
/// interaction.
#[derive(Debug, Clone, PartialEq)]
pub struct CountDesign {
    pub covariates: NodeCovariates,
    /// Pooled row indices of each environment.
    pub rows: Vec<Vec<usize>>,
}

impl CountDesign {
    pub fn build(ds: &Dataset, reference: &str) -> Result<Self> {
        let labels = ds.labels();
        let reference_index = labels
            .iter()
            .position(|l| l == reference)
            .ok_or_else(|| Error::Config(format!("reference environment `{reference}` is not in the dataset")))?;
        let n: usize = ds.environments.iter().map(EnvironmentData::n).sum();
        let mut log_size = Vec::with_capacity(n);
        if ds.environments.iter().all(|e| e.library_size.is_some()) {
            for env in &ds.environments {
                for &s in env.library_size.as_ref().expect("checked above") {
                    if !(s > 0.0 && s.is_finite()) {
                        return Err(Error::Domain(format!("library size {s} is not positive")));
                    }
                    log_size.push(s.ln());
                }
            }
        } else {
            let mut pooled = DMatrix::zeros(n, ds.p());
            let mut r = 0;
            for env in &ds.environments {
                pooled.rows_mut(r, env.n()).copy_from(&env.values);
                r += env.n();
            }
            log_size.extend(gmpr_size_factors(&pooled)?.into_iter().map(f64::ln));
        }
        let centre = log_size.iter().sum::<f64>() / n as f64;
        for l in &mut log_size {
            *l -= centre;
        }

        let others: Vec<usize> = (0..labels.len()).filter(|&k| k != reference_index).collect();
        let mut names = vec!["intercept".to_owned(), "log_size".to_owned()];
        names.extend(others.iter().map(|&k| format!("env[{}]", labels[k])));
        names.extend(others.iter().map(|&k| format!("env[{}]:log_size", labels[k])));
        let m = names.len();
        let mut design = DMatrix::zeros(n, m);
        let mut rows = Vec::new();
        let mut r = 0;
        for (k, env) in ds.environments.iter().enumerate() {
            rows.push((r..r + env.n()).collect());
            let slot = others.iter().position(|&o| o == k);
            for _ in 0..env.n() {
                design[(r, 0)] = 1.0;
                design[(r, 1)] = log_size[r];
                if let Some(s) = slot {
                    design[(r, 2 + s)] = 1.0;
                    design[(r, 2 + others.len() + s)] = log_size[r];
                }
                r += 1;
            }
        }
        Ok(CountDesign { covariates: NodeCovariates::new(names, design)?, rows })
    }

    pub fn pooled_counts(ds: &Dataset, j: usize) -> Vec<u64> {
        ds.environments.iter().flat_map(|e| e.values.column(j).iter().map(|&v| v as u64).collect::<Vec<_>>()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalSummary {
    pub otu_id: String,
    pub regression: DwRegression,
    pub sd_eta: Vec<f64>,
    pub sd_gamma: Vec<f64>,
    pub acceptance_rate: f64,
    pub warning: Option<String>,
}

/// Frozen per-OTU marginal fits, the input to count-mode structural fits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalSet {
    pub reference: String,
    pub design_names: Vec<String>,
    pub otu_ids: Vec<String>,
    pub fits: Vec<MarginalSummary>,
}

impl MarginalSet {
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("marginals.json"), serde_json::to_string_pretty(self)?)?;
        let mut header = vec!["otu_id".to_owned(), "acceptance_rate".to_owned()];
        for prefix in ["eta", "gamma"] {
            for n in &self.design_names {
                header.push(format!("{prefix}[{n}]"));
            }
        }
        let rows = self
            .fits
            .iter()
            .map(|f| {
                let mut row = vec![f.otu_id.clone(), f.acceptance_rate.to_string()];
                row.extend(f.regression.eta.iter().chain(&f.regression.gamma).map(|v| v.to_string()));
                row
            })
            .collect();
        write_table(&dir.join("marginals.tsv"), &Table { header, rows })
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join("marginals.json");
        let text = fs::read_to_string(&path).map_err(|e| parse_err(&path, e.to_string()))?;
        serde_json::from_str(&text).map_err(|e| parse_err(&path, e.to_string()))
    }
}

/// Fits every OTU's discrete Weibull regression on the pooled design, in
/// parallel over OTUs.
pub fn fit_marginals(ds: &Dataset, reference: Option<&str>, cfg: &MhConfig) -> Result<MarginalSet> {
    if ds.kind != DataKind::Counts {
        return Err(Error::Config("marginal fits apply to count data only".into()));
    }
    let reference = reference.map(str::to_owned).unwrap_or_else(|| ds.environments[0].label.clone());
    let design = CountDesign::build(ds, &reference)?;
    let fits = (0..ds.p())
        .into_par_iter()
        .map(|j| {
            let counts = CountDesign::pooled_counts(ds, j);
            let fit = fit_marginal_mh(j, &counts, &design.covariates, cfg)?;
            if let Some(w) = &fit.warning {
                log::warn!("OTU `{}`: {w}", ds.otu_ids[j]);
            }
            Ok(MarginalSummary {
                otu_id: ds.otu_ids[j].clone(),
                regression: fit.posterior_mean,
                sd_eta: fit.posterior_sd_eta,
                sd_gamma: fit.posterior_sd_gamma,
                acceptance_rate: fit.acceptance_rate,
                warning: fit.warning,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MarginalSet { reference, design_names: design.covariates.names().to_vec(), otu_ids: ds.otu_ids.clone(), fits })
}
