//! The run configuration file.
//!
//! A TOML document with optional sections:
//!
//! ```toml
//! [simulation]        # SimConfig fields: n, p, b, alpha_mean, ...
//! p = 20
//!
//! [mcmc]              # McmcConfig fields; `preset` picks the base values
//! preset = "simulation"
//! structural_iterations = 5000
//! retention = { fraction = 0.25 }   # or { last = 7500 }
//!
//! [marginals]         # MhConfig fields: iterations, proposal_sd, ...
//! iterations = 50000
//!
//! [data]
//! reference = "Stool" # reference environment of the count design
//! min_reads = 500
//! min_distinct = 3
//! filter = true       # drop flagged samples and OTUs before fitting
//! ```
//!
//! Unknown keys are rejected so typos surface immediately.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::ValidationConfig;
use crate::error::{Error, Result};
use crate::marginals::MhConfig;
use crate::sampler::McmcConfig;
use crate::sim::SimConfig;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub reference: Option<String>,
    #[serde(flatten)]
    pub validation: ValidationConfig,
    pub filter: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunConfig {
    pub simulation: SimConfig,
    pub mcmc: McmcConfig,
    pub marginals: MhConfig,
    pub data: DataConfig,
}

const SECTIONS: [&str; 4] = ["simulation", "mcmc", "marginals", "data"];

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut doc: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        if let Some(key) = doc.keys().find(|k| !SECTIONS.contains(&k.as_str())) {
            return Err(Error::Config(format!("unknown section `{key}`")));
        }
        let section = |doc: &mut toml::Table, name: &str| -> Result<toml::Table> {
            match doc.remove(name) {
                None => Ok(toml::Table::new()),
                Some(toml::Value::Table(t)) => Ok(t),
                Some(_) => Err(Error::Config(format!("`{name}` must be a table"))),
            }
        };

        let mut mcmc_tab = section(&mut doc, "mcmc")?;
        let base = match mcmc_tab.remove("preset") {
            None => McmcConfig::default(),
            Some(toml::Value::String(name)) => McmcConfig::preset(&name)?,
            Some(_) => return Err(Error::Config("`mcmc.preset` must be a string".into())),
        };
        let mcmc = overlay(base, mcmc_tab, "mcmc")?;
        let simulation = overlay(SimConfig::default(), section(&mut doc, "simulation")?, "simulation")?;
        let marginals = overlay(MhConfig::default(), section(&mut doc, "marginals")?, "marginals")?;
        let data: DataConfig = toml::Value::Table(section(&mut doc, "data")?)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(format!("[data]: {e}")))?;

        mcmc.validate()?;
        marginals.validate()?;
        simulation.validate()?;
        Ok(RunConfig { simulation, mcmc, marginals, data })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::parse(path, e.to_string()))?;
        RunConfig::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::parse(path, m),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }
}

/// `base` with the keys of `patch` replaced; rejects keys `base` lacks.
fn overlay<T: Serialize + for<'de> Deserialize<'de>>(base: T, patch: toml::Table, section: &str) -> Result<T> {
    let toml::Value::Table(mut merged) = toml::Value::try_from(&base).map_err(|e| Error::Config(e.to_string()))? else {
        return Err(Error::Config(format!("[{section}] does not serialise to a table")));
    };
    for (k, v) in patch {
        if !merged.contains_key(&k) && !optional_key(section, &k) {
            return Err(Error::Config(format!("unknown key `{section}.{k}`")));
        }
        merged.insert(k, v);
    }
    toml::Value::Table(merged).try_into().map_err(|e: toml::de::Error| Error::Config(format!("[{section}]: {e}")))
}

/// Keys whose default is `None` and so vanish from the serialised base.
fn optional_key(section: &str, key: &str) -> bool {
    matches!((section, key), ("mcmc", "er_sparsity"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::{Mode, Retention};

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn presets_and_overrides() {
        let c = RunConfig::parse(
            r#"
            [mcmc]
            preset = "real-data"
            seed = 9
            mode = "independent_er"
            er_sparsity = 0.07

            [simulation]
            p = 20
            b = 4
            n = 150

            [data]
            reference = "Stool"
            min_reads = 1000
            "#,
        )
        .unwrap();
        assert_eq!(c.mcmc.structural_iterations, 3_000_000);
        assert_eq!(c.mcmc.retention, Retention::Last(7500));
        assert_eq!(c.mcmc.seed, 9);
        assert_eq!(c.mcmc.mode, Mode::IndependentEr);
        assert_eq!(c.mcmc.er_sparsity, Some(0.07));
        assert_eq!((c.simulation.p, c.simulation.b, c.simulation.n), (20, 4, 150));
        assert_eq!(c.simulation.alpha_mean, -2.0);
        assert_eq!(c.data.reference.as_deref(), Some("Stool"));
        assert_eq!(c.data.validation.min_reads, 1000.0);
        assert_eq!(c.data.validation.min_distinct, 3);
    }

    #[test]
    fn retention_forms() {
        let c = RunConfig::parse("[mcmc]\nretention = { last = 100 }\n").unwrap();
        assert_eq!(c.mcmc.retention, Retention::Last(100));
        let c = RunConfig::parse("[mcmc]\nretention = { fraction = 0.5 }\n").unwrap();
        assert_eq!(c.mcmc.retention, Retention::Fraction(0.5));
    }

    #[test]
    fn rejects_typos_and_bad_values() {
        assert!(RunConfig::parse("[mcmc]\niteratons = 5\n").is_err());
        assert!(RunConfig::parse("[mcmcc]\n").is_err());
        assert!(RunConfig::parse("[data]\nreferense = \"x\"\n").is_err());
        assert!(RunConfig::parse("[mcmc]\npreset = \"fast\"\n").is_err());
        assert!(RunConfig::parse("[mcmc]\nretention = { fraction = 1.5 }\n").is_err());
    }

    #[test]
    fn round_trips_through_toml() {
        let mut c = RunConfig::default();
        c.mcmc.er_sparsity = Some(0.1);
        c.data.reference = Some("gut".into());
        assert_eq!(RunConfig::parse(&c.to_toml().unwrap()).unwrap(), c);
    }
}
