//! Files a run directory and a summary directory contain.

use std::path::Path;

use rgm::io::{file_stem, write_table, LabeledMatrix, Table};
use rgm::sampler::{NetworkStats, PosteriorSummary, RocCurve};
use rgm::{Error, Result};

const SUMMARY: &str = "summary.json";

/// Write to a sibling temporary file, then rename, so a crash never leaves a
/// truncated file behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn read_summary(run: &Path) -> Result<PosteriorSummary> {
    let path = run.join(SUMMARY);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::parse(&path, e.to_string()))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(&path, e.to_string()))
}

pub fn write_summary(run: &Path, s: &PosteriorSummary) -> Result<()> {
    write_atomic(&run.join(SUMMARY), &serde_json::to_vec_pretty(s)?)?;
    let ids = &s.node_names;
    for (k, label) in s.environments.iter().enumerate() {
        let stem = format!("{:02}_{}", k + 1, file_stem(label));
        LabeledMatrix::new("otu_id", ids.clone(), ids.clone(), s.edge_probabilities[k].clone())?
            .write(&run.join(format!("edge_probabilities_{stem}.tsv")))?;
        LabeledMatrix::new("otu_id", ids.clone(), ids.clone(), s.partial_correlations[k].clone())?
            .write(&run.join(format!("partial_correlations_{stem}.tsv")))?;
    }
    if let Some(trace) = &s.theta_trace {
        let mut header = vec!["iteration".to_owned()];
        header.extend(trace.names.iter().cloned());
        let rows = trace
            .iterations
            .iter()
            .zip(&trace.values)
            .map(|(t, v)| std::iter::once(t.to_string()).chain(v.iter().map(f64::to_string)).collect())
            .collect();
        write_table(&run.join("theta_trace.tsv"), &Table { header, rows })?;
    }
    if let Some(gram) = &s.gram_mean {
        LabeledMatrix::new("environment", s.environments.clone(), s.environments.clone(), gram.clone())?.write(&run.join("gram.tsv"))?;
    }
    if let Some(locs) = &s.aligned_locations {
        let rows = s.environments.iter().zip(locs).map(|(l, c)| vec![l.clone(), c[0].to_string(), c[1].to_string()]).collect();
        write_table(&run.join("locations.tsv"), &Table { header: vec!["environment".into(), "c1".into(), "c2".into()], rows })?;
    }
    Ok(())
}

pub fn write_stats(out: &Path, s: &PosteriorSummary, stats: &NetworkStats) -> Result<()> {
    std::fs::create_dir_all(out)?;
    let envs = &s.environments;
    LabeledMatrix::new("environment", envs.clone(), envs.clone(), stats.sharing.clone())?.write(&out.join("sharing.tsv"))?;
    LabeledMatrix::new("environment", envs.clone(), envs.clone(), stats.partial_correlation_agreement.clone())?
        .write(&out.join("pcor_agreement.tsv"))?;

    let rows = envs
        .iter()
        .enumerate()
        .map(|(k, l)| {
            vec![
                l.clone(),
                stats.sparsity[k].to_string(),
                stats.high_probability_edges[k].to_string(),
                s.indicator_variance[k].to_string(),
                s.bd_acceptance[k].to_string(),
            ]
        })
        .collect();
    let header = ["environment", "sparsity", "edges_above_threshold", "indicator_variance", "bd_acceptance"];
    write_table(&out.join("environments.tsv"), &Table { header: header.map(String::from).to_vec(), rows })?;

    let ids = &s.node_names;
    for (k, label) in envs.iter().enumerate() {
        let probs = &s.edge_probabilities[k];
        let pcor = &s.partial_correlations[k];
        let mut edges: Vec<(usize, usize)> = rgm::graph::pairs(ids.len()).filter(|&(i, j)| probs[(i, j)] > stats.threshold).collect();
        edges.sort_by(|a, b| probs[*b].total_cmp(&probs[*a]).then(a.cmp(b)));
        let rows = edges
            .into_iter()
            .map(|(i, j)| vec![ids[i].clone(), ids[j].clone(), probs[(i, j)].to_string(), pcor[(i, j)].to_string()])
            .collect();
        write_table(
            &out.join(format!("edges_{:02}_{}.tsv", k + 1, file_stem(label))),
            &Table { header: ["otu_a", "otu_b", "posterior_prob", "mean_partial_correlation"].map(String::from).to_vec(), rows },
        )?;
    }
    Ok(())
}

pub fn write_roc(path: &Path, curves: &[(String, RocCurve)]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let rows = curves.iter().flat_map(|(l, c)| c.points.iter().map(move |(f, t)| vec![l.clone(), f.to_string(), t.to_string()])).collect();
    write_table(path, &Table { header: ["environment", "fpr", "tpr"].map(String::from).to_vec(), rows })
}
