use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rgm::config::RunConfig;
use rgm::dataset::{fit_marginals, validate, DataKind, Dataset, MarginalSet};
use rgm::marginals::DwRegression;
use rgm::sampler::{Chain, ChainState, Mode};
use rgm::{Error, Result};

mod outputs;

#[derive(Parser)]
#[command(name = "rgm", version, about = "Joint Bayesian graphical models across related environments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a dataset and its ground truth.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Receives `data/` and `truth/`.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Emit counts through discrete Weibull marginals instead of Gaussian data.
        #[arg(long)]
        counts: bool,
        /// `q` of every node's marginal when simulating counts.
        #[arg(long, default_value_t = 0.9, requires = "counts")]
        dw_q: f64,
        /// Shape `b` of every node's marginal when simulating counts.
        #[arg(long, default_value_t = 0.8, requires = "counts")]
        dw_shape: f64,
    },
    /// Report low-read samples, low-variation OTUs and malformed input.
    Validate {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Fit the discrete Weibull marginals of a count dataset.
    FitMarginals {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Reference environment of the count design (default: the first).
        #[arg(long)]
        reference: Option<String>,
    },
    /// Run the structural sampler.
    Fit(FitArgs),
    /// Network statistics and plot-ready edge lists of a finished run.
    Summarize {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        edge_threshold: f64,
    },
    /// ROC curves of a run's edge probabilities against true graphs.
    Roc {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, conflicts_with = "gaussian", required_unless_present = "gaussian")]
    marginals: Option<PathBuf>,
    /// Use the observations directly as the latent Gaussian layer.
    #[arg(long)]
    gaussian: bool,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Continue from the run directory's checkpoint.
    #[arg(long)]
    resume: bool,
    /// Stop after this many iterations (the run can be resumed later).
    #[arg(long)]
    stop_after: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Edge probability of the independent baseline's prior.
    #[arg(long, conflicts_with = "match_sparsity")]
    er_sparsity: Option<f64>,
    /// Set the independent baseline's edge probability to the mean posterior
    /// sparsity of this finished run.
    #[arg(long)]
    match_sparsity: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Rgm,
    IndependentEr,
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    path.map(RunConfig::read).unwrap_or_else(|| Ok(RunConfig::default()))
}

struct CountMarginals {
    q: f64,
    shape: f64,
}

fn simulate(config: Option<&Path>, out: &Path, seed: Option<u64>, counts: Option<CountMarginals>) -> Result<()> {
    let mut cfg = load_config(config)?.simulation;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let (dataset, truth) = match counts {
        None => {
            let sim = rgm::sim::simulate(&cfg)?;
            (sim.dataset, sim.truth)
        }
        Some(m) => {
            let marginals = (0..cfg.p).map(|j| DwRegression::constant(j, m.q, m.shape)).collect::<Result<Vec<_>>>()?;
            let sim = rgm::sim::simulate_counts(&cfg, &marginals)?;
            (sim.dataset, sim.truth)
        }
    };
    dataset.write(&out.join("data"))?;
    truth.write(&out.join("truth"))?;
    let density: Vec<f64> = truth.graphs.iter().map(|g| g.density()).collect();
    log::info!("simulated {} environments on {} nodes; true densities {density:?}", cfg.b, cfg.p);
    Ok(())
}

fn validate_cmd(data: &Path, config: Option<&Path>) -> Result<()> {
    let cfg = load_config(config)?;
    let ds = Dataset::read(data)?;
    let report = validate(&ds, &cfg.data.validation);
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn fit_marginals_cmd(data: &Path, out: &Path, iterations: Option<usize>, config: Option<&Path>, reference: Option<&str>) -> Result<()> {
    let cfg = load_config(config)?;
    let mut mh = cfg.marginals.clone();
    if let Some(n) = iterations {
        mh.iterations = n;
    }
    let ds = prepared_dataset(data, &cfg)?;
    let reference = reference.or(cfg.data.reference.as_deref());
    let set = fit_marginals(&ds, reference, &mh)?;
    set.write(out)?;
    log::info!("fitted {} marginals against reference `{}`", set.fits.len(), set.reference);
    Ok(())
}

fn prepared_dataset(data: &Path, cfg: &RunConfig) -> Result<Dataset> {
    let ds = Dataset::read(data)?;
    if !cfg.data.filter {
        return Ok(ds);
    }
    let report = validate(&ds, &cfg.data.validation);
    if !report.problems.is_empty() {
        return Err(Error::Validation(report.problems.join("; ")));
    }
    log::info!(
        "filtering {} low-read samples and {} low-variation OTU flags",
        report.low_read_samples.len(),
        report.low_variation_otus.len()
    );
    ds.apply_filters(&report)
}

const CHECKPOINT: &str = "checkpoint.json";
const CONFIG_SNAPSHOT: &str = "config.toml";

fn fit_cmd(args: &FitArgs) -> Result<()> {
    let snapshot_path = args.out.join(CONFIG_SNAPSHOT);
    let mut cfg =
        if args.resume && snapshot_path.exists() { RunConfig::read(&snapshot_path)? } else { load_config(args.config.as_deref())? };
    if !args.resume {
        if let Some(m) = args.mode {
            cfg.mcmc.mode = match m {
                ModeArg::Rgm => Mode::Rgm,
                ModeArg::IndependentEr => Mode::IndependentEr,
            };
        }
        if let Some(n) = args.iterations {
            cfg.mcmc.structural_iterations = n;
        }
        if let Some(s) = args.seed {
            cfg.mcmc.seed = s;
        }
        if let Some(p) = args.er_sparsity {
            cfg.mcmc.er_sparsity = Some(p);
        }
        if let Some(run) = &args.match_sparsity {
            let reference = outputs::read_summary(run)?;
            let mean = reference.sparsity.iter().sum::<f64>() / reference.sparsity.len() as f64;
            log::info!("independent prior edge probability matched to {mean:.4}");
            cfg.mcmc.er_sparsity = Some(mean);
        }
        cfg.mcmc.validate()?;
    }

    let mut ds = prepared_dataset(&args.data, &cfg)?;
    if args.gaussian {
        ds.kind = DataKind::Gaussian;
    }
    let marginals = args.marginals.as_deref().map(MarginalSet::read).transpose()?;
    let data = ds.model_data(marginals.as_ref())?;

    std::fs::create_dir_all(&args.out)?;
    let checkpoint = args.out.join(CHECKPOINT);
    let mut chain = if args.resume {
        let text = std::fs::read_to_string(&checkpoint).map_err(|e| Error::parse(&checkpoint, e.to_string()))?;
        let state: ChainState = serde_json::from_str(&text).map_err(|e| Error::parse(&checkpoint, e.to_string()))?;
        log::info!("resuming at iteration {}", state.iteration);
        Chain::resume(&data, cfg.mcmc.clone(), state)?
    } else {
        std::fs::write(&snapshot_path, cfg.to_toml()?)?;
        Chain::new(&data, cfg.mcmc.clone())?
    };

    let total = cfg.mcmc.structural_iterations;
    chain.run(args.stop_after, |state| {
        outputs::write_atomic(&checkpoint, &serde_json::to_vec(state)?)?;
        log::info!("iteration {}/{total}", state.iteration);
        Ok(())
    })?;
    if !chain.is_finished() {
        log::info!("stopped at iteration {}; continue with --resume", chain.iteration());
        return Ok(());
    }
    let summary = chain.summary()?;
    outputs::write_summary(&args.out, &summary)?;
    for w in &summary.warnings {
        log::warn!("{w}");
    }
    Ok(())
}

fn summarize_cmd(run: &Path, out: &Path, threshold: f64) -> Result<()> {
    let summary = outputs::read_summary(run)?;
    let stats = rgm::sampler::summarize(&summary, threshold)?;
    outputs::write_stats(out, &summary, &stats)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&serde_json::json!({
            "threshold": threshold,
            "sparsity": stats.sparsity,
            "high_probability_edges": stats.high_probability_edges,
        }))?
    );
    Ok(())
}

fn roc_cmd(run: &Path, truth: &Path, out: &Path) -> Result<()> {
    let summary = outputs::read_summary(run)?;
    let truths = rgm::sim::GroundTruth::read_graphs(truth)?;
    let mut curves = Vec::new();
    for (label, ids, graph) in truths {
        let k = summary
            .environments
            .iter()
            .position(|e| *e == label)
            .ok_or_else(|| Error::Validation(format!("run has no environment `{label}`")))?;
        if ids != summary.node_names {
            return Err(Error::Validation(format!("true graph of `{label}` uses different node ids")));
        }
        curves.push((label, rgm::sampler::roc_curve(&summary.edge_probabilities[k], &graph)?));
    }
    outputs::write_roc(out, &curves)?;
    let aucs: serde_json::Map<String, serde_json::Value> = curves.iter().map(|(l, c)| (l.clone(), c.auc.into())).collect();
    let mean = curves.iter().map(|(_, c)| c.auc).sum::<f64>() / curves.len().max(1) as f64;
    println!("{}", serde_json::to_string_pretty(&serde_json::json!({ "auc": aucs, "mean_auc": mean }))?);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { config, out, seed, counts, dw_q, dw_shape } => {
            let marginals = counts.then_some(CountMarginals { q: dw_q, shape: dw_shape });
            simulate(config.as_deref(), &out, seed, marginals)
        }
        Command::Validate { data, config } => validate_cmd(&data, config.as_deref()),
        Command::FitMarginals { data, out, iterations, config, reference } => {
            fit_marginals_cmd(&data, &out, iterations, config.as_deref(), reference.as_deref())
        }
        Command::Fit(args) => fit_cmd(&args),
        Command::Summarize { run, out, edge_threshold } => summarize_cmd(&run, &out, edge_threshold),
        Command::Roc { run, truth, out } => roc_cmd(&run, &truth, &out),
    }
}

fn init_logging() {
    use std::io::Write;
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format(|buf, record| {
            let line = serde_json::json!({
                "level": record.level().to_string().to_lowercase(),
                "message": record.args().to_string(),
            });
            writeln!(buf, "{line}")
        })
        .init();
}

fn main() -> ExitCode {
    init_logging();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", serde_json::json!({ "category": e.category(), "message": e.to_string() }));
            ExitCode::FAILURE
        }
    }
}
