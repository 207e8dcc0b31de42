//! End-to-end acceptance checks, one PASS/FAIL line each.
//!
//! Runs as a plain binary so the report is always printed; exits non-zero if
//! any check fails.

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

use nalgebra::{DMatrix, Matrix2};
use rand::Rng;
use rgm::bdmcmc::GraphTally;
use rgm::copula::LatentGaussianState;
use rgm::graph::{pair_count, pairs, Graph, GraphEnsemble};
use rgm::gwishart::{partial_correlations, sample_gwishart, GWishartParams, PrecisionMatrix};
use rgm::marginals::{dw_cdf, dw_pmf, latent_interval, DwRegression};
use rgm::random_graph::{edge_probability, EdgeCovariates, RandomGraphParams};
use rgm::rng::StreamKey;
use rgm::sampler::{fit, roc_curve, summarize, Chain, ChainState, McmcConfig, Mode, ModelData, PosteriorSummary, Retention};
use rgm::sim::{simulate, simulate_given_theta, simulate_truth, SimConfig};
use rgm::truncnorm;
use statrs::function::gamma::ln_gamma;

// Pinned tolerances.
const MIN_MEAN_AUC: f64 = 0.85;
const MIN_PROBIT_CORRELATION: f64 = 0.8;
const GRAPH_POSTERIOR_TOLERANCE: f64 = 0.05;
const MOMENT_STANDARD_ERRORS: f64 = 3.0;
const PMF_NORMALISATION: f64 = 1e-10;
const EQUIVARIANCE: f64 = 1e-12;
const HALF_NORMAL_STANDARD_ERRORS: f64 = 4.0;

const SCALED_ITERATIONS: usize = 5000;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn non_degenerate(g: &Graph) -> bool {
    let e = g.edge_count();
    e > 0 && e < pair_count(g.p())
}

/// First seed from 1 whose true graphs all have both edges and non-edges, so
/// every ROC curve is defined. Only the truth is inspected.
fn scaled_seed() -> u64 {
    (1..)
        .find(|&seed| {
            let cfg = SimConfig { seed, ..SimConfig::scaled() };
            simulate_truth(&cfg).unwrap().graphs.iter().all(non_degenerate)
        })
        .unwrap()
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

struct ScaledRun {
    seed: u64,
    sim: rgm::sim::Simulation,
    data: ModelData,
    rgm: PosteriorSummary,
    seconds: f64,
}

fn scaled_run() -> ScaledRun {
    let seed = scaled_seed();
    let sim = simulate(&SimConfig { seed, ..SimConfig::scaled() }).unwrap();
    let data = sim.dataset.model_data(None).unwrap();
    let start = Instant::now();
    let cfg = McmcConfig { structural_iterations: SCALED_ITERATIONS, ..McmcConfig::simulation() };
    let rgm = fit(&data, &cfg).unwrap();
    ScaledRun { seed, sim, data, rgm, seconds: start.elapsed().as_secs_f64() }
}

fn recovery(run: &ScaledRun) -> Outcome {
    let aucs: Vec<f64> =
        run.sim.truth.graphs.iter().zip(&run.rgm.edge_probabilities).map(|(g, probs)| roc_curve(probs, g).unwrap().auc).collect();
    let m = mean(&aucs);
    outcome(
        m >= MIN_MEAN_AUC,
        format!(
            "seed {} (first with non-degenerate truth), {} iterations in {:.0}s: AUCs {:?}, mean {m:.3} (need >= {MIN_MEAN_AUC})",
            run.seed,
            SCALED_ITERATIONS,
            run.seconds,
            aucs.iter().map(|a| (a * 1000.0).round() / 1000.0).collect::<Vec<_>>()
        ),
    )
}

fn latent_space(run: &ScaledRun) -> Outcome {
    let truth = &run.sim.truth;
    let true_probs = truth.edge_probabilities().unwrap();
    let fitted = run.rgm.probit_probabilities(&truth.w, &truth.graphs).unwrap().unwrap();
    let p = truth.node_names.len();
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for (t, f) in true_probs.iter().zip(&fitted) {
        for (i, j) in pairs(p) {
            x.push(t[(i, j)]);
            y.push(f[(i, j)]);
        }
    }
    let r = pearson(&x, &y);
    outcome(
        r >= MIN_PROBIT_CORRELATION,
        format!("correlation of true and posterior-mean probit probabilities {r:.3} (need >= {MIN_PROBIT_CORRELATION})"),
    )
}

fn stability(run: &ScaledRun) -> Outcome {
    let matched = mean(&run.rgm.sparsity);
    let cfg = McmcConfig {
        structural_iterations: SCALED_ITERATIONS,
        mode: Mode::IndependentEr,
        er_sparsity: Some(matched),
        ..McmcConfig::simulation()
    };
    let er = fit(&run.data, &cfg).unwrap();
    let (v_rgm, v_er) = (mean(&run.rgm.indicator_variance), mean(&er.indicator_variance));
    outcome(
        v_rgm < v_er,
        format!(
            "mean edge-indicator variance rgm {v_rgm:.4} vs independent {v_er:.4} (prior edge probability matched to {matched:.4}); ratio {:.2}, difference {:.4}",
            v_rgm / v_er,
            v_er - v_rgm
        ),
    )
}

fn ln_mvgamma(a: usize, x: f64) -> f64 {
    (a * (a - 1)) as f64 / 4.0 * PI.ln() + (0..a).map(|i| ln_gamma(x - i as f64 / 2.0)).sum::<f64>()
}

/// Log normalising constant of a Wishart with `b` degrees-of-freedom offset
/// and scale `d` restricted to `set`.
fn ln_i_complete(set: &[usize], b: f64, d: &DMatrix<f64>) -> f64 {
    let a = set.len();
    let sub = DMatrix::from_fn(a, a, |r, c| d[(set[r], set[c])]);
    let nu = b + a as f64 - 1.0;
    nu * a as f64 / 2.0 * 2f64.ln() + ln_mvgamma(a, nu / 2.0) - nu / 2.0 * sub.determinant().ln()
}

/// Every graph on three nodes is decomposable: the normalising constant is the
/// clique product over the separator product.
fn ln_i_three(g: &Graph, b: f64, d: &DMatrix<f64>) -> f64 {
    let edges: Vec<(usize, usize)> = g.edge_list().collect();
    match edges.len() {
        0 => (0..3).map(|v| ln_i_complete(&[v], b, d)).sum(),
        1 => {
            let (i, j) = edges[0];
            ln_i_complete(&[i, j], b, d) + ln_i_complete(&[3 - i - j], b, d)
        }
        2 => {
            let hub = (0..3).find(|&v| edges.iter().all(|&(a, c)| a == v || c == v)).unwrap();
            edges.iter().map(|&(a, c)| ln_i_complete(&[a, c], b, d)).sum::<f64>() - ln_i_complete(&[hub], b, d)
        }
        _ => ln_i_complete(&[0, 1, 2], b, d),
    }
}

fn exactness() -> Outcome {
    const N: usize = 100;
    const SPARSITY: f64 = 0.3;
    let mut rng = StreamKey::new(42).rng();
    let chol = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.5, 1.0, 0.0, 0.0, 0.3, 1.0]);
    let z = DMatrix::from_fn(N, 3, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal)) * chol.transpose();

    let prior = GWishartParams::standard(3);
    let post = prior.posterior(&z).unwrap();
    let log_odds = (SPARSITY / (1.0 - SPARSITY)).ln();
    let graphs: Vec<Graph> = (0..8usize)
        .map(|mask| {
            let mut g = Graph::empty(3);
            (0..3).for_each(|e| g.set_pair(e, mask >> e & 1 == 1));
            g
        })
        .collect();
    let log_post: Vec<f64> = graphs
        .iter()
        .map(|g| g.edge_count() as f64 * log_odds + ln_i_three(g, post.delta(), post.scale()) - ln_i_three(g, prior.delta(), prior.scale()))
        .collect();
    let top = log_post.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let total: f64 = log_post.iter().map(|v| (v - top).exp()).sum();
    let oracle: Vec<f64> = log_post.iter().map(|v| (v - top).exp() / total).collect();

    let data = ModelData::new(
        vec!["env".into()],
        vec!["a".into(), "b".into(), "c".into()],
        vec![LatentGaussianState::observed(&z).unwrap()],
        EdgeCovariates::none(3),
    )
    .unwrap();
    let cfg = McmcConfig {
        structural_iterations: 60_000,
        retention: Retention::Fraction(0.95),
        mode: Mode::IndependentEr,
        er_sparsity: Some(SPARSITY),
        track_graphs: true,
        checkpoint_every: 0,
        seed: 7,
        ..McmcConfig::simulation()
    };
    let summary = fit(&data, &cfg).unwrap();
    let visited = &summary.graph_posteriors.as_ref().unwrap()[0];
    let mut worst: f64 = 0.0;
    let mut cells = Vec::new();
    for (g, o) in graphs.iter().zip(&oracle) {
        let key = GraphTally::key(g);
        let got = visited.iter().find(|(k, _)| *k == key).map_or(0.0, |(_, v)| *v);
        worst = worst.max((got - o).abs());
        cells.push(format!("{key}:{o:.3}/{got:.3}"));
    }
    outcome(
        worst <= GRAPH_POSTERIOR_TOLERANCE,
        format!("oracle/chain per graph [{}]; max deviation {worst:.4} (need <= {GRAPH_POSTERIOR_TOLERANCE})", cells.join(" ")),
    )
}

fn conjugacy() -> Outcome {
    const DRAWS: usize = 100_000;
    let params = GWishartParams::new(3.0, DMatrix::identity(2, 2)).unwrap();
    let g = Graph::complete(2);
    let mut rng = StreamKey::new(5).rng();
    let mut sum = DMatrix::<f64>::zeros(2, 2);
    let mut sum_sq = DMatrix::<f64>::zeros(2, 2);
    for _ in 0..DRAWS {
        let m = sample_gwishart(&g, &params, &mut rng).unwrap().into_inner();
        sum += &m;
        sum_sq += m.component_mul(&m);
    }
    let n = DRAWS as f64;
    let expected = DMatrix::<f64>::identity(2, 2) * 4.0;
    let mut passed = true;
    let mut cells = Vec::new();
    for (i, j) in [(0, 0), (1, 1), (0, 1)] {
        let m = sum[(i, j)] / n;
        let se = ((sum_sq[(i, j)] / n - m * m) / n).sqrt();
        let z = (m - expected[(i, j)]) / se;
        passed &= z.abs() <= MOMENT_STANDARD_ERRORS;
        cells.push(format!("({i},{j}) {m:.4} ({z:+.2} SE)"));
    }
    outcome(passed, format!("mean of {DRAWS} draws vs 4I: {}", cells.join(", ")))
}

fn distributional() -> Outcome {
    let mut failures = Vec::new();

    let mut worst_norm: f64 = 0.0;
    for q in [0.1, 0.5, 0.9] {
        for b in [0.5, 1.0, 3.0] {
            let mut total = 0.0;
            let mut y = 0u64;
            while dw_cdf(y as i64, q, b).unwrap() < 1.0 - 1e-14 {
                total += dw_pmf(y, q, b).unwrap();
                y += 1;
            }
            total += dw_pmf(y, q, b).unwrap();
            worst_norm = worst_norm.max((total - 1.0).abs());
        }
    }
    if worst_norm > PMF_NORMALISATION {
        failures.push(format!("pmf sums off by {worst_norm:e}"));
    }

    let mut tiled = true;
    for (q, b) in [(0.5, 1.0), (0.9, 0.4), (0.2, 2.5)] {
        let reg = DwRegression::constant(0, q, b).unwrap();
        // Walk from -inf until the first count whose interval reaches +inf.
        let mut prev = latent_interval(0, &reg, &[1.0]).unwrap();
        tiled &= prev.lower == f64::NEG_INFINITY;
        let mut y = 1;
        while prev.upper < f64::INFINITY && y < 5_000_000 {
            let next = latent_interval(y, &reg, &[1.0]).unwrap();
            tiled &= prev.upper.to_bits() == next.lower.to_bits() && next.lower < next.upper;
            prev = next;
            y += 1;
        }
        tiled &= prev.upper == f64::INFINITY;
    }
    if !tiled {
        failures.push("latent intervals do not tile".into());
    }

    let mut rng = StreamKey::new(11).rng();
    let mut contained = true;
    for (lo, hi) in [(-1.0, 1.0), (8.0, 8.5), (-40.0, -39.0), (f64::NEG_INFINITY, -6.0), (3.0, f64::INFINITY), (0.0, 1e-9)] {
        for _ in 0..20_000 {
            let x = truncnorm::sample(&mut rng, 0.0, 1.0, lo, hi);
            contained &= lo < x && x <= hi;
        }
    }
    if !contained {
        failures.push("truncated-normal draw outside its interval".into());
    }

    const HALF: usize = 200_000;
    let draws: Vec<f64> = (0..HALF).map(|_| truncnorm::sample(&mut rng, 0.0, 1.0, 0.0, f64::INFINITY)).collect();
    let m = mean(&draws);
    let target = (2.0 / PI).sqrt();
    let se = ((1.0 - 2.0 / PI) / HALF as f64).sqrt();
    let half_z = (m - target) / se;
    if half_z.abs() > HALF_NORMAL_STANDARD_ERRORS {
        failures.push(format!("half-normal mean {m:.5} is {half_z:.1} SE from sqrt(2/pi)"));
    }

    let omega = PrecisionMatrix::new(DMatrix::from_row_slice(3, 3, &[2.0, -0.6, 0.2, -0.6, 1.5, 0.4, 0.2, 0.4, 1.0])).unwrap();
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.3, 7.0, 1.9]));
    let scaled = PrecisionMatrix::new(&d * omega.as_matrix() * &d).unwrap();
    let pcor_gap = (partial_correlations(&scaled) - partial_correlations(&omega)).amax();
    if pcor_gap > EQUIVARIANCE {
        failures.push(format!("partial correlations move by {pcor_gap:e} under rescaling"));
    }

    let p = 6;
    let w = EdgeCovariates::from_fn(p, vec!["w".into()], |i, j| vec![((i * 7 + j * 3) % 5) as f64 / 5.0 - 0.4]).unwrap();
    let ensemble = GraphEnsemble::new(vec![
        Graph::from_edges(p, &[(0, 1), (2, 3), (1, 4)]).unwrap(),
        Graph::from_edges(p, &[(0, 1), (3, 5)]).unwrap(),
        Graph::from_edges(p, &[(2, 3), (1, 4), (4, 5)]).unwrap(),
    ])
    .unwrap();
    let theta = RandomGraphParams::new(vec![-1.0, -0.5, -2.0], vec![1.5], vec![[0.7, -0.2], [0.4, 0.9], [-1.1, 0.3]]).unwrap();
    let mut rot_gap: f64 = 0.0;
    for angle in [0.3, FRAC_PI_2, 2.0] {
        let (s, c) = f64::sin_cos(angle);
        for q in [Matrix2::new(c, -s, s, c), Matrix2::new(c, s, s, -c)] {
            let turned = theta.transform_locations(&q);
            for k in 0..3 {
                for pair in pairs(p) {
                    let a = edge_probability(k, pair, &ensemble, &theta, &w);
                    let b = edge_probability(k, pair, &ensemble, &turned, &w);
                    rot_gap = rot_gap.max((a - b).abs());
                }
            }
        }
    }
    if rot_gap > EQUIVARIANCE {
        failures.push(format!("edge probabilities move by {rot_gap:e} under rotation"));
    }

    let detail = format!(
        "pmf normalisation {worst_norm:.1e}, tiling {}, containment {}, half-normal {half_z:+.2} SE, partial-correlation rescaling {pcor_gap:.1e}, rotation {rot_gap:.1e}",
        if tiled { "exact" } else { "broken" },
        if contained { "exact" } else { "broken" }
    );
    if failures.is_empty() {
        outcome(true, detail)
    } else {
        outcome(false, format!("{detail}; {}", failures.join("; ")))
    }
}

fn coupling() -> Outcome {
    let cfg = SimConfig { n: 150, p: 20, b: 2, seed: 21, ..SimConfig::default() };
    let mcmc = McmcConfig { structural_iterations: 3000, ..McmcConfig::simulation() };
    let mut sharing = Vec::new();
    for c in [vec![[1.2, 0.0], [1.2, 0.0]], vec![[1.2, 0.0], [0.0, 1.2]]] {
        let theta = RandomGraphParams::new(vec![-1.5, -1.5], vec![2.5], c).unwrap();
        let sim = simulate_given_theta(&cfg, theta).unwrap();
        let summary = fit(&sim.dataset.model_data(None).unwrap(), &mcmc).unwrap();
        sharing.push(summarize(&summary, 0.5).unwrap().sharing[(0, 1)]);
    }
    outcome(sharing[0] > sharing[1], format!("high-probability edge sharing coupled {:.3} vs orthogonal {:.3}", sharing[0], sharing[1]))
}

fn determinism() -> Outcome {
    let sim = simulate(&SimConfig { p: 10, b: 3, n: 80, seed: 4, ..SimConfig::default() }).unwrap();
    let data = sim.dataset.model_data(None).unwrap();
    let cfg = McmcConfig { structural_iterations: 600, checkpoint_every: 100, ..McmcConfig::simulation() };
    let in_pool =
        |threads: usize| rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| fit(&data, &cfg).unwrap());
    let (a, b, c) = (in_pool(1), in_pool(1), in_pool(4));

    let mut chain = Chain::new(&data, cfg.clone()).unwrap();
    chain.run(Some(250), |_| Ok(())).unwrap();
    let json = serde_json::to_string(chain.state()).unwrap();
    let state: ChainState = serde_json::from_str(&json).unwrap();
    let mut resumed = Chain::resume(&data, cfg.clone(), state).unwrap();
    resumed.run(None, |_| Ok(())).unwrap();
    let r = resumed.summary().unwrap();

    outcome(
        a == b && a == c && a == r,
        format!(
            "single-thread repeat identical: {}, four threads identical: {}, resume after 250 of 600 identical: {}",
            a == b,
            a == c,
            a == r
        ),
    )
}

fn main() {
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    let run = scaled_run();
    results.push(("1 scaled simulation recovery", recovery(&run)));
    results.push(("2 latent-space recovery", latent_space(&run)));
    results.push(("3 joint vs independent stability", stability(&run)));
    results.push(("4 exactness on three nodes", exactness()));
    results.push(("5 G-Wishart conjugate moments", conjugacy()));
    results.push(("6 distributional suite", distributional()));
    results.push(("7 coupling direction", coupling()));
    results.push(("8 determinism and resume", determinism()));

    let mut failed = 0;
    for (name, o) in &results {
        println!("[{}] {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.passed);
    }
    println!("acceptance: {} of {} criteria pass", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
