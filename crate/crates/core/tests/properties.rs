#![allow(clippy::needless_range_loop)]

use nalgebra::{DMatrix, DVector, Matrix2};
use proptest::prelude::*;
use rand::Rng;
use rgm::bdmcmc::EdgeAccumulator;
use rgm::copula::conditional_moments;
use rgm::graph::{pair_count, pairs, Graph, GraphEnsemble};
use rgm::gwishart::{partial_correlations, PrecisionMatrix};
use rgm::marginals::{gmpr_size_factors, latent_interval, log_posterior, DwRegression, NodeCovariates};
use rgm::normal;
use rgm::random_graph::{edge_probability, EdgeCovariates, RandomGraphParams};
use rgm::rng::StreamKey;
use rgm::sampler::roc_curve;
use rgm::sim::{simulate_truth, SimConfig};

/// `A A' + p I` from a seed, so always well conditioned.
fn spd(p: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = StreamKey::new(seed).rng();
    let a = DMatrix::from_fn(p, p, |_, _| rng.random_range(-1.0..1.0));
    &a * a.transpose() + DMatrix::identity(p, p) * p as f64
}

fn random_graph(p: usize, density: f64, seed: u64) -> Graph {
    let mut rng = StreamKey::new(seed).rng();
    let mut g = Graph::empty(p);
    for e in 0..pair_count(p) {
        g.set_pair(e, rng.random::<f64>() < density);
    }
    g
}

fn ensemble_and_covariates(p: usize, b: usize, seed: u64) -> (GraphEnsemble, EdgeCovariates) {
    let graphs = (0..b).map(|k| random_graph(p, 0.3, seed.wrapping_add(k as u64))).collect();
    let mut rng = StreamKey::new(seed ^ 0xabc).rng();
    let w = EdgeCovariates::from_fn(p, vec!["w".into()], |_, _| vec![rng.random_range(-0.5..0.5)]).unwrap();
    (GraphEnsemble::new(graphs).unwrap(), w)
}

fn location() -> impl Strategy<Value = [f64; 2]> {
    [-2.0..2.0f64, -2.0..2.0f64]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn edge_probability_is_rotation_invariant(
        c in prop::collection::vec(location(), 3),
        angle in 0.0..std::f64::consts::TAU,
        reflect in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let (ens, w) = ensemble_and_covariates(6, 3, seed);
        let theta = RandomGraphParams::new(vec![-1.0, 0.2, -0.4], vec![1.3], c).unwrap();
        let (s, co) = angle.sin_cos();
        let q = if reflect { Matrix2::new(co, s, s, -co) } else { Matrix2::new(co, -s, s, co) };
        let turned = theta.transform_locations(&q);
        for k in 0..3 {
            for pair in pairs(6) {
                let a = edge_probability(k, pair, &ens, &theta, &w);
                let b = edge_probability(k, pair, &ens, &turned, &w);
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn edge_probability_ignores_own_graph(seed in any::<u64>(), c in prop::collection::vec(location(), 3), k in 0usize..3) {
        let (ens, w) = ensemble_and_covariates(6, 3, seed);
        let theta = RandomGraphParams::new(vec![-1.0, 0.2, -0.4], vec![0.7], c).unwrap();
        let mut altered = ens.clone();
        *altered.graph_mut(k) = random_graph(6, 0.6, seed.wrapping_mul(31).wrapping_add(1));
        for pair in pairs(6) {
            prop_assert_eq!(
                edge_probability(k, pair, &ens, &theta, &w).to_bits(),
                edge_probability(k, pair, &altered, &theta, &w).to_bits()
            );
        }
    }

    #[test]
    fn edge_probability_increases_with_intercept(seed in any::<u64>(), c in prop::collection::vec(location(), 2), bump in 0.01..3.0f64) {
        let (ens, w) = ensemble_and_covariates(5, 2, seed);
        let theta = RandomGraphParams::new(vec![-0.5, 0.1], vec![0.4], c.clone()).unwrap();
        let raised = RandomGraphParams::new(vec![-0.5 + bump, 0.1], vec![0.4], c).unwrap();
        for pair in pairs(5) {
            prop_assert!(edge_probability(0, pair, &ens, &raised, &w) >= edge_probability(0, pair, &ens, &theta, &w));
            prop_assert_eq!(edge_probability(1, pair, &ens, &raised, &w), edge_probability(1, pair, &ens, &theta, &w));
        }
    }

    #[test]
    fn partial_correlations_are_scale_free_and_bounded(seed in any::<u64>(), scales in prop::collection::vec(0.01..100.0f64, 5)) {
        let omega = PrecisionMatrix::new(spd(5, seed)).unwrap();
        let d = DMatrix::from_diagonal(&DVector::from_vec(scales));
        let rescaled = PrecisionMatrix::new(&d * omega.as_matrix() * &d).unwrap();
        let (a, b) = (partial_correlations(&omega), partial_correlations(&rescaled));
        prop_assert!((&a - &b).amax() < 1e-12);
        for (i, j) in pairs(5) {
            prop_assert!(a[(i, j)].abs() < 1.0);
            prop_assert_eq!(a[(i, j)], a[(j, i)]);
        }
    }

    #[test]
    fn latent_intervals_tile_the_line(q in 0.05..0.95f64, b in 0.5..4.0f64) {
        let reg = DwRegression::constant(0, q, b).unwrap();
        let mut prev = latent_interval(0, &reg, &[1.0]).unwrap();
        prop_assert_eq!(prev.lower, f64::NEG_INFINITY);
        let mut y = 1;
        while prev.upper < f64::INFINITY {
            prop_assert!(y < 10_000_000);
            let next = latent_interval(y, &reg, &[1.0]).unwrap();
            prop_assert!(next.lower < next.upper);
            prop_assert_eq!(prev.upper.to_bits(), next.lower.to_bits());
            prev = next;
            y += 1;
        }
    }

    #[test]
    fn marginal_log_posterior_ignores_sample_order(
        counts in prop::collection::vec(0u64..40, 8..30),
        eta in prop::collection::vec(-2.0..2.0f64, 2),
        gamma in prop::collection::vec(-1.0..1.0f64, 2),
        seed in any::<u64>(),
    ) {
        let n = counts.len();
        let mut rng = StreamKey::new(seed).rng();
        let design = DMatrix::from_fn(n, 2, |_, j| if j == 0 { 1.0 } else { rng.random_range(-1.0..1.0) });
        let x = NodeCovariates::new(vec!["intercept".into(), "x".into()], design).unwrap();
        let mut order: Vec<usize> = (0..n).collect();
        order.reverse();
        order.rotate_left(seed as usize % n);
        let permuted: Vec<u64> = order.iter().map(|&i| counts[i]).collect();
        let a = log_posterior(&counts, &x, &eta, &gamma).unwrap();
        let b = log_posterior(&permuted, &x.select_rows(&order), &eta, &gamma).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
    }

    #[test]
    fn gmpr_ratios_follow_row_scaling(seed in any::<u64>(), c in 0.05..20.0f64, row in 0usize..5) {
        let mut rng = StreamKey::new(seed).rng();
        let counts = DMatrix::from_fn(5, 12, |_, _| rng.random_range(1u32..200) as f64);
        let mut scaled = counts.clone();
        scaled.row_mut(row).scale_mut(c);
        let (f, g) = (gmpr_size_factors(&counts).unwrap(), gmpr_size_factors(&scaled).unwrap());
        for j in (0..5).filter(|&j| j != row) {
            let shift = (g[row] / g[j]) / (f[row] / f[j]);
            prop_assert!((shift / c - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn conditional_moments_match_dense_inverse(seed in any::<u64>(), j in 0usize..5, row in prop::collection::vec(-3.0..3.0f64, 5)) {
        let omega = PrecisionMatrix::new(spd(5, seed)).unwrap();
        let sigma = omega.covariance();
        let rest: Vec<usize> = (0..5).filter(|&l| l != j).collect();
        let s_rr = DMatrix::from_fn(4, 4, |a, b| sigma[(rest[a], rest[b])]);
        let s_jr = DMatrix::from_fn(1, 4, |_, b| sigma[(j, rest[b])]);
        let z_r = DVector::from_iterator(4, rest.iter().map(|&l| row[l]));
        let inv = s_rr.try_inverse().unwrap();
        let mean = (&s_jr * &inv * z_r)[(0, 0)];
        let var = sigma[(j, j)] - (&s_jr * &inv * s_jr.transpose())[(0, 0)];
        let (m, v) = conditional_moments(&omega, &row, j).unwrap();
        prop_assert!((m - mean).abs() < 1e-10);
        prop_assert!((v - var).abs() < 1e-10);
    }

    #[test]
    fn accumulator_merge_order_is_irrelevant(seed in any::<u64>(), weights in prop::collection::vec(0.01..5.0f64, 6)) {
        let states: Vec<(Graph, PrecisionMatrix)> = (0..6)
            .map(|t| (random_graph(4, 0.5, seed.wrapping_add(t)), PrecisionMatrix::new(spd(4, seed ^ t)).unwrap()))
            .collect();
        let mut whole = EdgeAccumulator::new(4);
        for ((g, o), w) in states.iter().zip(&weights) {
            whole.add(g, o, *w);
        }
        let (mut left, mut right) = (EdgeAccumulator::new(4), EdgeAccumulator::new(4));
        for (t, ((g, o), w)) in states.iter().zip(&weights).enumerate() {
            if t % 2 == 0 { left.add(g, o, *w) } else { right.add(g, o, *w) }
        }
        let mut lr = left.clone();
        lr.merge(&right).unwrap();
        let mut rl = right;
        rl.merge(&left).unwrap();
        for acc in [&lr, &rl] {
            prop_assert_eq!(acc.states(), whole.states());
            prop_assert!((acc.edge_probabilities().unwrap() - whole.edge_probabilities().unwrap()).amax() < 1e-12);
            prop_assert!((acc.mean_partial_correlations().unwrap() - whole.mean_partial_correlations().unwrap()).amax() < 1e-12);
        }
    }
}

/// Individual graphs spread widely because each intercept is drawn with unit
/// standard deviation; the band applies to the law's typical density, taken
/// here as the pooled mean and the median over 8 seeds x 13 graphs.
#[test]
fn default_simulation_density_is_in_band() {
    let mut densities = Vec::new();
    for seed in 1..=8 {
        let truth = simulate_truth(&SimConfig { seed, ..SimConfig::default() }).unwrap();
        densities.extend(truth.graphs.iter().map(Graph::density));
    }
    let mean = densities.iter().sum::<f64>() / densities.len() as f64;
    densities.sort_by(f64::total_cmp);
    let median = 0.5 * (densities[densities.len() / 2 - 1] + densities[densities.len() / 2]);
    assert!((0.005..=0.15).contains(&mean), "pooled density {mean}");
    assert!((0.005..=0.15).contains(&median), "median density {median}");
}

#[test]
fn zero_location_spread_decouples_environments() {
    let cfg = SimConfig { p: 12, b: 3, n: 20, c_sd: 0.0, ..SimConfig::default() };
    let truth = simulate_truth(&cfg).unwrap();
    let probs = truth.edge_probabilities().unwrap();
    for k in 0..3 {
        for (i, j) in pairs(12) {
            let eta = truth.theta.alpha[k] + truth.w.get(i, j)[0] * truth.theta.beta[0];
            assert!((probs[k][(i, j)] - normal::cdf(eta)).abs() < 1e-15);
        }
    }
}

#[test]
fn random_scores_have_chance_auc() {
    let p = 30;
    let mut aucs = Vec::new();
    for r in 0..100u64 {
        let truth = random_graph(p, 0.2, 1000 + r);
        if truth.edge_count() == 0 {
            continue;
        }
        let mut rng = StreamKey::new(5000 + r).rng();
        let mut probs = DMatrix::zeros(p, p);
        for (i, j) in pairs(p) {
            let v: f64 = rng.random();
            probs[(i, j)] = v;
            probs[(j, i)] = v;
        }
        aucs.push(roc_curve(&probs, &truth).unwrap().auc);
    }
    let mean = aucs.iter().sum::<f64>() / aucs.len() as f64;
    assert!((mean - 0.5).abs() < 0.03, "mean AUC {mean}");
}
