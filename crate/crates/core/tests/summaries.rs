use gapdpm::dist::sample_normal;
use gapdpm::model::Hyperparameters;
use gapdpm::sampler::{chain_rng, BlockCounters, BlockTuning, Draw, StoreMeta};
use gapdpm::summaries::{
    beta_credible_intervals, k_posterior, ks_two_sample, order_posterior, predictive_gap_trajectory, quantile_sorted,
    sorted, summarize, ScalarSummary,
};
use gapdpm::{
    run_chain, simgen, Atom, DependenceSpec, DrawStore, GapTimeDataset, ModelConfig, SamplerConfig, SubjectRecord,
};
use proptest::prelude::*;
use rand::Rng;

fn meta(dependence: DependenceSpec, q: usize, max_gaps: usize) -> StoreMeta {
    StoreMeta {
        dependence,
        q,
        max_gaps,
        n_subjects: 1,
        lag_slots: dependence.lag_slots(),
        shared_beta: false,
        covariate_names: (1..=q).map(|r| format!("x{r}")).collect(),
        truncation: 2,
        seed: 0,
        chain: 0,
        counters: BlockCounters::default(),
    }
}

fn draw(atom: Atom, beta: Vec<Vec<f64>>, sigma: f64, tau: f64, k: usize) -> Draw {
    Draw {
        iteration: 0,
        sigma,
        tau,
        concentration: 1.0,
        order: atom.lags.len(),
        k,
        last_weight: 0.0,
        beta,
        inclusion: vec![1.0; atom.lags.len()],
        predictive_atom: atom,
        allocations: vec![0],
    }
}

#[test]
fn degenerate_store_predicts_constant() {
    let spec = DependenceSpec::FixedAr { order: 1 };
    let atom = Atom::new(1.0, vec![0.0]).unwrap();
    let store = DrawStore {
        meta: meta(spec, 1, 4),
        draws: vec![draw(atom, vec![vec![0.0]; 4], 0.0, 0.0, 1); 50],
    };
    let mut rng = chain_rng(1, 0);
    let paths = predictive_gap_trajectory(&store, &vec![vec![0.7]; 4], 4, &mut rng).unwrap();
    assert!(paths.iter().flatten().all(|y| *y == 1.0));
    assert!(predictive_gap_trajectory(&store, &vec![vec![0.7]; 5], 5, &mut rng).is_err());
    assert_eq!(
        k_posterior(&store).unwrap().into_iter().collect::<Vec<_>>(),
        vec![(1, 1.0)]
    );
    let ci = beta_credible_intervals(&store).unwrap();
    assert!(ci.iter().all(|b| b.lower == 0.0 && b.upper == 0.0));
}

#[test]
fn first_gap_is_location_mixture() {
    let spec = DependenceSpec::FixedAr { order: 2 };
    let mut rng = chain_rng(2, 0);
    let draws: Vec<Draw> = (0..20_000)
        .map(|_| {
            let atom = Atom::new(sample_normal(&mut rng, 0.0, 2.0), vec![0.5, -0.3]).unwrap();
            let beta = vec![vec![rng.random::<f64>() - 0.5, 1.0], vec![0.0, 0.0]];
            let (s, t) = (0.5 + rng.random::<f64>(), 0.2 + rng.random::<f64>());
            draw(atom, beta, s, t, 2)
        })
        .collect();
    let store = DrawStore {
        meta: meta(spec, 2, 2),
        draws,
    };
    let x = vec![1.5, -2.0];
    let paths = predictive_gap_trajectory(&store, &[x.clone(), x.clone()], 2, &mut rng).unwrap();
    let first: Vec<f64> = paths.iter().map(|p| p[0]).collect();
    let direct: Vec<f64> = store
        .draws
        .iter()
        .map(|d| {
            let loc = x[0] * d.beta[0][0] + x[1] * d.beta[0][1] + d.predictive_atom.m0;
            sample_normal(&mut rng, loc, d.sigma.hypot(d.tau))
        })
        .collect();
    assert!(ks_two_sample(&first, &direct).p_value > 0.01);
}

#[test]
fn symmetric_draws_give_symmetric_interval() {
    let spec = DependenceSpec::FixedAr { order: 1 };
    let atom = Atom::new(0.0, vec![0.0]).unwrap();
    let draws = (-500..=500)
        .map(|k| draw(atom.clone(), vec![vec![k as f64 / 100.0]], 1.0, 1.0, 1))
        .collect();
    let store = DrawStore {
        meta: meta(spec, 1, 1),
        draws,
    };
    let ci = &beta_credible_intervals(&store).unwrap()[0];
    assert!((ci.lower + ci.upper).abs() < 1e-9 && ci.median.abs() < 1e-12);
}

#[test]
fn histograms_stable_under_thinning() {
    let data = simgen::generate(&simgen::scenario2(8)).unwrap().dataset;
    let model = ModelConfig::new(DependenceSpec::RandomOrder { max_order: 3 }, Hyperparameters::default());
    let cfg = SamplerConfig {
        iterations: 6000,
        burn_in: 1000,
        thin: 2,
        seed: 3,
        chains: 1,
        tuning: BlockTuning::default(),
    };
    let store = run_chain(&data, &model, &cfg, 0).unwrap();
    let half = store.thinned(2);
    for (full, thin) in [
        (k_posterior(&store).unwrap(), k_posterior(&half).unwrap()),
        (order_posterior(&store).unwrap(), order_posterior(&half).unwrap()),
    ] {
        assert!((full.values().sum::<f64>() - 1.0).abs() < 1e-12);
        for (k, p) in &full {
            let q = thin.get(k).copied().unwrap_or(0.0);
            let se = (p * (1.0 - p) / half.len() as f64).sqrt();
            assert!((p - q).abs() <= 3.0 * se + 1e-12, "value {k}: {p} vs {q}");
        }
    }
    let s = summarize(&[store]).unwrap();
    for sc in s.scalars.values() {
        assert!(sc.q05 <= sc.ci_upper.min(sc.median) && sc.median <= sc.q95 && sc.q95 <= sc.ci_upper);
        assert!(sc.ci_lower <= sc.q05);
    }
    if let Some(diag) = s.diagnostics {
        for d in diag {
            if let Some(e) = d.ess {
                assert!(e <= s.draws as f64 + 1e-9, "{}: ess {e}", d.name);
            }
        }
    }
}

/// `N` subjects with three gaps, a binary covariate with effect `β_1 = 1.5`
/// on the first gap only, and about one in five last gaps censored.
fn covariate_fixture(seed: u64, n: usize) -> GapTimeDataset {
    let mut rng = chain_rng(seed, 7);
    let beta = [1.5, 0.0, 0.0];
    let subjects = (0..n)
        .map(|i| {
            let x = f64::from(u8::from(rng.random::<bool>()));
            let mut y: Vec<f64> = Vec::with_capacity(3);
            for b in beta {
                let mean = 0.5 + y.last().map_or(0.0, |p| 0.4 * p);
                let alpha = sample_normal(&mut rng, mean, 0.5);
                y.push(sample_normal(&mut rng, b * x + alpha, 0.7));
            }
            let censored = rng.random::<f64>() < 0.2;
            if censored {
                let last = y.last_mut().unwrap();
                *last -= rng.random::<f64>();
            }
            SubjectRecord {
                subject_id: format!("s{i}"),
                gap_times: y.iter().map(|v| v.exp()).collect(),
                censored,
                covariates: vec![vec![x]; 3],
            }
        })
        .collect();
    GapTimeDataset::new(subjects, 1).unwrap()
}

#[test]
fn beta_interval_coverage() {
    let hyper = Hyperparameters {
        truncation: 5,
        ..Hyperparameters::default()
    };
    let model = ModelConfig::new(DependenceSpec::FixedAr { order: 1 }, hyper);
    let mut covered = 0;
    for rep in 0..100 {
        let data = covariate_fixture(rep, 300);
        let cfg = SamplerConfig {
            iterations: 500,
            burn_in: 100,
            thin: 1,
            seed: 1000 + rep,
            chains: 1,
            tuning: BlockTuning::default(),
        };
        let store = run_chain(&data, &model, &cfg, 0).unwrap();
        let ci = beta_credible_intervals(&store).unwrap();
        let first = ci.iter().find(|b| b.gap_index == 1).unwrap();
        if first.lower <= 1.5 && 1.5 <= first.upper {
            covered += 1;
        }
    }
    assert!(covered >= 90, "covered {covered} of 100");
}

proptest! {
    #[test]
    fn quantiles_monotone(values in proptest::collection::vec(-1e3f64..1e3, 1..200), a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let s = sorted(&values);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(quantile_sorted(&s, lo) <= quantile_sorted(&s, hi));
        let sum = ScalarSummary::of(&values);
        prop_assert!(sum.ci_lower <= sum.q05 && sum.q05 <= sum.median);
        prop_assert!(sum.median <= sum.q95 && sum.q95 <= sum.ci_upper);
    }
}
