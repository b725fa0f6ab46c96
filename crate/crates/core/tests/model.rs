use gapdpm::dist::tbeta_logpdf;
use gapdpm::model::{alpha_conditional_mean, alpha_marginal_variance, loglik_subject, obs_mean};
use gapdpm::sampler::chain_rng;
use gapdpm::{Atom, ChainState, DependenceSpec, GapTimeDataset, ModelConfig, SubjectRecord};
use proptest::prelude::*;
use rand_distr::{Distribution, Normal};

fn state_for(data: &GapTimeDataset, alpha: Vec<Vec<f64>>, beta: Vec<Vec<f64>>, sigma: f64) -> ChainState {
    let model = ModelConfig::new(DependenceSpec::FixedAr { order: 1 }, Default::default());
    let mut rng = chain_rng(0, 0);
    let mut s = ChainState::initialize(data, &model, &mut rng);
    s.alpha = alpha;
    s.beta = beta;
    s.sigma = sigma;
    s
}

fn one_subject(log_gaps: Vec<f64>, censored: bool) -> GapTimeDataset {
    GapTimeDataset::from_log_gaps(vec!["a".into()], vec![log_gaps], vec![censored]).unwrap()
}

#[test]
fn loglik_observed_and_censored_examples() {
    let data = one_subject(vec![1.0], false);
    let s = state_for(&data, vec![vec![0.8]], vec![vec![]], 0.5);
    assert!((loglik_subject(&data, 0, &s) - (-0.3058)).abs() < 1e-4);

    let data = one_subject(vec![0.0], true);
    let s = state_for(&data, vec![vec![0.0]], vec![vec![]], 1.0);
    assert!((loglik_subject(&data, 0, &s) - 0.5f64.ln()).abs() < 1e-12);
}

/// `∫_c^∞ φ((y − μ)/σ)/σ dy` by composite Simpson on `[c, μ + 12σ]`.
fn survival_by_quadrature(c: f64, mu: f64, sigma: f64) -> f64 {
    let upper = (mu + 12.0 * sigma).max(c + 12.0 * sigma);
    let n = 200_000;
    let h = (upper - c) / n as f64;
    let f = |y: f64| {
        let z = (y - mu) / sigma;
        (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
    };
    let mut s = f(c) + f(upper);
    for k in 1..n {
        s += f(c + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn censored_term_matches_quadrature(
        y1 in -2.0f64..2.0,
        c in -2.0f64..3.0,
        a in proptest::collection::vec(-1.5f64..1.5, 2),
        b in -1.0f64..1.0,
        sigma in 0.3f64..2.0,
    ) {
        let subject = SubjectRecord {
            subject_id: "a".into(),
            gap_times: vec![y1.exp(), c.exp()],
            censored: true,
            covariates: vec![vec![1.0], vec![0.5]],
        };
        let data = GapTimeDataset::new(vec![subject], 1).unwrap();
        let s = state_for(&data, vec![a.clone()], vec![vec![b], vec![b]], sigma);
        let m1 = b + a[0];
        let m2 = 0.5 * b + a[1];
        let z = (y1 - m1) / sigma;
        let observed = -0.5 * z * z - sigma.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln();
        let expected = observed + survival_by_quadrature(c, m2, sigma).ln();
        let got = loglik_subject(&data, 0, &s);
        prop_assert!((got - expected).abs() < 1e-6, "{got} vs {expected}");
    }

    #[test]
    fn conditional_mean_ignores_unavailable_lags(
        m0 in -2.0f64..2.0,
        lags in proptest::collection::vec(-0.99f64..0.99, 3),
        history in proptest::collection::vec(-3.0f64..3.0, 0..5),
    ) {
        let atom = Atom::new(m0, lags.clone()).unwrap();
        let spec = DependenceSpec::FixedAr { order: 3 };
        let got = alpha_conditional_mean(&atom, &history, &spec, 3);
        let mut want = m0;
        for (l, m) in lags.iter().enumerate() {
            if let Some(y) = history.len().checked_sub(l + 1).map(|k| history[k]) {
                want += m * y;
            }
        }
        prop_assert!((got - want).abs() < 1e-12);
    }
}

#[test]
fn mean_examples() {
    assert_eq!(obs_mean(&[0.0, 0.0], &[1.0, 2.0], 0.0).unwrap(), 0.0);
    assert_eq!(obs_mean(&[1.0, 0.0], &[2.0, 5.0], 0.5).unwrap(), 2.5);
    assert!((obs_mean(&[1.0, 1.0], &[0.3, -0.2], 1.1).unwrap() - 1.2).abs() < 1e-12);
    assert!(obs_mean(&[1.0], &[1.0, 2.0], 0.0).is_err());
    let atom = Atom::new(0.0, vec![0.9, 0.7]).unwrap();
    let ar2 = DependenceSpec::FixedAr { order: 2 };
    assert!((alpha_conditional_mean(&atom, &[1.0, 1.0], &ar2, 2) - 1.6).abs() < 1e-12);
    let atom = Atom::new(0.7, vec![0.9, 0.7]).unwrap();
    assert_eq!(alpha_conditional_mean(&atom, &[], &ar2, 2), 0.7);
}

#[test]
fn marginal_variance_matches_simulation() {
    let (m0, m1, sigma, tau) = (0.3, 0.6, 0.8, 0.5);
    let atom = Atom::new(m0, vec![m1]).unwrap();
    let mut rng = chain_rng(42, 0);
    let eps = Normal::new(0.0, 1.0).unwrap();
    let n = 1_000_000;
    let horizon = 5;
    let mut sums = vec![(0.0f64, 0.0f64); horizon];
    for _ in 0..n {
        let mut prev_y = None;
        for acc in sums.iter_mut() {
            let mean = prev_y.map_or(m0, |y: f64| m0 + m1 * y);
            let a = mean + tau * eps.sample(&mut rng);
            acc.0 += a;
            acc.1 += a * a;
            prev_y = Some(a + sigma * eps.sample(&mut rng));
        }
    }
    for (j, (s, ss)) in sums.iter().enumerate() {
        let mc = ss / n as f64 - (s / n as f64).powi(2);
        let exact = alpha_marginal_variance(&atom, sigma, tau, j + 1).unwrap();
        assert!((mc / exact - 1.0).abs() < 0.02, "j = {}: {mc} vs {exact}", j + 1);
    }
}

#[test]
fn unit_root_atoms_rejected() {
    assert!(Atom::new(0.0, vec![1.0]).is_err());
    assert!(Atom::new(0.0, vec![0.2, -1.3]).is_err());
    assert!(Atom::new(0.0, vec![0.999]).is_ok());
}

#[test]
fn tbeta_examples() {
    assert!((tbeta_logpdf(0.0, 1.0, 1.0) - 0.5f64.ln()).abs() < 1e-12);
    assert!((tbeta_logpdf(0.0, 3.0, 3.0) - (15.0f64 / 16.0).ln()).abs() < 1e-12);
    assert!((tbeta_logpdf(0.4, 3.0, 3.0) - tbeta_logpdf(-0.4, 3.0, 3.0)).abs() < 1e-12);
    assert_eq!(tbeta_logpdf(1.0, 3.0, 3.0), f64::NEG_INFINITY);
}
