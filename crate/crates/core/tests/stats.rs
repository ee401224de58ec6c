use rand::Rng;
use trapwalk::env::{record_count, sample_environment, GapLaw};
use trapwalk::limit::{limit_cdf, sample_limit_inverse, LimitParams};
use trapwalk::rng::stream;
use trapwalk::stats::{
    convergence_experiment, estimate_lambda, gap_score_profile, ks_distance, ks_two_sample,
    product_bound_check, records_statistics, ExperimentConfig, LambdaSource, StatsError,
};
use trapwalk::survival::{log_survival_probability, SurvivalParams};

fn small_config(seed: u64) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(2.0, 2.0, vec![100, 1_000], 12, seed);
    c.lambda_ell = 500;
    c.lambda_envs = 4;
    c
}

#[test]
fn experiment_is_deterministic() {
    let a = convergence_experiment(&small_config(4)).unwrap();
    let b = convergence_experiment(&small_config(4)).unwrap();
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    let c = convergence_experiment(&small_config(5)).unwrap();
    assert_ne!(a.horizons[0].f_values, c.horizons[0].f_values);
}

#[test]
fn provided_lambda_changes_only_metadata() {
    let est = convergence_experiment(&small_config(8)).unwrap();
    let mut cfg = small_config(8);
    cfg.lambda_source = LambdaSource::Provided(est.lambda);
    let prov = convergence_experiment(&cfg).unwrap();
    assert_eq!(prov.lambda, est.lambda);
    assert_eq!(prov.horizons, est.horizons);
    assert_eq!(prov.to_csv(), est.to_csv());
    assert!(prov.lambda_estimate.is_none());
    assert_ne!(prov.content_hash, est.content_hash);
}

#[test]
fn rejects_zero_beta() {
    let mut cfg = small_config(1);
    cfg.beta = 0.0;
    assert!(matches!(
        convergence_experiment(&cfg),
        Err(StatsError::InvalidConfig(_))
    ));
}

#[test]
fn ks_band_holds_for_exact_samples() {
    let p = LimitParams::new(1.5, 2.0, 1.0).unwrap();
    let runs = 200;
    let mut inside = 0;
    for r in 0..runs {
        let mut rng = stream(2, "mc", r);
        let mut xs: Vec<f64> = (0..5_000).map(|_| sample_limit_inverse(&p, &mut rng)).collect();
        xs.sort_by(f64::total_cmp);
        let ks = ks_distance(&xs, |u| limit_cdf(&p, u)).unwrap();
        inside += (ks.statistic < ks.dkw_band) as usize;
    }
    assert!(inside as f64 >= 0.97 * runs as f64, "{inside}/{runs}");
}

#[test]
fn two_sample_ks_is_symmetric() {
    let a = [0.1, 0.4, 0.5, 2.0];
    let b = [0.2, 0.3, 0.35, 0.9, 1.5];
    assert_eq!(ks_two_sample(&a, &b).unwrap(), ks_two_sample(&b, &a).unwrap());
}

#[test]
fn lambda_estimates_respect_sandwich() {
    for &gamma in &[1.0, 2.0] {
        let law = GapLaw::discrete_pareto(gamma).unwrap();
        for &beta in &[0.5, 1.0, 2.0] {
            let est = estimate_lambda(&law, beta, 2_000, 6, 17, "lambda").unwrap();
            assert!(est.within_bounds(&law), "γ={gamma} β={beta}: {}", est.mean);
            assert!(est.spread.0 >= beta);
        }
    }
}

#[test]
fn lambda_agrees_across_environments() {
    // independent environments agree within their combined error bars
    let law = GapLaw::discrete_pareto(2.0).unwrap();
    let est = estimate_lambda(&law, 1.0, 5_000, 10, 23, "lambda").unwrap();
    let sd = est.std_error * (est.values.len() as f64).sqrt();
    let outliers = est.values.iter().filter(|v| (*v - est.mean).abs() > 3.0 * sd).count();
    assert_eq!(outliers, 0);
}

#[test]
fn record_counts() {
    let law = GapLaw::discrete_pareto(1.0).unwrap();
    let r = records_statistics(&law, 1, 100, 1).unwrap();
    assert_eq!(r.mean, 1.0);
    // ties only remove records
    for &n in &[10usize, 100, 1_000] {
        let r = records_statistics(&law, n, 4_000, 2).unwrap();
        let se = (r.harmonic / r.replicates as f64).sqrt();
        assert!(r.mean <= r.harmonic + 3.0 * se, "n={n}: {} vs {}", r.mean, r.harmonic);
    }
    // gaps spread over 2^60 values are tie-free in practice
    let (n, reps) = (50usize, 4_000);
    let mut rng = stream(3, "records", 0);
    let mean = (0..reps)
        .map(|_| {
            let gaps: Vec<u64> = (0..n).map(|_| rng.random_range(1..1u64 << 60)).collect();
            record_count(&gaps) as f64
        })
        .sum::<f64>()
        / reps as f64;
    let harmonic: f64 = (1..=n).map(|k| 1.0 / k as f64).sum();
    assert!((mean - harmonic).abs() < 3.0 * (harmonic / reps as f64).sqrt(), "{mean} vs {harmonic}");
    assert!(records_statistics(&law, 10, 50, 1).is_err());
}

#[test]
fn product_bound_exhaustive() {
    for n in 1..=5 {
        let rows = product_bound_check(&[1, 2, 3], n);
        assert_eq!(rows.len(), (1 << n) - 1);
        assert!(rows.iter().all(|r| r.holds));
    }
}

#[test]
fn gap_scores_bound_free_energy() {
    let law = GapLaw::discrete_pareto(2.0).unwrap();
    let n = 3_000u64;
    for k in 0..10 {
        let env = sample_environment(&law, 4_000, &mut stream(31, "env", k)).unwrap();
        let scores = gap_score_profile(&env, 2.0, n, 2.0).unwrap();
        assert_eq!(scores.iter().filter(|s| s.is_argmin).count(), 1);
        assert!(scores.iter().all(|s| s.score >= 0.0));
        let best = scores.iter().find(|s| s.is_argmin).unwrap().score;
        let f = log_survival_probability(&env, &SurvivalParams::new(2.0, n, 2.0))
            .unwrap()
            .free_energy;
        assert!(f <= best + 0.5, "F={f} G={best}");
    }
}
