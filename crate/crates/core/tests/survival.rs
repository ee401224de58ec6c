use rand::Rng;
use trapwalk::env::{sample_environment, Environment, GapLaw};
use trapwalk::rng::stream;
use trapwalk::survival::{
    crossing_probability, crossing_profile, log_survival_probability, SurvivalError,
    SurvivalParams,
};

/// Sum over all 2^n paths of 2^{-n} Π_k c(S_k), restricted to S_k >= 1.
fn enumerate(env: &Environment, n: u32, beta: f64) -> f64 {
    let kill = (-beta).exp();
    let mut total = 0.0;
    'paths: for bits in 0u32..(1 << n) {
        let mut x: i64 = 0;
        let mut w = 1.0;
        for k in 0..n {
            x += if bits >> k & 1 == 1 { 1 } else { -1 };
            if x <= 0 {
                continue 'paths;
            }
            if env.is_trap(x as u64) {
                w *= kill;
            }
        }
        total += w;
    }
    total / f64::powi(2.0, n as i32)
}

fn small_env<R: Rng>(rng: &mut R) -> Environment {
    let gaps = (0..40).map(|_| rng.random_range(1..=5)).collect();
    Environment::from_gaps(gaps).unwrap()
}

#[test]
fn first_steps() {
    let env = Environment::from_gaps(vec![2, 3, 4]).unwrap();
    for &beta in &[0.3, 2.0] {
        let z1 = log_survival_probability(&env, &SurvivalParams::exact(beta, 1, 2.0)).unwrap();
        assert!((z1.log_z - 0.5f64.ln()).abs() < 1e-15);
        let z2 = log_survival_probability(&env, &SurvivalParams::exact(beta, 2, 2.0)).unwrap();
        assert!((z2.log_z - (0.25f64.ln() - beta)).abs() < 1e-14);
    }
}

#[test]
fn matches_path_enumeration() {
    let mut rng = stream(11, "test-env", 0);
    for _ in 0..50 {
        let env = small_env(&mut rng);
        for &beta in &[0.5, 1.0, 2.0] {
            for n in 1..=12u32 {
                let dp = log_survival_probability(&env, &SurvivalParams::exact(beta, n as u64, 2.0))
                    .unwrap();
                let exact = enumerate(&env, n, beta).ln();
                assert!((dp.log_z - exact).abs() < 1e-12, "n={n} beta={beta}");
                assert_eq!(dp.log_error_bound, 0.0);
            }
        }
    }
}

#[test]
fn result_invariants() {
    let law = GapLaw::discrete_pareto(2.0).unwrap();
    let env = sample_environment(&law, 5000, &mut stream(3, "env", 0)).unwrap();
    let params = SurvivalParams::exact(1.0, 5000, 2.0);
    let r = log_survival_probability(&env, &params).unwrap();
    assert!(r.log_z <= 0.0);
    assert_eq!(r.free_energy, -r.log_z / r.scale);
    assert_eq!(r.scale, 5000f64.sqrt());
    assert_eq!(r.log_error_bound, 0.0);
    assert_eq!(r, log_survival_probability(&env, &params).unwrap());
}

#[test]
fn monotone_in_n_and_beta() {
    let mut rng = stream(12, "test-env", 0);
    for _ in 0..20 {
        let env = small_env(&mut rng);
        let z = |beta: f64, n: u64| {
            log_survival_probability(&env, &SurvivalParams::exact(beta, n, 2.0))
                .unwrap()
                .log_z
        };
        for n in 1..30 {
            assert!(z(1.0, n + 1) <= z(1.0, n) + 1e-15);
        }
        for k in 0..10 {
            let b = 0.2 * k as f64;
            assert!(z(b + 0.2, 25) <= z(b, 25) + 1e-15);
        }
    }
}

#[test]
fn removing_a_trap_helps() {
    let mut rng = stream(13, "test-env", 0);
    for _ in 0..30 {
        let env = small_env(&mut rng);
        let i = rng.random_range(0..env.len() - 1);
        let mut merged = env.gaps().to_vec();
        merged[i] += merged.remove(i + 1);
        let merged = Environment::from_gaps(merged).unwrap();
        for n in [5u64, 17, 30] {
            let p = SurvivalParams::exact(1.5, n, 2.0);
            let a = log_survival_probability(&env, &p).unwrap().log_z;
            let b = log_survival_probability(&merged, &p).unwrap().log_z;
            assert!(b >= a - 1e-14);
        }
    }
}

#[test]
fn short_environment_is_reported() {
    let env = Environment::from_gaps(vec![3, 3]).unwrap();
    let err = log_survival_probability(&env, &SurvivalParams::exact(1.0, 50, 2.0)).unwrap_err();
    assert!(matches!(err, SurvivalError::EnvironmentTooShort { .. }));
}

#[test]
fn pruning_bound_brackets_exact_value() {
    let law = GapLaw::discrete_pareto(2.0).unwrap();
    let env = sample_environment(&law, 4000, &mut stream(5, "env", 0)).unwrap();
    let exact = log_survival_probability(&env, &SurvivalParams::exact(2.0, 3000, 2.0)).unwrap();
    let mut coarse = SurvivalParams::new(2.0, 3000, 2.0);
    coarse.drop_threshold = 1e-12;
    let pruned = log_survival_probability(&env, &coarse).unwrap();
    assert!(pruned.log_z <= exact.log_z + 1e-12);
    assert!(pruned.log_z + pruned.log_error_bound >= exact.log_z - 1e-12);
}

#[test]
fn crossing_subadditive_and_sandwiched() {
    let law = GapLaw::discrete_pareto(1.0).unwrap();
    let mut rng = stream(6, "env", 0);
    for _ in 0..20 {
        let env = sample_environment(&law, 40, &mut rng).unwrap();
        let beta = 1.3;
        let z = |i, j| -crossing_probability(&env, i, j, beta).unwrap().log_p;
        for _ in 0..20 {
            let i = rng.random_range(0..38);
            let j = rng.random_range(i + 1..39);
            let k = rng.random_range(j + 1..40);
            assert!(z(i, k) <= z(i, j) + z(j, k) + 1e-10);
        }
        let profile = crossing_profile(&env, beta, 40).unwrap();
        let mut log_sum = 0.0;
        for (l, &zl) in profile.iter().enumerate() {
            let ell = (l + 1) as f64;
            log_sum += (env.gaps()[l] as f64).ln();
            assert!(beta * ell <= zl + 1e-10);
            assert!(zl <= (beta + 2f64.ln()) * ell + log_sum + 1e-10);
        }
    }
}

#[test]
fn crossing_cost_is_concave_in_beta() {
    let law = GapLaw::discrete_pareto(1.0).unwrap();
    let mut rng = stream(7, "env", 0);
    for _ in 0..20 {
        let env = sample_environment(&law, 30, &mut rng).unwrap();
        let lam: Vec<f64> = (1..=20)
            .map(|k| crossing_profile(&env, 0.25 * k as f64, 30).unwrap()[29] / 30.0)
            .collect();
        for w in lam.windows(3) {
            assert!(w[0] - 2.0 * w[1] + w[2] <= 1e-10);
        }
    }
}
