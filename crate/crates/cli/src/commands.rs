use std::fs::File;
use std::io::{BufReader, Write};

use rayon::prelude::*;
use serde_json::json;
use trapwalk::env::{sample_environment, sample_environment_covering, EnvHeader, Environment, GapLaw};
use trapwalk::limit::{limit_tail_cdf, sample_limit_f, sample_limit_inverse, LimitParams};
use trapwalk::periodic::{g_rate, phi_first_order, phi_homogeneous, phi_periodic, PeriodicSpec};
use trapwalk::rng::stream;
use trapwalk::stats::{
    convergence_experiment, estimate_lambda, records_statistics, ExperimentConfig, LambdaSource,
};
use trapwalk::survival::{
    confined_survival_probability, fkg_compare, lambda_two_sided, log_survival_probability,
    small_ball_rate, SurvivalParams, DEFAULT_DROP_THRESHOLD,
};

use crate::args::*;
use crate::output::Report;
use crate::CliError;

/// Horizons up to this size run the DP without pruning by default.
const EXACT_UP_TO: u64 = 10_000;

/// A finished report and, if one occurred, the guarantee it violates.
pub struct Outcome {
    pub report: Report,
    pub violation: Option<String>,
}

impl From<Report> for Outcome {
    fn from(report: Report) -> Self {
        Self {
            report,
            violation: None,
        }
    }
}

fn meta<T: serde::Serialize>(command: &str, params: &T) -> Result<serde_json::Value, CliError> {
    Ok(json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "params": serde_json::to_value(params)?,
    }))
}

fn law(args: &LawArgs) -> Result<GapLaw, CliError> {
    Ok(GapLaw::new(args.law, args.gamma)?)
}

pub fn sample_env<W: Write>(args: &SampleEnvArgs, format: Format, out: W) -> Result<Option<Outcome>, CliError> {
    let law = law(&args.law)?;
    let mut rng = stream(args.seed, "env", args.index);
    let env = match (args.count, args.reach) {
        (Some(count), _) => sample_environment(&law, count, &mut rng)?,
        (None, Some(reach)) => sample_environment_covering(&law, reach, &mut rng)?,
        (None, None) => return Err(CliError::Validation("give --count or --reach".into())),
    };
    if format == Format::Text {
        let header = EnvHeader {
            gamma: args.law.gamma,
            law: args.law.law,
            seed: args.seed,
        };
        env.write_text(out, &header)?;
        return Ok(None);
    }
    let mut report = Report::new(meta("sample-env", args)?);
    match format {
        Format::Csv => {
            for (i, (&t, &p)) in env.gaps().iter().zip(&env.positions()[1..]).enumerate() {
                report.push(&json!({"index": i + 1, "gap": t, "position": p}))?;
            }
        }
        _ => report.push(&json!({"gaps": env.gaps(), "last_position": env.last_position()}))?,
    }
    Ok(Some(report.into()))
}

pub fn survival(args: &SurvivalArgs) -> Result<Outcome, CliError> {
    if args.n.is_empty() || args.n.contains(&0) {
        return Err(CliError::Validation("horizons must be positive".into()));
    }
    let max_n = *args.n.iter().max().expect("non-empty");
    let envs: Vec<(usize, Environment)> = match &args.env_file {
        Some(path) => {
            let (header, env) = Environment::read_text(BufReader::new(File::open(path)?))?;
            if header.gamma != args.law.gamma {
                return Err(CliError::Validation(format!(
                    "environment file has gamma = {}, but --gamma is {}",
                    header.gamma, args.law.gamma
                )));
            }
            vec![(0, env)]
        }
        None => {
            let law = law(&args.law)?;
            (0..args.envs)
                .into_par_iter()
                .map(|i| {
                    let mut rng = stream(args.seed, "env", i as u64);
                    Ok((i, sample_environment_covering(&law, max_n + 1, &mut rng)?))
                })
                .collect::<Result<_, CliError>>()?
        }
    };
    let tasks: Vec<(usize, &Environment, u64)> = envs
        .iter()
        .flat_map(|(i, env)| args.n.iter().map(move |&n| (*i, env, n)))
        .collect();
    let results = tasks
        .par_iter()
        .map(|&(i, env, n)| {
            let mut p = SurvivalParams::new(args.beta, n, args.law.gamma);
            p.drop_threshold = args.drop_threshold.unwrap_or(if n <= EXACT_UP_TO {
                0.0
            } else {
                DEFAULT_DROP_THRESHOLD
            });
            Ok((i, n, p.drop_threshold, log_survival_probability(env, &p)?))
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let mut report = Report::new(meta("survival", args)?);
    let mut violation = None;
    for (i, n, drop, r) in results {
        if r.log_error_bound > args.max_error {
            violation = Some(format!(
                "error bound {:e} at env {i}, n = {n} exceeds {:e}",
                r.log_error_bound, args.max_error
            ));
        }
        report.push(&json!({
            "gamma": args.law.gamma,
            "beta": args.beta,
            "n": n,
            "N": r.scale,
            "log_z": r.log_z,
            "free_energy": r.free_energy,
            "log_error_bound": r.log_error_bound,
            "drop_threshold": drop,
            "max_window": r.max_window,
            "seed": args.seed,
            "env_index": i,
        }))?;
    }
    Ok(Outcome { report, violation })
}

pub fn lambda(args: &LambdaArgs) -> Result<Outcome, CliError> {
    let law = law(&args.law)?;
    let mut report = Report::new(meta("lambda", args)?);
    let lower_upper = |beta: f64| (beta, beta + law.mean_log_gap() + std::f64::consts::LN_2);
    for &beta in &args.beta {
        let (lower, upper) = lower_upper(beta);
        match args.method {
            LambdaMethod::Crossing => {
                if args.ell == 0 {
                    return Err(CliError::Validation("--ell must be positive".into()));
                }
                let est = estimate_lambda(&law, beta, args.ell, args.envs, args.seed, "lambda")?;
                report.push(&json!({
                    "beta": beta,
                    "ell": args.ell,
                    "lambda": est.mean,
                    "std_error": est.std_error,
                    "min": est.spread.0,
                    "max": est.spread.1,
                    "lower_bound": lower,
                    "upper_bound": upper,
                }))?;
            }
            LambdaMethod::TwoSided => {
                let est = lambda_two_sided(
                    &law,
                    beta,
                    args.envs,
                    args.left_truncation,
                    args.tolerance,
                    args.seed,
                )?;
                report.push(&json!({
                    "beta": beta,
                    "lambda": est.lambda,
                    "std_error": est.std_error,
                    "truncation_bound": est.truncation_bound,
                    "samples": est.samples,
                    "lower_bound": lower,
                    "upper_bound": upper,
                }))?;
            }
        }
    }
    Ok(report.into())
}

pub fn confine(args: &ConfineArgs) -> Result<Outcome, CliError> {
    let mut report = Report::new(meta("confine", args)?);
    for &t in &args.t {
        let r = confined_survival_probability(t, args.n)?;
        report.push(&json!({
            "t": t,
            "n": args.n,
            "log_p": r.log_p,
            "rate_estimate": r.rate_estimate,
            "g_t": small_ball_rate(t)?,
        }))?;
    }
    Ok(report.into())
}

pub fn fkg(args: &FkgArgs) -> Result<Outcome, CliError> {
    let law = law(&args.law)?;
    let env = sample_environment_covering(&law, args.x, &mut stream(args.seed, "env", args.index))?;
    let cmp = fkg_compare(&env, args.x, args.n, args.beta)?;
    let mut report = Report::new(meta("fkg", args)?);
    for (m, (k, f)) in cmp.cdf_killed.iter().zip(&cmp.cdf_free).enumerate() {
        report.push(&json!({"m": m, "cdf_killed": k, "cdf_free": f}))?;
    }
    Ok(report.into())
}

fn limit_params(args: &LimitArgs) -> Result<LimitParams, CliError> {
    Ok(LimitParams::new(args.lambda, args.gamma, args.c_tau)?)
}

pub fn limit_sample(args: &LimitSampleArgs) -> Result<Outcome, CliError> {
    let p = limit_params(&args.limit)?;
    let draws: Vec<_> = (0..args.samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(args.seed, "limit", i);
            match args.method {
                LimitMethod::Ppp => {
                    let s = sample_limit_f(&p, &mut rng);
                    json!({
                        "f": s.f_value,
                        "x_star": s.minimizer.0,
                        "y_star": s.minimizer.1,
                        "seed": args.seed,
                        "index": i,
                    })
                }
                LimitMethod::Inverse => json!({
                    "f": sample_limit_inverse(&p, &mut rng),
                    "seed": args.seed,
                    "index": i,
                }),
            }
        })
        .collect();
    let mut report = Report::new(meta("limit-sample", args)?);
    for d in &draws {
        report.push(d)?;
    }
    Ok(report.into())
}

pub fn limit_cdf(args: &LimitCdfArgs) -> Result<Outcome, CliError> {
    let p = limit_params(&args.limit)?;
    if args.points < 2 || !(args.u_max > 0.0) {
        return Err(CliError::Validation("need --points >= 2 and --u-max > 0".into()));
    }
    let mut report = Report::new(meta("limit-cdf", args)?);
    for k in 0..args.points {
        let u = args.u_max * k as f64 / (args.points - 1) as f64;
        report.push(&json!({"u": u, "tail": limit_tail_cdf(&p, u)?}))?;
    }
    Ok(report.into())
}

pub fn phi(args: &PhiArgs) -> Result<Outcome, CliError> {
    let mut report = Report::new(meta("phi", args)?);
    for &t in &args.t {
        for &beta in &args.beta {
            report.push(&json!({
                "t": t,
                "beta": beta,
                "phi": phi_homogeneous(t, beta)?,
                "g_t": g_rate(t),
                "first_order": phi_first_order(t, beta),
            }))?;
        }
    }
    Ok(report.into())
}

pub fn phi_periodic_cmd(args: &PhiPeriodicArgs) -> Result<Outcome, CliError> {
    let mut report = Report::new(meta("phi-periodic", args)?);
    for pattern in &args.pattern {
        let spec: PeriodicSpec = pattern.parse()?;
        for &beta in &args.beta {
            let r = phi_periodic(&spec, beta)?;
            report.push(&json!({
                "pattern": pattern,
                "beta": beta,
                "phi": r.phi,
                "g_tmax": g_rate(spec.t_max()),
                "phi_homog_tmax": phi_homogeneous(spec.t_max(), beta)?,
            }))?;
        }
    }
    Ok(report.into())
}

pub fn records(args: &RecordsArgs) -> Result<Outcome, CliError> {
    let law = law(&args.law)?;
    let mut report = Report::new(meta("records", args)?);
    for &n in &args.n {
        let r = records_statistics(&law, n, args.replicates, args.seed)?;
        let mut row = json!({
            "n": n,
            "replicates": r.replicates,
            "mean": r.mean,
            "harmonic": r.harmonic,
        });
        for t in &r.tail {
            row[format!("freq_b{}", t.b)] = json!(t.frequency);
            row[format!("bound_b{}", t.b)] = json!(t.bound);
        }
        report.push(&row)?;
    }
    Ok(report.into())
}

pub fn converge(args: &ConvergeArgs, format: Format) -> Result<Outcome, CliError> {
    let mut config = ExperimentConfig::new(
        args.law.gamma,
        args.beta,
        args.n.clone(),
        args.envs,
        args.seed,
    );
    config.law = args.law.law;
    config.lambda_ell = args.lambda_ell;
    config.lambda_envs = args.lambda_envs;
    if let Some(l) = args.lambda {
        config.lambda_source = LambdaSource::Provided(l);
    }
    let result = convergence_experiment(&config)?;
    let mut report = Report::new(meta("converge", args)?);
    if format == Format::Csv {
        for h in &result.horizons {
            report.push(&json!({
                "n": h.n,
                "N": h.scale,
                "envs": h.f_values.len(),
                "failures": h.failures,
                "mean_f": h.mean,
                "median_f": h.median,
                "ks": h.ks.statistic,
                "dkw_band": h.ks.dkw_band,
                "lambda": result.lambda,
            }))?;
        }
    } else {
        report.push(&result)?;
    }
    let failures: usize = result.horizons.iter().map(|h| h.failures).sum();
    Ok(Outcome {
        report,
        violation: (failures > 0)
            .then(|| format!("{failures} evaluations failed their error guarantee")),
    })
}
