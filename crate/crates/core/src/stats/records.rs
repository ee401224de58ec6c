use rayon::prelude::*;
use serde::Serialize;

use super::StatsError;
use crate::env::{compute_records, record_count, sample_environment, GapLaw};
use crate::rng::stream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailRow {
    pub b: f64,
    /// Empirical `P(R_n >= b ln n)`.
    pub frequency: f64,
    /// `c(b) = 1 + b(ln b - 1)`.
    pub exponent: f64,
    /// `n^{-c(b)}`.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecordsReport {
    pub n: usize,
    pub replicates: usize,
    pub mean: f64,
    pub harmonic: f64,
    /// `histogram[r]` = number of replicates with `R_n = r`.
    pub histogram: Vec<usize>,
    pub tail: Vec<TailRow>,
}

/// `1 + b(ln b - 1)`.
pub fn records_tail_exponent(b: f64) -> f64 {
    1.0 + b * (b.ln() - 1.0)
}

/// Distribution of the record count `R_n` over independent gap sequences.
pub fn records_statistics(
    law: &GapLaw,
    n: usize,
    replicates: usize,
    seed: u64,
) -> Result<RecordsReport, StatsError> {
    if replicates < 100 {
        return Err(StatsError::InvalidConfig("need at least 100 replicates".into()));
    }
    if n == 0 {
        return Err(StatsError::InvalidConfig("n must be >= 1".into()));
    }
    let counts = (0..replicates as u64)
        .into_par_iter()
        .map(|i| {
            let env = sample_environment(law, n, &mut stream(seed, "records", i))?;
            Ok(record_count(env.gaps()))
        })
        .collect::<Result<Vec<usize>, StatsError>>()?;
    let max = counts.iter().copied().max().unwrap_or(0);
    let mut histogram = vec![0usize; max + 1];
    for &c in &counts {
        histogram[c] += 1;
    }
    let reps = replicates as f64;
    let log_n = (n as f64).ln();
    let tail = [2.0, 3.0]
        .iter()
        .map(|&b| {
            let exponent = records_tail_exponent(b);
            TailRow {
                b,
                frequency: counts.iter().filter(|&&c| c as f64 >= b * log_n).count() as f64 / reps,
                exponent,
                bound: (n as f64).powf(-exponent),
            }
        })
        .collect();
    Ok(RecordsReport {
        n,
        replicates,
        mean: counts.iter().sum::<usize>() as f64 / reps,
        harmonic: (1..=n).map(|k| 1.0 / k as f64).sum(),
        histogram,
        tail,
    })
}

/// Empirical `P(T*_k / T*_{k+1} >= 1 - u)` over all consecutive record
/// pairs of `replicates` sequences of length `n`, for each `u`.
pub fn record_ratio_table(
    law: &GapLaw,
    n: usize,
    replicates: usize,
    seed: u64,
    us: &[f64],
) -> Result<Vec<(f64, f64)>, StatsError> {
    let ratios = (0..replicates as u64)
        .into_par_iter()
        .map(|i| {
            let env = sample_environment(law, n, &mut stream(seed, "record-ratio", i))?;
            let gaps = compute_records(&env).record_gaps;
            Ok(gaps
                .windows(2)
                .map(|w| w[0] as f64 / w[1] as f64)
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<Vec<f64>>, StatsError>>()?
        .concat();
    let total = ratios.len().max(1) as f64;
    Ok(us
        .iter()
        .map(|&u| {
            (u, ratios.iter().filter(|&&r| r >= 1.0 - u).count() as f64 / total)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProductBoundRow {
    /// 1-based indexes `n_1 < … < n_p`.
    pub subset: Vec<usize>,
    /// Sequences (out of `values.len()^n`) on which every index is a record.
    pub count: u128,
    pub total: u128,
    /// `count · n_1 ⋯ n_p <= total`, checked in integers.
    pub holds: bool,
}

/// `E[I_{n_1} ⋯ I_{n_p}] <= 1/(n_1 ⋯ n_p)` for gaps uniform on `values`,
/// checked exactly over all `values.len()^n` sequences and all non-empty
/// index subsets of `{1, …, n}`.
pub fn product_bound_check(values: &[u64], n: usize) -> Vec<ProductBoundRow> {
    let k = values.len();
    let total = (k as u128).pow(n as u32);
    let subsets = 1usize << n;
    let mut counts = vec![0u128; subsets];
    let mut digits = vec![0usize; n];
    for _ in 0..total {
        let mut mask = 0usize;
        let mut best = 0u64;
        for (i, &d) in digits.iter().enumerate() {
            let t = values[d];
            if i == 0 || t > best {
                mask |= 1 << i;
            }
            best = best.max(t);
        }
        // every subset of the record mask is satisfied
        let mut s = mask;
        loop {
            counts[s] += 1;
            if s == 0 {
                break;
            }
            s = (s - 1) & mask;
        }
        for d in digits.iter_mut() {
            *d += 1;
            if *d < k {
                break;
            }
            *d = 0;
        }
    }
    (1..subsets)
        .map(|s| {
            let subset: Vec<usize> = (0..n).filter(|i| s >> i & 1 == 1).map(|i| i + 1).collect();
            let product: u128 = subset.iter().map(|&i| i as u128).product();
            ProductBoundRow {
                count: counts[s],
                total,
                holds: counts[s] * product <= total,
                subset,
            }
        })
        .collect()
}
