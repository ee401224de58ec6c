use serde::Serialize;

use super::StatsError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    /// DKW band at level 0.01 for this sample size.
    pub dkw_band: f64,
}

/// `√(ln(2/α) / (2m))`.
pub fn dkw_band(m: usize, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * m as f64)).sqrt()
}

/// One-sample Kolmogorov–Smirnov distance of a sorted sample to `cdf`.
pub fn ks_distance(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsResult, StatsError> {
    if sample.is_empty() {
        return Err(StatsError::EmptySample);
    }
    if let Some(i) = sample.windows(2).position(|w| !(w[0] <= w[1])) {
        return Err(StatsError::Unsorted(i + 1));
    }
    let m = sample.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sample.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / m).max((i + 1) as f64 / m - f);
    }
    Ok(KsResult {
        statistic: d,
        dkw_band: dkw_band(sample.len(), 0.01),
    })
}

/// Two-sample Kolmogorov–Smirnov statistic; inputs need not be sorted.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    Ok(d)
}

/// Asymptotic critical value of the two-sample statistic at level `alpha`.
pub fn two_sample_critical(n: usize, m: usize, alpha: f64) -> f64 {
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    c * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_value() {
        assert!((dkw_band(100_000, 0.01) - 0.005147).abs() < 1e-6);
        assert!((two_sample_critical(100_000, 100_000, 0.01) - 1.6276 * 2e-5f64.sqrt()).abs() < 1e-5);
    }

    #[test]
    fn constant_sample_is_far() {
        let sample = vec![0.5; 100];
        let r = ks_distance(&sample, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(r.statistic >= 0.5);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(ks_distance(&[], |x| x), Err(StatsError::EmptySample)));
        assert!(matches!(ks_distance(&[0.2, 0.1], |x| x), Err(StatsError::Unsorted(1))));
    }

    #[test]
    fn two_sample_is_symmetric() {
        let a = [0.1, 0.5, 0.3, 0.9];
        let b = [0.2, 0.25, 0.7];
        assert_eq!(ks_two_sample(&a, &b).unwrap(), ks_two_sample(&b, &a).unwrap());
        assert_eq!(ks_two_sample(&a, &a).unwrap(), 0.0);
        assert_eq!(ks_two_sample(&[0.0], &[1.0]).unwrap(), 1.0);
    }

    #[test]
    fn exact_grid_sample() {
        // midpoints of m cells: distance 1/(2m)
        let m = 50;
        let s: Vec<f64> = (0..m).map(|i| (i as f64 + 0.5) / m as f64).collect();
        let r = ks_distance(&s, |x| x).unwrap();
        assert!((r.statistic - 0.5 / m as f64).abs() < 1e-15);
    }
}
