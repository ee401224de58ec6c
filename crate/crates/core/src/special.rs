//! Power sums used by the gap laws: Riemann/Hurwitz zeta tails and their
//! logarithmic companions, evaluated by a short direct sum followed by an
//! Euler–Maclaurin tail.

/// B_{2j} / (2j)! for j = 1..=6.
const BERNOULLI_OVER_FACTORIAL: [f64; 6] = [
    1.0 / 6.0 / 2.0,
    -1.0 / 30.0 / 24.0,
    1.0 / 42.0 / 720.0,
    -1.0 / 30.0 / 40_320.0,
    5.0 / 66.0 / 3_628_800.0,
    -691.0 / 2730.0 / 479_001_600.0,
];

/// Sites summed directly before switching to Euler–Maclaurin.
const DIRECT_TERMS: u64 = 64;

/// `Σ_{k ≥ a} k^{-s}` for `s > 1`, `a ≥ 1`.
pub fn hurwitz_tail(s: f64, a: u64) -> f64 {
    assert!(s > 1.0 && a >= 1, "hurwitz_tail needs s > 1 and a >= 1");
    let start = a.max(DIRECT_TERMS);
    let direct: f64 = (a..start).map(|k| (k as f64).powf(-s)).sum();
    let x = start as f64;
    let mut tail = x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s);
    // f^{(2j-1)}(x) = -(s)_{2j-1} x^{-s-2j+1}
    let mut rising = s;
    for (j, coef) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        let m = 2 * j + 1;
        if j > 0 {
            rising *= (s + (m - 2) as f64) * (s + (m - 1) as f64);
        }
        tail += coef * rising * x.powf(-s - m as f64);
    }
    direct + tail
}

/// Riemann zeta for real `s > 1`.
pub fn zeta(s: f64) -> f64 {
    hurwitz_tail(s, 1)
}

/// `Σ_{k ≥ a} k^{-s} ln k` for `s > 1`, `a ≥ 1`.
pub fn log_weighted_tail(s: f64, a: u64) -> f64 {
    assert!(s > 1.0 && a >= 1, "log_weighted_tail needs s > 1 and a >= 1");
    let start = a.max(DIRECT_TERMS);
    let direct: f64 = (a..start)
        .map(|k| {
            let k = k as f64;
            k.powf(-s) * k.ln()
        })
        .sum();
    let x = start as f64;
    let lx = x.ln();
    let mut tail = x.powf(1.0 - s) * (lx / (s - 1.0) + 1.0 / ((s - 1.0) * (s - 1.0)))
        + 0.5 * x.powf(-s) * lx;
    // f^{(m)}(x) = (-1)^m (s)_m x^{-s-m} [ln x - Σ_{i<m} 1/(s+i)]
    let mut rising = 1.0;
    let mut harmonic = 0.0;
    let mut m = 0usize;
    for coef in BERNOULLI_OVER_FACTORIAL.iter() {
        let target = if m == 0 { 1 } else { m + 2 };
        while m < target {
            rising *= s + m as f64;
            harmonic += 1.0 / (s + m as f64);
            m += 1;
        }
        // m is odd, so (-1)^m = -1 and the Euler–Maclaurin sign flips it back.
        tail += coef * rising * x.powf(-s - m as f64) * (lx - harmonic);
    }
    direct + tail
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zeta_two_and_four() {
        assert!((zeta(2.0) - PI * PI / 6.0).abs() < 1e-14);
        assert!((zeta(4.0) - PI.powi(4) / 90.0).abs() < 1e-14);
    }

    #[test]
    fn zeta_near_one_behaves_like_pole() {
        // ζ(s) = 1/(s-1) + γ_E + O(s-1)
        let s = 1.0 + 1e-3;
        let euler_gamma = 0.577_215_664_901_532_9;
        assert!((zeta(s) - 1.0 / (s - 1.0) - euler_gamma).abs() < 1e-3);
    }

    #[test]
    fn derivative_of_zeta_at_two() {
        // -ζ'(2) = Σ ln k / k² = 0.93754825431584375...
        assert!((log_weighted_tail(2.0, 1) - 0.937_548_254_315_843_8).abs() < 1e-13);
    }

    #[test]
    fn tails_match_direct_partial_sums() {
        for &s in &[1.3, 2.0, 3.5] {
            let head: f64 = (1..200u64).map(|k| (k as f64).powf(-s)).sum();
            assert!((hurwitz_tail(s, 1) - head - hurwitz_tail(s, 200)).abs() < 1e-13);
            let head_log: f64 = (5..300u64)
                .map(|k| (k as f64).powf(-s) * (k as f64).ln())
                .sum();
            assert!(
                (log_weighted_tail(s, 5) - head_log - log_weighted_tail(s, 300)).abs() < 1e-12
            );
        }
    }
}
