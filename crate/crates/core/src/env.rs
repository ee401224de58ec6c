//! Trap environments: gap laws, renewal sampling, records and the rescaled
//! point measures of the gap sequence.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Zeta};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::special;

#[derive(Debug, Error, PartialEq)]
pub enum EnvError {
    #[error("tail exponent must be positive and finite, got {0}")]
    InvalidGamma(f64),
    #[error("environment needs at least one gap")]
    Empty,
    #[error("gap {0} is not a positive integer")]
    ZeroGap(usize),
    #[error("trap position overflowed 2^63 - 1 after {0} gaps")]
    Overflow(usize),
    #[error("unknown gap law `{0}`")]
    UnknownLaw(String),
    #[error("malformed environment file: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

/// Family of the gap distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LawKind {
    /// `P(T >= k) = k^-γ`.
    DiscretePareto,
    /// `P(T = k) = k^-(1+γ) / ζ(1+γ)`.
    Zeta,
}

impl fmt::Display for LawKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LawKind::DiscretePareto => "discrete-pareto",
            LawKind::Zeta => "zeta",
        })
    }
}

impl FromStr for LawKind {
    type Err = EnvError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "discrete-pareto" | "pareto" => Ok(LawKind::DiscretePareto),
            "zeta" => Ok(LawKind::Zeta),
            other => Err(EnvError::UnknownLaw(other.to_string())),
        }
    }
}

/// A power-tailed law on the positive integers.
///
/// `c_tau` follows the point-mass convention `P(T = n) ~ c_tau n^-(1+γ)`.
/// The Poisson limit of the rescaled gaps is driven by the tail constant
/// `lim m^γ P(T > m) = c_tau / γ`, see [`GapLaw::tail_constant`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapLaw {
    gamma: f64,
    kind: LawKind,
}

impl GapLaw {
    pub fn new(kind: LawKind, gamma: f64) -> Result<Self, EnvError> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(EnvError::InvalidGamma(gamma));
        }
        Ok(Self { gamma, kind })
    }

    pub fn discrete_pareto(gamma: f64) -> Result<Self, EnvError> {
        Self::new(LawKind::DiscretePareto, gamma)
    }

    pub fn zeta(gamma: f64) -> Result<Self, EnvError> {
        Self::new(LawKind::Zeta, gamma)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn kind(&self) -> LawKind {
        self.kind
    }

    /// Constant of the point-mass asymptotics `P(T = n) ~ c_tau n^-(1+γ)`.
    pub fn c_tau(&self) -> f64 {
        match self.kind {
            LawKind::DiscretePareto => self.gamma,
            LawKind::Zeta => 1.0 / special::zeta(1.0 + self.gamma),
        }
    }

    /// Constant of the tail asymptotics `P(T > m) ~ tail_constant m^-γ`.
    ///
    /// This is the mass that the limiting Poisson process puts on
    /// `[0, 1] × [1, ∞)`.
    pub fn tail_constant(&self) -> f64 {
        self.c_tau() / self.gamma
    }

    /// `P(T = k)`.
    pub fn pmf(&self, k: u64) -> f64 {
        if k == 0 {
            return 0.0;
        }
        let x = k as f64;
        match self.kind {
            LawKind::DiscretePareto => x.powf(-self.gamma) - (x + 1.0).powf(-self.gamma),
            LawKind::Zeta => x.powf(-(1.0 + self.gamma)) / special::zeta(1.0 + self.gamma),
        }
    }

    /// `P(T >= k)`.
    pub fn tail(&self, k: u64) -> f64 {
        if k <= 1 {
            return 1.0;
        }
        match self.kind {
            LawKind::DiscretePareto => (k as f64).powf(-self.gamma),
            LawKind::Zeta => {
                let s = 1.0 + self.gamma;
                special::hurwitz_tail(s, k) / special::zeta(s)
            }
        }
    }

    /// Inverse transform of the discrete Pareto law: `⌊u^{-1/γ}⌋`.
    ///
    /// Returns `None` when the gap does not fit in a signed 64-bit position.
    pub fn pareto_from_uniform(&self, u: f64) -> Option<u64> {
        let t = u.powf(-1.0 / self.gamma).floor();
        (t.is_finite() && t >= 1.0 && t < i64::MAX as f64).then_some(t as u64)
    }

    /// Draw one gap.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<u64> {
        match self.kind {
            LawKind::DiscretePareto => {
                // uniform on (0, 1): 1 - [0, 1)
                let u = 1.0 - rng.random::<f64>();
                self.pareto_from_uniform(u)
            }
            LawKind::Zeta => {
                let t = Zeta::new(1.0 + self.gamma)
                    .expect("exponent above one")
                    .sample(rng);
                (t.is_finite() && t >= 1.0 && t < i64::MAX as f64).then_some(t as u64)
            }
        }
    }

    /// `E[ln T]`, accurate to well below 1e-10.
    pub fn mean_log_gap(&self) -> f64 {
        match self.kind {
            LawKind::DiscretePareto => {
                // Abel summation: E ln T = Σ_{k≥2} k^-γ ln(k/(k-1)).
                const HEAD: u64 = 1000;
                let g = self.gamma;
                let head: f64 = (2..HEAD)
                    .map(|k| {
                        let x = k as f64;
                        x.powf(-g) * (-(-1.0 / x).ln_1p())
                    })
                    .sum();
                // ln(k/(k-1)) = Σ_{m≥1} k^-m / m; 10 terms leave < HEAD^-10.
                let tail: f64 = (1..=10)
                    .map(|m| special::hurwitz_tail(g + m as f64, HEAD) / m as f64)
                    .sum();
                head + tail
            }
            LawKind::Zeta => {
                let s = 1.0 + self.gamma;
                special::log_weighted_tail(s, 1) / special::zeta(s)
            }
        }
    }
}

/// A finite stretch of a renewal trap set, `τ_0 = 0 < τ_1 < … < τ_m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct Environment {
    gaps: Vec<u64>,
    positions: Vec<u64>,
}

impl TryFrom<Vec<u64>> for Environment {
    type Error = EnvError;

    fn try_from(gaps: Vec<u64>) -> Result<Self, Self::Error> {
        Environment::from_gaps(gaps)
    }
}

impl From<Environment> for Vec<u64> {
    fn from(env: Environment) -> Self {
        env.gaps
    }
}

impl Environment {
    pub fn from_gaps(gaps: Vec<u64>) -> Result<Self, EnvError> {
        if gaps.is_empty() {
            return Err(EnvError::Empty);
        }
        let mut positions = Vec::with_capacity(gaps.len() + 1);
        positions.push(0u64);
        let mut acc = 0u64;
        for (i, &t) in gaps.iter().enumerate() {
            if t == 0 {
                return Err(EnvError::ZeroGap(i));
            }
            acc = acc
                .checked_add(t)
                .filter(|&p| p <= i64::MAX as u64)
                .ok_or(EnvError::Overflow(i + 1))?;
            positions.push(acc);
        }
        Ok(Self { gaps, positions })
    }

    /// Gaps `T_1, …, T_m`.
    pub fn gaps(&self) -> &[u64] {
        &self.gaps
    }

    /// Trap positions `τ_0 = 0, …, τ_m`.
    pub fn positions(&self) -> &[u64] {
        &self.positions
    }

    /// Number of gaps `m`.
    pub fn len(&self) -> usize {
        self.gaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaps.is_empty()
    }

    /// Position of the last trap, `τ_m`.
    pub fn last_position(&self) -> u64 {
        *self.positions.last().expect("at least τ_0")
    }

    pub fn is_trap(&self, x: u64) -> bool {
        self.positions.binary_search(&x).is_ok()
    }

    /// Append gaps in place.
    pub fn extend<I: IntoIterator<Item = u64>>(&mut self, gaps: I) -> Result<(), EnvError> {
        for t in gaps {
            if t == 0 {
                return Err(EnvError::ZeroGap(self.gaps.len()));
            }
            let next = self
                .last_position()
                .checked_add(t)
                .filter(|&p| p <= i64::MAX as u64)
                .ok_or(EnvError::Overflow(self.gaps.len() + 1))?;
            self.gaps.push(t);
            self.positions.push(next);
        }
        Ok(())
    }

    /// Prefix made of the first `count` gaps.
    pub fn prefix(&self, count: usize) -> Result<Self, EnvError> {
        Self::from_gaps(self.gaps[..count.min(self.gaps.len())].to_vec())
    }

    /// Write the line-delimited text format: a header line followed by one
    /// gap per line.
    pub fn write_text<W: Write>(&self, mut out: W, header: &EnvHeader) -> Result<(), EnvError> {
        let io = |e: std::io::Error| EnvError::Io(e.to_string());
        writeln!(out, "{header}").map_err(io)?;
        for t in &self.gaps {
            writeln!(out, "{t}").map_err(io)?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(input: R) -> Result<(EnvHeader, Self), EnvError> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| EnvError::Parse("missing header".into()))?
            .map_err(|e| EnvError::Io(e.to_string()))?
            .parse::<EnvHeader>()?;
        let mut gaps = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line.map_err(|e| EnvError::Io(e.to_string()))?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let t = line
                .parse::<u64>()
                .map_err(|e| EnvError::Parse(format!("line {}: {e}", i + 2)))?;
            gaps.push(t);
        }
        Ok((header, Self::from_gaps(gaps)?))
    }
}

/// Header of the text environment format: `gamma=<g> law=<kind> seed=<s>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvHeader {
    pub gamma: f64,
    pub law: LawKind,
    pub seed: u64,
}

impl EnvHeader {
    pub fn law(&self) -> Result<GapLaw, EnvError> {
        GapLaw::new(self.law, self.gamma)
    }
}

impl fmt::Display for EnvHeader {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "gamma={} law={} seed={}", self.gamma, self.law, self.seed)
    }
}

impl FromStr for EnvHeader {
    type Err = EnvError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (mut gamma, mut law, mut seed) = (None, None, None);
        for field in s.split_whitespace() {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| EnvError::Parse(format!("bad header field `{field}`")))?;
            let bad = |e: &dyn fmt::Display| EnvError::Parse(format!("{key}: {e}"));
            match key {
                "gamma" => gamma = Some(value.parse::<f64>().map_err(|e| bad(&e))?),
                "law" => law = Some(value.parse::<LawKind>()?),
                "seed" => seed = Some(value.parse::<u64>().map_err(|e| bad(&e))?),
                _ => return Err(EnvError::Parse(format!("unknown header key `{key}`"))),
            }
        }
        match (gamma, law, seed) {
            (Some(gamma), Some(law), Some(seed)) => Ok(Self { gamma, law, seed }),
            _ => Err(EnvError::Parse("header needs gamma, law and seed".into())),
        }
    }
}

/// Draw `count` i.i.d. gaps.
pub fn sample_environment<R: Rng + ?Sized>(
    law: &GapLaw,
    count: usize,
    rng: &mut R,
) -> Result<Environment, EnvError> {
    if count == 0 {
        return Err(EnvError::Empty);
    }
    let mut gaps = Vec::with_capacity(count);
    for i in 0..count {
        gaps.push(law.sample(rng).ok_or(EnvError::Overflow(i + 1))?);
    }
    Environment::from_gaps(gaps)
}

/// Draw gaps until the last trap sits at or beyond `reach`.
pub fn sample_environment_covering<R: Rng + ?Sized>(
    law: &GapLaw,
    reach: u64,
    rng: &mut R,
) -> Result<Environment, EnvError> {
    let first = law.sample(rng).ok_or(EnvError::Overflow(1))?;
    let mut env = Environment::from_gaps(vec![first])?;
    while env.last_position() < reach {
        let t = law.sample(rng).ok_or(EnvError::Overflow(env.len() + 1))?;
        env.extend([t])?;
    }
    Ok(env)
}

/// Records of the gap sequence.
///
/// `record_indexes[k] = i(k)` with `i(0) = 0`, and `i(k)` the first index
/// after `i(k-1)` whose following gap strictly beats `T_{i(k-1)+1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RecordSequence {
    pub record_indexes: Vec<usize>,
    /// `T*_k = T_{i(k)+1}`.
    pub record_gaps: Vec<u64>,
    /// `τ*_k = τ_{i(k)}`.
    pub record_positions: Vec<u64>,
}

impl RecordSequence {
    pub fn len(&self) -> usize {
        self.record_indexes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.record_indexes.is_empty()
    }
}

/// Ties never create records.
pub fn compute_records(env: &Environment) -> RecordSequence {
    let gaps = env.gaps();
    let mut record_indexes = vec![0usize];
    let mut best = gaps[0];
    for (i, &t) in gaps.iter().enumerate().skip(1) {
        if t > best {
            record_indexes.push(i);
            best = t;
        }
    }
    let record_gaps = record_indexes.iter().map(|&i| gaps[i]).collect();
    let record_positions = record_indexes.iter().map(|&i| env.positions()[i]).collect();
    RecordSequence {
        record_indexes,
        record_gaps,
        record_positions,
    }
}

/// Number of records among the first `n` gaps, i.e. `Σ_{k ≤ n} I_k`.
pub fn record_count(gaps: &[u64]) -> usize {
    let mut best = 0u64;
    gaps.iter()
        .filter(|&&t| {
            let is_record = t > best;
            best = best.max(t);
            is_record
        })
        .count()
}

/// A finite point measure on `[0, ∞) × (0, ∞)`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PointMeasure {
    pub points: Vec<(f64, f64)>,
}

impl PointMeasure {
    pub fn new(points: Vec<(f64, f64)>) -> Self {
        debug_assert!(points.iter().all(|&(x, y)| x >= 0.0 && y > 0.0));
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points with `x <= x_max` and `y >= y_min`.
    pub fn window(&self, x_max: f64, y_min: f64) -> Self {
        Self {
            points: self
                .points
                .iter()
                .copied()
                .filter(|&(x, y)| x <= x_max && y >= y_min)
                .collect(),
        }
    }

    pub fn count_in(&self, x_max: f64, y_min: f64) -> usize {
        self.points
            .iter()
            .filter(|&&(x, y)| x <= x_max && y >= y_min)
            .count()
    }
}

/// `((i-1)/scale, T_i / scale^{1/γ})` for every gap.
///
/// `scale` is real so that the convergence experiment can rescale by the
/// non-integer `N = n^{γ/(γ+2)}`.
pub fn rescaled_point_measure(env: &Environment, gamma: f64, scale: f64) -> PointMeasure {
    let y_unit = scale.powf(1.0 / gamma);
    PointMeasure::new(
        env.gaps()
            .iter()
            .enumerate()
            .map(|(i, &t)| (i as f64 / scale, t as f64 / y_unit))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn inverse_transform_half() {
        let law = GapLaw::discrete_pareto(1.0).unwrap();
        assert_eq!(law.pareto_from_uniform(0.5), Some(2));
        assert_eq!(law.pareto_from_uniform(1.0), Some(1));
    }

    #[test]
    fn inverse_transform_acceptance_regions_are_exact() {
        // ⌊u^{-1/γ}⌋ >= k  ⇔  u <= k^{-γ}: probe just inside and outside.
        for &gamma in &[0.5, 1.0, 2.0, 3.0] {
            let law = GapLaw::discrete_pareto(gamma).unwrap();
            for k in 1..200u64 {
                let edge = (k as f64).powf(-gamma);
                assert!(law.pareto_from_uniform(edge * (1.0 - 1e-12)).unwrap() >= k);
                if k > 1 {
                    assert!(law.pareto_from_uniform(edge * (1.0 + 1e-12)).unwrap() < k);
                }
            }
        }
    }

    #[test]
    fn bad_parameters_are_rejected() {
        assert_eq!(GapLaw::discrete_pareto(0.0), Err(EnvError::InvalidGamma(0.0)));
        assert!(GapLaw::zeta(-1.0).is_err());
        let law = GapLaw::discrete_pareto(1.0).unwrap();
        assert_eq!(
            sample_environment(&law, 0, &mut stream(0, "env", 0)),
            Err(EnvError::Empty)
        );
        assert_eq!(Environment::from_gaps(vec![1, 0]), Err(EnvError::ZeroGap(1)));
    }

    #[test]
    fn positions_overflow_is_detected() {
        let big = i64::MAX as u64 / 2 + 1;
        assert_eq!(
            Environment::from_gaps(vec![big, big]),
            Err(EnvError::Overflow(2))
        );
    }

    #[test]
    fn zeta_point_mass_at_one() {
        let law = GapLaw::zeta(1.0).unwrap();
        let six_over_pi2 = 6.0 / std::f64::consts::PI.powi(2);
        assert!((law.pmf(1) - six_over_pi2).abs() < 1e-14);
        assert!((law.pmf(1) - 0.6079).abs() < 1e-4);
        assert!((law.tail(2) - (1.0 - six_over_pi2)).abs() < 1e-13);
    }

    #[test]
    fn pareto_tail_frequency_at_ten() {
        for (i, &gamma) in [0.5, 1.0, 2.0].iter().enumerate() {
            let law = GapLaw::discrete_pareto(gamma).unwrap();
            let mut rng = stream(11, "tail-test", i as u64);
            let draws = 1_000_000;
            let hits = (0..draws)
                .filter(|_| law.sample(&mut rng).unwrap() >= 10)
                .count() as f64;
            let p = 10f64.powf(-gamma);
            let sd = (draws as f64 * p * (1.0 - p)).sqrt();
            assert!(
                (hits - draws as f64 * p).abs() < 4.0 * sd,
                "gamma {gamma}: {hits} vs {}",
                draws as f64 * p
            );
        }
    }

    #[test]
    fn zeta_sampler_matches_pmf() {
        let law = GapLaw::zeta(1.5).unwrap();
        let mut rng = stream(3, "zeta-test", 0);
        let draws = 200_000;
        let mut counts = [0usize; 4];
        for _ in 0..draws {
            let t = law.sample(&mut rng).unwrap();
            if t <= 3 {
                counts[t as usize] += 1;
            }
        }
        for k in 1..=3u64 {
            let p = law.pmf(k);
            let sd = (draws as f64 * p * (1.0 - p)).sqrt();
            assert!((counts[k as usize] as f64 - draws as f64 * p).abs() < 4.0 * sd);
        }
    }

    #[test]
    fn mean_log_gap_pareto_against_direct_series() {
        let law = GapLaw::discrete_pareto(1.0).unwrap();
        let terms = 1_000_000u64;
        let direct: f64 = (1..=terms)
            .map(|k| {
                let x = k as f64;
                (1.0 / x - 1.0 / (x + 1.0)) * x.ln()
            })
            .sum();
        // Σ_{k>K} ln k / (k(k+1)) <= ∫_K^∞ ln x / x² dx = (ln K + 1)/K
        let k = terms as f64;
        let tail_bound = (k.ln() + 1.0) / k;
        let value = law.mean_log_gap();
        assert!(value >= direct && value - direct <= tail_bound);
    }

    #[test]
    fn mean_log_gap_zeta_one() {
        let value = GapLaw::zeta(1.0).unwrap().mean_log_gap();
        assert!((value - 0.5700).abs() < 1e-4);
        let direct: f64 = (1..2_000_000u64)
            .map(|k| {
                let x = k as f64;
                x.ln() / (x * x)
            })
            .sum::<f64>()
            / crate::special::zeta(2.0);
        assert!((value - direct).abs() < 1e-5);
    }

    #[test]
    fn mean_log_gap_vanishes_for_thin_tails() {
        let value = GapLaw::discrete_pareto(60.0).unwrap().mean_log_gap();
        assert!(value > 0.0 && value < 1e-17);
    }

    #[test]
    fn record_examples() {
        let rec = compute_records(&Environment::from_gaps(vec![3, 1, 4, 1, 5]).unwrap());
        assert_eq!(rec.record_indexes, vec![0, 2, 4]);
        assert_eq!(rec.record_gaps, vec![3, 4, 5]);
        assert_eq!(rec.record_positions, vec![0, 4, 9]);

        let ties = compute_records(&Environment::from_gaps(vec![2, 2, 2]).unwrap());
        assert_eq!(ties.record_indexes, vec![0]);

        let m = 7;
        let mono = compute_records(&Environment::from_gaps((1..=m).collect()).unwrap());
        assert_eq!(mono.record_indexes, (0..m as usize).collect::<Vec<_>>());
    }

    #[test]
    fn record_count_matches_record_sequence() {
        let env = Environment::from_gaps(vec![2, 1, 2, 5, 3, 5, 9]).unwrap();
        assert_eq!(record_count(env.gaps()), compute_records(&env).len());
        assert_eq!(record_count(&[4]), 1);
    }

    #[test]
    fn rescaled_point_examples() {
        let env = Environment::from_gaps(vec![4]).unwrap();
        assert_eq!(rescaled_point_measure(&env, 1.0, 4.0).points, vec![(0.0, 1.0)]);
        let env = Environment::from_gaps(vec![1, 2]).unwrap();
        let pm = rescaled_point_measure(&env, 2.0, 1.0);
        assert_eq!(pm.points[0], (0.0, 1.0));
        assert_eq!(pm.points[1].0, 1.0);
        assert_eq!(pm.points[1].1, 2.0);
        assert_eq!(pm.window(0.5, 0.0).len(), 1);
        let pm = rescaled_point_measure(&env, 2.0, 4.0);
        assert_eq!(pm.points[1], (0.25, 1.0));
    }

    #[test]
    fn text_format_round_trip() {
        let env = Environment::from_gaps(vec![3, 1, 17]).unwrap();
        let header = EnvHeader {
            gamma: 1.5,
            law: LawKind::Zeta,
            seed: 42,
        };
        let mut buf = Vec::new();
        env.write_text(&mut buf, &header).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "gamma=1.5 law=zeta seed=42\n3\n1\n17\n"
        );
        let (h, e) = Environment::read_text(&buf[..]).unwrap();
        assert_eq!(h, header);
        assert_eq!(e, env);
        assert_eq!(serde_json::to_string(&env).unwrap(), "[3,1,17]");
        assert!(serde_json::from_str::<Environment>("[2,0]").is_err());
    }

    #[test]
    fn covering_environment_reaches_target() {
        let law = GapLaw::discrete_pareto(2.0).unwrap();
        let env = sample_environment_covering(&law, 5_000, &mut stream(1, "env", 0)).unwrap();
        assert!(env.last_position() >= 5_000);
        assert!(env.positions()[env.len() - 1] < 5_000);
    }
}
