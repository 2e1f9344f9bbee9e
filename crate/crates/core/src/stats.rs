//! Paired-difference statistics: paired t, Student-t tails, 95% intervals,
//! Likert aggregation and preference counts.
//!
//! p-values are one-tailed by default, in the direction of the observed mean
//! difference. Intervals are two-sided.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const BETA_EPS: f64 = 1e-15;
const BETA_MAX_ITER: usize = 10_000;

/// ln Γ(x) for x > 0 (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // Reflection.
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + 7.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Continued fraction for the incomplete beta (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    let tiny = 1e-300;
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < tiny {
        d = tiny;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=BETA_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = 1.0 + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = 1.0 + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < BETA_EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta I_x(a, b).
pub fn incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

/// Student-t CDF `P(T ≤ t)` with `df` degrees of freedom.
pub fn t_cdf(t: f64, df: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    if t == f64::INFINITY {
        return 1.0;
    }
    if t == f64::NEG_INFINITY {
        return 0.0;
    }
    let t2 = t * t;
    if t2 < df {
        // Near zero the central mass keeps full precision.
        let central = incomplete_beta(0.5, df / 2.0, t2 / (df + t2));
        return 0.5 + 0.5 * t.signum() * central;
    }
    let tail = 0.5 * incomplete_beta(df / 2.0, 0.5, df / (df + t2));
    if t > 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

fn check_df(df: f64) -> Result<()> {
    if !(df >= 1.0) || !df.is_finite() {
        return Err(Error::contract(format!("degrees of freedom must be ≥ 1, got {df}")));
    }
    Ok(())
}

/// Lower-tail probability `P(T ≤ t)`, the one-tailed p for a hypothesis of a
/// negative difference. `one_tailed_p(t) + one_tailed_p(-t) = 1`.
pub fn one_tailed_p(t: f64, df: f64) -> Result<f64> {
    check_df(df)?;
    Ok(t_cdf(t, df))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    /// `P(T ≤ t)`
    Lower,
    /// `P(T ≥ t)`
    Upper,
}

impl Tail {
    /// The tail matching the sign of an observed statistic.
    pub fn observed(t: f64) -> Tail {
        if t < 0.0 {
            Tail::Lower
        } else {
            Tail::Upper
        }
    }

    pub fn p(self, t: f64, df: f64) -> Result<f64> {
        check_df(df)?;
        Ok(match self {
            Tail::Lower => t_cdf(t, df),
            Tail::Upper => t_cdf(-t, df),
        })
    }
}

pub fn two_tailed_p(t: f64, df: f64) -> Result<f64> {
    check_df(df)?;
    Ok((2.0 * t_cdf(-t.abs(), df)).min(1.0))
}

/// Inverse Student-t CDF by bisection on [`t_cdf`].
pub fn t_quantile(p: f64, df: f64) -> Result<f64> {
    check_df(df)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::contract(format!("quantile level must be in (0, 1), got {p}")));
    }
    let (mut lo, mut hi) = (-1.0, 1.0);
    while t_cdf(lo, df) > p {
        lo *= 2.0;
    }
    while t_cdf(hi, df) < p {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if t_cdf(mid, df) < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.abs().max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `mean / (std / √n)`.
pub fn t_from_summary(mean_diff: f64, std: f64, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::contract(format!("need n ≥ 2, got {n}")));
    }
    if !(std > 0.0) {
        return Err(Error::contract(format!("standard deviation must be positive, got {std}")));
    }
    Ok(mean_diff / (std / (n as f64).sqrt()))
}

/// Two-sided 95% interval `mean ∓ t(0.975, n−1)·std/√n`.
pub fn ci95(mean_diff: f64, std: f64, n: usize) -> Result<(f64, f64)> {
    if n < 2 {
        return Err(Error::contract(format!("need n ≥ 2, got {n}")));
    }
    if !(std >= 0.0) {
        return Err(Error::contract(format!("standard deviation must be ≥ 0, got {std}")));
    }
    let half = t_quantile(0.975, (n - 1) as f64)? * std / (n as f64).sqrt();
    Ok((mean_diff - half, mean_diff + half))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedSummary {
    pub n: usize,
    pub mean_diff: f64,
    pub std_diff: f64,
    pub sem: f64,
    pub t: f64,
    pub p_one_tailed: f64,
    pub tail: Tail,
    pub ci95: (f64, f64),
}

impl PairedSummary {
    /// Summary from published `(mean, std, n)`, one-tailed in the observed direction.
    pub fn from_summary(mean_diff: f64, std_diff: f64, n: usize) -> Result<Self> {
        Self::build(mean_diff, std_diff, n, None)
    }

    pub fn from_summary_with_tail(mean_diff: f64, std_diff: f64, n: usize, tail: Tail) -> Result<Self> {
        Self::build(mean_diff, std_diff, n, Some(tail))
    }

    fn build(mean_diff: f64, std_diff: f64, n: usize, tail: Option<Tail>) -> Result<Self> {
        if n < 2 {
            return Err(Error::contract(format!("paired test needs n ≥ 2, got {n}")));
        }
        if !(std_diff >= 0.0) || !mean_diff.is_finite() {
            return Err(Error::contract(format!("invalid summary (mean {mean_diff}, std {std_diff})")));
        }
        let df = (n - 1) as f64;
        let sem = std_diff / (n as f64).sqrt();
        let t = if sem > 0.0 {
            mean_diff / sem
        } else if mean_diff == 0.0 {
            0.0
        } else {
            mean_diff.signum() * f64::INFINITY
        };
        let tail = tail.unwrap_or(Tail::observed(t));
        let p = if sem == 0.0 && mean_diff == 0.0 { 0.5 } else { tail.p(t, df)? };
        Ok(PairedSummary { n, mean_diff, std_diff, sem, t, p_one_tailed: p, tail, ci95: ci95(mean_diff, std_diff, n)? })
    }

    pub fn p_two_tailed(&self) -> f64 {
        if self.sem == 0.0 && self.mean_diff == 0.0 {
            return 1.0;
        }
        two_tailed_p(self.t, (self.n - 1) as f64).unwrap_or(f64::NAN)
    }
}

/// Paired t-test on differences, one-tailed in the observed direction.
pub fn paired_t(diffs: &[f64]) -> Result<PairedSummary> {
    let (mean, std) = mean_std(diffs)?;
    PairedSummary::from_summary(mean, std, diffs.len())
}

pub fn paired_t_with_tail(diffs: &[f64], tail: Tail) -> Result<PairedSummary> {
    let (mean, std) = mean_std(diffs)?;
    PairedSummary::from_summary_with_tail(mean, std, diffs.len(), tail)
}

/// Mean and sample standard deviation (n − 1 denominator).
fn mean_std(xs: &[f64]) -> Result<(f64, f64)> {
    if xs.len() < 2 {
        return Err(Error::contract(format!("paired test needs n ≥ 2, got {}", xs.len())));
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::contract("differences must be finite"));
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    Ok((mean, var.sqrt()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LikertRecord {
    pub participant: String,
    pub shape: String,
    pub tool: String,
    pub score: u8,
}

impl LikertRecord {
    pub fn new(participant: &str, shape: &str, tool: &str, score: u8) -> Result<Self> {
        if !(1..=5).contains(&score) {
            return Err(Error::contract(format!("Likert score must be 1..5, got {score}")));
        }
        Ok(LikertRecord { participant: participant.into(), shape: shape.into(), tool: tool.into(), score })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LikertAggregate {
    pub count: usize,
    pub avg: f64,
    pub median: f64,
}

/// Mean and median score per (shape, tool).
pub fn aggregate_likert(records: &[LikertRecord]) -> BTreeMap<(String, String), LikertAggregate> {
    let mut groups: BTreeMap<(String, String), Vec<u8>> = BTreeMap::new();
    for r in records {
        groups.entry((r.shape.clone(), r.tool.clone())).or_default().push(r.score);
    }
    groups
        .into_iter()
        .map(|(k, mut s)| {
            s.sort_unstable();
            let n = s.len();
            let avg = s.iter().map(|&x| x as f64).sum::<f64>() / n as f64;
            let median = if n % 2 == 1 { s[n / 2] as f64 } else { (s[n / 2 - 1] as f64 + s[n / 2] as f64) / 2.0 };
            (k, LikertAggregate { count: n, avg, median })
        })
        .collect()
}

/// Counts of `a > b`, `a = b`, `a < b`.
pub fn preference_counts<T: PartialOrd>(pairs: &[(T, T)]) -> (usize, usize, usize) {
    let mut c = (0, 0, 0);
    for (a, b) in pairs {
        if a > b {
            c.0 += 1;
        } else if a < b {
            c.2 += 1;
        } else {
            c.1 += 1;
        }
    }
    c
}

/// One raw observation: `participant, shape, tool, measure, value`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub participant: String,
    pub shape: String,
    pub tool: String,
    pub measure: String,
    pub value: f64,
}

pub fn read_observations(text: &str, source_name: &str) -> Result<Vec<Observation>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in rdr.deserialize() {
        out.push(rec.map_err(|e: csv::Error| {
            Error::parse(source_name, e.position().map(|p| p.line() as usize).unwrap_or(0), e.to_string())
        })?);
    }
    Ok(out)
}

/// Per-measure paired tests of `second − first`, where the two tools are
/// ordered by name and observations pair up on (participant, shape).
pub fn paired_by_measure(obs: &[Observation]) -> Result<BTreeMap<String, (String, String, PairedSummary)>> {
    type ByPair<'a> = BTreeMap<(&'a str, &'a str), BTreeMap<&'a str, f64>>;
    let mut by_measure: BTreeMap<&str, ByPair> = BTreeMap::new();
    for o in obs {
        let slot = by_measure.entry(&o.measure).or_default().entry((&o.participant, &o.shape)).or_default();
        if slot.insert(&o.tool, o.value).is_some() {
            return Err(Error::contract(format!(
                "duplicate observation for {}/{}/{}/{}",
                o.participant, o.shape, o.tool, o.measure
            )));
        }
    }
    let mut out = BTreeMap::new();
    for (measure, cells) in by_measure {
        let mut tools: Vec<&str> = cells.values().flat_map(|m| m.keys().copied()).collect();
        tools.sort_unstable();
        tools.dedup();
        let [a, b] = tools[..] else {
            return Err(Error::contract(format!("measure {measure} needs exactly two tools, found {tools:?}")));
        };
        let mut diffs = Vec::new();
        for ((p, s), m) in &cells {
            match (m.get(a), m.get(b)) {
                (Some(x), Some(y)) => diffs.push(y - x),
                _ => return Err(Error::contract(format!("unpaired observation for {p}/{s} in {measure}"))),
            }
        }
        out.insert(measure.to_string(), (a.to_string(), b.to_string(), paired_t(&diffs)?));
    }
    Ok(out)
}

/// A published summary tuple: `measure, mean_diff, std, n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryTuple {
    pub measure: String,
    pub mean_diff: f64,
    pub std: f64,
    pub n: usize,
}

pub fn read_summary_tuples(text: &str, source_name: &str) -> Result<Vec<SummaryTuple>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in rdr.deserialize() {
        out.push(rec.map_err(|e: csv::Error| {
            Error::parse(source_name, e.position().map(|p| p.line() as usize).unwrap_or(0), e.to_string())
        })?);
    }
    Ok(out)
}
