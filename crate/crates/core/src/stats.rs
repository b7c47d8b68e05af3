//! Accuracy tables, exact binomial intervals and tests, correlation and
//! 2×2 odds ratios.

use std::collections::BTreeMap;
use std::io::Write;

use log::warn;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};
use statrs::function::factorial::ln_binomial;
use thiserror::Error;

use crate::record::EvalRecord;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("invalid arguments: {0}")]
    Domain(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("no records to summarize")]
    EmptyInput,
}

/// Interval estimator for binomial proportions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CiMethod {
    #[default]
    ClopperPearson,
    Wilson,
}

fn check_kn(k: u64, n: u64) -> Result<(), StatsError> {
    if n == 0 || k > n {
        return Err(StatsError::Domain(format!("need 0 <= k <= n and n >= 1, got k={k}, n={n}")));
    }
    Ok(())
}

/// Binomial probability mass P(X = i) for X ~ Bin(n, p).
pub fn binomial_pmf(i: u64, n: u64, p: f64) -> f64 {
    if i > n {
        return 0.0;
    }
    if p <= 0.0 {
        return if i == 0 { 1.0 } else { 0.0 };
    }
    if p >= 1.0 {
        return if i == n { 1.0 } else { 0.0 };
    }
    (ln_binomial(n, i) + i as f64 * p.ln() + (n - i) as f64 * (-p).ln_1p()).exp()
}

/// P(X <= k).
fn cdf(k: u64, n: u64, p: f64) -> f64 {
    (0..=k).map(|i| binomial_pmf(i, n, p)).sum()
}

/// P(X >= k).
fn sf(k: u64, n: u64, p: f64) -> f64 {
    (k..=n).map(|i| binomial_pmf(i, n, p)).sum()
}

/// Root of a monotone function on [0, 1] by bisection. `rising` tells
/// which way `f` moves as p grows.
fn bisect(f: impl Fn(f64) -> f64, target: f64, rising: bool) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) < target) == rising {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Exact Clopper–Pearson interval for k successes in n trials.
pub fn binomial_ci(k: u64, n: u64, level: f64) -> Result<(f64, f64), StatsError> {
    binomial_ci_with(k, n, level, CiMethod::ClopperPearson)
}

pub fn binomial_ci_with(k: u64, n: u64, level: f64, method: CiMethod) -> Result<(f64, f64), StatsError> {
    check_kn(k, n)?;
    if !(level > 0.0 && level < 1.0) {
        return Err(StatsError::Domain(format!("confidence level {level} outside (0, 1)")));
    }
    let alpha = 1.0 - level;
    match method {
        CiMethod::ClopperPearson => {
            let lo = if k == 0 { 0.0 } else { bisect(|p| sf(k, n, p), alpha / 2.0, true) };
            let hi = if k == n { 1.0 } else { bisect(|p| cdf(k, n, p), alpha / 2.0, false) };
            Ok((lo, hi))
        }
        CiMethod::Wilson => {
            let z = Normal::standard().inverse_cdf(1.0 - alpha / 2.0);
            let (nf, ph) = (n as f64, k as f64 / n as f64);
            let denom = 1.0 + z * z / nf;
            let centre = (ph + z * z / (2.0 * nf)) / denom;
            let half = z * (ph * (1.0 - ph) / nf + z * z / (4.0 * nf * nf)).sqrt() / denom;
            Ok(((centre - half).max(0.0), (centre + half).min(1.0)))
        }
    }
}

/// Two-sided exact binomial test: the total probability of outcomes no
/// more likely than the observed one.
pub fn binomial_test(k: u64, n: u64, p0: f64) -> Result<f64, StatsError> {
    if k > n {
        return Err(StatsError::Domain(format!("k={k} exceeds n={n}")));
    }
    if !(0.0..=1.0).contains(&p0) {
        return Err(StatsError::Domain(format!("p0={p0} outside [0, 1]")));
    }
    let observed = binomial_pmf(k, n, p0);
    let cutoff = observed * (1.0 + 1e-7);
    let p: f64 = (0..=n).map(|i| binomial_pmf(i, n, p0)).filter(|&q| q <= cutoff).sum();
    Ok(p.min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PearsonResult {
    pub r: f64,
    /// Two-sided p-value from the t approximation.
    pub p: f64,
    pub n: usize,
}

pub fn pearson_r(xs: &[f64], ys: &[f64]) -> Result<PearsonResult, StatsError> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(StatsError::Domain(format!("need paired samples of length >= 3, got {} and {}", xs.len(), ys.len())));
    }
    let n = xs.len();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n as f64;
    let (mx, my) = (mean(xs), mean(ys));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::DegenerateInput("zero variance".into()));
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let p = if r.abs() >= 1.0 {
        0.0
    } else if df == 0.0 {
        1.0
    } else {
        let t = r * (df / (1.0 - r * r)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| StatsError::Domain(e.to_string()))?;
        (2.0 * dist.sf(t.abs())).min(1.0)
    };
    Ok(PearsonResult { r, p, n })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OddsRatioResult {
    /// [[a, b], [c, d]].
    pub table: [[u64; 2]; 2],
    pub odds_ratio: f64,
    pub ci95: (f64, f64),
    pub continuity_corrected: bool,
}

/// Odds ratio (a·d)/(b·c) with a Wald interval on the log scale. Adds
/// 0.5 to every cell when any cell is zero.
pub fn odds_ratio_2x2(a: u64, b: u64, c: u64, d: u64) -> OddsRatioResult {
    let corrected = [a, b, c, d].contains(&0);
    let adj = if corrected { 0.5 } else { 0.0 };
    let [fa, fb, fc, fd] = [a, b, c, d].map(|x| x as f64 + adj);
    let or = (fa * fd) / (fb * fc);
    let se = (1.0 / fa + 1.0 / fb + 1.0 / fc + 1.0 / fd).sqrt();
    let z = Normal::standard().inverse_cdf(0.975);
    let ci = ((or.ln() - z * se).exp(), (or.ln() + z * se).exp());
    OddsRatioResult { table: [[a, b], [c, d]], odds_ratio: or, ci95: ci, continuity_corrected: corrected }
}

/// Record attribute used to group accuracy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grouping {
    Subtype,
    Family,
    Mode,
    Agent,
    RuleCount,
    Condition,
    Label(String),
}

impl Grouping {
    fn key(&self, r: &EvalRecord) -> Option<String> {
        match self {
            Grouping::Subtype => Some(r.problem_id.subtype.clone()),
            Grouping::Family => Some(r.problem_id.family.to_string()),
            Grouping::Mode => Some(r.mode.to_string()),
            Grouping::Agent => Some(r.agent.clone()),
            Grouping::RuleCount => r.labels.get("rule_count").cloned(),
            Grouping::Condition => r.labels.get("condition").cloned(),
            Grouping::Label(k) => r.labels.get(k).cloned(),
        }
    }
}

impl std::str::FromStr for Grouping {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim() {
            "" => return Err("empty grouping".into()),
            "subtype" => Grouping::Subtype,
            "family" => Grouping::Family,
            "mode" => Grouping::Mode,
            "agent" => Grouping::Agent,
            "rule_count" => Grouping::RuleCount,
            "condition" => Grouping::Condition,
            other => Grouping::Label(other.to_string()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRow {
    pub group: String,
    pub successes: u64,
    pub trials: u64,
    pub accuracy: f64,
    pub ci95: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AccuracyTable {
    pub rows: Vec<AccuracyRow>,
}

/// Column order of the accuracy-table CSV.
pub const TABLE_CSV_HEADER: [&str; 6] = ["group", "successes", "trials", "accuracy", "ci95_lo", "ci95_hi"];

impl AccuracyTable {
    pub fn row(&self, group: &str) -> Option<&AccuracyRow> {
        self.rows.iter().find(|r| r.group == group)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), csv::Error> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(TABLE_CSV_HEADER)?;
        for r in &self.rows {
            out.write_record([
                r.group.clone(),
                r.successes.to_string(),
                r.trials.to_string(),
                r.accuracy.to_string(),
                r.ci95.0.to_string(),
                r.ci95.1.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Accuracy per group with 95% intervals. Records lacking a grouping
/// attribute are dropped with a warning. Groups are joined with `/`.
pub fn summarize(records: &[EvalRecord], groupings: &[Grouping], method: CiMethod) -> Result<AccuracyTable, StatsError> {
    if records.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    let mut counts: BTreeMap<String, (u64, u64)> = BTreeMap::new();
    let mut dropped = 0usize;
    for r in records {
        let keys: Option<Vec<String>> = groupings.iter().map(|g| g.key(r)).collect();
        let Some(keys) = keys else {
            dropped += 1;
            continue;
        };
        let key = if keys.is_empty() { "all".to_string() } else { keys.join("/") };
        let e = counts.entry(key).or_default();
        e.0 += r.correct as u64;
        e.1 += 1;
    }
    if dropped > 0 {
        warn!("{dropped} records lack a grouping attribute and were dropped");
    }
    let rows = counts
        .into_iter()
        .map(|(group, (k, n))| {
            let ci95 = binomial_ci_with(k, n, 0.95, method)?;
            Ok(AccuracyRow { group, successes: k, trials: n, accuracy: k as f64 / n as f64, ci95 })
        })
        .collect::<Result<Vec<_>, StatsError>>()?;
    Ok(AccuracyTable { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;
    use num_traits::{One, ToPrimitive, Zero};
    use proptest::prelude::*;
    use statrs::distribution::Beta;

    /// Clopper–Pearson bounds as Beta quantiles.
    fn beta_oracle(k: u64, n: u64) -> (f64, f64) {
        let lo = if k == 0 { 0.0 } else { Beta::new(k as f64, (n - k + 1) as f64).unwrap().inverse_cdf(0.025) };
        let hi = if k == n { 1.0 } else { Beta::new((k + 1) as f64, (n - k) as f64).unwrap().inverse_cdf(0.975) };
        (lo, hi)
    }

    fn choose(n: u64, k: u64) -> BigUint {
        let mut c = BigUint::one();
        for i in 0..k {
            c = c * (n - i) / (i + 1);
        }
        c
    }

    /// Two-sided p at p0 = 1/2 from exact integer counts.
    fn exact_test_half(k: u64, n: u64) -> f64 {
        let observed = choose(n, k);
        let mut total = BigUint::zero();
        for i in 0..=n {
            let c = choose(n, i);
            if c <= observed {
                total += c;
            }
        }
        let scale = BigUint::one() << n;
        // Keep 60 bits of quotient precision.
        let q = (total << 60u32) / scale;
        (q.to_f64().unwrap() / 2f64.powi(60)).min(1.0)
    }

    #[test]
    fn ci_boundaries() {
        assert_eq!(binomial_ci(0, 40, 0.95).unwrap().0, 0.0);
        assert_eq!(binomial_ci(40, 40, 0.95).unwrap().1, 1.0);
        assert!(binomial_ci(3, 2, 0.95).is_err());
        assert!(binomial_ci(0, 0, 0.95).is_err());
    }

    #[test]
    fn ci_matches_beta_quantiles() {
        for (k, n) in [(20, 40), (0, 10), (1, 1), (7, 13), (99, 100)] {
            let (lo, hi) = binomial_ci(k, n, 0.95).unwrap();
            let (olo, ohi) = beta_oracle(k, n);
            assert!((lo - olo).abs() < 1e-6 && (hi - ohi).abs() < 1e-6, "{k}/{n}: {lo},{hi} vs {olo},{ohi}");
        }
    }

    #[test]
    fn single_success_interval() {
        let (lo, hi) = binomial_ci(1, 1, 0.95).unwrap();
        assert!((lo - 0.025).abs() < 1e-9);
        assert_eq!(hi, 1.0);
    }

    #[test]
    fn binomial_test_cases() {
        assert!((binomial_test(36, 72, 0.5).unwrap() - 1.0).abs() < 1e-12);
        let tail = binomial_test(72, 72, 0.5).unwrap();
        let expected = 2.0 * 0.5f64.powi(72);
        assert!(((tail - expected) / expected).abs() < 1e-12);
        let p = binomial_test(50, 72, 0.5).unwrap();
        assert!((p - exact_test_half(50, 72)).abs() < 1e-12);
    }

    #[test]
    fn pearson_cases() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert!((pearson_r(&x, &x).unwrap().r - 1.0).abs() < 1e-15);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson_r(&x, &neg).unwrap().r + 1.0).abs() < 1e-15);
        assert!(matches!(pearson_r(&x, &[1.0; 5]), Err(StatsError::DegenerateInput(_))));
        // Integer sums computed exactly, then one square root.
        let xi: [i128; 5] = [2, 4, 5, 9, 11];
        let yi: [i128; 5] = [1, 7, 3, 8, 12];
        let n = 5i128;
        let (sx, sy) = (xi.iter().sum::<i128>(), yi.iter().sum::<i128>());
        let sxy = n * xi.iter().zip(&yi).map(|(a, b)| a * b).sum::<i128>() - sx * sy;
        let sxx = n * xi.iter().map(|a| a * a).sum::<i128>() - sx * sx;
        let syy = n * yi.iter().map(|a| a * a).sum::<i128>() - sy * sy;
        let oracle = sxy as f64 / ((sxx * syy) as f64).sqrt();
        let got = pearson_r(&xi.map(|v| v as f64), &yi.map(|v| v as f64)).unwrap();
        assert!((got.r - oracle).abs() < 1e-12);
        assert!(got.p > 0.0 && got.p < 1.0);
    }

    #[test]
    fn odds_ratio_cases() {
        assert_eq!(odds_ratio_2x2(10, 10, 10, 10).odds_ratio, 1.0);
        assert_eq!(odds_ratio_2x2(20, 10, 10, 20).odds_ratio, 4.0);
        let z = odds_ratio_2x2(0, 5, 5, 5);
        assert!(z.continuity_corrected);
        assert!((z.odds_ratio - (0.5 * 5.5) / (5.5 * 5.5)).abs() < 1e-15);
        let se = (1.0 / 0.5 + 3.0 / 5.5f64).sqrt();
        assert!((z.ci95.0 - (z.odds_ratio.ln() - 1.959963984540054 * se).exp()).abs() < 1e-9);
    }

    #[test]
    fn coverage_simulation() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        let intervals: Vec<(f64, f64)> = (0..=100).map(|k| binomial_ci(k, 100, 0.95).unwrap()).collect();
        let draws = 10_000;
        let covered = (0..draws)
            .filter(|_| {
                let k = (0..100).filter(|_| rng.gen_bool(0.5)).count();
                let (lo, hi) = intervals[k];
                lo <= 0.5 && 0.5 <= hi
            })
            .count();
        let cov = covered as f64 / draws as f64;
        assert!((0.94..=0.975).contains(&cov), "coverage {cov}");
    }

    proptest! {
        #[test]
        fn test_symmetry(n in 1u64..120, frac in 0.0f64..=1.0) {
            let k = (frac * n as f64) as u64;
            let a = binomial_test(k, n, 0.5).unwrap();
            let b = binomial_test(n - k, n, 0.5).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn ci_contains_estimate(n in 1u64..200, frac in 0.0f64..=1.0) {
            let k = (frac * n as f64) as u64;
            let (lo, hi) = binomial_ci(k, n, 0.95).unwrap();
            let ph = k as f64 / n as f64;
            prop_assert!(lo <= ph && ph <= hi && 0.0 <= lo && hi <= 1.0);
        }

        #[test]
        fn pearson_affine_invariant(
            xs in proptest::collection::vec(-100.0f64..100.0, 3..20),
            noise in proptest::collection::vec(-100.0f64..100.0, 20),
            scale in 0.1f64..50.0,
            shift in -100.0f64..100.0,
        ) {
            let ys: Vec<f64> = xs.iter().zip(&noise).map(|(x, e)| x + e).collect();
            let (Ok(base), Ok(moved)) = (
                pearson_r(&xs, &ys),
                pearson_r(&xs.iter().map(|x| x * scale + shift).collect::<Vec<_>>(), &ys),
            ) else { return Ok(()) };
            prop_assert!((base.r - moved.r).abs() < 1e-9);
        }

        #[test]
        fn odds_ratio_column_swap(a in 0u64..50, b in 0u64..50, c in 0u64..50, d in 0u64..50) {
            let or = odds_ratio_2x2(a, b, c, d).odds_ratio;
            let swapped = odds_ratio_2x2(b, a, d, c).odds_ratio;
            prop_assert!(or > 0.0);
            prop_assert!((or * swapped - 1.0).abs() < 1e-12);
        }
    }
}
