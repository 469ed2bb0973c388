//! One-sample Kolmogorov-Smirnov statistics against a target distribution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::targets::TargetDistribution;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KsKind {
    /// `sup |F_n - F|`.
    TwoSided,
    /// `sup (F - F_n)`: large when the sample sits above `F`.
    Lower,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsStatistics {
    pub two_sided: f64,
    pub lower: f64,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsTest {
    pub kind: KsKind,
    pub statistic: f64,
    pub n: usize,
    pub significance: f64,
    pub critical: f64,
    pub passed: bool,
}

/// Target CDF at an extended-real point.
pub fn cdf_ext(target: &TargetDistribution, x: &ExtReal) -> f64 {
    let r = target.risk(x).to_f64_saturating();
    -(-r).exp_m1()
}

/// Statistics from CDF values of the sample (any order).
pub fn ks_from_cdf(mut u: Vec<f64>) -> Result<KsStatistics> {
    if u.is_empty() {
        return Err(Error::Empty("KS statistic of an empty sample"));
    }
    u.sort_by(f64::total_cmp);
    let n = u.len() as f64;
    let (mut d, mut lower) = (0.0f64, 0.0f64);
    for (i, f) in u.iter().enumerate() {
        let below = i as f64 / n;
        let above = (i + 1) as f64 / n;
        d = d.max(above - f).max(f - below);
        lower = lower.max(f - below);
    }
    Ok(KsStatistics {
        two_sided: d,
        lower,
        n: u.len(),
    })
}

/// `D = max_i max(i/n - F(x_(i)), F(x_(i)) - (i-1)/n)`.
pub fn ks_statistic(samples: &[f64], target: &TargetDistribution) -> Result<f64> {
    Ok(ks_from_cdf(samples.iter().map(|&x| target.cdf(x)).collect())?.two_sided)
}

pub fn ks_statistics_ext(samples: &[ExtReal], target: &TargetDistribution) -> Result<KsStatistics> {
    ks_from_cdf(samples.iter().map(|x| cdf_ext(target, x)).collect())
}

/// Asymptotic Kolmogorov critical value `c / sqrt(n)`.
pub fn ks_critical(kind: KsKind, significance: f64, n: usize) -> f64 {
    let c = match kind {
        KsKind::TwoSided => (-0.5 * (significance / 2.0).ln()).sqrt(),
        KsKind::Lower => (-0.5 * significance.ln()).sqrt(),
    };
    c / (n as f64).sqrt()
}

pub fn ks_test(
    samples: &[ExtReal],
    target: &TargetDistribution,
    kind: KsKind,
    significance: f64,
) -> Result<KsTest> {
    if !(significance > 0.0 && significance < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "significance {significance} outside (0, 1)"
        )));
    }
    let s = ks_statistics_ext(samples, target)?;
    let statistic = match kind {
        KsKind::TwoSided => s.two_sided,
        KsKind::Lower => s.lower,
    };
    let critical = ks_critical(kind, significance, s.n);
    Ok(KsTest {
        kind,
        statistic,
        n: s.n,
        significance,
        critical,
        passed: statistic <= critical,
    })
}
