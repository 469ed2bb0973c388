//! Freeze/track constructions of heavy-tailed families whose minimum has
//! (or is dominated by) a given target distribution.
//!
//! On every interval `(a_l, a_{l+1}]` the risks in the frozen set `I_l` stay
//! constant while all others grow exactly like `R_F`. With `k - 1` frozen
//! risks out of `n`, any `k` of them contain a tracking risk, so their sum
//! never falls below `R_F`; with `n = k = 2` the sum equals `R_F`.

mod build;
mod sequences;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::risk::{sum_risks, RiskFunction};
use crate::targets::{GrowthFunction, TargetDistribution};

pub use build::construct_from_breakpoints;
pub use sequences::{
    certificate_passes, example_sequence, minimal_sequence, validate_explicit_sequence, ClosedForm,
    IntervalCheck, IntervalRule, SequenceReport, CERTIFICATE_TOL,
};

/// Hard cap on the number of intervals a single plan may hold.
pub const MAX_INTERVALS: usize = 100_000;

/// How the next breakpoint is chosen.
#[derive(Clone, Debug, PartialEq)]
pub enum Policy {
    /// `a_{l+1} - a_l = max(1, exp((k-1) R_F(g^-1(a_l))))`.
    TargetMinimal,
    /// `a_{l+1} - a_l = max(1, exp(sum of frozen R_i(g^-1(a_l))))`.
    ExactMinimal,
    /// A fixed breakpoint sequence starting at `a_0`.
    Explicit(Vec<ExtReal>),
}

impl Policy {
    pub fn kind(&self) -> PolicyKind {
        match self {
            Policy::TargetMinimal => PolicyKind::TargetMinimal,
            Policy::ExactMinimal => PolicyKind::ExactMinimal,
            Policy::Explicit(_) => PolicyKind::Explicit,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    TargetMinimal,
    ExactMinimal,
    Explicit,
}

impl PolicyKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PolicyKind::TargetMinimal => "target-minimal",
            PolicyKind::ExactMinimal => "exact-minimal",
            PolicyKind::Explicit => "explicit",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Horizon {
    Intervals(usize),
    /// Build until the last breakpoint reaches this point.
    Until(ExtReal),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PlanStatus {
    /// First breakpoint index that no longer fits in an `f64`.
    pub linear_overflow_at: Option<usize>,
    /// Why the plan stopped short of the requested horizon.
    pub truncated: Option<String>,
}

/// Breakpoints, frozen sets and certificate terms of one construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructionPlan {
    pub target: TargetDistribution,
    pub gauge: GrowthFunction,
    pub n: usize,
    pub k: usize,
    pub policy: PolicyKind,
    /// The `(k-1)`-subsets of `0..n` in lexicographic order; interval `l`
    /// freezes `subsets[l % subsets.len()]`.
    pub subsets: Vec<Vec<usize>>,
    pub breakpoints: Vec<ExtReal>,
    /// `a_{l+1} - a_l`, kept explicitly so certificates never re-subtract
    /// tower values.
    pub gaps: Vec<ExtReal>,
    /// `ln(gap_l) - sum_{i in I_l} R_i(g^-1(a_l))`; `None` when `g^-1(a_l)`
    /// lies beyond the horizon.
    pub log_certificates: Vec<Option<ExtReal>>,
    pub status: PlanStatus,
}

impl ConstructionPlan {
    pub fn intervals(&self) -> usize {
        self.gaps.len()
    }

    pub fn cycle_len(&self) -> usize {
        self.subsets.len()
    }

    pub fn frozen_set(&self, l: usize) -> &[usize] {
        &self.subsets[l % self.subsets.len()]
    }

    /// Certificate value `exp(log_certificate)`, saturating to `inf`.
    pub fn certificate(&self, l: usize) -> Option<f64> {
        self.log_certificates[l].map(|c| c.exp().to_f64_saturating())
    }

    pub fn min_log_certificate(&self) -> Option<ExtReal> {
        self.log_certificates.iter().flatten().copied().min()
    }
}

/// `n` constructed risk functions plus the plan that produced them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeavyFamily {
    pub n: usize,
    pub k: usize,
    pub target: TargetDistribution,
    pub risks: Vec<RiskFunction>,
    pub plan: Option<ConstructionPlan>,
    pub notes: Vec<String>,
}

impl HeavyFamily {
    /// Risk of the minimum over `subset` (0-based indices).
    pub fn subset_risk(&self, subset: &[usize]) -> Result<RiskFunction> {
        if let Some(&i) = subset.iter().find(|&&i| i >= self.n) {
            return Err(Error::InvalidParameter(format!(
                "component {i} out of range 0..{}",
                self.n
            )));
        }
        let parts: Vec<RiskFunction> = subset.iter().map(|&i| self.risks[i].clone()).collect();
        sum_risks(&parts)
    }

    /// Largest `x` where every component risk is defined.
    pub fn horizon(&self) -> Option<ExtReal> {
        self.risks.iter().filter_map(RiskFunction::horizon).min()
    }
}

/// Lexicographic `(k-1)`-subsets of `0..n`.
pub fn frozen_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0..n).combinations(k - 1).collect()
}

pub(crate) fn check_family_shape(n: usize, k: usize) -> Result<()> {
    if k <= 1 || k > n {
        return Err(Error::Hypothesis(format!(
            "family needs 1 < k <= n, got n = {n}, k = {k}"
        )));
    }
    let m = (1..k).fold(1u128, |acc, i| acc * (n - i + 1) as u128 / i as u128);
    if m > 1_000_000 {
        return Err(Error::InvalidParameter(format!(
            "C({n}, {}) = {m} frozen sets is too many",
            k - 1
        )));
    }
    Ok(())
}

/// Two-component construction: the risks take turns freezing, so their sum
/// is exactly `R_F`.
pub fn construct_pair(
    target: &TargetDistribution,
    gauge: &GrowthFunction,
    policy: Policy,
    horizon: Horizon,
) -> Result<HeavyFamily> {
    construct_family(target, gauge, 2, 2, policy, horizon)
}

/// `n`-component construction where every `k`-subset minimum is dominated
/// by `F` and every `(k-1)`-subset minimum has infinite `g`-moment.
pub fn construct_family(
    target: &TargetDistribution,
    gauge: &GrowthFunction,
    n: usize,
    k: usize,
    policy: Policy,
    horizon: Horizon,
) -> Result<HeavyFamily> {
    check_family_shape(n, k)?;
    target.validate()?;
    gauge.validate()?;
    build::construct(target, gauge, n, k, policy, horizon)
}

/// Two copies of `F^(1/2)`, i.e. components with risk `R_F / 2`. These are
/// generally not heavy with respect to a given gauge.
pub fn sqrt_split(
    target: &TargetDistribution,
    gauge: Option<&GrowthFunction>,
) -> Result<HeavyFamily> {
    target.validate()?;
    let half = match target {
        TargetDistribution::Exponential { alpha } => {
            RiskFunction::of_target(&TargetDistribution::Exponential { alpha: alpha / 2.0 })
        }
        TargetDistribution::Polynomial { alpha } => {
            RiskFunction::of_target(&TargetDistribution::Polynomial { alpha: alpha / 2.0 })
        }
        other => RiskFunction::Scaled {
            target: other.clone(),
            factor: 0.5,
        },
    };
    let mut notes =
        vec!["components have risk R_F / 2 and need not be heavy for the chosen gauge".to_string()];
    if let (TargetDistribution::Exponential { alpha }, Some(GrowthFunction::Exp { beta })) =
        (target, gauge)
    {
        if *beta > alpha / 2.0 {
            notes.push(format!(
                "exponential shortcut: beta = {beta} > alpha/2 = {}, so each exponential({}) component already has infinite exp({beta}) moment",
                alpha / 2.0,
                alpha / 2.0
            ));
        } else {
            notes.push(format!(
                "beta = {beta} <= alpha/2 = {}: exponential components are not exp({beta})-heavy",
                alpha / 2.0
            ));
        }
    }
    Ok(HeavyFamily {
        n: 2,
        k: 2,
        target: target.clone(),
        risks: vec![half.clone(), half],
        plan: None,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subset_orders() {
        assert_eq!(frozen_subsets(2, 2), vec![vec![0], vec![1]]);
        assert_eq!(frozen_subsets(3, 2).len(), 3);
        let s = frozen_subsets(4, 3);
        assert_eq!(s.len(), 6);
        assert_eq!(s[0], vec![0, 1]);
        assert_eq!(s[5], vec![2, 3]);
    }

    #[test]
    fn family_shape_checks() {
        assert!(check_family_shape(3, 1).is_err());
        assert!(check_family_shape(3, 4).is_err());
        assert!(check_family_shape(4, 3).is_ok());
    }

    #[test]
    fn sqrt_split_closed_forms() {
        let e = TargetDistribution::exponential(2.0).unwrap();
        let f = sqrt_split(&e, Some(&GrowthFunction::exp(1.5).unwrap())).unwrap();
        assert_eq!(
            f.risks[0],
            RiskFunction::of_target(&TargetDistribution::exponential(1.0).unwrap())
        );
        assert!(f.notes.iter().any(|n| n.contains("shortcut")));
        let p = sqrt_split(&TargetDistribution::polynomial(3.0).unwrap(), None).unwrap();
        assert_eq!(
            p.risks[1],
            RiskFunction::of_target(&TargetDistribution::polynomial(1.5).unwrap())
        );
        let w = TargetDistribution::weibull(0.5).unwrap();
        let s = sqrt_split(&w, None).unwrap().subset_risk(&[0, 1]).unwrap();
        for x in [0.5, 3.0, 1e8] {
            assert!((s.eval_f64(x).unwrap() - w.risk_f64(x)).abs() <= 1e-15 * w.risk_f64(x));
        }
    }
}
