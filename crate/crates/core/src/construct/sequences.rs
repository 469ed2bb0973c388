use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::targets::{GrowthFunction, TargetDistribution};

use super::{construct_from_breakpoints, PolicyKind};

/// Certificates within this distance below 1 still pass.
pub const CERTIFICATE_TOL: f64 = 1e-12;

pub fn certificate_passes(log_certificate: Option<&ExtReal>) -> bool {
    log_certificate.is_some_and(|c| *c >= ExtReal::from_f64((-CERTIFICATE_TOL).ln_1p()))
}

/// The slowest breakpoints allowed by the target-risk increment rule:
/// `a_0 = 0`, `a_{j+1} = a_j + max(1, exp(R_F(g^-1(a_j))))`. Returns `count`
/// terms, fewer if the tower range is exhausted.
pub fn minimal_sequence(
    target: &TargetDistribution,
    gauge: &GrowthFunction,
    count: usize,
) -> Vec<ExtReal> {
    let mut out = Vec::with_capacity(count);
    let mut a = ExtReal::ZERO;
    while out.len() < count {
        out.push(a);
        let y = gauge.inverse(&a).expect("breakpoints are non-negative");
        let step = target.risk(&y).exp().max(ExtReal::ONE);
        a = a.add(&step);
        if !a.is_finite() {
            break;
        }
    }
    out
}

/// Closed-form breakpoint families, each tied to a target and gauge family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosedForm {
    /// Exponential target, exp gauge: `a_k = 2^{S_k}`, needs `beta < alpha`.
    Exponential,
    /// Polynomial target, power gauge: `a_k = 2^{S_k}`, needs `beta + 1 < alpha`.
    Polynomial,
    /// Weibull target, exp-power gauge: `a_k = exp(exp(S_k))`, needs
    /// `0 < beta < alpha < 1`.
    Weibull,
}

impl ClosedForm {
    pub fn name(&self) -> &'static str {
        match self {
            ClosedForm::Exponential => "exponential",
            ClosedForm::Polynomial => "polynomial",
            ClosedForm::Weibull => "weibull",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "exponential" => Some(ClosedForm::Exponential),
            "polynomial" => Some(ClosedForm::Polynomial),
            "weibull" => Some(ClosedForm::Weibull),
            _ => None,
        }
    }

    pub fn check(&self, alpha: f64, beta: f64) -> Result<()> {
        let finite = alpha.is_finite() && beta.is_finite() && alpha > 0.0 && beta > 0.0;
        let (ok, rule) = match self {
            ClosedForm::Exponential => (beta < alpha, "beta < alpha"),
            ClosedForm::Polynomial => (beta + 1.0 < alpha, "beta + 1 < alpha"),
            ClosedForm::Weibull => (beta < alpha && alpha < 1.0, "0 < beta < alpha < 1"),
        };
        if finite && ok {
            Ok(())
        } else {
            Err(Error::Hypothesis(format!(
                "{} closed form requires {rule} with positive parameters (got alpha = {alpha}, beta = {beta})",
                self.name()
            )))
        }
    }

    pub fn target(&self, alpha: f64) -> Result<TargetDistribution> {
        match self {
            ClosedForm::Exponential => TargetDistribution::exponential(alpha),
            ClosedForm::Polynomial => TargetDistribution::polynomial(alpha),
            ClosedForm::Weibull => TargetDistribution::weibull(alpha),
        }
    }

    pub fn gauge(&self, beta: f64) -> Result<GrowthFunction> {
        match self {
            ClosedForm::Exponential => GrowthFunction::exp(beta),
            ClosedForm::Polynomial => GrowthFunction::power(beta),
            ClosedForm::Weibull => GrowthFunction::exp_power(beta),
        }
    }

    /// `S_k = sum_{j=1}^k (alpha/beta)^j` for `k = 1..=count`: `log2 a_k` for
    /// the first two forms, `ln ln a_k` for the Weibull form.
    pub fn exponents(&self, alpha: f64, beta: f64, count: usize) -> Result<Vec<ExtReal>> {
        self.check(alpha, beta)?;
        let ratio = alpha / beta;
        let mut term = ExtReal::ONE;
        let mut sum = ExtReal::ZERO;
        Ok((0..count)
            .map(|_| {
                term = term.scale(ratio);
                sum = sum.add(&term);
                sum
            })
            .collect())
    }
}

/// Closed-form breakpoints `a_0 = 0, a_1, ..., a_count`.
pub fn example_sequence(
    form: ClosedForm,
    alpha: f64,
    beta: f64,
    count: usize,
) -> Result<Vec<ExtReal>> {
    let exps = form.exponents(alpha, beta, count)?;
    let mut out = Vec::with_capacity(count + 1);
    out.push(ExtReal::ZERO);
    out.extend(exps.iter().map(|s| match form {
        ClosedForm::Exponential | ClosedForm::Polynomial => match s.to_f64() {
            Some(e) if e < 990.0 => ExtReal::from_f64(e.exp2()),
            _ => s.scale(std::f64::consts::LN_2).exp(),
        },
        ClosedForm::Weibull => s.exp().exp(),
    }));
    Ok(out)
}

/// Which components freeze on each interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntervalRule {
    /// Two components taking turns.
    Alternating,
    /// All `(k-1)`-subsets of `n` components in lexicographic cycle.
    Cycle { n: usize, k: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalCheck {
    pub index: usize,
    pub gap: ExtReal,
    /// `gap >= 1`, so the intervals cover the half-line.
    pub gap_ok: bool,
    pub log_certificate: Option<ExtReal>,
    pub certificate_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceReport {
    pub intervals: Vec<IntervalCheck>,
    /// Every interval has `gap >= 1` and a certificate of at least 1.
    pub valid: bool,
}

impl SequenceReport {
    pub fn first_failure(&self) -> Option<&IntervalCheck> {
        self.intervals
            .iter()
            .find(|c| !c.gap_ok || !c.certificate_ok)
    }
}

/// Checks the coverage and certificate conditions of a given breakpoint
/// sequence under the freeze pattern of `rule`.
pub fn validate_explicit_sequence(
    target: &TargetDistribution,
    gauge: &GrowthFunction,
    seq: &[ExtReal],
    rule: IntervalRule,
) -> Result<SequenceReport> {
    if seq.first().is_some_and(|a| !a.is_zero()) {
        return Err(Error::InvalidParameter(format!(
            "sequence must start at 0, got {}",
            seq[0]
        )));
    }
    let (n, k) = match rule {
        IntervalRule::Alternating => (2, 2),
        IntervalRule::Cycle { n, k } => (n, k),
    };
    let fam = construct_from_breakpoints(target, gauge, n, k, PolicyKind::Explicit, seq)?;
    let plan = fam.plan.expect("constructed families carry a plan");
    let intervals: Vec<IntervalCheck> = plan
        .gaps
        .iter()
        .zip(&plan.log_certificates)
        .enumerate()
        .map(|(index, (gap, cert))| IntervalCheck {
            index,
            gap: *gap,
            gap_ok: *gap >= ExtReal::ONE,
            log_certificate: *cert,
            certificate_ok: certificate_passes(cert.as_ref()),
        })
        .collect();
    let valid = intervals.iter().all(|c| c.gap_ok && c.certificate_ok);
    Ok(SequenceReport { intervals, valid })
}
