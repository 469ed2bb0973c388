//! Risk functions `R(x) = -ln P(X > x)` and their algebra.
//!
//! The risk of the minimum of independent variables is the sum of their
//! risks, so sums are first-class values here.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::targets::{Table, TargetDistribution};

/// Behaviour of a piecewise risk on one half-open interval `(a_l, a_{l+1}]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Segment {
    /// Constant `value`.
    Flat { value: ExtReal },
    /// `max(R_F(x) - deficit, floor)`; `floor` is the value the segment
    /// starts from and absorbs rounding in the subtraction.
    Track { deficit: ExtReal, floor: ExtReal },
}

impl Segment {
    pub fn value(&self, target: &TargetDistribution, x: &ExtReal) -> ExtReal {
        match self {
            Segment::Flat { value } => *value,
            Segment::Track { deficit, floor } => target.risk(x).sub(deficit).max(*floor),
        }
    }
}

/// Evaluates segments over `knots` (one more knot than segments); `None`
/// beyond the last knot.
pub(crate) fn eval_segments(
    target: &TargetDistribution,
    knots: &[ExtReal],
    segments: &[Segment],
    x: &ExtReal,
) -> Option<ExtReal> {
    if knots.is_empty() || *x <= knots[0] {
        return Some(ExtReal::ZERO);
    }
    if x > knots.last()? {
        return None;
    }
    let l = knots.partition_point(|k| k < x) - 1;
    Some(segments[l].value(target, x))
}

/// Right-continuous piecewise risk over the knots `a_0 < a_1 < ... < a_L`,
/// identically zero on `x <= a_0` and undefined beyond `a_L`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPiecewise")]
pub struct PiecewiseRisk {
    target: TargetDistribution,
    knots: Vec<ExtReal>,
    segments: Vec<Segment>,
    #[serde(skip)]
    ends: Vec<ExtReal>,
}

#[derive(Deserialize)]
struct RawPiecewise {
    target: TargetDistribution,
    knots: Vec<ExtReal>,
    segments: Vec<Segment>,
}

impl TryFrom<RawPiecewise> for PiecewiseRisk {
    type Error = Error;

    fn try_from(r: RawPiecewise) -> Result<Self> {
        PiecewiseRisk::new(r.target, r.knots, r.segments)
    }
}

impl PiecewiseRisk {
    pub fn new(
        target: TargetDistribution,
        knots: Vec<ExtReal>,
        segments: Vec<Segment>,
    ) -> Result<Self> {
        let mut p = PiecewiseRisk {
            target,
            knots,
            segments,
            ends: Vec::new(),
        };
        p.fill_ends();
        p.validate()?;
        Ok(p)
    }

    fn fill_ends(&mut self) {
        self.ends = self
            .segments
            .iter()
            .zip(&self.knots[1.min(self.knots.len())..])
            .map(|(s, a)| self.segment_value(s, a))
            .collect();
    }

    fn segment_value(&self, s: &Segment, x: &ExtReal) -> ExtReal {
        s.value(&self.target, x)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Inadmissible(m));
        if self.knots.len() != self.segments.len() + 1 {
            return bad("knot count must be segment count + 1".into());
        }
        if self.segments.is_empty() {
            return bad("no segments".into());
        }
        if let Some(i) = self.knots.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::NonMonotone(i + 1));
        }
        if self.knots.iter().any(|k| !k.is_finite()) {
            return bad("non-finite knot".into());
        }
        let mut prev = ExtReal::ZERO;
        for (l, e) in self.ends.iter().enumerate() {
            if e.is_negative() || *e < prev {
                return bad(format!("risk decreases on interval {l}"));
            }
            prev = *e;
        }
        Ok(())
    }

    pub fn target(&self) -> &TargetDistribution {
        &self.target
    }

    pub fn knots(&self) -> &[ExtReal] {
        &self.knots
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Risk at the right end of each interval.
    pub fn ends(&self) -> &[ExtReal] {
        &self.ends
    }

    pub fn horizon(&self) -> ExtReal {
        *self.knots.last().expect("validated")
    }

    /// Interval index `l` with `a_l < x <= a_{l+1}`, if any.
    pub fn interval_of(&self, x: &ExtReal) -> Option<usize> {
        if *x <= self.knots[0] || *x > self.horizon() {
            return None;
        }
        Some(self.knots.partition_point(|k| k < x) - 1)
    }

    pub fn eval(&self, x: &ExtReal) -> Result<ExtReal> {
        eval_segments(&self.target, &self.knots, &self.segments, x)
            .ok_or_else(|| Error::BeyondHorizon(*x, self.horizon()))
    }

    /// `inf{x : R(x) >= r}`; `+inf` when `r` exceeds the risk at the horizon.
    pub fn inverse(&self, r: &ExtReal) -> ExtReal {
        if *r <= ExtReal::ZERO {
            return ExtReal::NEG_INFINITY;
        }
        let l = self.ends.partition_point(|e| e < r);
        if l == self.ends.len() {
            return ExtReal::INFINITY;
        }
        let (a, b) = (self.knots[l], self.knots[l + 1]);
        match self.segments[l] {
            Segment::Flat { .. } => a,
            Segment::Track { deficit, .. } => {
                if self.segment_value(&self.segments[l], &a) >= *r {
                    return a;
                }
                let start = a.next_up();
                let guess = self.target.inverse_risk(&r.add(&deficit)).max(start).min(b);
                refine(
                    |x| self.segment_value(&self.segments[l], x),
                    r,
                    guess,
                    start,
                    b,
                )
            }
        }
    }
}

/// Nudges a closed-form inverse by single ulps so that `x` is the least
/// representable point in `[lo, hi]` with `f(x) >= r`.
fn refine(
    f: impl Fn(&ExtReal) -> ExtReal,
    r: &ExtReal,
    mut x: ExtReal,
    lo: ExtReal,
    hi: ExtReal,
) -> ExtReal {
    for _ in 0..64 {
        if f(&x) >= *r || x >= hi {
            break;
        }
        x = x.next_up();
    }
    for _ in 0..64 {
        let d = x.next_down();
        if d < lo || d == x || f(&d) < *r {
            break;
        }
        x = d;
    }
    x
}

/// A risk function: non-decreasing, right-continuous, zero at `-inf`,
/// unbounded (within its horizon, for piecewise risks).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RiskFunction {
    /// `factor * R_F(x)`.
    Scaled {
        target: TargetDistribution,
        factor: f64,
    },
    Piecewise(PiecewiseRisk),
    /// Pointwise sum, the risk of the minimum.
    Sum {
        terms: Vec<RiskFunction>,
    },
}

impl RiskFunction {
    pub fn of_target(target: &TargetDistribution) -> Self {
        RiskFunction::Scaled {
            target: target.clone(),
            factor: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Scaled { target, factor } => {
                target.validate()?;
                if !(factor.is_finite() && *factor > 0.0) {
                    return Err(Error::Inadmissible(format!(
                        "scale factor {factor} does not give an unbounded risk"
                    )));
                }
                Ok(())
            }
            Self::Piecewise(p) => p.validate(),
            Self::Sum { terms } if terms.is_empty() => Err(Error::Empty("sum of risks")),
            Self::Sum { terms } => terms.iter().try_for_each(Self::validate),
        }
    }

    pub fn eval(&self, x: &ExtReal) -> Result<ExtReal> {
        match self {
            Self::Scaled { target, factor } => Ok(target.risk(x).scale(*factor)),
            Self::Piecewise(p) => p.eval(x),
            Self::Sum { terms } => {
                let mut s = ExtReal::ZERO;
                for t in terms {
                    s = s.add(&t.eval(x)?);
                }
                Ok(s)
            }
        }
    }

    pub fn eval_f64(&self, x: f64) -> Result<f64> {
        Ok(self.eval(&ExtReal::from_f64(x))?.to_f64_saturating())
    }

    /// Largest argument at which the risk is defined; `None` for whole-line
    /// risks.
    pub fn horizon(&self) -> Option<ExtReal> {
        match self {
            Self::Scaled { .. } => None,
            Self::Piecewise(p) => Some(p.horizon()),
            Self::Sum { terms } => terms.iter().filter_map(Self::horizon).min(),
        }
    }

    /// Risk reached at the horizon, `None` when unbounded.
    pub fn risk_at_horizon(&self) -> Option<ExtReal> {
        self.horizon()
            .map(|h| self.eval(&h).expect("horizon is in range"))
    }

    /// Breakpoints of all piecewise parts.
    pub fn knots(&self) -> Vec<ExtReal> {
        match self {
            Self::Scaled { .. } => Vec::new(),
            Self::Piecewise(p) => p.knots().to_vec(),
            Self::Sum { terms } => {
                let mut k: Vec<ExtReal> = terms.iter().flat_map(Self::knots).collect();
                k.sort();
                k.dedup();
                k
            }
        }
    }

    /// Generalized inverse `inf{x : R(x) >= r}`: `-inf` for `r <= 0`, `+inf`
    /// when the risk never reaches `r` within the horizon.
    pub fn inverse(&self, r: &ExtReal) -> ExtReal {
        if *r <= ExtReal::ZERO {
            return ExtReal::NEG_INFINITY;
        }
        match self {
            Self::Scaled { target, factor } => {
                let f = |x: &ExtReal| target.risk(x).scale(*factor);
                let guess = target.inverse_risk(&r.scale(1.0 / factor));
                if guess.level() > 0 {
                    return guess;
                }
                let lo = ExtReal::from_f64(target.support_start());
                refine(f, r, guess.max(lo), lo, ExtReal::INFINITY)
            }
            Self::Piecewise(p) => p.inverse(r),
            Self::Sum { terms } => self.sum_inverse(terms, r),
        }
    }

    fn sum_inverse(&self, terms: &[RiskFunction], r: &ExtReal) -> ExtReal {
        let share = r.scale(1.0 / terms.len() as f64);
        let mut hi = terms
            .iter()
            .map(|t| t.inverse(r))
            .max()
            .expect("non-empty sum");
        if let Some(h) = self.horizon() {
            if hi > h {
                if self.eval(&h).expect("in range") < *r {
                    return ExtReal::INFINITY;
                }
                hi = h;
            }
        }
        let low = terms
            .iter()
            .map(|t| t.inverse(&share))
            .min()
            .expect("non-empty sum");
        let lo = ExtReal::from_ordinal(low.ordinal() - 1);
        if self.eval(&lo).is_ok_and(|v| v >= *r) {
            return lo;
        }
        let (mut a, mut b) = (lo.ordinal(), hi.ordinal());
        while b - a > 1 {
            let mid = a + (b - a) / 2;
            if self
                .eval(&ExtReal::from_ordinal(mid))
                .is_ok_and(|v| v >= *r)
            {
                b = mid;
            } else {
                a = mid;
            }
        }
        ExtReal::from_ordinal(b)
    }
}

impl From<&TargetDistribution> for RiskFunction {
    fn from(t: &TargetDistribution) -> Self {
        RiskFunction::of_target(t)
    }
}

/// Risk function of a target distribution.
pub fn risk_from_tail(target: &TargetDistribution) -> Result<RiskFunction> {
    target.validate()?;
    Ok(RiskFunction::of_target(target))
}

/// Risk function of a tabulated tail `(x, P(X > x))`, interpolated linearly
/// in risk.
pub fn risk_from_tail_table(x: &[f64], tail: &[f64]) -> Result<RiskFunction> {
    if x.len() != tail.len() {
        return Err(Error::InvalidParameter("x and tail lengths differ".into()));
    }
    let mut risk = Vec::with_capacity(tail.len());
    for (&xi, &t) in x.iter().zip(tail) {
        if t.is_nan() || t < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "tail value {t} at x = {xi}"
            )));
        }
        if t == 0.0 {
            return Err(Error::BoundedSupport(xi));
        }
        if t > 1.0 {
            return Err(Error::TailAboveOne { x: xi, value: t });
        }
        risk.push(-t.ln());
    }
    let target = TargetDistribution::Tabulated {
        risk: Table::new(x.to_vec(), risk)?,
    };
    Ok(RiskFunction::of_target(&target))
}

/// Survival probability `exp(-R(x))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailValue {
    pub value: f64,
    /// `R(x)` exceeded the range where `exp(-R)` is computed; `value` is 0.
    pub underflow: bool,
    pub log_tail: ExtReal,
}

pub fn tail_from_risk(r: &RiskFunction, x: &ExtReal) -> Result<TailValue> {
    let risk = r.eval(x)?;
    let underflow = risk > ExtReal::from_f64(700.0);
    let value = if underflow {
        0.0
    } else {
        (-risk.to_f64_saturating()).exp()
    };
    Ok(TailValue {
        value,
        underflow,
        log_tail: risk.neg(),
    })
}

/// Risk of the minimum of independent variables with the given risks.
pub fn sum_risks(rs: &[RiskFunction]) -> Result<RiskFunction> {
    if rs.is_empty() {
        return Err(Error::Empty("sum_risks needs at least one risk"));
    }
    let mut terms = Vec::with_capacity(rs.len());
    for r in rs {
        r.validate()?;
        match r {
            RiskFunction::Sum { terms: inner } => terms.extend(inner.iter().cloned()),
            other => terms.push(other.clone()),
        }
    }
    Ok(if terms.len() == 1 {
        terms.pop().expect("one term")
    } else {
        RiskFunction::Sum { terms }
    })
}

/// `inf{x : R(x) >= -ln(1 - u)}` for `u` in `(0, 1)`.
pub fn quantile_from_risk(r: &RiskFunction, u: f64) -> Result<ExtReal> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "quantile level {u} outside (0, 1)"
        )));
    }
    let level = ExtReal::from_f64(-(-u).ln_1p());
    let x = r.inverse(&level);
    if x == ExtReal::INFINITY {
        let h = r.horizon().unwrap_or(ExtReal::INFINITY);
        return Err(Error::BeyondHorizon(x, h));
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(v: f64) -> ExtReal {
        ExtReal::from_f64(v)
    }

    fn exp1() -> TargetDistribution {
        TargetDistribution::exponential(1.0).unwrap()
    }

    fn step_risk() -> PiecewiseRisk {
        PiecewiseRisk::new(
            exp1(),
            vec![x(0.0), x(1.0), x(2.0), x(6.0)],
            vec![
                Segment::Flat { value: x(0.0) },
                Segment::Track {
                    deficit: x(1.0),
                    floor: x(0.0),
                },
                Segment::Flat { value: x(1.0) },
            ],
        )
        .unwrap()
    }

    #[test]
    fn piecewise_eval_is_right_continuous() {
        let p = step_risk();
        assert_eq!(p.eval(&x(-1.0)).unwrap(), ExtReal::ZERO);
        assert_eq!(p.eval(&x(1.0)).unwrap(), ExtReal::ZERO);
        assert_eq!(p.eval(&x(1.5)).unwrap(), x(0.5));
        assert_eq!(p.eval(&x(2.0)).unwrap(), x(1.0));
        assert_eq!(p.eval(&x(6.0)).unwrap(), x(1.0));
        assert!(matches!(p.eval(&x(6.5)), Err(Error::BeyondHorizon(..))));
    }

    #[test]
    fn piecewise_inverse_uses_infimum() {
        let p = step_risk();
        assert_eq!(p.inverse(&x(0.25)), x(1.25));
        assert_eq!(p.inverse(&x(1.0)), x(2.0));
        assert_eq!(p.inverse(&x(1.5)), ExtReal::INFINITY);
        assert!(p.inverse(&x(0.0)).is_neg_infinity());
    }

    #[test]
    fn rejects_decreasing_pieces() {
        let r = PiecewiseRisk::new(
            exp1(),
            vec![x(0.0), x(1.0), x(2.0)],
            vec![
                Segment::Flat { value: x(3.0) },
                Segment::Flat { value: x(2.0) },
            ],
        );
        assert!(r.is_err());
    }

    #[test]
    fn sums_of_exponential_risks() {
        let a = RiskFunction::of_target(&exp1());
        let b = RiskFunction::of_target(&TargetDistribution::exponential(2.0).unwrap());
        let s = sum_risks(&[a, b]).unwrap();
        let three = TargetDistribution::exponential(3.0).unwrap();
        for v in [0.1, 1.0, 7.5, 1e6] {
            assert!(
                (s.eval_f64(v).unwrap() - three.risk_f64(v)).abs() <= 1e-15 * three.risk_f64(v)
            );
        }
        let q = quantile_from_risk(&s, 0.5).unwrap().to_f64().unwrap();
        assert!((q - 2f64.ln() / 3.0).abs() < 1e-15);
    }

    #[test]
    fn sum_rejects_empty_and_zero_risk() {
        assert!(matches!(sum_risks(&[]), Err(Error::Empty(_))));
        let zero = RiskFunction::Scaled {
            target: exp1(),
            factor: 0.0,
        };
        let one = RiskFunction::of_target(&exp1());
        assert!(matches!(
            sum_risks(&[one, zero]),
            Err(Error::Inadmissible(_))
        ));
    }

    #[test]
    fn tail_conversions() {
        let e2 = risk_from_tail(&TargetDistribution::exponential(2.0).unwrap()).unwrap();
        let t = tail_from_risk(&e2, &x(1.0)).unwrap();
        assert!((t.value - (-2f64).exp()).abs() < 1e-17);
        assert_eq!(tail_from_risk(&e2, &x(-3.0)).unwrap().value, 1.0);
        let deep = tail_from_risk(&e2, &x(1e4)).unwrap();
        assert!(deep.underflow && deep.value == 0.0);
    }

    #[test]
    fn tail_table_errors() {
        assert!(matches!(
            risk_from_tail_table(&[0.0, 1.0], &[1.0, 0.0]),
            Err(Error::BoundedSupport(_))
        ));
        assert!(matches!(
            risk_from_tail_table(&[0.0, 1.0], &[1.2, 0.5]),
            Err(Error::TailAboveOne { .. })
        ));
        let r = risk_from_tail_table(&[0.0, 1.0, 2.0], &[1.0, 0.5, 0.25]).unwrap();
        assert!((r.eval_f64(1.5).unwrap() - 1.5 * 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn quantile_domain() {
        let r = RiskFunction::of_target(&exp1());
        assert!(quantile_from_risk(&r, 0.0).is_err());
        assert!(quantile_from_risk(&r, 1.0).is_err());
        assert!((quantile_from_risk(&r, 0.5).unwrap().to_f64().unwrap() - 2f64.ln()).abs() < 1e-16);
    }

    #[test]
    fn sum_inverse_on_piecewise_terms() {
        let p = RiskFunction::Piecewise(step_risk());
        let s = sum_risks(&[p.clone(), p]).unwrap();
        assert_eq!(s.inverse(&x(2.0)), x(2.0));
        let q = s.inverse(&x(0.5));
        assert!((q.to_f64().unwrap() - 1.25).abs() < 1e-15);
        assert_eq!(s.inverse(&x(3.0)), ExtReal::INFINITY);
    }
}
