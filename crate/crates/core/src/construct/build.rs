use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::risk::{eval_segments, PiecewiseRisk, RiskFunction, Segment};
use crate::targets::{GrowthFunction, TargetDistribution};

use super::{
    check_family_shape, frozen_subsets, ConstructionPlan, HeavyFamily, Horizon, PlanStatus, Policy,
    PolicyKind, MAX_INTERVALS,
};

struct Builder<'a> {
    target: &'a TargetDistribution,
    gauge: &'a GrowthFunction,
    k: usize,
    subsets: Vec<Vec<usize>>,
    knots: Vec<ExtReal>,
    gaps: Vec<ExtReal>,
    segments: Vec<Vec<Segment>>,
}

impl<'a> Builder<'a> {
    fn new(
        target: &'a TargetDistribution,
        gauge: &'a GrowthFunction,
        n: usize,
        k: usize,
        a0: ExtReal,
    ) -> Self {
        Builder {
            target,
            gauge,
            k,
            subsets: frozen_subsets(n, k),
            knots: vec![a0],
            gaps: Vec::new(),
            segments: vec![Vec::new(); n],
        }
    }

    fn last(&self) -> ExtReal {
        *self.knots.last().expect("a_0 present")
    }

    fn risk(&self, i: usize, x: &ExtReal) -> ExtReal {
        eval_segments(self.target, &self.knots, &self.segments[i], x)
            .expect("argument within built range")
    }

    fn gauge_inverse(&self, a: &ExtReal) -> ExtReal {
        self.gauge
            .inverse(&(*a).max(ExtReal::ZERO))
            .expect("non-negative level")
    }

    /// Next breakpoint and gap for the minimal policies.
    fn minimal_step(&self, exact: bool) -> (ExtReal, ExtReal) {
        let l = self.gaps.len();
        let a = self.last();
        let y = self.gauge_inverse(&a);
        let s = if exact {
            let at = y.min(a);
            self.subsets[l % self.subsets.len()]
                .iter()
                .fold(ExtReal::ZERO, |acc, &i| acc.add(&self.risk(i, &at)))
        } else {
            let r = self.target.risk(&y);
            if self.k == 2 {
                r
            } else {
                r.scale((self.k - 1) as f64)
            }
        };
        let enough = |g: &ExtReal| *g >= ExtReal::ONE && g.ln() >= s;
        let mut gap = s.exp().max(ExtReal::ONE);
        for _ in 0..16 {
            if enough(&gap) {
                break;
            }
            gap = gap.next_up();
        }
        let mut next = a.add(&gap).ceil_canonical();
        for _ in 0..16 {
            if enough(&next.sub(&a)) {
                break;
            }
            next = next.next_up();
        }
        if y > next {
            next = y;
        }
        (next, next.sub(&a))
    }

    fn push(&mut self, next: ExtReal) {
        let l = self.gaps.len();
        let a = self.last();
        let frozen = &self.subsets[l % self.subsets.len()];
        let fa = self.target.risk(&a);
        for (i, segs) in self.segments.iter_mut().enumerate() {
            let current = match segs.last() {
                None => ExtReal::ZERO,
                Some(Segment::Flat { value }) => *value,
                Some(s @ Segment::Track { .. }) => s.value(self.target, &a),
            };
            let seg = if frozen.contains(&i) {
                Segment::Flat { value: current }
            } else {
                match segs.last() {
                    Some(s @ Segment::Track { .. }) => *s,
                    _ => Segment::Track {
                        deficit: fa.sub(&current),
                        floor: current,
                    },
                }
            };
            segs.push(seg);
        }
        self.gaps.push(next.sub(&a));
        self.knots.push(next);
    }

    fn finish(
        self,
        n: usize,
        policy: PolicyKind,
        truncated: Option<String>,
    ) -> Result<HeavyFamily> {
        let Builder {
            target,
            gauge,
            k,
            subsets,
            knots,
            gaps,
            segments,
        } = self;
        let mut pieces = Vec::with_capacity(n);
        for segs in segments {
            pieces.push(PiecewiseRisk::new(target.clone(), knots.clone(), segs)?);
        }
        let mut plan = ConstructionPlan {
            target: target.clone(),
            gauge: gauge.clone(),
            n,
            k,
            policy,
            subsets,
            breakpoints: knots,
            gaps,
            log_certificates: Vec::new(),
            status: PlanStatus {
                linear_overflow_at: None,
                truncated,
            },
        };
        plan.status.linear_overflow_at = plan.breakpoints.iter().position(|a| a.level() > 0);
        plan.log_certificates = log_certificates(&plan, &pieces);
        Ok(HeavyFamily {
            n,
            k,
            target: target.clone(),
            risks: pieces.into_iter().map(RiskFunction::Piecewise).collect(),
            plan: Some(plan),
            notes: Vec::new(),
        })
    }
}

/// `ln(gap_l) - sum_{i in I_l} R_i(g^-1(a_l))` for every interval, from the
/// finished component risks.
pub(crate) fn log_certificates(
    plan: &ConstructionPlan,
    risks: &[PiecewiseRisk],
) -> Vec<Option<ExtReal>> {
    let horizon = *plan.breakpoints.last().expect("a_0 present");
    (0..plan.intervals())
        .map(|l| {
            let a = plan.breakpoints[l];
            let y = plan
                .gauge
                .inverse(&a.max(ExtReal::ZERO))
                .expect("non-negative level");
            if y > horizon {
                return None;
            }
            let s = plan.frozen_set(l).iter().fold(ExtReal::ZERO, |acc, &i| {
                acc.add(&risks[i].eval(&y).expect("within horizon"))
            });
            Some(plan.gaps[l].ln().sub(&s))
        })
        .collect()
}

fn start_point(target: &TargetDistribution) -> Result<ExtReal> {
    let a0 = ExtReal::from_f64(target.support_start().min(0.0));
    if !target.risk(&a0).is_zero() {
        return Err(Error::Hypothesis(format!(
            "target has positive risk at the construction start {a0}; shift it so its support starts at or after 0"
        )));
    }
    Ok(a0)
}

fn check_explicit(seq: &[ExtReal]) -> Result<()> {
    if seq.len() < 2 {
        return Err(Error::InvalidParameter(
            "explicit sequence needs at least two breakpoints".into(),
        ));
    }
    if let Some(i) = seq.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::NonMonotone(i + 1));
    }
    if seq.iter().any(|a| !a.is_finite()) {
        return Err(Error::InvalidParameter(
            "explicit sequence has a non-finite breakpoint".into(),
        ));
    }
    Ok(())
}

pub(super) fn construct(
    target: &TargetDistribution,
    gauge: &GrowthFunction,
    n: usize,
    k: usize,
    policy: Policy,
    horizon: Horizon,
) -> Result<HeavyFamily> {
    if let Horizon::Intervals(c) = horizon {
        if c == 0 || c > MAX_INTERVALS {
            return Err(Error::InvalidParameter(format!(
                "horizon must be 1..={MAX_INTERVALS} intervals, got {c}"
            )));
        }
    }
    let kind = policy.kind();
    match policy {
        Policy::Explicit(seq) => {
            check_explicit(&seq)?;
            let count = match horizon {
                Horizon::Intervals(c) if c < seq.len() => c,
                Horizon::Intervals(c) => {
                    return Err(Error::InvalidParameter(format!(
                        "explicit sequence has {} intervals, horizon asks for {c}",
                        seq.len() - 1
                    )))
                }
                Horizon::Until(x) => seq
                    .iter()
                    .position(|a| *a >= x)
                    .unwrap_or(seq.len() - 1)
                    .max(1),
            };
            replay(target, gauge, n, k, kind, &seq[..=count])
        }
        Policy::TargetMinimal | Policy::ExactMinimal => {
            let exact = kind == PolicyKind::ExactMinimal;
            let mut b = Builder::new(target, gauge, n, k, start_point(target)?);
            let mut truncated = None;
            loop {
                let done = match horizon {
                    Horizon::Intervals(c) => b.gaps.len() >= c,
                    Horizon::Until(x) => b.last() >= x,
                };
                if done {
                    break;
                }
                if b.gaps.len() >= MAX_INTERVALS {
                    truncated = Some(format!("interval cap {MAX_INTERVALS} reached"));
                    break;
                }
                let (next, _) = b.minimal_step(exact);
                if !next.is_finite() {
                    truncated = Some(format!(
                        "breakpoint {} exceeds the largest representable tower",
                        b.gaps.len() + 1
                    ));
                    break;
                }
                b.push(next);
            }
            if b.gaps.is_empty() {
                return Err(Error::InvalidParameter(
                    "horizon produced no intervals".into(),
                ));
            }
            b.finish(n, kind, truncated)
        }
    }
}

fn replay(
    target: &TargetDistribution,
    gauge: &GrowthFunction,
    n: usize,
    k: usize,
    kind: PolicyKind,
    seq: &[ExtReal],
) -> Result<HeavyFamily> {
    if !target.risk(&seq[0]).is_zero() {
        return Err(Error::Hypothesis(format!(
            "target has positive risk at the first breakpoint {}",
            seq[0]
        )));
    }
    let mut b = Builder::new(target, gauge, n, k, seq[0]);
    for a in &seq[1..] {
        b.push(*a);
    }
    b.finish(n, kind, None)
}

/// Rebuilds a family from stored breakpoints, e.g. a plan read back from
/// disk. The policy label is carried through unchanged.
pub fn construct_from_breakpoints(
    target: &TargetDistribution,
    gauge: &GrowthFunction,
    n: usize,
    k: usize,
    policy: PolicyKind,
    breakpoints: &[ExtReal],
) -> Result<HeavyFamily> {
    check_family_shape(n, k)?;
    target.validate()?;
    gauge.validate()?;
    check_explicit(breakpoints)?;
    if breakpoints.len() - 1 > MAX_INTERVALS {
        return Err(Error::InvalidParameter(format!(
            "more than {MAX_INTERVALS} intervals"
        )));
    }
    replay(target, gauge, n, k, policy, breakpoints)
}
