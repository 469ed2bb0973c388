//! The plan document: one JSON object with a fixed field order. Every
//! number that can leave `f64` range is a decimal string (`"1806.0"`,
//! `"e^2007.5"`, `"e^e^(805.48,1.2e-14)"`), so documents are byte-stable
//! and lossless.

use heavymin::{
    certificate_passes, construct_from_breakpoints, ConstructionPlan, ExtReal, GrowthFunction,
    HeavyFamily, PlanStatus, PolicyKind, RiskFunction, TargetDistribution,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const PLAN_SCHEMA: &str = "heavymin-plan/1";
pub const REPORT_SCHEMA: &str = "heavymin-report/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DocKind {
    /// Freeze/track construction with breakpoints and certificates.
    FreezeTrack,
    /// Two components with half the target risk; no plan.
    SqrtSplit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalRecord {
    pub index: usize,
    pub start: ExtReal,
    pub end: ExtReal,
    /// `ln(end)`; `-inf` at 0.
    pub log_end: ExtReal,
    pub gap: ExtReal,
    pub frozen: Vec<usize>,
    pub log_certificate: Option<ExtReal>,
    pub certificate: Option<ExtReal>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanDocument {
    pub schema: String,
    pub kind: DocKind,
    pub n: usize,
    pub k: usize,
    pub target: TargetDistribution,
    pub gauge: Option<GrowthFunction>,
    pub policy: Option<PolicyKind>,
    pub subsets: Vec<Vec<usize>>,
    pub intervals: Vec<IntervalRecord>,
    pub status: Option<PlanStatus>,
    pub risks: Vec<RiskFunction>,
    pub notes: Vec<String>,
}

/// Something in a loaded plan that does not match what its own
/// breakpoints imply.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanIssue {
    pub interval: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for PlanIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.interval {
            Some(l) => write!(f, "interval {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl PlanDocument {
    pub fn from_family(fam: &HeavyFamily, gauge: Option<&GrowthFunction>) -> Self {
        let (kind, intervals, plan_gauge) = match &fam.plan {
            Some(p) => (
                DocKind::FreezeTrack,
                interval_records(p),
                Some(p.gauge.clone()),
            ),
            None => (DocKind::SqrtSplit, Vec::new(), gauge.cloned()),
        };
        PlanDocument {
            schema: PLAN_SCHEMA.into(),
            kind,
            n: fam.n,
            k: fam.k,
            target: fam.target.clone(),
            gauge: plan_gauge,
            policy: fam.plan.as_ref().map(|p| p.policy),
            subsets: fam
                .plan
                .as_ref()
                .map(|p| p.subsets.clone())
                .unwrap_or_default(),
            intervals,
            status: fam.plan.as_ref().map(|p| p.status.clone()),
            risks: fam.risks.clone(),
            notes: fam.notes.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: PlanDocument = serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("plan document: {e}")))?;
        if doc.schema != PLAN_SCHEMA {
            return Err(CliError::Config(format!(
                "unsupported schema {:?}, expected {PLAN_SCHEMA:?}",
                doc.schema
            )));
        }
        if doc.risks.len() != doc.n {
            return Err(CliError::Config(format!(
                "{} risks for n = {}",
                doc.risks.len(),
                doc.n
            )));
        }
        Ok(doc)
    }

    /// The family exactly as stored, plus every disagreement between the
    /// stored numbers and a replay of the stored breakpoints.
    pub fn to_family(&self) -> Result<(HeavyFamily, Vec<PlanIssue>)> {
        let mut issues = Vec::new();
        let plan = match self.kind {
            DocKind::SqrtSplit => None,
            DocKind::FreezeTrack => Some(self.stored_plan(&mut issues)?),
        };
        if let Some(plan) = &plan {
            self.compare_replay(plan, &mut issues)?;
        }
        let fam = HeavyFamily {
            n: self.n,
            k: self.k,
            target: self.target.clone(),
            risks: self.risks.clone(),
            plan,
            notes: self.notes.clone(),
        };
        Ok((fam, issues))
    }

    fn stored_plan(&self, issues: &mut Vec<PlanIssue>) -> Result<ConstructionPlan> {
        let gauge = self
            .gauge
            .clone()
            .ok_or_else(|| CliError::Config("freeze-track plan without gauge".into()))?;
        let policy = self
            .policy
            .ok_or_else(|| CliError::Config("freeze-track plan without policy".into()))?;
        let first = self
            .intervals
            .first()
            .ok_or_else(|| CliError::Config("plan has no intervals".into()))?;
        let mut breakpoints = vec![first.start];
        let mut gaps = Vec::with_capacity(self.intervals.len());
        let mut log_certificates = Vec::with_capacity(self.intervals.len());
        let tol = ExtReal::from_f64(1e-9);
        for (l, r) in self.intervals.iter().enumerate() {
            let mut issue = |message: String| {
                issues.push(PlanIssue {
                    interval: Some(l),
                    message,
                })
            };
            if r.index != l {
                issue(format!("index field reads {}", r.index));
            }
            if r.start != breakpoints[l] {
                issue(format!(
                    "start {} does not continue the previous end {}",
                    r.start, breakpoints[l]
                ));
            }
            if self.subsets.is_empty() || r.frozen != self.subsets[l % self.subsets.len()] {
                issue(format!(
                    "frozen set {:?} breaks the cycle of frozen subsets",
                    r.frozen
                ));
            }
            let log = r.log_certificate;
            let lin = r.certificate.map(|c| {
                if c.is_negative() || c.is_zero() {
                    ExtReal::NEG_INFINITY
                } else {
                    c.ln()
                }
            });
            let disagree = matches!((log, lin), (Some(a), Some(b)) if a.sub(&b).abs() > tol && a.rel_diff(&b) > 1e-9);
            let weakest = match (log, lin) {
                (Some(a), Some(b)) if disagree => Some(a.min(b)),
                (Some(a), _) => Some(a),
                (None, b) => b,
            };
            if !certificate_passes(weakest.as_ref()) {
                let shown = weakest.map_or_else(|| "undefined".into(), |c| c.exp().to_string());
                issue(format!("certificate {shown} is below 1"));
            }
            if disagree {
                issue(format!(
                    "certificate {} disagrees with log certificate {}",
                    r.certificate.unwrap(),
                    log.unwrap()
                ));
            }
            if log.is_some() != lin.is_some() {
                issue("only one of certificate and log certificate is set".into());
            }
            breakpoints.push(r.end);
            gaps.push(r.gap);
            log_certificates.push(weakest);
        }
        let plan = ConstructionPlan {
            target: self.target.clone(),
            gauge,
            n: self.n,
            k: self.k,
            policy,
            subsets: self.subsets.clone(),
            breakpoints,
            gaps,
            log_certificates,
            status: self.status.clone().unwrap_or_default(),
        };
        Ok(plan)
    }

    fn compare_replay(&self, plan: &ConstructionPlan, issues: &mut Vec<PlanIssue>) -> Result<()> {
        let replay = construct_from_breakpoints(
            &self.target,
            &plan.gauge,
            self.n,
            self.k,
            plan.policy,
            &plan.breakpoints,
        )?;
        let rp = replay.plan.as_ref().expect("replay has a plan");
        if rp.subsets != plan.subsets {
            issues.push(PlanIssue {
                interval: None,
                message: "subset order differs from the lexicographic cycle".into(),
            });
        }
        for l in 0..plan.intervals() {
            if rp.gaps[l] != plan.gaps[l] {
                issues.push(PlanIssue {
                    interval: Some(l),
                    message: format!(
                        "stored gap {} differs from end - start = {}",
                        plan.gaps[l], rp.gaps[l]
                    ),
                });
            }
            let stored = plan.log_certificates[l];
            if stored != rp.log_certificates[l] && !issues.iter().any(|i| i.interval == Some(l)) {
                let show = |c: Option<ExtReal>| {
                    c.map_or_else(|| "undefined".into(), |c| c.exp().to_string())
                };
                issues.push(PlanIssue {
                    interval: Some(l),
                    message: format!(
                        "stored certificate {} differs from recomputed {}",
                        show(stored),
                        show(rp.log_certificates[l])
                    ),
                });
            }
        }
        for (i, (a, b)) in self.risks.iter().zip(&replay.risks).enumerate() {
            if a != b {
                issues.push(PlanIssue {
                    interval: None,
                    message: format!(
                        "risk of component {i} differs from the one its breakpoints determine"
                    ),
                });
            }
        }
        Ok(())
    }
}

fn interval_records(p: &ConstructionPlan) -> Vec<IntervalRecord> {
    (0..p.intervals())
        .map(|l| {
            let end = p.breakpoints[l + 1];
            let log_certificate = p.log_certificates[l];
            IntervalRecord {
                index: l,
                start: p.breakpoints[l],
                end,
                log_end: if end.is_zero() {
                    ExtReal::NEG_INFINITY
                } else {
                    end.ln()
                },
                gap: p.gaps[l],
                frozen: p.frozen_set(l).to_vec(),
                log_certificate,
                certificate: log_certificate.map(|c| c.exp()),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use heavymin::{construct_pair, Horizon, Policy};

    fn doc() -> PlanDocument {
        let fam = construct_pair(
            &TargetDistribution::exponential(1.0).unwrap(),
            &GrowthFunction::exp(0.5).unwrap(),
            Policy::TargetMinimal,
            Horizon::Intervals(10),
        )
        .unwrap();
        PlanDocument::from_family(&fam, None)
    }

    #[test]
    fn round_trip_is_lossless() {
        let d = doc();
        let text = d.to_json().unwrap();
        let back = PlanDocument::from_json(&text).unwrap();
        assert_eq!(back, d);
        assert_eq!(back.to_json().unwrap(), text);
        let (fam, issues) = back.to_family().unwrap();
        assert!(issues.is_empty(), "{issues:?}");
        assert_eq!(PlanDocument::from_family(&fam, None), d);
    }

    #[test]
    fn tampered_certificate_named() {
        let mut d = doc();
        d.intervals[5].certificate = Some(ExtReal::from_f64(0.5));
        let (_, issues) = d.to_family().unwrap();
        assert!(
            issues
                .iter()
                .any(|i| i.interval == Some(5) && i.message.contains("below 1")),
            "{issues:?}"
        );
        assert!(issues.iter().all(|i| i.interval == Some(5)));
    }

    #[test]
    fn field_order_is_fixed() {
        let text = doc().to_json().unwrap();
        let pos = |k: &str| text.find(&format!("\"{k}\"")).unwrap();
        assert!(
            pos("schema") < pos("kind")
                && pos("kind") < pos("target")
                && pos("intervals") < pos("risks")
        );
    }
}
