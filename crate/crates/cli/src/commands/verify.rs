use std::io::Write;
use std::path::Path;

use heavymin::{
    hazard_ratio_diagnostic, ks_test, sample_family, verify_family, ExtReal, HeavyFamily, KsKind,
    KsTest, MinimumCheck, Probes, VerificationReport, VerifyConfig,
};
use serde::{Deserialize, Serialize};

use super::{read_text, say, subset_label, write_text};
use crate::config::{RunConfig, DEFAULT_SEED};
use crate::error::{CliError, Result};
use crate::schema::{DocKind, PlanDocument, PlanIssue, REPORT_SCHEMA};

pub const DEFAULT_SAMPLES: usize = 10_000;

/// Checks of a sqrt-split document, which has no plan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitReport {
    pub grid_points: usize,
    pub sup_error: f64,
    pub ks: Option<KsTest>,
    /// `R(x)/x` of the first component at `x = 10^j`.
    pub hazard_ratios: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyDocument {
    pub schema: String,
    pub seed: u64,
    pub plan_issues: Vec<PlanIssue>,
    pub report: Option<VerificationReport>,
    pub split: Option<SplitReport>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyOutcome {
    pub document: VerifyDocument,
    /// Failure lines, each naming the interval or subset concerned.
    pub failures: Vec<String>,
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn verify_split(fam: &HeavyFamily, cfg: &VerifyConfig) -> Result<SplitReport> {
    let sum = fam.subset_risk(&[0, 1])?;
    let points = cfg.grid_points.max(2);
    let mut sup = 0.0f64;
    for j in 0..points {
        let x = ExtReal::from_f64(10f64.powf(-6.0 + 306.0 * j as f64 / (points - 1) as f64));
        let want = fam.target.risk(&x);
        sup = sup.max(sum.eval(&x)?.rel_diff(&want));
    }
    let ks = if cfg.samples > 0 {
        let m = sample_family(fam, cfg.samples, cfg.seed)?;
        Some(ks_test(
            &m.min_over(&[0, 1]),
            &fam.target,
            KsKind::TwoSided,
            cfg.significance,
        )?)
    } else {
        None
    };
    let probes: Vec<ExtReal> = (0..=12).map(|j| ExtReal::from_f64(10f64.powi(j))).collect();
    let trace = hazard_ratio_diagnostic(&fam.risks[0], &Probes::Points(probes))?;
    Ok(SplitReport {
        grid_points: points,
        sup_error: sup,
        ks,
        hazard_ratios: trace.points.iter().map(|p| p.ratio).collect(),
    })
}

fn verify_config(cfg: &RunConfig) -> VerifyConfig {
    let d = VerifyConfig::default();
    VerifyConfig {
        grid_points: cfg.grid_points.unwrap_or(d.grid_points),
        samples: cfg.samples.unwrap_or(DEFAULT_SAMPLES),
        seed: cfg.seed.unwrap_or(DEFAULT_SEED),
        significance: cfg.significance.unwrap_or(d.significance),
        divergence_intervals: cfg.divergence_intervals,
    }
}

fn print_report(
    r: &VerificationReport,
    out: &mut dyn Write,
    failures: &mut Vec<String>,
) -> Result<()> {
    if let Some(e) = r.exactness_sup_error {
        say(
            out,
            format_args!(
                "exactness: sup relative error {e:e} over {} grid points",
                r.grid_points
            ),
        )?;
    }
    for c in &r.minimum_checks {
        let s = subset_label(&c.subset);
        let line = match &c.result {
            MinimumCheck::Exact {
                sup_error,
                worst_x,
                passed,
            } => {
                format!(
                    "minimum {s}: exact, sup error {sup_error:e} at x = {worst_x} {}",
                    verdict(*passed)
                )
            }
            MinimumCheck::Dominance {
                min_slack,
                worst_x,
                passed,
            } => {
                format!(
                    "minimum {s}: dominance, min slack {min_slack:e} at x = {worst_x} {}",
                    verdict(*passed)
                )
            }
        };
        if !c.result.passed() {
            failures.push(line.clone());
        }
        say(out, format_args!("{line}"))?;
    }
    for d in &r.divergence {
        let ok = d.certificates_pass
            && d.bound >= ExtReal::from_f64(d.qualifying as f64 * (1.0 - 1e-12));
        let line = format!(
            "divergence {}: bound {} from {} frozen intervals (residue {}) {}",
            subset_label(&d.subset),
            d.bound,
            d.qualifying,
            d.residue,
            verdict(ok)
        );
        if !ok {
            failures.push(line.clone());
        }
        say(out, format_args!("{line}"))?;
    }
    for t in &r.ks {
        let k = &t.result;
        let kind = match k.kind {
            KsKind::TwoSided => "two-sided",
            KsKind::Lower => "one-sided",
        };
        let line = format!(
            "ks {kind} {}: D = {:.6}, critical {:.6} (n = {}, level {}) {}",
            subset_label(&t.subset),
            k.statistic,
            k.critical,
            k.n,
            k.significance,
            verdict(k.passed)
        );
        if !k.passed {
            failures.push(line.clone());
        }
        say(out, format_args!("{line}"))?;
    }
    for (i, h) in r.hazard.iter().enumerate() {
        if let Some(h) = h {
            let last = h.points.last().expect("at least two probes");
            say(
                out,
                format_args!(
                    "hazard component {}: R(x)/x running minimum {} (log {}) over {} frozen ends (evidence only)",
                    i + 1,
                    last.running_min.exp(),
                    last.running_min,
                    h.points.len()
                ),
            )?;
        }
    }
    Ok(())
}

/// Verifies the plan at `plan_path`; the report goes to `cfg.report` when
/// set. Returns `CheckFailed` after printing when any check fails.
pub fn cmd_verify(plan_path: &Path, cfg: &RunConfig, out: &mut dyn Write) -> Result<VerifyOutcome> {
    let doc = PlanDocument::from_json(&read_text(plan_path)?)?;
    let (fam, issues) = doc.to_family()?;
    let vc = verify_config(cfg);
    say(out, format_args!("seed = {}", vc.seed))?;
    let mut failures: Vec<String> = Vec::new();
    for i in &issues {
        let line = format!("{i}");
        say(out, format_args!("FAIL {line}"))?;
        failures.push(line);
    }
    let (report, split) = match doc.kind {
        DocKind::FreezeTrack => {
            let r = verify_family(&fam, &vc)?;
            print_report(&r, out, &mut failures)?;
            (Some(r), None)
        }
        DocKind::SqrtSplit => {
            let s = verify_split(&fam, &vc)?;
            let exact = s.sup_error <= 1e-12;
            say(
                out,
                format_args!(
                    "sum of risks: sup relative error {:e} {}",
                    s.sup_error,
                    verdict(exact)
                ),
            )?;
            if !exact {
                failures.push(format!(
                    "sum of risks differs from R_F by {:e}",
                    s.sup_error
                ));
            }
            if let Some(k) = &s.ks {
                let line = format!(
                    "ks two-sided {{1,2}}: D = {:.6}, critical {:.6} {}",
                    k.statistic,
                    k.critical,
                    verdict(k.passed)
                );
                if !k.passed {
                    failures.push(line.clone());
                }
                say(out, format_args!("{line}"))?;
            }
            (None, Some(s))
        }
    };
    let passed = failures.is_empty() && report.as_ref().is_none_or(|r| r.passed);
    let document = VerifyDocument {
        schema: REPORT_SCHEMA.into(),
        seed: vc.seed,
        plan_issues: issues,
        report,
        split,
        passed,
    };
    if let Some(p) = &cfg.report {
        let mut text = serde_json::to_string_pretty(&document)?;
        text.push('\n');
        write_text(p, &text)?;
    }
    say(out, format_args!("verdict: {}", verdict(passed)))?;
    if passed {
        Ok(VerifyOutcome { document, failures })
    } else {
        let first = failures
            .first()
            .cloned()
            .unwrap_or_else(|| "verification failed".into());
        Err(CliError::CheckFailed(format!(
            "verification failed: {first}"
        )))
    }
}
