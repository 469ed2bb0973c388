use std::io::Write;

use heavymin::{
    construct_family, example_sequence, sqrt_split, ClosedForm, GrowthFunction, HeavyFamily,
    Horizon, Policy, TargetDistribution,
};

use super::{parse_ext, parse_sequence, read_text, say, write_text};
use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::params::{gauge_label, parse_gauge, parse_target, target_label};
use crate::schema::PlanDocument;

pub const DEFAULT_HORIZON: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstructMode {
    Pair,
    Family { n: usize, k: usize },
    SqrtSplit,
}

impl ConstructMode {
    fn from_config(cfg: &RunConfig) -> Result<Self> {
        match cfg.mode.as_deref().unwrap_or("pair") {
            "pair" => Ok(ConstructMode::Pair),
            "family" => Ok(ConstructMode::Family {
                n: *cfg.require(&cfg.n, "n")?,
                k: *cfg.require(&cfg.k, "k")?,
            }),
            "sqrt-split" => Ok(ConstructMode::SqrtSplit),
            other => Err(CliError::Config(format!(
                "unknown mode {other:?} (pair, family, sqrt-split)"
            ))),
        }
    }
}

/// The closed form matching a target/gauge pair of families.
fn closed_form_for(
    target: &TargetDistribution,
    gauge: &GrowthFunction,
) -> Result<(ClosedForm, f64, f64)> {
    match (target, gauge) {
        (TargetDistribution::Exponential { alpha }, GrowthFunction::Exp { beta }) => {
            Ok((ClosedForm::Exponential, *alpha, *beta))
        }
        (TargetDistribution::Polynomial { alpha }, GrowthFunction::Power { beta }) => {
            Ok((ClosedForm::Polynomial, *alpha, *beta))
        }
        (TargetDistribution::Weibull { alpha }, GrowthFunction::ExpPower { beta }) => {
            Ok((ClosedForm::Weibull, *alpha, *beta))
        }
        _ => Err(CliError::Config(format!(
            "no closed-form sequence for target {} with gauge {}",
            target_label(target),
            gauge_label(gauge)
        ))),
    }
}

/// `exact-minimal` (default), `target-minimal` (alias `paper-minimal`),
/// `closed-form`, or `explicit:<file>`.
pub fn parse_policy(
    spec: Option<&str>,
    target: &TargetDistribution,
    gauge: &GrowthFunction,
    intervals: usize,
) -> Result<Policy> {
    let spec = spec.unwrap_or("exact-minimal");
    match spec {
        "exact-minimal" => Ok(Policy::ExactMinimal),
        "target-minimal" | "paper-minimal" => Ok(Policy::TargetMinimal),
        "closed-form" => {
            let (form, alpha, beta) = closed_form_for(target, gauge)?;
            form.check(alpha, beta).map_err(|e| CliError::Hypothesis(hypothesis_text(e)))?;
            Ok(Policy::Explicit(example_sequence(form, alpha, beta, intervals)?))
        }
        s => match s.strip_prefix("explicit:") {
            Some(path) => Ok(Policy::Explicit(parse_sequence(&read_text(path.as_ref())?)?)),
            None => Err(CliError::Config(format!(
                "unknown policy {s:?} (exact-minimal, target-minimal, paper-minimal, closed-form, explicit:<file>)"
            ))),
        },
    }
}

pub(crate) fn hypothesis_text(e: heavymin::Error) -> String {
    match e {
        heavymin::Error::Hypothesis(m) => m,
        other => other.to_string(),
    }
}

fn build(cfg: &RunConfig) -> Result<(HeavyFamily, Option<GrowthFunction>)> {
    let target = parse_target(cfg.require(&cfg.target, "target")?)?;
    let mode = ConstructMode::from_config(cfg)?;
    let gauge = cfg.gauge.as_deref().map(parse_gauge).transpose()?;
    if let ConstructMode::Family { n, k } = mode {
        if k <= 1 || k > n {
            return Err(CliError::Hypothesis(format!(
                "family needs 1 < k <= n, got n = {n}, k = {k}"
            )));
        }
    }
    if mode == ConstructMode::SqrtSplit {
        return Ok((sqrt_split(&target, gauge.as_ref())?, gauge));
    }
    let gauge = gauge.ok_or_else(|| {
        CliError::Config("missing --gauge (or `gauge` in the config file)".into())
    })?;
    let intervals = cfg.horizon.unwrap_or(DEFAULT_HORIZON);
    let horizon = match &cfg.until {
        Some(x) => Horizon::Until(parse_ext(x, "until")?),
        None => Horizon::Intervals(intervals),
    };
    let policy = parse_policy(cfg.policy.as_deref(), &target, &gauge, intervals)?;
    let (n, k) = match mode {
        ConstructMode::Family { n, k } => (n, k),
        _ => (2, 2),
    };
    Ok((
        construct_family(&target, &gauge, n, k, policy, horizon)?,
        Some(gauge),
    ))
}

/// Builds the plan, writes the document to `output` (or `out` when no path
/// is configured) and prints a summary to `log`.
pub fn cmd_construct(
    cfg: &RunConfig,
    out: &mut dyn Write,
    log: &mut dyn Write,
) -> Result<PlanDocument> {
    let (fam, gauge) = build(cfg)?;
    let doc = PlanDocument::from_family(&fam, gauge.as_ref());
    let json = doc.to_json()?;
    match &cfg.output {
        Some(p) => write_text(p, &json)?,
        None => out
            .write_all(json.as_bytes())
            .map_err(|e| CliError::io("<stdout>", e))?,
    }
    match &fam.plan {
        Some(plan) => {
            let min = plan
                .min_log_certificate()
                .map_or_else(|| "undefined".into(), |c| c.exp().to_string());
            say(
                log,
                format_args!(
                    "constructed n = {}, k = {}: {} intervals, {} frozen sets, policy {}, min certificate {min}, last breakpoint {}",
                    fam.n,
                    fam.k,
                    plan.intervals(),
                    plan.cycle_len(),
                    plan.policy.as_str(),
                    plan.breakpoints.last().expect("a_0 present"),
                ),
            )?;
            if let Some(i) = plan.status.linear_overflow_at {
                say(
                    log,
                    format_args!("breakpoint {i} and later exceed f64 range; stored as towers"),
                )?;
            }
            if let Some(t) = &plan.status.truncated {
                say(log, format_args!("truncated: {t}"))?;
            }
        }
        None => say(
            log,
            format_args!(
                "sqrt-split of {}: two components with risk R_F / 2",
                target_label(&fam.target)
            ),
        )?,
    }
    for n in &fam.notes {
        say(log, format_args!("note: {n}"))?;
    }
    if let Some(p) = &cfg.output {
        say(log, format_args!("wrote {}", p.display()))?;
    }
    Ok(doc)
}
