use std::io::Write;

use heavymin::{
    validate_explicit_sequence, ExtReal, GrowthFunction, IntervalRule, SequenceReport,
    TargetDistribution,
};

use super::say;
use crate::error::{CliError, Result};

/// `alternating` or `cycle:<n>,<k>`.
pub fn parse_rule(spec: &str) -> Result<IntervalRule> {
    if spec == "alternating" {
        return Ok(IntervalRule::Alternating);
    }
    let bad = || {
        CliError::Config(format!(
            "unknown interval rule {spec:?} (alternating, cycle:<n>,<k>)"
        ))
    };
    let (n, k) = spec
        .strip_prefix("cycle:")
        .and_then(|r| r.split_once(','))
        .ok_or_else(bad)?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    let k: usize = k.trim().parse().map_err(|_| bad())?;
    if k <= 1 || k > n {
        return Err(CliError::Hypothesis(format!(
            "family needs 1 < k <= n, got n = {n}, k = {k}"
        )));
    }
    Ok(IntervalRule::Cycle { n, k })
}

pub fn cmd_validate_seq(
    target: &TargetDistribution,
    gauge: &GrowthFunction,
    seq: &[ExtReal],
    rule: IntervalRule,
    out: &mut dyn Write,
) -> Result<SequenceReport> {
    let report = validate_explicit_sequence(target, gauge, seq, rule)?;
    for c in &report.intervals {
        let cert = c
            .log_certificate
            .map_or_else(|| "undefined".into(), |l| l.exp().to_string());
        say(
            out,
            format_args!(
                "interval {}: gap {} {}, certificate {cert} {}",
                c.index,
                c.gap,
                if c.gap_ok { "ok" } else { "< 1" },
                if c.certificate_ok { "ok" } else { "< 1" }
            ),
        )?;
    }
    match report.first_failure() {
        None => {
            say(
                out,
                format_args!("verdict: valid ({} intervals)", report.intervals.len()),
            )?;
            Ok(report)
        }
        Some(f) => {
            let what = if f.gap_ok {
                "certificate below 1"
            } else {
                "gap below 1"
            };
            say(out, format_args!("verdict: invalid"))?;
            Err(CliError::CheckFailed(format!(
                "interval {}: {what}",
                f.index
            )))
        }
    }
}
