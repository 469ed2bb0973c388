use std::f64::consts::LN_2;
use std::io::Write;

use heavymin::{minimal_sequence, ClosedForm, ExtReal};

use super::construct::hypothesis_text;
use super::say;
use crate::error::{CliError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct FigureRow {
    pub k: usize,
    pub log2_a_star: ExtReal,
    pub log2_a: ExtReal,
    pub loglog_a_star: ExtReal,
    pub loglog_a: ExtReal,
}

fn log2(x: &ExtReal) -> ExtReal {
    if x.is_zero() {
        return ExtReal::NEG_INFINITY;
    }
    x.ln().scale(1.0 / LN_2)
}

fn lnln(x: &ExtReal) -> ExtReal {
    if *x <= ExtReal::ONE {
        return ExtReal::NEG_INFINITY;
    }
    x.ln().ln()
}

/// Rows `k = 1..=count` of the minimal recursion next to the closed form;
/// the closed-form columns come straight from the exponent sums. Stops
/// early when the recursion leaves the representable range.
pub fn figure_rows(
    form: ClosedForm,
    alpha: f64,
    beta: f64,
    count: usize,
) -> Result<(Vec<FigureRow>, bool)> {
    form.check(alpha, beta)
        .map_err(|e| CliError::Hypothesis(hypothesis_text(e)))?;
    let target = form.target(alpha)?;
    let gauge = form.gauge(beta)?;
    let minimal = minimal_sequence(&target, &gauge, count + 1);
    let sums = form.exponents(alpha, beta, count)?;
    let truncated = minimal.len() < count + 1;
    let rows = sums
        .iter()
        .zip(minimal.iter().skip(1))
        .enumerate()
        .map(|(j, (s, a_star))| {
            let (log2_a, loglog_a) = match form {
                ClosedForm::Exponential | ClosedForm::Polynomial => (*s, s.scale(LN_2).ln()),
                ClosedForm::Weibull => (s.exp().scale(1.0 / LN_2), *s),
            };
            FigureRow {
                k: j + 1,
                log2_a_star: log2(a_star),
                log2_a,
                loglog_a_star: lnln(a_star),
                loglog_a,
            }
        })
        .collect();
    Ok((rows, truncated))
}

pub fn cmd_figures(
    form: ClosedForm,
    alpha: f64,
    beta: f64,
    count: usize,
    out: &mut dyn Write,
    log: &mut dyn Write,
) -> Result<Vec<FigureRow>> {
    if count == 0 {
        return Err(CliError::Config("--count must be at least 1".into()));
    }
    let (rows, truncated) = figure_rows(form, alpha, beta, count)?;
    say(
        out,
        format_args!(
            "# figures family={} alpha={alpha} beta={beta} count={count}",
            form.name()
        ),
    )?;
    if truncated {
        say(
            out,
            format_args!(
                "# truncated after k = {}: minimal recursion leaves the tower range",
                rows.len()
            ),
        )?;
        say(
            log,
            format_args!("notice: truncated after k = {}", rows.len()),
        )?;
    }
    let mut w = csv::Writer::from_writer(&mut *out);
    w.write_record(["k", "log2_a_star", "log2_a", "loglog_a_star", "loglog_a"])?;
    for r in &rows {
        w.write_record([
            r.k.to_string(),
            r.log2_a_star.to_string(),
            r.log2_a.to_string(),
            r.loglog_a_star.to_string(),
            r.loglog_a.to_string(),
        ])?;
    }
    w.flush().map_err(|e| CliError::io("<figures>", e))?;
    Ok(rows)
}
