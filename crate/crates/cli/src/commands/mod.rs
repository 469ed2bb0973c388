mod construct;
mod figures;
mod sample;
mod validate;
mod verify;

use std::io::Write;
use std::path::Path;

use heavymin::ExtReal;

use crate::error::{CliError, Result};

pub use construct::{cmd_construct, parse_policy, ConstructMode};
pub use figures::{cmd_figures, figure_rows, FigureRow};
pub use sample::cmd_sample;
pub use validate::{cmd_validate_seq, parse_rule};
pub use verify::{cmd_verify, VerifyDocument, VerifyOutcome};

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub(crate) fn say(out: &mut dyn Write, line: std::fmt::Arguments<'_>) -> Result<()> {
    writeln!(out, "{line}").map_err(|e| CliError::io("<stdout>", e))
}

/// Whitespace- or comma-separated tower values, `#` starts a comment.
pub fn parse_sequence(text: &str) -> Result<Vec<ExtReal>> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(|l| l.split([',', ' ', '\t']))
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.trim()
                .parse::<ExtReal>()
                .map_err(|e| CliError::Config(format!("sequence: {e}")))
        })
        .collect()
}

pub(crate) fn parse_ext(s: &str, what: &str) -> Result<ExtReal> {
    s.parse()
        .map_err(|_| CliError::Config(format!("{what}: cannot parse {s:?}")))
}

pub(crate) fn subset_label(s: &[usize]) -> String {
    let parts: Vec<String> = s.iter().map(|i| (i + 1).to_string()).collect();
    format!("{{{}}}", parts.join(","))
}
