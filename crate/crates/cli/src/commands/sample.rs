use std::io::Write;
use std::path::Path;

use heavymin::sample_family;

use super::{read_text, say};
use crate::config::{RunConfig, DEFAULT_SEED};
use crate::error::{CliError, Result};
use crate::schema::PlanDocument;

/// Writes `n` rows `h1,...,hn,min` of independent component draws.
pub fn cmd_sample(
    plan_path: &Path,
    cfg: &RunConfig,
    out: &mut dyn Write,
    log: &mut dyn Write,
) -> Result<usize> {
    let doc = PlanDocument::from_json(&read_text(plan_path)?)?;
    let (fam, issues) = doc.to_family()?;
    for i in &issues {
        say(log, format_args!("warning: {i}"))?;
    }
    let n = *cfg.require(&cfg.samples, "samples")?;
    let seed = cfg.seed.unwrap_or(DEFAULT_SEED);
    say(log, format_args!("seed = {seed}"))?;
    let m = sample_family(&fam, n, seed)?;
    let all: Vec<usize> = (0..fam.n).collect();
    let mins = m.min_over(&all);
    let sink: Box<dyn Write + '_> = match &cfg.output {
        Some(p) => Box::new(std::fs::File::create(p).map_err(|e| CliError::io(p, e))?),
        None => Box::new(out),
    };
    let mut w = csv::Writer::from_writer(sink);
    let mut header: Vec<String> = (1..=fam.n).map(|i| format!("h{i}")).collect();
    header.push("min".into());
    w.write_record(&header)?;
    for (j, min) in mins.iter().enumerate() {
        let mut row: Vec<String> = m.columns.iter().map(|c| c[j].to_string()).collect();
        row.push(min.to_string());
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| CliError::io("<samples>", e))?;
    if let Some(p) = &cfg.output {
        say(log, format_args!("wrote {n} rows to {}", p.display()))?;
    }
    Ok(n)
}
