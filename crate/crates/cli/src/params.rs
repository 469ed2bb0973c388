//! `family:parameter` specs for targets and gauges, e.g. `exponential:1`,
//! `exp_power:0.25`, `identity_plus`, `tabulated:risk.csv`.

use std::path::Path;

use heavymin::{GrowthFunction, TargetDistribution};

use crate::error::{CliError, Result};

fn split(spec: &str) -> (&str, Option<&str>) {
    match spec.split_once(':') {
        Some((f, p)) => (f.trim(), Some(p.trim())),
        None => (spec.trim(), None),
    }
}

fn number(family: &str, p: Option<&str>) -> Result<f64> {
    let p =
        p.ok_or_else(|| CliError::Config(format!("{family} needs a parameter, e.g. {family}:1")))?;
    p.parse()
        .map_err(|_| CliError::Config(format!("{family}: cannot parse parameter {p:?}")))
}

/// Two numeric columns from a CSV file with a header row.
pub fn read_table(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => CliError::io(path, io),
            other => CliError::Config(format!("{}: {other:?}", path.display())),
        })?;
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let col = |i: usize| -> Result<f64> {
            rec.get(i).and_then(|v| v.parse().ok()).ok_or_else(|| {
                CliError::Config(format!(
                    "{}: row {} needs two numeric columns",
                    path.display(),
                    line + 1
                ))
            })
        };
        x.push(col(0)?);
        y.push(col(1)?);
    }
    Ok((x, y))
}

pub fn parse_target(spec: &str) -> Result<TargetDistribution> {
    let (family, p) = split(spec);
    Ok(match family {
        "exponential" => TargetDistribution::exponential(number(family, p)?)?,
        "polynomial" => TargetDistribution::polynomial(number(family, p)?)?,
        "weibull" => TargetDistribution::weibull(number(family, p)?)?,
        "tabulated" => {
            let path = p.ok_or_else(|| {
                CliError::Config("tabulated target needs a file: tabulated:<csv>".into())
            })?;
            let (x, r) = read_table(Path::new(path))?;
            TargetDistribution::tabulated(x, r)?
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown target family {other:?} (exponential, polynomial, weibull, tabulated)"
            )))
        }
    })
}

pub fn parse_gauge(spec: &str) -> Result<GrowthFunction> {
    let (family, p) = split(spec);
    Ok(match family {
        "power" => GrowthFunction::power(number(family, p)?)?,
        "exp" => GrowthFunction::exp(number(family, p)?)?,
        "exp_power" => GrowthFunction::exp_power(number(family, p)?)?,
        "identity_plus" => GrowthFunction::IdentityPlus,
        "tabulated" => {
            let path = p.ok_or_else(|| {
                CliError::Config("tabulated gauge needs a file: tabulated:<csv>".into())
            })?;
            let (x, g) = read_table(Path::new(path))?;
            GrowthFunction::tabulated(x, g)?
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown gauge family {other:?} (power, exp, exp_power, identity_plus, tabulated)"
            )))
        }
    })
}

pub fn target_label(t: &TargetDistribution) -> String {
    match t {
        TargetDistribution::Exponential { alpha }
        | TargetDistribution::Polynomial { alpha }
        | TargetDistribution::Weibull { alpha } => format!("{}:{alpha}", t.family_name()),
        TargetDistribution::Tabulated { .. } => "tabulated".into(),
    }
}

pub fn gauge_label(g: &GrowthFunction) -> String {
    match g {
        GrowthFunction::Power { beta }
        | GrowthFunction::Exp { beta }
        | GrowthFunction::ExpPower { beta } => {
            format!("{}:{beta}", g.family_name())
        }
        other => other.family_name().into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_families() {
        assert_eq!(
            parse_target("exponential:2").unwrap(),
            TargetDistribution::exponential(2.0).unwrap()
        );
        assert_eq!(
            parse_gauge("exp_power: 0.25").unwrap(),
            GrowthFunction::exp_power(0.25).unwrap()
        );
        assert_eq!(
            parse_gauge("identity_plus").unwrap(),
            GrowthFunction::IdentityPlus
        );
        assert!(matches!(parse_target("gamma:1"), Err(CliError::Config(_))));
        assert!(matches!(parse_target("weibull"), Err(CliError::Config(_))));
        assert_eq!(
            target_label(&parse_target("weibull:0.5").unwrap()),
            "weibull:0.5"
        );
    }
}
