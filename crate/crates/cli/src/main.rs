use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use heavymin::ClosedForm;
use heavymin_cli::commands::{self, parse_rule, parse_sequence};
use heavymin_cli::params::{parse_gauge, parse_target};
use heavymin_cli::{CliError, Result, RunConfig};

/// Heavy-tailed families whose minimum is (or is dominated by) a target
/// distribution.
#[derive(Parser, Debug)]
#[command(name = "heavymin", version, about)]
struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a plan and write the plan document.
    Construct(ConstructArgs),
    /// Re-check a plan document; exits 4 if any check fails.
    Verify(VerifyArgs),
    /// Draw samples from every component of a plan.
    Sample(SampleArgs),
    /// CSV of the minimal recursion next to a closed-form sequence.
    Figures(FigureArgs),
    /// Check coverage and certificates of a given breakpoint sequence.
    ValidateSeq(ValidateArgs),
}

#[derive(Args, Debug)]
struct ConstructArgs {
    /// Target, e.g. exponential:1, polynomial:3, weibull:0.5, tabulated:<csv>.
    #[arg(long)]
    target: Option<String>,
    /// Gauge, e.g. exp:0.5, power:1, exp_power:0.25, identity_plus.
    #[arg(long)]
    gauge: Option<String>,
    /// pair, family or sqrt-split.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    /// exact-minimal, target-minimal (alias paper-minimal), closed-form or explicit:<file>.
    #[arg(long)]
    policy: Option<String>,
    /// Number of intervals.
    #[arg(long)]
    horizon: Option<usize>,
    /// Build until the last breakpoint reaches this point instead.
    #[arg(long)]
    until: Option<String>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    plan: PathBuf,
    /// Monte Carlo sample size for the KS checks; 0 skips them.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    grid_points: Option<usize>,
    #[arg(long)]
    significance: Option<f64>,
    /// Interval count for the divergence bounds (default: whole plan).
    #[arg(long)]
    divergence_intervals: Option<usize>,
    /// Where to write the JSON report.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SampleArgs {
    plan: PathBuf,
    #[arg(short = 'n', long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FigureArgs {
    /// exponential, polynomial or weibull.
    #[arg(long)]
    family: String,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    beta: f64,
    /// Number of terms K.
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[arg(long)]
    target: String,
    #[arg(long)]
    gauge: String,
    /// File of breakpoints starting at 0.
    #[arg(long, conflicts_with = "closed_form")]
    seq: Option<PathBuf>,
    /// Use the closed-form sequence of a family with the target and gauge parameters.
    #[arg(long)]
    closed_form: Option<String>,
    #[arg(long, default_value_t = 8)]
    count: usize,
    /// alternating or cycle:<n>,<k>.
    #[arg(long, default_value = "alternating")]
    rule: String,
}

fn closed_form(name: &str) -> Result<ClosedForm> {
    ClosedForm::parse(name).ok_or_else(|| {
        CliError::Config(format!(
            "unknown family {name:?} (exponential, polynomial, weibull)"
        ))
    })
}

fn parameter(spec: &str) -> Result<f64> {
    spec.split_once(':')
        .and_then(|(_, p)| p.trim().parse().ok())
        .ok_or_else(|| CliError::Config(format!("{spec:?} carries no numeric parameter")))
}

fn run(cli: Cli) -> Result<()> {
    let file = RunConfig::load_opt(cli.config.as_deref())?;
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let (mut out, mut log) = (stdout.lock(), stderr.lock());
    match cli.command {
        Command::Construct(a) => {
            let cfg = file.merged(RunConfig {
                target: a.target,
                gauge: a.gauge,
                mode: a.mode,
                n: a.n,
                k: a.k,
                policy: a.policy,
                horizon: a.horizon,
                until: a.until,
                output: a.output,
                ..Default::default()
            });
            commands::cmd_construct(&cfg, &mut out, &mut log)?;
        }
        Command::Verify(a) => {
            let cfg = file.merged(RunConfig {
                samples: a.samples,
                seed: a.seed,
                grid_points: a.grid_points,
                significance: a.significance,
                divergence_intervals: a.divergence_intervals,
                report: a.report,
                ..Default::default()
            });
            commands::cmd_verify(&a.plan, &cfg, &mut out)?;
        }
        Command::Sample(a) => {
            let cfg = file.merged(RunConfig {
                samples: a.samples,
                seed: a.seed,
                output: a.output,
                ..Default::default()
            });
            commands::cmd_sample(&a.plan, &cfg, &mut out, &mut log)?;
        }
        Command::Figures(a) => {
            let form = closed_form(&a.family)?;
            match &a.output {
                Some(p) => {
                    let mut f = std::fs::File::create(p).map_err(|e| CliError::io(p, e))?;
                    commands::cmd_figures(form, a.alpha, a.beta, a.count, &mut f, &mut log)?;
                }
                None => {
                    commands::cmd_figures(form, a.alpha, a.beta, a.count, &mut out, &mut log)?;
                }
            }
        }
        Command::ValidateSeq(a) => {
            let target = parse_target(&a.target)?;
            let gauge = parse_gauge(&a.gauge)?;
            let seq = match (&a.seq, &a.closed_form) {
                (Some(p), _) => {
                    parse_sequence(&std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?)?
                }
                (None, Some(name)) => {
                    let form = closed_form(name)?;
                    let (alpha, beta) = (parameter(&a.target)?, parameter(&a.gauge)?);
                    form.check(alpha, beta)?;
                    heavymin::example_sequence(form, alpha, beta, a.count)?
                }
                (None, None) => {
                    return Err(CliError::Config(
                        "give --seq <file> or --closed-form <family>".into(),
                    ))
                }
            };
            commands::cmd_validate_seq(&target, &gauge, &seq, parse_rule(&a.rule)?, &mut out)?;
        }
    }
    out.flush().map_err(|e| CliError::io("<stdout>", e))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
