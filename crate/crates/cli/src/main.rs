//! `rbe`: experiment runner exposing each construction as a subcommand and
//! emitting machine-readable reports.
//!
//! Exit codes: 0 all checks pass, 1 at least one check failed (or a replay
//! diverged), 2 configuration error, 3 I/O error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

mod report;
mod runs;

use report::{compare_replay, Format, Report};
use runs::{execute, RunConfig, RunSpec};

#[derive(Parser)]
#[command(
    name = "rbe",
    version,
    about = "Conditioning e-variables on sufficient statistics: runnable checks"
)]
struct Cli {
    /// Report destination; "-" writes to stdout. The RBE_OUT environment
    /// variable, when set, overrides this flag.
    #[arg(long, global = true, default_value = "-")]
    out: String,
    /// Report encoding.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact checks for the first-observation Bernoulli bet and its
    /// conditioning on the success count.
    Bernoulli {
        /// Null success probability.
        #[arg(long)]
        p0: f64,
        /// Per-success growth factor e^lambda (> 1).
        #[arg(long)]
        lambda_exp: f64,
        /// Number of draws (enumeration over 2^n outcomes, n <= 16).
        #[arg(long)]
        n: usize,
        /// Alternative success probability for the utility-gap rows.
        #[arg(long)]
        p: f64,
    },
    /// Normal-vs-Cauchy pair conditioned on |X|: quadrature and sampled
    /// ratio bounds.
    Cauchy {
        #[arg(long)]
        draws: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Fixed-design Gaussian regression: growth value, null calibration,
    /// and the sufficiency reduction.
    Regression {
        /// Path to a JSON problem document {x, sigma2, d, theta_star}.
        #[arg(long)]
        design: PathBuf,
        #[arg(long)]
        draws: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Pareto shape test with scale nuisance: growth value against the
    /// Gamma divergence, null calibration, prior bound.
    Pareto {
        #[arg(long)]
        alpha0: f64,
        #[arg(long)]
        alpha1: f64,
        #[arg(long)]
        m: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        draws: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Bernoulli betting process with burn-in conditioning: stopped-process
    /// audits and the brute-force cross-check.
    Eprocess {
        #[arg(long)]
        p0: f64,
        /// Alternative success probability.
        #[arg(long)]
        p: f64,
        /// Comma list of bets, or geometric:BASE,COUNT.
        #[arg(long)]
        bets: String,
        #[arg(long)]
        burnin: usize,
        /// Comma list of rules: fixed:T or cross:LEVEL.
        #[arg(long)]
        rules: String,
        #[arg(long)]
        paths: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Per-level conditional concavity gaps on random finite spaces.
    Jensen {
        #[arg(long)]
        spaces: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Compound budget preservation under per-component conditioning.
    Compound {
        #[arg(long)]
        spaces: usize,
        #[arg(long)]
        seed: u64,
    },
    /// e-BH rejection set for a list of e-values.
    Ebh {
        /// Comma list of nonnegative e-values.
        #[arg(long)]
        evalues: String,
        #[arg(long)]
        alpha: f64,
    },
    /// Re-run the configuration echoed in a report and compare estimates.
    Replay {
        /// Path to a previously written report (JSON or CSV).
        report: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match std::env::var("RBE_OUT") {
        Ok(path) if !path.is_empty() => path,
        _ => cli.out.clone(),
    };
    match run(cli, &out) {
        Ok(all_pass) => {
            if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Config(msg)) => {
            eprintln!("rbe: configuration error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("rbe: i/o error: {msg}");
            ExitCode::from(3)
        }
    }
}

enum Failure {
    Config(String),
    Io(String),
}

fn run(cli: Cli, out: &str) -> Result<bool, Failure> {
    let started = Instant::now();
    if let Command::Replay { report } = &cli.command {
        return replay(report, out, started);
    }
    let spec = resolve(cli.command).map_err(Failure::Config)?;
    let config = RunConfig {
        format: cli.format,
        spec,
    };
    let mut report = execute(&config).map_err(Failure::Config)?;
    report.duration_ms = started.elapsed().as_millis();
    write_report(&report, config.format, out)?;
    summarize(&report);
    Ok(report.all_pass())
}

fn resolve(command: Command) -> Result<RunSpec, String> {
    Ok(match command {
        Command::Bernoulli {
            p0,
            lambda_exp,
            n,
            p,
        } => RunSpec::Bernoulli {
            p0,
            lambda_exp,
            n,
            p,
        },
        Command::Cauchy { draws, seed } => RunSpec::Cauchy { draws, seed },
        Command::Regression {
            design,
            draws,
            seed,
        } => {
            let text = std::fs::read_to_string(&design)
                .map_err(|e| format!("cannot read {}: {e}", design.display()))?;
            let doc = serde_json::from_str(&text)
                .map_err(|e| format!("bad design document {}: {e}", design.display()))?;
            RunSpec::Regression {
                design: doc,
                draws,
                seed,
            }
        }
        Command::Pareto {
            alpha0,
            alpha1,
            m,
            n,
            draws,
            seed,
        } => RunSpec::Pareto {
            alpha0,
            alpha1,
            m,
            n,
            draws,
            seed,
        },
        Command::Eprocess {
            p0,
            p,
            bets,
            burnin,
            rules,
            paths,
            seed,
        } => {
            let bets = rb_evalues::sequential::parse_bets(&bets).map_err(|e| e.to_string())?;
            RunSpec::Eprocess {
                p0,
                p,
                bets,
                burnin,
                rules,
                paths,
                seed,
            }
        }
        Command::Jensen { spaces, seed } => RunSpec::Jensen { spaces, seed },
        Command::Compound { spaces, seed } => RunSpec::Compound { spaces, seed },
        Command::Ebh { evalues, alpha } => {
            let evalues = evalues
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|e| format!("bad e-value {s:?}: {e}"))
                })
                .collect::<Result<Vec<_>, _>>()?;
            RunSpec::Ebh { evalues, alpha }
        }
        Command::Replay { .. } => unreachable!("handled by the caller"),
    })
}

fn replay(path: &Path, out: &str, started: Instant) -> Result<bool, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
    let original = Report::parse(&text).map_err(Failure::Config)?;
    let config: RunConfig = serde_json::from_value(original.config.clone())
        .map_err(|e| Failure::Config(format!("report config does not replay: {e}")))?;
    let mut replayed = execute(&config).map_err(Failure::Config)?;
    replayed.duration_ms = started.elapsed().as_millis();
    let diff = compare_replay(&original, &replayed);
    if diff.version_mismatch {
        eprintln!(
            "rbe: warning: report version {} differs from binary version {}",
            original.version, replayed.version
        );
    }
    write_report(&replayed, config.format, out)?;
    summarize(&replayed);
    if diff.differing_rows.is_empty() {
        eprintln!("rbe: replay identical ({} rows)", replayed.rows.len());
        Ok(replayed.all_pass())
    } else {
        for row in &diff.differing_rows {
            eprintln!("rbe: replay diverged: {row}");
        }
        Ok(false)
    }
}

fn write_report(report: &Report, format: Format, out: &str) -> Result<(), Failure> {
    let encoded = report.encode(format);
    if out == "-" {
        print!("{encoded}");
        return Ok(());
    }
    std::fs::write(out, encoded).map_err(|e| Failure::Io(format!("cannot write {out}: {e}")))
}

fn summarize(report: &Report) {
    let passed = report.rows.iter().filter(|r| r.pass).count();
    eprintln!(
        "rbe: {passed}/{} checks passed in {} ms",
        report.rows.len(),
        report.duration_ms
    );
    for row in &report.rows {
        if !row.pass {
            eprintln!(
                "rbe: FAIL {}: {} {} {} (tol {})",
                row.name, row.estimate, row.cmp, row.target, row.tolerance
            );
        }
    }
}
