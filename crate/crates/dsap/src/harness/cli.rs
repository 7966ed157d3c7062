//! Command-line interface: feasibility and superiorized runs over problem
//! files, trace analysis, and the acceptance battery.
//!
//! Exit codes: 0 on success (and on passing checks), 1 when a check or
//! the battery fails, 2 on malformed input or configuration errors.

use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::diagnostics::{
    check_fejer, dichotomy_report, superiority_gap, DichotomyReport, FejerReport, RefKind,
    ReferencePoint,
};
use crate::error::{Error, Result};
use crate::feasibility::{StopReason, StopRule, Trace};
use crate::harness::suite::{render_report, run_battery};
use crate::harness::{run_feasibility, run_superiorized, InnerKind, PlanChoice, ProblemSpec, RunConfig};
use crate::strings::Amalgamator;

#[derive(Parser)]
#[command(
    name = "dsap",
    version,
    about = "Dynamic string-averaging projection runs, superiorization, and trace diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the feasibility-seeking method on a problem file
    Feasibility {
        /// Problem JSON file
        problem: PathBuf,
        /// kaczmarz, cimmino, or a path to an amalgamator JSON file
        #[arg(long, default_value = "kaczmarz")]
        plan: String,
        /// Violation tolerance for stopping
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long = "max-iters", default_value_t = 100_000)]
        max_iters: u64,
        /// Write the trace as CSV
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed for the start point
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the superiorized method on a problem file with an objective
    Superiorize {
        problem: PathBuf,
        #[arg(long, default_value = "kaczmarz")]
        plan: String,
        /// First perturbation step size, in ]0, 1]
        #[arg(long, default_value_t = 1.0)]
        eta0: f64,
        /// Geometric decay of the step sizes, in ]0, 1[
        #[arg(long, default_value_t = 0.99)]
        rho: f64,
        /// Inner-loop cap N
        #[arg(long = "N", default_value_t = 1)]
        n: u32,
        /// Inner-loop size rule
        #[arg(long, default_value = "const", value_parser = ["const", "cycle", "random"])]
        nk: String,
        /// Subgradient norms at or below this count as zero
        #[arg(long = "zero-tol", default_value_t = 1e-12)]
        zero_tol: f64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long = "max-iters", default_value_t = 100_000)]
        max_iters: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write a JSON run report (monotonicity checks, dichotomy verdict)
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run both methods from one start point and report the objective gap
    Compare {
        problem: PathBuf,
        #[arg(long, default_value = "kaczmarz")]
        plan: String,
        #[arg(long, default_value_t = 1.0)]
        eta0: f64,
        #[arg(long, default_value_t = 0.99)]
        rho: f64,
        #[arg(long = "N", default_value_t = 1)]
        n: u32,
        #[arg(long, default_value = "const", value_parser = ["const", "cycle", "random"])]
        nk: String,
        #[arg(long = "zero-tol", default_value_t = 1e-12)]
        zero_tol: f64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long = "max-iters", default_value_t = 100_000)]
        max_iters: u64,
        /// Write the plain trace as CSV
        #[arg(long = "out-plain")]
        out_plain: Option<PathBuf>,
        /// Write the superiorized trace as CSV
        #[arg(long = "out-super")]
        out_super: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Check (strict) Fejér monotonicity of a trace against a reference point
    CheckFejer {
        /// Trace CSV file
        trace: PathBuf,
        /// Reference point JSON file
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long)]
        strict: bool,
    },
    /// Run the acceptance battery and print one pass/fail line per criterion
    Suite {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// JSON run report emitted by `superiorize --report` and `compare --report`.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub iterations: u64,
    pub stop_reason: Option<StopReason>,
    pub final_violation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_phi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_consumed: Option<f64>,
    /// Non-strict monotonicity against the problem's interior point.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fejer_interior: Option<FejerReport>,
    /// Dichotomy verdict against the problem's minimizer.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dichotomy: Option<DichotomyReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub superiority_gap: Option<f64>,
}

/// Entry point used by the binary; returns the process exit code.
pub fn run<I>(args: I) -> i32
where
    I: IntoIterator<Item = String>,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn parse_plan(plan: &str) -> Result<PlanChoice> {
    match plan {
        "kaczmarz" => Ok(PlanChoice::Kaczmarz),
        "cimmino" => Ok(PlanChoice::Cimmino),
        path => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Parse(format!("plan file {path}: {e}")))?;
            let am: Amalgamator = serde_json::from_str(&text)
                .map_err(|e| Error::Parse(format!("plan file {path}: {e}")))?;
            Ok(PlanChoice::Custom(am))
        }
    }
}

fn parse_inner_kind(nk: &str) -> InnerKind {
    match nk {
        "cycle" => InnerKind::Cycle,
        "random" => InnerKind::Random,
        _ => InnerKind::Constant,
    }
}

fn attach_refs(trace: &mut Trace, spec: &ProblemSpec) -> Result<()> {
    let refs = spec.reference_points()?;
    let pairs: Vec<(&str, &crate::geometry::Point)> =
        refs.iter().map(|r| (r.label.as_str(), &r.point)).collect();
    trace.attach_ref_distances(&pairs)
}

fn write_trace(trace: &Trace, path: &Path) -> Result<()> {
    trace.write_csv_file(path)?;
    println!("trace written to {}", path.display());
    Ok(())
}

fn describe(trace: &Trace) -> String {
    let reason = match trace.stop_reason {
        Some(StopReason::Converged) => "converged",
        Some(StopReason::IterationCap) => "iteration cap",
        Some(StopReason::Stalled) => "stalled",
        None => "unknown",
    };
    let phi = match trace.final_phi() {
        Some(phi) => format!(", phi {phi}"),
        None => String::new(),
    };
    format!(
        "stopped at k={} ({reason}), final violation {}{phi}",
        trace.final_record().k,
        trace.final_record().max_violation
    )
}

fn build_report(trace: &Trace, spec: &ProblemSpec, gap: Option<f64>) -> Result<RunReport> {
    let refs = spec.reference_points()?;
    let fejer_interior = refs
        .iter()
        .find(|r| r.kind == RefKind::Feasible)
        .map(|r| check_fejer(trace, r, false))
        .transpose()?;
    let dichotomy = refs
        .iter()
        .find(|r| r.kind == RefKind::Minimal && r.phi.is_some())
        .filter(|_| trace.records.iter().all(|rec| rec.phi_value.is_some()))
        .map(|r| dichotomy_report(trace, r, 1e-6))
        .transpose()?;
    Ok(RunReport {
        iterations: trace.final_record().k,
        stop_reason: trace.stop_reason,
        final_violation: trace.final_record().max_violation,
        final_phi: trace.final_phi(),
        beta_consumed: trace.beta_sums.as_ref().map(|b| b.iter().sum()),
        fejer_interior,
        dichotomy,
        superiority_gap: gap,
    })
}

fn write_report(report: &RunReport, path: &Path) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(report)?)?;
    println!("report written to {}", path.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn superiorize_config(
    plan: &str,
    eta0: f64,
    rho: f64,
    n: u32,
    nk: &str,
    zero_tol: f64,
    tol: f64,
    max_iters: u64,
    seed: u64,
) -> Result<RunConfig> {
    Ok(RunConfig {
        plan: parse_plan(plan)?,
        stop: StopRule::new(tol, max_iters, 0.0)?,
        eta0,
        rho,
        inner_cap: n,
        inner_kind: parse_inner_kind(nk),
        zero_tol,
        seed,
    })
}

fn execute(command: Command) -> Result<i32> {
    match command {
        Command::Feasibility {
            problem,
            plan,
            tol,
            max_iters,
            out,
            seed,
        } => {
            let spec = ProblemSpec::read_json_file(&problem)?;
            let config = RunConfig {
                plan: parse_plan(&plan)?,
                stop: StopRule::new(tol, max_iters, 0.0)?,
                seed,
                ..RunConfig::default()
            };
            let mut trace = run_feasibility(&spec, &config, None)?;
            attach_refs(&mut trace, &spec)?;
            println!("{}", describe(&trace));
            if let Some(path) = out {
                write_trace(&trace, &path)?;
            }
            Ok(0)
        }
        Command::Superiorize {
            problem,
            plan,
            eta0,
            rho,
            n,
            nk,
            zero_tol,
            tol,
            max_iters,
            out,
            report,
            seed,
        } => {
            let spec = ProblemSpec::read_json_file(&problem)?;
            let config =
                superiorize_config(&plan, eta0, rho, n, &nk, zero_tol, tol, max_iters, seed)?;
            let mut trace = run_superiorized(&spec, &config, None)?;
            attach_refs(&mut trace, &spec)?;
            println!("{}", describe(&trace));
            if let Some(path) = out {
                write_trace(&trace, &path)?;
            }
            if let Some(path) = report {
                write_report(&build_report(&trace, &spec, None)?, &path)?;
            }
            Ok(0)
        }
        Command::Compare {
            problem,
            plan,
            eta0,
            rho,
            n,
            nk,
            zero_tol,
            tol,
            max_iters,
            out_plain,
            out_super,
            report,
            seed,
        } => {
            let spec = ProblemSpec::read_json_file(&problem)?;
            let objective = spec.objective()?.ok_or_else(|| {
                Error::InvalidConfig("compare needs a problem with an objective".into())
            })?;
            let config =
                superiorize_config(&plan, eta0, rho, n, &nk, zero_tol, tol, max_iters, seed)?;
            let x0 = config.start_point(spec.dimension);

            let mut plain = run_feasibility(&spec, &config, Some(x0.clone()))?;
            plain.attach_phi(&objective)?;
            attach_refs(&mut plain, &spec)?;
            let mut superiorized = run_superiorized(&spec, &config, Some(x0))?;
            attach_refs(&mut superiorized, &spec)?;

            let gap = superiority_gap(&plain, &superiorized)?;
            println!("plain: {}", describe(&plain));
            println!("superiorized: {}", describe(&superiorized));
            println!("superiority_gap: {gap}");
            if let Some(path) = out_plain {
                write_trace(&plain, &path)?;
            }
            if let Some(path) = out_super {
                write_trace(&superiorized, &path)?;
            }
            if let Some(path) = report {
                write_report(&build_report(&superiorized, &spec, Some(gap))?, &path)?;
            }
            Ok(0)
        }
        Command::CheckFejer {
            trace,
            reference,
            strict,
        } => {
            let trace = Trace::read_csv_file(&trace)?;
            let text = std::fs::read_to_string(&reference)
                .map_err(|e| Error::Parse(format!("{}: {e}", reference.display())))?;
            let point: ReferencePoint = serde_json::from_str(&text)
                .map_err(|e| Error::Parse(format!("{}: {e}", reference.display())))?;
            let report = check_fejer(&trace, &point, strict)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(if report.passed { 0 } else { 1 })
        }
        Command::Suite { seed } => {
            let outcomes = run_battery(seed);
            print!("{}", render_report(&outcomes));
            Ok(if outcomes.iter().all(|o| o.passed) {
                0
            } else {
                1
            })
        }
    }
}
