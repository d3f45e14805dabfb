//! `ptorsion`: solve one elastic–plastic torsion instance from a config file
//! and write fields, curves, checks and an SVG overlay.
//!
//! Exit codes: 0 all checks pass, 2 a check failed, 3 the solver did not
//! converge, 4 bad usage or configuration, 1 anything else (I/O).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use ptorsion_core::config::{parse_checks, parse_switch, validate};
use ptorsion_core::{run, Error, RunConfig, RunStatus};

const EXIT_CHECK_FAILED: u8 = 2;
const EXIT_SOLVER_FAILED: u8 = 3;
const EXIT_CONFIG: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "ptorsion", version, about = "Elastic-plastic torsion with p-norm gradient constraints")]
struct Args {
    /// Run configuration (flat `key = value` file)
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `out_dir`)
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Nodes per unit length (overrides `resolution`)
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    /// Comma-separated check names, or `all`
    #[arg(long)]
    checks: Option<String>,
    /// Write overlay.svg: on|off
    #[arg(long)]
    svg: Option<String>,
    /// Print domain warnings and exit without solving
    #[arg(long)]
    validate_only: bool,
}

fn load(args: &Args) -> ptorsion_core::Result<RunConfig> {
    let mut c = RunConfig::from_file(&args.config)?;
    if let Some(d) = &args.out_dir {
        c.out_dir = d.clone();
    }
    if let Some(r) = args.resolution {
        c.resolution = r;
    }
    if let Some(p) = args.p {
        c.p = p;
    }
    if let Some(e) = args.eta {
        c.eta = e;
    }
    if let Some(s) = &args.checks {
        c.checks = parse_checks(s)?;
    }
    if let Some(s) = &args.svg {
        c.svg = parse_switch(s)?;
    }
    c.validate()?;
    Ok(c)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_CONFIG) } else { ExitCode::SUCCESS };
        }
    };
    let config = match load(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    match validate(&config) {
        Ok(ws) => {
            for w in ws {
                eprintln!("warning: {w}");
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    if args.validate_only {
        return ExitCode::SUCCESS;
    }
    let report = match run(&config) {
        Ok(r) => r,
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    if report.status == RunStatus::SolverFailed {
        eprintln!("solver failed: {}", report.error.as_deref().unwrap_or("unknown"));
        return ExitCode::from(EXIT_SOLVER_FAILED);
    }
    println!(
        "solved in {} iterations (residual {:e}); outputs in {}",
        report.solver.iterations,
        report.solver.residual,
        config.out_dir.display()
    );
    for c in &report.checks {
        let margin = if c.samples == 0 { "n/a".to_string() } else { format!("{:e}", c.worst_margin) };
        println!("{} {} (worst margin {margin})", if c.passed { "PASS" } else { "FAIL" }, c.name);
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_CHECK_FAILED)
    }
}
