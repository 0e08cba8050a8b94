//! Scenario-driven batch runner for class-semigroup analyses.
//!
//! ```text
//! cmonoids --scenario path/to/scenario.txt [--format text|records]
//!          [--box-cap N] [--alpha-cap N] [--seed N]
//! ```
//!
//! The scenario file names a monoid and the analyses to run (see the
//! `scenario` module for the format). The report on stdout is deterministic:
//! identical scenarios produce byte-identical output. Timing is written to
//! stderr. The exit code is 0 iff all analyses completed; verdict values
//! never affect it.

mod runner;
mod scenario;

use std::process::ExitCode;

struct Args {
    scenario_path: String,
    format: Format,
    box_cap: Option<u64>,
    alpha_cap: Option<u64>,
    seed: u64,
}

#[derive(PartialEq)]
enum Format {
    Text,
    Records,
}

fn parse_args() -> Result<Args, String> {
    let mut scenario_path = None;
    let mut format = Format::Text;
    let mut box_cap = None;
    let mut alpha_cap = None;
    let mut seed = 0u64;
    let mut args = std::env::args().skip(1);
    while let Some(arg) = args.next() {
        let mut value = |name: &str| {
            args.next()
                .ok_or_else(|| format!("{name} requires a value"))
        };
        match arg.as_str() {
            "--scenario" => scenario_path = Some(value("--scenario")?),
            "--format" => {
                format = match value("--format")?.as_str() {
                    "text" => Format::Text,
                    "records" => Format::Records,
                    other => return Err(format!("unknown format {other:?}")),
                }
            }
            "--box-cap" => {
                box_cap = Some(
                    value("--box-cap")?
                        .parse()
                        .map_err(|e| format!("--box-cap: {e}"))?,
                )
            }
            "--alpha-cap" => {
                alpha_cap = Some(
                    value("--alpha-cap")?
                        .parse()
                        .map_err(|e| format!("--alpha-cap: {e}"))?,
                )
            }
            "--seed" => {
                seed = value("--seed")?
                    .parse()
                    .map_err(|e| format!("--seed: {e}"))?
            }
            "--help" | "-h" => {
                println!(
                    "usage: cmonoids --scenario <path> [--format text|records] \
                     [--box-cap N] [--alpha-cap N] [--seed N]"
                );
                std::process::exit(0);
            }
            other => return Err(format!("unknown argument {other:?}")),
        }
    }
    Ok(Args {
        scenario_path: scenario_path.ok_or("--scenario is required")?,
        format,
        box_cap,
        alpha_cap,
        seed,
    })
}

fn main() -> ExitCode {
    let args = match parse_args() {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let text = match std::fs::read_to_string(&args.scenario_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.scenario_path);
            return ExitCode::from(2);
        }
    };
    let mut scenario = match scenario::parse_scenario(&text) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {}: {e}", args.scenario_path);
            return ExitCode::from(2);
        }
    };
    if let Some(b) = args.box_cap {
        scenario.box_cap = b;
    }
    if let Some(a) = args.alpha_cap {
        scenario.alpha_cap = a;
    }
    let started = std::time::Instant::now();
    let options = runner::RunnerOptions { seed: args.seed };
    match runner::run_scenario(&scenario, &options) {
        Ok(report) => {
            match args.format {
                Format::Text => print!("{}", report.render_text()),
                Format::Records => print!("{}", report.render_records()),
            }
            eprintln!("completed in {:?}", started.elapsed());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
