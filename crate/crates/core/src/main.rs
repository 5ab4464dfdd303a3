//! Command-line front end for the spectrum leasing simulator.
//!
//! Exit codes: 0 all expectations pass, 1 expectation or engine failure,
//! 2 usage or parse error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use spectrum_sim::scenario::{demo_scenario, demo_summary, gas_sweep, load_scenario, run_scenario};
use spectrum_sim::GasSchedule;

#[derive(Parser)]
#[command(
    name = "spectrum-sim",
    about = "Deterministic simulator for multi-slot spectrum leasing",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a JSON scenario file and check its expectations.
    Run {
        /// Scenario file.
        file: PathBuf,
        /// Directory for events.json, receipts.json and report.txt.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Compare sequential and batch authorization gas over 1..=N slots.
    GasSweep {
        /// Largest slot count to tabulate.
        #[arg(long)]
        slots: u64,
        /// JSON file with gas schedule overrides.
        #[arg(long)]
        schedule: Option<PathBuf>,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the built-in demo and print winners, payout and refunds.
    Demo,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { file, out } => cmd_run(&file, &out),
        Command::GasSweep {
            slots,
            schedule,
            out,
        } => cmd_gas_sweep(slots, schedule, &out),
        Command::Demo => cmd_demo(),
    };
    ExitCode::from(code)
}

fn cmd_run(file: &Path, out: &Path) -> u8 {
    let scenario = match load_scenario(file) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e}");
            return 2;
        }
    };
    let outcome = run_scenario(&scenario);
    if let Err(e) = outcome.write_outputs(out) {
        eprintln!("cannot write outputs to {}: {e}", out.display());
        return 1;
    }
    print!("{}", outcome.report_text());
    outcome.exit_code() as u8
}

fn cmd_gas_sweep(slots: u64, schedule_path: Option<PathBuf>, out: &Path) -> u8 {
    if slots == 0 {
        eprintln!("--slots must be at least 1");
        return 2;
    }
    let schedule = match schedule_path {
        None => GasSchedule::default(),
        Some(path) => {
            let text = match fs::read_to_string(&path) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("{}: {e}", path.display());
                    return 2;
                }
            };
            match serde_json::from_str(&text) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("{}:{}:{}: {e}", path.display(), e.line(), e.column());
                    return 2;
                }
            }
        }
    };
    let sweep = match gas_sweep(slots, &schedule) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e}");
            return 1;
        }
    };
    if let Err(e) = fs::write(out, &sweep.csv) {
        eprintln!("cannot write {}: {e}", out.display());
        return 1;
    }
    print!("{}", sweep.summary);
    println!("wrote {}", out.display());
    0
}

fn cmd_demo() -> u8 {
    let outcome = run_scenario(&demo_scenario());
    print!("{}", demo_summary(&outcome));
    print!("{}", outcome.report_text());
    outcome.exit_code() as u8
}
