//! Command-line front end: runs scenario documents, lists the embedded
//! ones, and validates documents without running them. Process exit codes
//! follow the report contract: 0 all verdicts passed, 1 some verdict
//! failed, 2 something could not be parsed or executed.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use polyrep::scenario::{
    builtin_description, builtin_names, builtin_text, parse_scenario, run_scenario, RunReport,
};

#[derive(Parser)]
#[command(
    name = "polyrep",
    version,
    about = "Replicator dynamics and stability certification for finitely supported population states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario document (a file path, or `builtin:NAME`)
    Run {
        scenario: String,
        /// Directory receiving the report, trajectory CSV, and atom legend
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Override the neighborhood sampling seed
        #[arg(long)]
        seed: Option<u64>,
    },
    /// List the embedded scenarios
    ListBuiltins,
    /// Parse and validate a scenario document without running it
    Validate { scenario: String },
}

fn load(reference: &str) -> Result<String, String> {
    if let Some(name) = reference.strip_prefix("builtin:") {
        return builtin_text(name)
            .map(str::to_string)
            .ok_or_else(|| format!("unknown builtin `{name}`; try `polyrep list-builtins`"));
    }
    fs::read_to_string(reference).map_err(|e| format!("{reference}: {e}"))
}

fn verdict_word(verdict: bool) -> &'static str {
    if verdict {
        "pass"
    } else {
        "FAIL"
    }
}

fn print_summary(report: &RunReport) {
    println!("scenario {}", report.name);
    if let Some(outcome) = &report.rest_point {
        match (&outcome.report, &outcome.error) {
            (Some(r), _) => println!(
                "  rest_point   {}  residual {:.3e}",
                verdict_word(r.verdict),
                r.residual
            ),
            (None, Some(e)) => println!("  rest_point   ERROR  {e}"),
            _ => {}
        }
    }
    for (name, outcome) in [
        ("uninvadable ", &report.uninvadable),
        ("unbeatable  ", &report.unbeatable),
    ] {
        if let Some(outcome) = outcome {
            match (&outcome.report, &outcome.error) {
                (Some(r), _) => {
                    let margin = r
                        .min_margin
                        .map(|m| format!("min margin {m:.6e} over {} samples", r.n_samples))
                        .unwrap_or_else(|| "no samples".to_string());
                    println!("  {name} {}  {margin}", verdict_word(r.verdict));
                }
                (None, Some(e)) => println!("  {name} ERROR  {e}"),
                _ => {}
            }
        }
    }
    if let Some(outcome) = &report.negdef {
        match (&outcome.report, &outcome.error) {
            (Some(r), _) => {
                let estimate = r
                    .c_estimate
                    .map(|c| format!("c estimate {c:.6e}"))
                    .unwrap_or_else(|| "not applicable".to_string());
                let witness = r
                    .witness_ratio
                    .map(|w| format!(", witness ratio {w:.6e}"))
                    .unwrap_or_default();
                println!("  negdef       {}  {estimate}{witness}", verdict_word(r.verdict));
            }
            (None, Some(e)) => println!("  negdef       ERROR  {e}"),
            _ => {}
        }
    }
    if let Some(outcome) = &report.simulation {
        match (&outcome.report, &outcome.error) {
            (Some(r), _) => println!(
                "  simulation   done  {} records to t = {}, final distance {:.6e} -> {}",
                r.n_records, r.final_time, r.final_distance, r.trajectory_csv
            ),
            (None, Some(e)) => println!("  simulation   ERROR  {e}"),
            _ => {}
        }
    }
    if let Some(outcome) = &report.certificate {
        match (&outcome.report, &outcome.error) {
            (Some(r), _) => println!(
                "  certificate  {}  monotone fraction {:.4} over {} trajectories",
                verdict_word(r.verdict),
                r.monotone_fraction,
                r.n_trajectories
            ),
            (None, Some(e)) => println!("  certificate  ERROR  {e}"),
            _ => {}
        }
    }
    if let Some(outcome) = &report.basin {
        match (&outcome.report, &outcome.error) {
            (Some(r), _) => println!(
                "  basin        done  {} runs, max excursion {:.6e}, final distance max {:.6e}",
                r.n_runs, r.max_excursion, r.final_distance_max
            ),
            (None, Some(e)) => println!("  basin        ERROR  {e}"),
            _ => {}
        }
    }
    println!("exit status {}", report.exit_status);
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            scenario,
            out_dir,
            seed,
        } => {
            let text = match load(&scenario) {
                Ok(text) => text,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            let mut cfg = match parse_scenario(&text) {
                Ok(cfg) => cfg,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            if let Some(seed) = seed {
                match &mut cfg.neighborhood {
                    Some(neighborhood) => neighborhood.seed = seed,
                    None => {
                        eprintln!("error: --seed given but the scenario has no neighborhood");
                        return ExitCode::from(2);
                    }
                }
            }
            match run_scenario(&cfg, &out_dir) {
                Ok(report) => {
                    print_summary(&report);
                    ExitCode::from(report.exit_status)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Command::ListBuiltins => {
            for name in builtin_names() {
                println!(
                    "{name:<16} {}",
                    builtin_description(name).unwrap_or_default()
                );
            }
            ExitCode::SUCCESS
        }
        Command::Validate { scenario } => {
            let text = match load(&scenario) {
                Ok(text) => text,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            match parse_scenario(&text) {
                Ok(cfg) => {
                    println!("ok: scenario `{}` is valid", cfg.name);
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
    }
}
