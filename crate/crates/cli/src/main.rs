use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mirror_polyak_cli::experiment::format_reference;
use mirror_polyak_cli::{certify, compare, oracle, solve, Experiment, HarnessError, PolicyKind};

/// Mirror descent with Polyak-type step sizes.
///
/// Exit status: 0 on success (a run ending in a domain violation still
/// counts), 2 for configuration errors, 3 for runtime failures.
#[derive(Parser)]
#[command(name = "mirror-polyak", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured policy and write trace, summary and plot files.
    Solve { config: PathBuf },
    /// Run several policies on the same instance.
    Compare {
        config: PathBuf,
        /// Comma-separated list of classic, adaptive, level.
        #[arg(long, value_delimiter = ',', default_value = "classic,adaptive,level")]
        policies: Vec<String>,
    },
    /// Print the reference optimum of the configured problem.
    Oracle {
        config: PathBuf,
        /// Grid spacing for grid-search references.
        #[arg(long)]
        resolution: Option<f64>,
    },
    /// Replay a config and check a trace against it.
    Certify { trace: PathBuf, config: PathBuf },
}

fn execute(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Solve { config } => {
            let exp = Experiment::load(&config)?;
            let out = solve(&exp)?;
            println!("termination = {}", out.result.termination);
            println!("iterations = {}", out.result.history.len());
            println!("best_f = {}", out.result.best_f);
            if let Some(g) = out.gap {
                println!("gap = {g}");
            }
            println!("trace = {}", out.trace_path.display());
        }
        Command::Compare { config, policies } => {
            let kinds = policies.iter().map(|p| p.parse()).collect::<Result<Vec<PolicyKind>, _>>()?;
            let exp = Experiment::load(&config)?;
            for o in compare(&exp, &kinds)? {
                let gap = o.gap.map(|g| g.to_string()).unwrap_or_else(|| "n/a".into());
                println!("{}: {} after {} iterations, best_f = {}, gap = {gap}", o.policy, o.result.termination, o.result.history.len(), o.result.best_f);
            }
        }
        Command::Oracle { config, resolution } => {
            let exp = Experiment::load(&config)?;
            print!("{}", format_reference(&oracle(&exp, resolution)?));
        }
        Command::Certify { trace, config } => {
            let exp = Experiment::load(&config)?;
            let report = certify(&exp, &trace)?;
            if !report.passed() {
                for f in &report.failures {
                    eprintln!("{f}");
                }
                return Err(HarnessError::Runtime(format!("certification failed ({} problems)", report.failures.len())));
            }
            let min = report.min_residual.map(|r| r.to_string()).unwrap_or_else(|| "n/a".into());
            println!("certified {} rows, min residual {min}", report.rows);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
