use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mrc_outage::cli::{
    exit_code, format_report, load_config, run_kl_table, run_sweep, run_validate, Overrides,
    SweepOutput, ValidateOptions,
};
use mrc_outage::exec::Execution;
use mrc_outage::Error;

#[derive(Parser)]
#[command(name = "outage", version, about = "Outage probability of MRC receivers under eta-mu fading")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Run everything on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Outage probability over the configured target-SIR grid, as CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        mc_samples: Option<usize>,
    },
    /// KL divergence of both approximations for each configured row, as CSV.
    KlTable {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        mc_samples: Option<usize>,
    },
    /// Checks moments, densities and the Rayleigh case against simulation.
    Validate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        mc_samples: Option<usize>,
        #[arg(long, hide = true)]
        corrupt_omega: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    if let Some(n) = cli.threads {
        set_threads(n)?;
    }
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    match cli.command {
        Command::Sweep {
            config,
            out,
            seed,
            mc_samples,
        } => {
            let cfg = load_config(&config, &Overrides { seed, mc_samples })?;
            emit(run_sweep(&cfg, exec)?, out.as_deref())
        }
        Command::KlTable {
            config,
            out,
            seed,
            mc_samples,
        } => {
            let cfg = load_config(&config, &Overrides { seed, mc_samples })?;
            emit(run_kl_table(&cfg, exec)?, out.as_deref())
        }
        Command::Validate {
            config,
            seed,
            mc_samples,
            corrupt_omega,
        } => {
            let cfg = load_config(&config, &Overrides { seed, mc_samples })?;
            let checks = run_validate(&cfg, &ValidateOptions { corrupt_omega }, exec)?;
            print!("{}", format_report(&checks));
            Ok(if checks.iter().all(|c| c.passed) { 0 } else { 3 })
        }
    }
}

fn emit(output: SweepOutput, out: Option<&Path>) -> Result<u8, Error> {
    match out {
        Some(path) => std::fs::write(path, &output.csv)?,
        None => print!("{}", output.csv),
    }
    for f in &output.failures {
        eprintln!("numerical failure: {f}");
    }
    Ok(if output.failures.is_empty() { 0 } else { 2 })
}

#[cfg(feature = "parallel")]
fn set_threads(n: usize) -> Result<(), Error> {
    if n == 0 {
        return Err(Error::Config("--threads must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(format!("cannot size the thread pool: {e}")))
}

#[cfg(not(feature = "parallel"))]
fn set_threads(n: usize) -> Result<(), Error> {
    if n == 0 {
        return Err(Error::Config("--threads must be at least 1".into()));
    }
    Ok(())
}
