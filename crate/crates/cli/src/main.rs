// SPDX-License-Identifier: Apache-2.0

mod commands;
mod config;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::CommonArgs;

#[derive(Debug, Parser)]
#[command(
    name = "rabichain",
    version,
    about = "Parity chains, dark-like states and spectra of multi-qubit Rabi models"
)]
struct Cli {
    /// Cap on worker threads
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List parity sectors and the block structure of each chain
    Chains,
    /// Tabulate sign-pattern eigenpairs and zero modes of the coupling matrix
    Omatrix,
    /// Find, scan for, or verify dark-like states
    Dark {
        #[command(subcommand)]
        mode: DarkMode,
    },
    /// Sweep the coupling scale and diagonalize every chain
    Spectrum {
        /// Also write the horizontal-line report as JSON to this path
        #[arg(long)]
        report: Option<std::path::PathBuf>,
    },
    /// Classify the model as stable, at threshold, unstable or never convergent
    Stability,
}

#[derive(Debug, Subcommand)]
enum DarkMode {
    /// Match the closed-form catalog and build its states
    Find {
        /// Exit with status 3 when no state is found
        #[arg(long)]
        require: bool,
    },
    /// Search chains numerically for states on two blocks
    Scan {
        /// Energy window "lo,hi"
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        window: Option<Vec<f64>>,
        /// Exit with status 3 when no state is found
        #[arg(long)]
        require: bool,
    },
    /// Check a saved state against the model
    Verify {
        /// A state JSON file, or a `dark find`/`dark scan` report
        #[arg(long)]
        state: std::path::PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(k) = cli.threads {
        if k == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match cli.command {
        Command::Chains => commands::chains(&cli.common),
        Command::Omatrix => commands::omatrix(&cli.common),
        Command::Dark { mode } => match mode {
            DarkMode::Find { require } => commands::dark_find(&cli.common, require),
            DarkMode::Scan { window, require } => match window.as_deref() {
                None => commands::dark_scan(&cli.common, None, require),
                Some(&[lo, hi]) => commands::dark_scan(&cli.common, Some((lo, hi)), require),
                Some(_) => Err(anyhow::anyhow!("--window takes two values, lo,hi")),
            },
            DarkMode::Verify { state } => commands::dark_verify(&cli.common, &state),
        },
        Command::Spectrum { report } => commands::spectrum(&cli.common, report.as_deref()),
        Command::Stability => commands::stability(&cli.common),
    };
    match result {
        Ok(status) => ExitCode::from(status as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code_for(&e) as u8)
        }
    }
}
