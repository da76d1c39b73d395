//! Command-line front end: run a configured experiment or the built-in
//! property suite. Exit codes: 0 all checks passed, 1 a check failed or
//! the run aborted, 2 the config was unreadable or invalid.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use qisflow::config::{parse_config, OutputFormat};
use qisflow::runner::run_experiment;
use qisflow::verify::{all_passed, format_table, run_property_suite};

#[derive(Parser)]
#[command(
    name = "qisflow",
    version,
    about = "Gradient-flow experiments for principal-component learning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config file.
    Run {
        /// Path to the config document.
        config_file: PathBuf,
        /// Write output here instead of the config's `output_path`.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Output format, overriding the config's `output_format`.
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        /// Seed, overriding the config's `seed`.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the built-in property suite and print a pass/fail table.
    Verify,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> OutputFormat {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run {
            config_file,
            output,
            format,
            seed,
        } => run(config_file, output, format, seed),
        Command::Verify => verify(),
    }
}

fn run(
    config_file: PathBuf,
    output: Option<PathBuf>,
    format: Option<FormatArg>,
    seed: Option<u64>,
) -> ExitCode {
    let text = match std::fs::read_to_string(&config_file) {
        Ok(text) => text,
        Err(error) => {
            eprintln!("cannot read {}: {error}", config_file.display());
            return ExitCode::from(2);
        }
    };
    let mut config = match parse_config(&text) {
        Ok(config) => config,
        Err(error) => {
            eprintln!("{error}");
            return ExitCode::from(2);
        }
    };
    if let Some(path) = output {
        config.output_path = Some(path.to_string_lossy().into_owned());
    }
    if let Some(format) = format {
        config.output_format = Some(format.into());
    }
    if let Some(seed) = seed {
        config.seed = seed;
    }

    let report = match run_experiment(&config) {
        Ok(report) => report,
        Err(error) => {
            eprintln!("{error}");
            return ExitCode::from(1);
        }
    };

    println!("experiment: {}", report.experiment);
    if let Some(error) = &report.error {
        println!("aborted: {error}");
    } else {
        println!("final t: {}", report.final_time);
        if report.truncated {
            println!("note: stopped at the positivity floor before the horizon");
        }
        for (key, value) in &report.summary {
            println!("  {key}: {value}");
        }
    }
    for check in &report.checks {
        println!(
            "check {}: {:e} <= {:e} ... {}",
            check.name,
            check.value,
            check.threshold,
            if check.passed { "pass" } else { "FAIL" }
        );
    }
    if let Some(path) = &report.output_path {
        println!("wrote {path}");
    }
    println!("{}", if report.passed { "PASS" } else { "FAIL" });
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn verify() -> ExitCode {
    let results = run_property_suite();
    print!("{}", format_table(&results));
    if all_passed(&results) {
        println!("all checks passed");
        ExitCode::SUCCESS
    } else {
        println!("FAILURES present");
        ExitCode::from(1)
    }
}
