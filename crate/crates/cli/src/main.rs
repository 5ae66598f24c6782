use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use ymh_cli::output::Check;
use ymh_cli::{parse_pairs, run, ConfigError, Experiment, ExperimentConfig, RunError, THREADS_ENV};

#[derive(Parser)]
#[command(name = "ymh", version, about = "Yang-Mills-Higgs concentration experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its artifacts to the output directory.
    Run {
        experiment: String,
        #[arg(long)]
        config: Option<PathBuf>,
        /// `key=value` override, applied after the config file.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// List experiment names.
    List,
}

fn configure(experiment: &str, config: Option<PathBuf>, set: &[String], out: PathBuf) -> Result<ExperimentConfig, ConfigError> {
    let experiment: Experiment = experiment.parse()?;
    let mut pairs = match config {
        Some(path) => parse_pairs(&std::fs::read_to_string(path)?)?,
        None => Vec::new(),
    };
    for s in set {
        let (k, v) = s.split_once('=').ok_or_else(|| ConfigError::Invalid(format!("override `{s}` is not key=value")))?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    ExperimentConfig::build(experiment, &pairs, out)
}

fn set_threads() -> Result<(), ConfigError> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.parse().map_err(|_| ConfigError::Invalid(format!("{THREADS_ENV}={v} is not a count")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
    }
    Ok(())
}

fn print_checks(checks: &[Check]) {
    for c in checks {
        println!("{} {} = {:e} ({})", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value, c.bound);
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            for e in Experiment::ALL {
                println!("{e}");
            }
            ExitCode::SUCCESS
        }
        Command::Run { experiment, config, set, out } => {
            let result = set_threads()
                .and_then(|_| configure(&experiment, config, &set, out))
                .map_err(RunError::from)
                .and_then(|cfg| run(&cfg));
            match result {
                Ok(checks) => {
                    print_checks(&checks);
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    if let RunError::Failed(checks) = &e {
                        print_checks(checks);
                    }
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
    }
}
