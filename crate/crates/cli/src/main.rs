use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nnichain_cli::acceptance::{outcome_summary, outcome_table, run_suite};
use nnichain_cli::config::ExperimentConfig;
use nnichain_cli::report::{num, Summary};
use nnichain_cli::{export, fit_decay, sweeps, with_workers, CliError, OUTPUT_DIR_ENV};

#[derive(Parser)]
#[command(name = "nnichain", version, about = "Entanglement and ground-state locality experiments on nearest-neighbour chains")]
struct Cli {
    /// Worker threads for parallel sweeps (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Seed for randomized suites; overrides the config value.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep described by a config file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the acceptance suite; exits 1 if any criterion fails.
    Check {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated criterion numbers to run (default: all).
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
    /// Fit `ln y = rate·x + intercept` to two columns of a CSV file.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "l")]
        x: String,
        #[arg(long, default_value = "error")]
        y: String,
        /// Also write the result as `key: value` lines to this file.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Write Hamiltonians, ground states and Schmidt spectra for the config's models.
    Export {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load(path: &PathBuf, seed: Option<u64>) -> Result<ExperimentConfig, CliError> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn default_output_dir() -> PathBuf {
    std::env::var_os(OUTPUT_DIR_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("nnichain-out"))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Sweep { config } => {
            let cfg = load(&config, cli.seed)?;
            let out = with_workers(cli.workers, || sweeps::run(&cfg))?;
            let dir = cfg.resolved_output_dir();
            for f in sweeps::write_outputs(&out, &dir)? {
                println!("wrote {}", f.display());
            }
            Ok(())
        }
        Command::Check { config, only } => {
            let (seed, dir) = match &config {
                Some(p) => {
                    let cfg = load(p, cli.seed)?;
                    (cfg.seed, cfg.resolved_output_dir())
                }
                None => (cli.seed.unwrap_or(0), default_output_dir()),
            };
            let outcomes = with_workers(cli.workers, || run_suite(seed, &only))?;
            for o in &outcomes {
                println!("{}", o.line());
            }
            std::fs::create_dir_all(&dir)?;
            outcome_table(&outcomes).write(&dir.join("check.csv"))?;
            outcome_summary(seed, &outcomes).write(&dir.join("check_summary.txt"))?;
            let failed: Vec<String> = outcomes.iter().filter(|o| !o.passed).map(|o| o.name.to_string()).collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::Acceptance(failed))
            }
        }
        Command::Fit { input, x, y, output } => {
            let points = read_columns(&input, &x, &y)?;
            let f = fit_decay(&points).map_err(|e| CliError::Config(format!("{}: {e}", input.display())))?;
            let mut s = Summary::default();
            s.put("points", points.len());
            s.put("rate", num(f.rate));
            s.put("intercept", num(f.intercept));
            s.put("max_residual", num(f.max_residual));
            print!("{}", s.render());
            if let Some(path) = output {
                s.write(&path)?;
            }
            Ok(())
        }
        Command::Export { config } => {
            let cfg = load(&config, cli.seed)?;
            let dir = cfg.resolved_output_dir();
            let files = with_workers(cli.workers, || export::export(&cfg, &dir))?;
            for f in files {
                println!("wrote {}", f.display());
            }
            Ok(())
        }
    }
}

fn read_columns(path: &PathBuf, x: &str, y: &str) -> Result<Vec<(f64, f64)>, CliError> {
    let mut rdr = csv::Reader::from_path(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Config(format!("--x/--y: column `{name}` not found in {}", path.display())))
    };
    let (cx, cy) = (col(x)?, col(y)?);
    let mut points = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parse = |c: usize, name: &str| {
            rec[c].parse::<f64>().map_err(|_| {
                CliError::Config(format!("{name}: row {} has non-numeric value `{}`", line + 2, &rec[c]))
            })
        };
        points.push((parse(cx, x)?, parse(cy, y)?));
    }
    Ok(points)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nnichain: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
