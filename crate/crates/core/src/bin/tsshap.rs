use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tsshap::cli::{self, datasets, RunConfig};
use tsshap::explain::Scope;

#[derive(Parser)]
#[command(name = "tsshap", version, about = "Explain time-series forecasters with tree-ensemble surrogates")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a config end to end and write report.json plus plots.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        no_robustness: bool,
    },
    /// Print a single explanation as JSON.
    Explain {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        scope: Scope,
        /// Forecast step (local scope).
        #[arg(long)]
        step: Option<usize>,
        /// Inclusive step interval `a,b` (semi-local scope).
        #[arg(long, value_delimiter = ',')]
        interval: Option<Vec<usize>>,
        #[arg(long)]
        seed: Option<u64>,
    },
    Datasets {
        #[command(subcommand)]
        command: DatasetCommand,
    },
}

#[derive(Subcommand)]
enum DatasetCommand {
    /// Download and normalise a public dataset.
    Fetch {
        name: String,
        #[arg(long, default_value = "data")]
        dir: PathBuf,
    },
    List,
}

fn main() -> ExitCode {
    match dispatch(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(args: Args) -> tsshap::Result<()> {
    match args.command {
        Command::Run {
            config,
            out,
            seed,
            no_robustness,
        } => {
            let mut cfg = RunConfig::load(&config)?;
            if let Some(out) = out {
                cfg.output = out;
            }
            if seed.is_some() {
                cfg.seed = seed;
            }
            if no_robustness {
                cfg.robustness.enabled = false;
            }
            let report = cli::run(&cfg)?;
            println!("wrote {}", cfg.output.join("report.json").display());
            if let Some(f) = &report.fidelity {
                println!("surrogate fidelity: MAE {:.4} RMSE {:.4} MAPE {:.4} MASE {:.4}", f.mae, f.rmse, f.mape, f.mase);
            }
            Ok(())
        }
        Command::Explain {
            config,
            scope,
            step,
            interval,
            seed,
        } => {
            let mut cfg = RunConfig::load(&config)?;
            if let Some(step) = step {
                cfg.explain.step = step;
            }
            if let Some(v) = interval {
                let [a, b] = v[..] else {
                    return Err(tsshap::Error::ConfigInvalid("--interval takes two steps, e.g. 1,6".into()));
                };
                cfg.explain.interval = Some((a, b));
            }
            if seed.is_some() {
                cfg.seed = seed;
            }
            let e = cli::explain_only(&cfg, scope)?;
            println!("{}", serde_json::to_string_pretty(&e)?);
            Ok(())
        }
        Command::Datasets { command } => match command {
            DatasetCommand::Fetch { name, dir } => {
                let path = datasets::fetch(&name, &dir)?;
                println!("wrote {}", path.display());
                Ok(())
            }
            DatasetCommand::List => {
                for d in &datasets::DATASETS {
                    println!("{:<16} {}\n{:<16} {}", d.name, d.description, "", d.url);
                }
                Ok(())
            }
        },
    }
}
