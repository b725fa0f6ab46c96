use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gapdpm::cli::{self, Overrides, ProfileSource};
use gapdpm::Error;

/// Bayesian nonparametric models for serially dependent gap times.
#[derive(Debug, Parser)]
#[command(name = "gapdpm", version = cli::version())]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a built-in scenario to CSV.
    Simulate {
        /// Scenario name: 1 or 2.
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output directory [default: $GAPDPM_OUT/scenario<N>-seed<S>].
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the sampler described by a config file.
    Fit {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        chains: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Default to 251,000 iterations, 1,000 burn-in, thin 50.
        #[arg(long)]
        paper_scale: bool,
    },
    /// Summarize a fitted run directory.
    Summarize {
        store: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate predictive log-gap trajectories of a new subject.
    Predict {
        store: PathBuf,
        #[arg(long)]
        horizon: usize,
        /// CSV of encoded covariates: one row, or one row per gap.
        #[arg(long, conflicts_with = "mode_of")]
        profile: Option<PathBuf>,
        /// Use the empirical covariate mode of this data file.
        #[arg(long)]
        mode_of: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// ESS, Geweke z and R-hat for each scalar.
    Diagnose {
        store: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cmd: Command) -> Result<(), Error> {
    match cmd {
        Command::Simulate { scenario, seed, out } => {
            let path = cli::cmd_simulate(&scenario, seed, out.as_deref())?;
            println!("{}", path.display());
        }
        Command::Fit {
            config,
            seed,
            chains,
            out,
            paper_scale,
        } => {
            let ov = Overrides {
                seed,
                chains,
                out,
                paper_scale,
            };
            let fit = cli::cmd_fit(&config, &ov)?;
            println!("{}", fit.dir.display());
            if !fit.summary.truncation_adequate {
                eprintln!(
                    "warning: last stick carries mean weight {:.4}; consider a larger truncation",
                    fit.summary.last_weight_mean
                );
            }
        }
        Command::Summarize { store, out } => {
            let s = cli::cmd_summarize(&store, out.as_deref())?;
            println!(
                "{}",
                serde_json::to_string_pretty(&s.k_histogram).expect("histogram serializes")
            );
        }
        Command::Predict {
            store,
            horizon,
            profile,
            mode_of,
            seed,
            out,
        } => {
            let source = match (profile, mode_of) {
                (Some(p), _) => ProfileSource::File(p),
                (None, Some(d)) => ProfileSource::ModeOf(d),
                (None, None) => ProfileSource::None,
            };
            let paths = cli::cmd_predict(&store, &source, horizon, seed, out.as_deref())?;
            println!("{} trajectories", paths.len());
        }
        Command::Diagnose { store, out } => {
            let diag = cli::cmd_diagnose(&store, out.as_deref())?;
            println!("{:<24} {:>10} {:>9} {:>7}", "scalar", "ess", "geweke_z", "rhat");
            let fmt = |v: Option<f64>, p: usize| v.map_or_else(|| "-".to_string(), |x| format!("{x:.p$}"));
            for d in diag {
                println!(
                    "{:<24} {:>10} {:>9} {:>7}",
                    d.name,
                    fmt(d.ess, 1),
                    fmt(d.geweke_z, 2),
                    fmt(d.split_rhat, 3)
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
