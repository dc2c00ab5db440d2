use clap::{Args, Parser, Subcommand};
use quasim_cli::commands::{self, CommonOpts};
use std::path::PathBuf;
use std::process::ExitCode;

/// Stochastic simulation and analytic verification of dissipative
/// quantum and classical oscillators.
#[derive(Parser)]
#[command(name = "quasim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Configuration file (sectioned key = value format).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSV files and check reports.
    #[arg(long)]
    out: PathBuf,
    /// Master seed; overrides the configuration file.
    #[arg(long)]
    seed: Option<u64>,
    /// Trajectory count; overrides the configuration file.
    #[arg(long)]
    traj: Option<usize>,
    /// Worker threads (default: QUASIM_THREADS or all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize noise and verify its spectrum, correlations and moments.
    Noise(CommonArgs),
    /// Ensemble moment dynamics against the analytic curves.
    Dynamics(CommonArgs),
    /// Steady-state covariance sweeps across every analytic route.
    Steady(CommonArgs),
    /// Heat-current sweeps over a two-bath oscillator network.
    Network(CommonArgs),
    /// Run the full cross-check battery and write a pass/fail report.
    Verify {
        #[arg(long)]
        out: PathBuf,
        /// Scale factor applied to every tolerance (0 fails everything).
        #[arg(long, default_value_t = 1.0)]
        tolerance_scale: f64,
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn init_threads(flag: Option<usize>) {
    let n = flag.or_else(|| {
        std::env::var("QUASIM_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = n {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Noise(a) | Command::Dynamics(a) | Command::Steady(a) | Command::Network(a) => {
            init_threads(a.threads);
            let opts = CommonOpts {
                config: a.config.clone(),
                out: a.out.clone(),
                seed: a.seed,
                traj: a.traj,
            };
            match &cli.command {
                Command::Noise(_) => commands::noise::run(&opts),
                Command::Dynamics(_) => commands::dynamics::run(&opts),
                Command::Steady(_) => commands::steady::run(&opts),
                Command::Network(_) => commands::network::run(&opts),
                Command::Verify { .. } => unreachable!(),
            }
        }
        Command::Verify {
            out,
            tolerance_scale,
            threads,
        } => {
            init_threads(*threads);
            commands::verify::run(out, *tolerance_scale)
        }
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("numerical checks failed");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
