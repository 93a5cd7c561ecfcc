mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "qnls", version, about = "Quadratic NLS systems: hypotheses, ground states, evolution and Morawetz diagnostics")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// JSON configuration; the built-in canonical system is used when omitted
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true, default_value = "qnls-out")]
    pub out: PathBuf,
    /// Seed for sampled checks (overrides run.seed)
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (capped by QNLS_THREADS)
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Continue past failed sampled hypotheses H6–H8
    #[arg(long, global = true)]
    pub force: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Derive f_k and check H1–H8 and mass resonance
    Check,
    /// Compute the ground state and the sharp GN constant
    GroundState {
        #[arg(long, default_value_t = 1.0)]
        omega: f64,
        /// Grid points (defaults to the configured grid)
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        r_max: Option<f64>,
    },
    /// Evolve the configured initial data
    Evolve {
        #[arg(long = "T")]
        t_end: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
    },
    /// Threshold classification plus an evolution verdict
    Classify {
        /// `scale:<c>` for c·ψ, or a snapshot path
        #[arg(long)]
        initial: Option<String>,
        /// Ground-state output directory used as the starting guess
        #[arg(long)]
        gs: Option<PathBuf>,
        #[arg(long = "T")]
        t_end: Option<f64>,
    },
    /// Verdicts across γ₂ = κ values
    Sweep {
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.45, 0.5, 0.55])]
        kappa_list: Vec<f64>,
        #[arg(long, default_value_t = 0.5)]
        amplitude: f64,
        #[arg(long = "T")]
        t_end: Option<f64>,
    },
    /// Gauge, angular, cutoff, windowed and claim identities
    Identities,
    /// Windowed Morawetz quantities from a run directory with snapshots
    Morawetz {
        #[arg(long)]
        run: PathBuf,
    },
    /// Dispersive decay rate of the free flow
    Decay {
        #[arg(long, value_delimiter = ',', default_values_t = vec![5.0, 10.0, 20.0, 40.0])]
        times: Vec<f64>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {:#}", e);
            let code = e.downcast_ref::<qnls_core::Error>().map_or(2, qnls_core::rundir::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
