mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use destrec_core::planner::PlannerSpec;

/// Destination intention recognition on road networks.
#[derive(Debug, Parser)]
#[command(name = "destrec", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Road network JSON file [default: bundled London network]
    #[arg(long, global = true)]
    pub network: Option<PathBuf>,
    /// Gazetteer JSON file [default: bundled London gazetteer]
    #[arg(long, global = true)]
    pub gazetteer: Option<PathBuf>,
    /// Similarity threshold in meters
    #[arg(long, global = true, default_value_t = destrec_core::geo::DEFAULT_SIMILARITY_THRESHOLD_M)]
    pub tau: f64,
    /// Route resampling spacing in meters
    #[arg(long, global = true, default_value_t = destrec_core::geo::DEFAULT_RESAMPLE_SPACING_M)]
    pub spacing: f64,
    /// Sphere radius in meters
    #[arg(long, global = true, default_value_t = destrec_core::geo::MEAN_EARTH_RADIUS_M)]
    pub radius: f64,
    /// internal | perturbed:<delta>:<seed> | external:<url> | text:<reply-file>
    #[arg(long, global = true, default_value = "internal")]
    pub planner: PlannerSpec,
    /// Seed for generated maps and datasets
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Print machine-readable JSON on stdout
    #[arg(long, global = true)]
    pub json: bool,
    /// Listen address for `serve`
    #[arg(long, global = true, default_value = "127.0.0.1:8080")]
    pub bind: String,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Plan a route between two places (names or "lat,lng")
    Route {
        origin: String,
        destination: String,
        /// Intermediate waypoint, repeatable
        #[arg(long)]
        via: Vec<String>,
    },
    /// Solve every problem in a problem file and print the traces
    Solve { problems: PathBuf },
    /// Generate a benchmark dataset
    Generate {
        /// Dataset config JSON; defaults apply when absent
        config: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Evaluate a dataset and print the metrics tables
    Eval {
        dataset: PathBuf,
        /// Print per-problem metrics as well
        #[arg(long)]
        per_problem: bool,
    },
    /// Generate a synthetic grid network
    Genmap {
        #[arg(long, default_value_t = 20)]
        rows: usize,
        #[arg(long, default_value_t = 20)]
        cols: usize,
        /// Lattice spacing in meters
        #[arg(long, default_value_t = 100.0)]
        grid_spacing: f64,
        /// Origin of the lattice as "lat,lng"
        #[arg(long, default_value = "51.5,-0.1")]
        origin: String,
        #[arg(long, default_value_t = 0.15)]
        jitter: f64,
        #[arg(long, default_value_t = 0.1)]
        drop: f64,
        /// Also write a synthetic gazetteer of this many nodes
        #[arg(long)]
        places: Option<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run the HTTP service
    Serve {
        /// Idle session eviction in seconds
        #[arg(long, default_value_t = 1800)]
        idle_timeout: u64,
    },
    /// Write the bundled fixtures and the seeded benchmark map to a directory
    Fixtures { dir: PathBuf },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
