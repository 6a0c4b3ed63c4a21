//! netloc: locate node and line disturbances in diffusively coupled
//! networks from frequency-mismatch time series.

mod commands;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "netloc",
    about = "Disturbance localization in networks of coupled dynamical agents",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic network file.
    Generate(GenerateArgs),
    /// Integrate the disturbed dynamics and write the measured trajectory.
    Simulate(SimulateArgs),
    /// Compute psi from a trajectory, group outliers, classify disturbances.
    Localize(LocalizeArgs),
    /// Evaluate an analytical psi predictor directly.
    Predict(PredictArgs),
    /// Off-diagonality diagnostic for simultaneous line disturbances.
    Diagnose(DiagnoseArgs),
    /// Kron-reduce a network and dump the reduced system.
    Kron(KronArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// One of: random_connected, path, ring, two_community.
    #[arg(long)]
    kind: String,
    #[arg(long)]
    nodes: usize,
    /// Edge count (random_connected only).
    #[arg(long)]
    edges: Option<usize>,
    /// Intra-block edge probability (two_community only).
    #[arg(long)]
    p_in: Option<f64>,
    /// Inter-block edge probability (two_community only).
    #[arg(long)]
    p_out: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Coupling function: linear, sin, or higher_order.
    #[arg(long, default_value = "linear")]
    coupling: String,
    /// Harmonic count for higher_order coupling (c_q = 1/q).
    #[arg(long, default_value_t = 3)]
    order: usize,
    #[arg(long, default_value_t = 1.0)]
    inertia: f64,
    #[arg(long, default_value_t = 1.0)]
    damping: f64,
    #[arg(long)]
    out: std::path::PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    network: std::path::PathBuf,
    /// Disturbance JSON (single object or list). Optional: no disturbances.
    #[arg(long)]
    disturbance: Option<std::path::PathBuf>,
    #[arg(long)]
    t_end: f64,
    /// Sampling step of the output trajectory.
    #[arg(long)]
    dt: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trajectory CSV (measured nodes only).
    #[arg(long)]
    out: std::path::PathBuf,
    /// Optional velocity CSV in the same layout.
    #[arg(long)]
    velocity_out: Option<std::path::PathBuf>,
    /// Admissibility margin used for the stderr warnings.
    #[arg(long, default_value_t = netloc_core::disturbance::DEFAULT_MARGIN)]
    margin: f64,
}

#[derive(Args)]
struct LocalizeArgs {
    #[arg(long)]
    network: std::path::PathBuf,
    /// Trajectory CSV with one column per measured node.
    #[arg(long)]
    traj: std::path::PathBuf,
    /// Comma-separated ids to reduce; defaults to the network's unmeasured
    /// nodes.
    #[arg(long)]
    reduce: Option<String>,
    #[arg(long, default_value_t = 5.0)]
    k_mad: f64,
    #[arg(long, default_value_t = 0.9)]
    corr_min: f64,
    /// Localization report JSON.
    #[arg(long)]
    out: std::path::PathBuf,
    /// Optional psi CSV in the trajectory layout.
    #[arg(long)]
    psi_out: Option<std::path::PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    network: std::path::PathBuf,
    #[arg(long)]
    reduce: Option<String>,
    /// Disturbed node id (node disturbance).
    #[arg(long, conflicts_with = "line")]
    node: Option<String>,
    /// Disturbed line as "a,b" (line disturbance).
    #[arg(long)]
    line: Option<String>,
    /// Signal JSON, e.g. {"kind":"oscillating","xi0":0.01,"omega_m":0.05}.
    #[arg(long)]
    signal: String,
    #[arg(long)]
    t_end: f64,
    #[arg(long)]
    dt: f64,
    /// Predicted psi CSV.
    #[arg(long)]
    out: std::path::PathBuf,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[arg(long)]
    network: std::path::PathBuf,
    /// Comma-separated line list "a-b,c-d"; defaults to sampled edges.
    #[arg(long)]
    edges: Option<String>,
    /// Number of edges to sample when --edges is absent.
    #[arg(long, default_value_t = 10)]
    pairs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: std::path::PathBuf,
}

#[derive(Args)]
struct KronArgs {
    #[arg(long)]
    network: std::path::PathBuf,
    /// Comma-separated ids to eliminate; defaults to unmeasured nodes.
    #[arg(long)]
    reduce: Option<String>,
    /// Reduced-system JSON (network, kept/reduced id maps).
    #[arg(long)]
    out: std::path::PathBuf,
    /// Optional dense L^r dump (CSV, 17 significant digits).
    #[arg(long)]
    matrix_out: Option<std::path::PathBuf>,
    /// Optional omega^r dump (CSV).
    #[arg(long)]
    omega_out: Option<std::path::PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(args) => commands::generate(args),
        Command::Simulate(args) => commands::simulate(args),
        Command::Localize(args) => commands::localize(args),
        Command::Predict(args) => commands::predict(args),
        Command::Diagnose(args) => commands::diagnose(args),
        Command::Kron(args) => commands::kron(args),
    };
    if let Err(e) = result {
        eprintln!("{}", e.to_json());
        std::process::exit(1);
    }
}
