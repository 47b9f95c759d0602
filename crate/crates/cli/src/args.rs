use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "duffing", version, about = "Cubic-quintic Duffing oscillator: exact solutions, chaos scans, control, noise")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output file, or a directory for the default file name.
    /// Defaults to $DUFFING_OUT_DIR (or the current directory).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads for parallel commands (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,

    /// Output format. Reruns keep the format of the source file.
    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatArg>,

    /// Also write a gnuplot script next to the data file (CSV only).
    #[arg(long, global = true)]
    pub gnuplot: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatArg {
    Csv,
    Json,
}

impl FormatArg {
    pub fn extension(self) -> &'static str {
        match self {
            FormatArg::Csv => "csv",
            FormatArg::Json => "json",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the forced, damped oscillator.
    #[command(allow_negative_numbers = true)]
    Simulate(SimulateArgs),
    /// Elliptic closed-form solution of the unperturbed oscillator.
    #[command(allow_negative_numbers = true)]
    Exact(ExactArgs),
    /// Second-order amplitude-phase approximation against direct integration.
    #[command(allow_negative_numbers = true)]
    Kbm(KbmArgs),
    /// Melnikov function along a homoclinic orbit.
    #[command(allow_negative_numbers = true)]
    Melnikov(MelnikovArgs),
    /// Stroboscopic Poincare map.
    #[command(allow_negative_numbers = true)]
    Poincare(PoincareArgs),
    /// Chaos-onset scan in gamma for one or more forcing frequencies.
    #[command(allow_negative_numbers = true)]
    Scan(ScanArgs),
    /// Bifurcation diagram data over a gamma sweep.
    #[command(allow_negative_numbers = true)]
    Bifurcate(BifurcateArgs),
    /// Delayed-feedback control run or (mu, tau) search.
    #[command(allow_negative_numbers = true)]
    Control(ControlArgs),
    /// Euler-Maruyama paths of the noisy oscillator.
    #[command(allow_negative_numbers = true)]
    Sde(SdeArgs),
    /// Repeat the run recorded in an output file's config line.
    Rerun(RerunArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Coeffs {
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Forcing {
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Initial {
    #[arg(long)]
    pub x0: Option<f64>,
    #[arg(long)]
    pub v0: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Rk4,
    Dopri5,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderArg {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindArg {
    Sech,
    Tanh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchArg {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HistoryArg {
    Zero,
    ConstantInitial,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub coeffs: Coeffs,
    #[command(flatten)]
    pub forcing: Forcing,
    #[command(flatten)]
    pub initial: Initial,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// RK4 step, and the output sampling interval for both methods.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Absolute and relative tolerance for dopri5.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ExactArgs {
    #[command(flatten)]
    pub coeffs: Coeffs,
    #[arg(long)]
    pub x0: Option<f64>,
    #[arg(long)]
    pub periods: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct KbmArgs {
    #[command(flatten)]
    pub coeffs: Coeffs,
    #[command(flatten)]
    pub forcing: Forcing,
    #[command(flatten)]
    pub initial: Initial,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long, value_enum)]
    pub order: Option<OrderArg>,
    #[arg(long)]
    pub dt_out: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct MelnikovArgs {
    #[command(flatten)]
    pub coeffs: Coeffs,
    #[arg(long, value_enum)]
    pub kind: Option<KindArg>,
    #[arg(long, value_enum)]
    pub branch: Option<BranchArg>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct PoincareArgs {
    #[arg(long)]
    pub preset: Option<String>,
    #[command(flatten)]
    pub coeffs: Coeffs,
    #[command(flatten)]
    pub forcing: Forcing,
    #[command(flatten)]
    pub initial: Initial,
    #[arg(long)]
    pub n_points: Option<usize>,
    #[arg(long)]
    pub n_transient: Option<usize>,
    #[arg(long)]
    pub steps_per_period: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct ScanArgs {
    #[arg(long)]
    pub preset: Option<String>,
    #[command(flatten)]
    pub coeffs: Coeffs,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Comma-separated forcing frequencies.
    #[arg(long, value_delimiter = ',')]
    pub omegas: Option<Vec<f64>>,
    /// Keep only the first N frequencies.
    #[arg(long)]
    pub rows: Option<usize>,
    #[arg(long)]
    pub gamma_lo: Option<f64>,
    #[arg(long)]
    pub gamma_hi: Option<f64>,
    #[arg(long)]
    pub grid_step: Option<f64>,
    #[arg(long)]
    pub resolution: Option<f64>,
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct BifurcateArgs {
    #[arg(long)]
    pub preset: Option<String>,
    #[command(flatten)]
    pub coeffs: Coeffs,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub omega: Option<f64>,
    #[command(flatten)]
    pub initial: Initial,
    #[arg(long)]
    pub gamma_lo: Option<f64>,
    #[arg(long)]
    pub gamma_hi: Option<f64>,
    #[arg(long)]
    pub n_gamma: Option<usize>,
    #[arg(long)]
    pub n_points: Option<usize>,
    #[arg(long)]
    pub n_transient: Option<usize>,
    #[arg(long)]
    pub steps_per_period: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct ControlArgs {
    #[arg(long)]
    pub preset: Option<String>,
    #[command(flatten)]
    pub coeffs: Coeffs,
    #[command(flatten)]
    pub forcing: Forcing,
    #[command(flatten)]
    pub initial: Initial,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long, value_enum)]
    pub history: Option<HistoryArg>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub steps_per_tau: Option<usize>,
    #[arg(long)]
    pub window_taus: Option<usize>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Degree of the Chebyshev fit over the last delay window.
    #[arg(long)]
    pub fit_degree: Option<usize>,
    /// Search the (mu, tau) rectangle instead of a single run.
    #[arg(long)]
    pub search: bool,
    #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
    pub mu_range: Option<Vec<f64>>,
    #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
    pub tau_range: Option<Vec<f64>>,
    #[arg(long)]
    pub grid: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct SdeArgs {
    #[command(flatten)]
    pub coeffs: Coeffs,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[command(flatten)]
    pub initial: Initial,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub n_steps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub ensemble: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct RerunArgs {
    /// A file written by any other command.
    pub file: PathBuf,
}
