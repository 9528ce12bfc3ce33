use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "liouville", version, about = "Radial Liouville equation solver and verifier")]
pub struct Cli {
    /// Flat key = value file; flags given on the command line win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for a normalized profile at a given beta.
    Solve(SolveArgs),
    /// Tabulate the mass map beta(s) to CSV.
    Scan(ScanArgs),
    /// Find the shooting parameter s with beta(s) = beta.
    Find(FindArgs),
    /// Check the identities of a stored solution.
    Verify(VerifyArgs),
    /// Emit a closed-form solution.
    Oracle(OracleArgs),
    /// Run a physics preset.
    App(AppArgs),
    /// Plot CSV columns to SVG.
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Shooting,
    Variational,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ProblemArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// Weight exponent of rⁿ V.
    #[arg(long, allow_negative_numbers = true)]
    pub n: Option<f64>,
    /// Potential spec, e.g. gauss:gamma=1,alpha=2 or table=path.csv.
    #[arg(long)]
    pub potential: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct TolArgs {
    #[arg(long)]
    pub abs_tol: Option<f64>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub root_tol: Option<f64>,
    /// Accepted relative tail mass when choosing r_max.
    #[arg(long)]
    pub mass_tol: Option<f64>,
    /// Fixed outer radius (disk radius for the variational method).
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long)]
    pub nodes: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub tol: TolArgs,
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    #[arg(long)]
    pub grad_tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long, allow_negative_numbers = true, requires = "s_hi")]
    pub s_lo: Option<f64>,
    #[arg(long, allow_negative_numbers = true, requires = "s_lo")]
    pub s_hi: Option<f64>,
    /// JSON header path; the CSV body goes next to it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub n: Option<f64>,
    #[arg(long)]
    pub potential: Option<String>,
    #[command(flatten)]
    pub tol: TolArgs,
    #[arg(long, allow_negative_numbers = true, default_value_t = -5.0)]
    pub s_min: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 25.0)]
    pub s_max: f64,
    #[arg(long, default_value_t = 1.0)]
    pub s_step: f64,
    /// Negative-branch scan (beta < 0).
    #[arg(long)]
    pub negative: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FindArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub tol: TolArgs,
    #[arg(long, allow_negative_numbers = true, requires = "s_hi")]
    pub s_lo: Option<f64>,
    #[arg(long, allow_negative_numbers = true, requires = "s_lo")]
    pub s_hi: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Solution JSON header.
    pub file: PathBuf,
    /// Also write the report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(subcommand)]
    pub kind: OracleKind,
    #[arg(long, global = true)]
    pub r_max: Option<f64>,
    #[arg(long, global = true)]
    pub nodes: Option<usize>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum OracleKind {
    /// Conformal bubble with beta = 2 n_fam and weight r^{2(n_fam-1)}.
    Bubble {
        #[arg(long, default_value_t = 1.0)]
        n_fam: f64,
        #[arg(long, conflicts_with = "psi0")]
        lambda: Option<f64>,
        /// Pick lambda so that psi(0) takes this value.
        #[arg(long, allow_negative_numbers = true)]
        psi0: Option<f64>,
    },
    /// The log-singular example with beta = 1/(4 ln alpha_cut).
    Sharp {
        #[arg(long, default_value_t = (-1.0f64).exp())]
        alpha_cut: f64,
    },
}

#[derive(Debug, Args)]
pub struct AppArgs {
    #[command(subcommand)]
    pub preset: Preset,
    #[command(flatten)]
    pub tol: TolArgs,
    /// Write the solution (single runs) here.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Preset {
    /// Onsager vortex: weight rⁿ e^{-gamma r^alpha}, beta = -beta_stat/(4π).
    Onsager {
        #[arg(long, default_value_t = 0.0)]
        n: f64,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        /// One value, or a comma list for a temperature scan.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        beta_stat: Vec<f64>,
        /// Scan table output.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Spherical Onsager: weight rⁿ (1+r²)^l e^{2 gamma/(1+r²)}.
    Sphere {
        #[arg(long, default_value_t = 0.0)]
        n: f64,
        #[arg(long, allow_negative_numbers = true)]
        l: f64,
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
        #[arg(long)]
        beta: f64,
    },
    /// Chern–Simons–Schrödinger Landau level: weight r^{2 n_int} e^{-B r²/2}.
    Css {
        #[arg(long, default_value_t = 0)]
        n_int: u32,
        #[arg(long, allow_negative_numbers = true, required_unless_present = "sweep")]
        beta: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        b: f64,
        /// Second field strength for the scaling check.
        #[arg(long)]
        b2: Option<f64>,
        /// Check the window verdict against the inequality on this many random specs.
        #[arg(long)]
        sweep: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    pub csv: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "psi")]
    pub columns: Vec<String>,
    #[arg(long, default_value = "r")]
    pub x: String,
    #[arg(long)]
    pub log_x: bool,
    #[arg(long)]
    pub title: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}
