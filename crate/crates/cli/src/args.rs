use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lagfib_core::ScalarMode;

#[derive(Debug, Parser)]
#[command(name = "lagfib", version, about = "Betti maps, torsion points and cubic forms of Lagrangian fibrations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Io {
    /// Input JSON document.
    #[arg(long)]
    pub input: PathBuf,
    /// Report path; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct Tolerances {
    /// Relative singular-value threshold for numerical ranks.
    #[arg(long, default_value_t = 1e-8)]
    pub tol_rank: f64,
    /// Residual at which Newton iterations stop.
    #[arg(long, default_value_t = 1e-12)]
    pub tol_newton: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Float,
}

impl From<ModeArg> for ScalarMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Exact => ScalarMode::Exact,
            ModeArg::Float => ScalarMode::Float,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DemoMode {
    Enumerate,
    RankMap,
    Density,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cone test, degeneracy of the partials and the singular plane of a cubic.
    ClassifyCubic {
        #[command(flatten)]
        io: Io,
        /// Arithmetic; defaults to the mode of the input numbers.
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[command(flatten)]
        tol: Tolerances,
    },
    /// Period matrix, positivity, cubic and optional Betti data at a point.
    AnalyzePotential {
        #[command(flatten)]
        io: Io,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[command(flatten)]
        tol: Tolerances,
    },
    /// Newton search for torsion points of one order in a base box.
    TorsionSearch {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        order: u64,
        /// Seeds per free axis.
        #[arg(long, default_value_t = 9)]
        grid: usize,
        #[command(flatten)]
        tol: Tolerances,
    },
    /// Coverage of the box by torsion points of growing order.
    DensityScan {
        #[command(flatten)]
        io: Io,
        /// Comma-separated orders.
        #[arg(long, value_delimiter = ',', default_values_t = [1u64, 2, 4, 8, 16])]
        order: Vec<u64>,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 33)]
        grid: usize,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[command(flatten)]
        tol: Tolerances,
    },
    /// Leaf plane checks, section compatibility and Betti fiber traces.
    FoliationReport {
        #[command(flatten)]
        io: Io,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long, default_value_t = 200)]
        steps: usize,
        #[arg(long, default_value_t = 1e-2)]
        step_size: f64,
        /// Also write the trace as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        tol: Tolerances,
    },
    /// Elliptic families over a one-dimensional base.
    EllipticDemo {
        #[command(flatten)]
        io: Io,
        #[arg(long, value_enum, default_value = "enumerate")]
        mode: DemoMode,
        #[arg(long, value_delimiter = ',', default_values_t = [4u64])]
        order: Vec<u64>,
        #[arg(long, default_value_t = 41)]
        grid: usize,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        /// Also write the rank map as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        tol: Tolerances,
    },
    /// Samples Betti and ∇̄ ranks over a box.
    AczCheck {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value_t = 64)]
        samples: usize,
        #[arg(long, default_value_t = 16)]
        lambda_draws: usize,
        #[command(flatten)]
        tol: Tolerances,
    },
    /// Runs the bundled acceptance checks.
    SelfTest {
        /// Optional fixture overrides (JSON).
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Only criteria whose name or module contains this text.
        #[arg(long)]
        filter: Option<String>,
    },
}
