use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "geomlab", version, about = "Estimators and verifiers for randomized series and moduli of normed spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate a modulus on an ε-grid.
    Modulus,
    /// Sign gap of unit n-tuples, optionally with embedding bounds for the witness.
    Rho,
    /// Lifting bound in L_p(μ; X) over equal atoms.
    Lift,
    /// Submartingale and scaling checks on seeded random series.
    SeriesCheck,
    /// Gain bound for tuples with a positive sign gap.
    Thm13,
    /// Krivine constants with grid verification.
    Krivine,
    /// Lattice inequality verifiers.
    Verify {
        #[command(subcommand)]
        which: Verify,
    },
    /// Harmonic Hardy space demonstrations.
    Harmonic {
        #[command(subcommand)]
        which: Harmonic,
    },
}

#[derive(Debug, Subcommand)]
pub enum Verify {
    /// Lattice p-convexification chain with the Krivine constant.
    Eq3,
    /// Convexity bound from the monotonicity modulus.
    Thm33,
    /// Circle-mean sandwich in the complexified lattice.
    Thm34,
    /// Same as `lift`.
    Thm24,
    /// max ‖x ± y‖ ≤ ‖|x| + |y|‖.
    Mluc,
}

#[derive(Debug, Subcommand)]
pub enum Harmonic {
    /// Sequence that converges on compacts and in norm but not in h^p.
    KkDemo,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModulusKind {
    DeltaPhi,
    StrongExtreme,
    UniformConvexity,
    Monotone,
    LocalMonotone,
    Complex,
}

#[derive(Debug, clap::Args)]
pub struct Options {
    /// Space: lp:P:D, complex:LATTICE, orlicz:exp|P:D, lorentz:K:D, kothe:FILE,
    /// pconvex:P:LATTICE, bochner:P:ATOMS:SPACE, a JSON document, or @FILE.
    #[arg(long, global = true)]
    pub space: Option<String>,
    /// Inner space for lifting checks (same syntax as --space).
    #[arg(long, global = true)]
    pub inner: Option<String>,
    /// Exponent(s); `inf` is accepted where meaningful.
    #[arg(long, global = true, value_delimiter = ',', value_parser = parse_real)]
    pub p: Vec<f64>,
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true, value_delimiter = ',', value_parser = parse_real)]
    pub eps: Vec<f64>,
    /// Gauge: pow:P or abs.
    #[arg(long, global = true, default_value = "pow:2")]
    pub phi: String,
    /// Random variable: rademacher, cos[:NODES], circle[:NODES], uniform[:NODES], mc:KIND:SAMPLES.
    #[arg(long, global = true, default_value = "rademacher")]
    pub rv: String,
    #[arg(long, global = true)]
    pub kind: Option<ModulusKind>,
    /// Base point, comma-separated real coordinates.
    #[arg(long, global = true, value_delimiter = ',', value_parser = parse_real, allow_hyphen_values = true)]
    pub x: Vec<f64>,
    /// Step vector, comma-separated real coordinates.
    #[arg(long, global = true, value_delimiter = ',', value_parser = parse_real, allow_hyphen_values = true)]
    pub y: Vec<f64>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Quadrature nodes (random-variable rules, circle means, verification grids).
    #[arg(long, global = true)]
    pub nodes: Option<usize>,
    /// Evaluation budget for exact expectations and for the grid oracle.
    #[arg(long, global = true)]
    pub budget: Option<u128>,
    #[arg(long, global = true)]
    pub starts: Option<usize>,
    #[arg(long, global = true)]
    pub atoms: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output path; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

pub fn parse_real(s: &str) -> Result<f64, String> {
    match s.trim() {
        "inf" | "infinity" | "Infinity" => Ok(f64::INFINITY),
        t => t.parse::<f64>().map_err(|e| format!("`{t}`: {e}")),
    }
}
