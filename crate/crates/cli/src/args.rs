use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Exact invariants of Fano cone singularities.
#[derive(Debug, Parser)]
#[command(name = "fcl", version, propagate_version = true)]
pub struct Cli {
    /// Print the run report as JSON.
    #[arg(long, global = true)]
    pub json: bool,

    /// Tolerance for numeric searches, as an exact rational.
    #[arg(long, global = true, default_value = "1/1000000", value_name = "P/Q")]
    pub tol: String,

    /// Seed of random instance suites (`FCL_SEED` overrides it).
    #[arg(long, global = true, default_value_t = crate::DEFAULT_SEED)]
    pub seed: u64,

    /// Include wall-clock timing in the report.
    #[arg(long, global = true)]
    pub timing: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Structure of a p-divisor: properness, type, quotient pair, klt.
    Pdiv(PdivArgs),
    /// Log discrepancies of torus-invariant divisors.
    Discrepancy(DiscrepancyArgs),
    /// Kollár components, toric degenerations and mld-bound witnesses.
    Kollar(KollarArgs),
    /// Volumes and normalized volumes of toric cones.
    Nvol(NvolArgs),
    /// Weighted hypersurface singularities.
    #[command(subcommand)]
    Hyper(HyperCommand),
    /// Run the acceptance criteria.
    Selftest(SelftestArgs),
}

#[derive(Debug, Args)]
pub struct PdivArgs {
    /// p-divisor JSON file.
    #[arg(long)]
    pub input: PathBuf,
}

#[derive(Debug, Args)]
pub struct DiscrepancyArgs {
    #[arg(long)]
    pub input: PathBuf,

    /// Divisor as JSON: `{"horizontal": [..]}` or `{"vertical": {"point": .., "w": [..]}}`.
    /// Repeatable; defaults to all prime divisors.
    #[arg(long = "divisor", value_name = "JSON")]
    pub divisors: Vec<String>,

    /// Canonical divisor on P¹ as a JSON map from labels to integers summing to −2.
    #[arg(long, value_name = "JSON")]
    pub canonical: Option<String>,
}

#[derive(Debug, Args)]
pub struct KollarArgs {
    #[arg(long)]
    pub input: PathBuf,

    /// Search a Kollár component with a certified discrepancy bound (the default).
    #[arg(long)]
    pub mld_bound: bool,

    /// Coefficient lower bound; defaults to the smallest positive boundary coefficient, or 1.
    #[arg(long, value_name = "P/Q")]
    pub eps: Option<String>,

    /// Test the vertical divisor `D_(z,w)`, written `z:w1,w2`.
    #[arg(long, value_name = "Z:W")]
    pub vertical: Vec<String>,

    /// Test the horizontal divisor of a ray in the interior of the tail.
    #[arg(long, value_name = "VECTOR")]
    pub horizontal: Vec<String>,

    /// Toric degeneration cone at the point `z`.
    #[arg(long, value_name = "Z")]
    pub sigma: Vec<String>,
}

#[derive(Debug, Args)]
pub struct NvolArgs {
    /// Toric cone JSON file `{"rays": .., "lattice": .., "boundary": ..}`.
    #[arg(long, conflicts_with_all = ["rays", "lattice", "boundary"])]
    pub input: Option<PathBuf>,

    /// Ray generators as a JSON list of vectors.
    #[arg(long, value_name = "JSON", required_unless_present = "input")]
    pub rays: Option<String>,

    /// Lattice basis as a JSON list of vectors (default: standard).
    #[arg(long, value_name = "JSON")]
    pub lattice: Option<String>,

    /// Boundary coefficients as JSON, parallel to the rays or as `{"ray", "c"}` entries.
    #[arg(long, value_name = "JSON")]
    pub boundary: Option<String>,

    /// Evaluate at a Reeb vector.
    #[arg(long, value_name = "VECTOR")]
    pub xi: Vec<String>,

    /// Minimize over the Reeb cone (the default without --xi).
    #[arg(long)]
    pub minimize: bool,

    /// Use the numeric descent even for simplicial cones.
    #[arg(long)]
    pub numeric: bool,
}

#[derive(Debug, Subcommand)]
pub enum HyperCommand {
    /// Normalized volume of a weight system or a multigraded hypersurface.
    Nvol(HyperNvolArgs),
    /// The boundedness conditions on a weight system.
    Conditions(ConditionsArgs),
    /// Enumerate weight systems satisfying all conditions below caps.
    Screen(ScreenArgs),
    /// Degeneration cones, T¹ support and the K-semistability obstruction.
    Degeneration(DegenerationArgs),
}

#[derive(Debug, Args)]
pub struct HyperNvolArgs {
    /// Weight system `(w0,...,wn;d)`.
    #[arg(long, required_unless_present = "input", conflicts_with = "input")]
    pub weights: Option<String>,

    /// Multigraded hypersurface JSON file `{"weights", "degree", "monomials"}`.
    #[arg(long)]
    pub input: Option<PathBuf>,

    #[arg(long, value_name = "VECTOR", requires = "input")]
    pub xi: Vec<String>,

    #[arg(long, requires = "input")]
    pub minimize: bool,
}

#[derive(Debug, Args)]
pub struct ConditionsArgs {
    #[arg(long)]
    pub weights: String,

    /// Volume lower bound.
    #[arg(long, value_name = "P/Q")]
    pub volume: String,
}

#[derive(Debug, Args)]
pub struct ScreenArgs {
    /// Dimension n of the hypersurface in C^(n+1).
    #[arg(long)]
    pub dim: usize,

    #[arg(long, value_name = "P/Q")]
    pub volume: String,

    #[arg(long)]
    pub max_degree: u64,

    /// Weight cap (default: max-degree − 1).
    #[arg(long)]
    pub max_weight: Option<u64>,

    /// Print the candidate list as CSV.
    #[arg(long)]
    pub csv: bool,
}

#[derive(Debug, Args)]
pub struct DegenerationArgs {
    /// Multigraded hypersurface JSON file; without it the quadric family is reported.
    #[arg(long, requires = "kernel")]
    pub input: Option<PathBuf>,

    /// Kernel basis of the grading as a JSON list of vectors.
    #[arg(long, value_name = "JSON", requires = "input")]
    pub kernel: Option<String>,

    /// Monomials of f as a JSON list of exponent vectors, overriding the input.
    #[arg(long, value_name = "JSON", requires = "input")]
    pub monomials: Option<String>,

    /// Total-degree cap of the T¹ search.
    #[arg(long, default_value_t = 8)]
    pub height_cap: u32,

    /// Reeb vector of the obstruction test (default: the minimizer).
    #[arg(long, value_name = "VECTOR", requires = "input")]
    pub xi: Option<String>,

    /// Largest exponent e of the family xy + z² + t·wᵉ.
    #[arg(long, default_value_t = 10, conflicts_with = "input")]
    pub max_exponent: u32,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    /// Random p-divisor instances per suite.
    #[arg(long, default_value_t = 100)]
    pub n: usize,

    /// Random cases per kernel property.
    #[arg(long, default_value_t = 200)]
    pub kernel_cases: usize,

    /// Criterion numbers or tags, comma separated.
    #[arg(long)]
    pub filter: Option<String>,
}
