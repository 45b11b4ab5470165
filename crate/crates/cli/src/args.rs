use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::path::PathBuf;

/// Möbius-weighted ternary sums, exponential sums and Goldbach quantities.
///
/// Every option below can also be set through the environment variable shown
/// in brackets; command-line values take precedence, then the environment,
/// then the `--config` file.
#[derive(Parser, Debug)]
#[command(name = "mtl", version)]
pub struct Cli {
    /// JSON run configuration
    #[arg(long, global = true, env = "MTL_CONFIG")]
    pub config: Option<PathBuf>,

    /// Worker threads (default: available parallelism)
    #[arg(long, global = true, env = "MTL_THREADS")]
    pub threads: Option<usize>,

    /// Seed for randomized inputs and self tests
    #[arg(long, global = true, env = "MTL_SEED")]
    pub seed: Option<u64>,

    /// Memory budget in bytes for indexes and transforms
    #[arg(long, global = true, env = "MTL_BUDGET_MEM")]
    pub budget_mem: Option<u64>,

    /// Cap on triples (direct) and pairs (indexed) visited
    #[arg(long, global = true, env = "MTL_MAX_ITERATIONS")]
    pub max_iterations: Option<u64>,

    /// Directory for cached sieve blocks
    #[arg(long, global = true, env = "MTL_SIEVE_CACHE")]
    pub sieve_cache: Option<PathBuf>,

    /// Output file; the manifest goes to `<out>.manifest.json`
    #[arg(long, global = true, env = "MTL_OUT")]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, env = "MTL_FORMAT", value_enum)]
    pub format: Option<Format>,

    /// Fill the seconds column of sum reports
    #[arg(long, global = true)]
    pub timings: bool,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// Mobius, divisor count and primality over an interval
    Sieve(SieveArgs),
    /// Evaluate a ternary sum
    Sum(SumArgs),
    /// Mobius exponential sums
    Exp {
        #[command(subcommand)]
        cmd: ExpCmd,
    },
    /// Goldbach quantities and conditional exponents
    Goldbach {
        #[command(subcommand)]
        cmd: GoldbachCmd,
    },
    /// Run one of the application sums
    App(AppArgs),
    /// Run the invariant suite
    Selftest(SelftestArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SieveArgs {
    #[arg(long, default_value_t = 1)]
    pub lo: u64,
    #[arg(long)]
    pub hi: u64,
    /// Only report the Mobius sum and prime count over the interval
    #[arg(long)]
    pub summary: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyArg {
    Direct,
    Indexed,
    Decomp,
    Scan,
    All,
}

#[derive(Args, Debug, Clone, Default, Serialize)]
pub struct BuiltinArgs {
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub x: Option<u64>,
    #[arg(long)]
    pub a_len: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    pub shift_a: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    pub shift_b: Option<i64>,
    #[arg(long)]
    pub nu: Option<u8>,
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<String>,
    #[arg(long)]
    pub modulus: Option<u64>,
    #[arg(long)]
    pub h: Option<u64>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SumArgs {
    /// Builtin collection name
    #[arg(long, conflicts_with_all = ["collection", "random"])]
    pub builtin: Option<String>,
    /// Collection JSON file
    #[arg(long, conflicts_with = "random")]
    pub collection: Option<PathBuf>,
    /// Random collection inside [1, MAX] drawn from the seed
    #[arg(long, value_name = "MAX")]
    pub random: Option<u64>,
    #[command(flatten)]
    pub params: BuiltinArgs,
    /// Target M (overrides the collection's own)
    #[arg(long, allow_hyphen_values = true)]
    pub m: Option<i64>,
    #[arg(long, value_enum, default_value_t = StrategyArg::Indexed)]
    pub strategy: StrategyArg,
    /// Scan range start (scan strategy)
    #[arg(long, allow_hyphen_values = true, requires = "m_hi")]
    pub m_lo: Option<i64>,
    #[arg(long, allow_hyphen_values = true, requires = "m_lo")]
    pub m_hi: Option<i64>,
    /// Split point for the decomposition strategy
    #[arg(long)]
    pub split_d: Option<u64>,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ExpCmd {
    /// sum mu(n) e(alpha n) over n <= N, n = a mod d
    Linear {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1)]
        d: u64,
        #[arg(long, default_value_t = 0)]
        a: u64,
    },
    /// sum mu(n) e(p(n)) for a bracket polynomial p
    Bracket {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        poly: String,
        #[arg(long, default_value_t = 1)]
        d: u64,
        #[arg(long, default_value_t = 0)]
        a: u64,
    },
    /// sum over N < n <= N + H of mu(n) e(p(n))
    Short {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        h: u64,
        #[arg(long)]
        poly: String,
    },
    /// Lower bounds for sup over alpha of |sum mu(n) e(alpha n)|
    Scan {
        #[arg(long, required = true, value_delimiter = ',')]
        n: Vec<u64>,
        #[arg(long, default_value_t = mtl_core::expsum::DEFAULT_GRID)]
        grid: usize,
        #[arg(long, default_value_t = mtl_core::expsum::DEFAULT_REFINE)]
        refine: u32,
        /// Evaluate grid points directly instead of by FFT
        #[arg(long)]
        direct: bool,
    },
    /// Fit a decay law to (N, value) points or to fresh scans
    Fit {
        /// CSV with columns N,value
        #[arg(long, conflicts_with = "n")]
        input: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        n: Vec<u64>,
        #[arg(long, value_enum, default_value_t = ModelArg::LogPower)]
        model: ModelArg,
        #[arg(long, default_value_t = mtl_core::expsum::DEFAULT_GRID)]
        grid: usize,
        #[arg(long, default_value_t = mtl_core::expsum::DEFAULT_REFINE)]
        refine: u32,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelArg {
    LogPower,
    Power,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Auto,
    Direct,
    Fft,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightArg {
    Mobius,
    AbsMobius,
    One,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GoldbachCmd {
    /// R1(m) for one m, or for every m <= x
    R1 {
        #[arg(long, conflicts_with = "x", required_unless_present = "x")]
        m: Option<u64>,
        #[arg(long)]
        x: Option<u64>,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
    },
    /// Singular series S1(m)
    Series {
        #[arg(long, required = true, value_delimiter = ',')]
        m: Vec<u64>,
        #[arg(long, default_value_t = 1e-6, conflicts_with = "cutoff")]
        tolerance: f64,
        /// Fixed prime cutoff instead of a tolerance
        #[arg(long)]
        cutoff: Option<u64>,
    },
    /// sum mu(m) R1(m) against sum mu(m) m S1(m)
    Compare {
        #[arg(long, required = true, value_delimiter = ',')]
        x: Vec<u64>,
        #[arg(long, value_enum, default_value_t = WeightArg::Mobius)]
        weight: WeightArg,
        #[arg(long, default_value_t = mtl_core::goldbach::COMPARE_CUTOFF)]
        cutoff: u64,
    },
    /// b(sigma) and c(sigma) as exact fractions
    Exponents {
        #[arg(long, required = true, value_delimiter = ',')]
        sigma: Vec<String>,
    },
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct AppArgs {
    /// primes_sum, primes_indexed, squarefree, beatty, quadratic, small_var or prime_pair_mobius
    pub name: String,
    #[arg(long)]
    pub x: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<i64>,
    #[arg(long)]
    pub a_len: Option<u64>,
    #[arg(long)]
    pub nu: Option<u8>,
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<String>,
    #[arg(long)]
    pub m: Option<u64>,
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub h: Option<u64>,
    #[arg(long, value_enum, default_value_t = StrategyArg::Indexed)]
    pub strategy: StrategyArg,
    /// C in N H (log H)^(-C)
    #[arg(long, default_value_t = 1.0)]
    pub log_power: f64,
    /// c in N H exp(-c sqrt(log H))
    #[arg(long, default_value_t = 1.0)]
    pub exp_constant: f64,
    /// sigma in N H^(c(sigma))
    #[arg(long, default_value = "1/2")]
    pub sigma: String,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SelftestArgs {
    /// Smaller sizes; finishes in seconds
    #[arg(long)]
    pub quick: bool,
}
