use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "krext", version, about = "Exact Lipschitz extension on finite pointed metric spaces")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug)]
pub struct Global {
    /// Numerical tolerance (overrides KREXT_TOL; default 1e-9)
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Seed for randomized experiments
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write output to this file (atomically) instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check the metric axioms
    Validate { space: PathBuf },
    /// Greedy upper bound on the doubling constant
    Doubling { space: PathBuf },
    /// Wasserstein-1 distance between two nonnegative measures of equal mass
    W1 { space: PathBuf, mu: PathBuf, eta: PathBuf },
    /// Kantorovich-Rubinstein norm of a signed measure
    Krnorm {
        space: PathBuf,
        mu: PathBuf,
        /// KR evaluator (see `krext methods`)
        #[arg(long, default_value = "flow")]
        solver: String,
    },
    /// Largest L-Lipschitz extension of a scalar function given on a subset
    Mcshane {
        space: PathBuf,
        f: PathBuf,
        /// Comma-separated labels; must match the function's domain when given
        #[arg(long)]
        subset: Option<String>,
        /// Lipschitz bound (defaults to the function's own constant)
        #[arg(long = "L")]
        l: Option<f64>,
    },
    /// Extend a function through a random projection
    Extend {
        space: PathBuf,
        proj: PathBuf,
        f: PathBuf,
        /// Subtract the basepoint value first and add it back afterwards
        #[arg(long)]
        shift: bool,
    },
    /// Random projection induced by a gentle partition of unity
    #[command(name = "gentle2proj")]
    Gentle2Proj { space: PathBuf, gentle: PathBuf },
    /// Gentle partition realising a strong random projection
    #[command(name = "proj2gentle")]
    Proj2Gentle { space: PathBuf, proj: PathBuf },
    /// Weighted total-variation and projection constants of a projection
    Tvconst { space: PathBuf, proj: PathBuf },
    /// Projection onto an eps-separated subset
    Udp {
        space: PathBuf,
        #[arg(long)]
        subset: String,
        #[arg(long)]
        eps: f64,
        /// Label of the fallback point (defaults to the basepoint)
        #[arg(long)]
        t0: Option<String>,
    },
    /// Minimal-constant random projection by linear programming
    Synthesize {
        space: PathBuf,
        #[arg(long)]
        subset: String,
        #[arg(long, default_value = "strong")]
        mode: String,
    },
    /// Minimal constants along an increasing sequence of subsets
    Asymptotic {
        space: PathBuf,
        /// Comma-separated labels, basepoint first (defaults to file order with the basepoint moved first)
        #[arg(long)]
        order: Option<String>,
    },
    /// Retract a nonnegative vector onto the positive part of the l1 unit ball
    Retract { vector: PathBuf },
    /// Build a projection with a registered method
    Build {
        space: PathBuf,
        #[arg(long)]
        method: String,
        #[arg(long)]
        subset: String,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        t0: Option<String>,
    },
    /// List registered projection builders and KR evaluators
    Methods,
    /// Compare constants over one or several subsets
    Report {
        space: PathBuf,
        /// Comma-separated labels; when absent, random subsets are drawn
        #[arg(long)]
        subset: Option<String>,
        /// Number of random subsets
        #[arg(long, default_value_t = 5)]
        samples: usize,
    },
}
