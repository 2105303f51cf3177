use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

const ORIENTATIONS: [&str; 3] = ["prec-minus-succ", "succ-minus-prec", "left-pre-lie"];

#[derive(Debug, Parser)]
#[command(name = "fliess", version, about = "Dendriform Fliess operators on the command line")]
pub struct Cli {
    /// Emit JSON on stdout, and JSON errors on stderr.
    #[arg(long, global = true)]
    pub json: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Planar binary trees.
    #[command(subcommand)]
    Trees(TreesCmd),
    /// Symbolic products of dendriform expressions.
    #[command(subcommand)]
    Algebra(AlgebraCmd),
    /// Iterated integrals on a sampled signal.
    #[command(subcommand)]
    Eval(EvalCmd),
    /// Truncated Fliess operators.
    #[command(subcommand)]
    Fliess(FliessCmd),
    /// Magnus recursion, optionally checked against RK4.
    Magnus(MagnusArgs),
    /// Built-in verification suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Subcommand)]
pub enum TreesCmd {
    /// List every tree of the given order.
    Enum {
        #[arg(long)]
        order: usize,
        /// Decorate each skeleton with this word (in-order), e.g. `x1x2x1`.
        #[arg(long)]
        decorate: Option<String>,
    },
}

#[derive(Debug, Args)]
pub struct Operands {
    pub left: String,
    pub right: String,
    /// Highest letter index accepted in the expressions.
    #[arg(long, default_value_t = 64)]
    pub letters: usize,
}

#[derive(Debug, Subcommand)]
pub enum AlgebraCmd {
    /// Shuffle product.
    Shuffle(Operands),
    /// Left half-shuffle `a ≺ b`.
    Prec(Operands),
    /// Right half-shuffle `a ≻ b`.
    Succ(Operands),
    /// Pre-Lie product.
    Prelie {
        #[command(flatten)]
        operands: Operands,
        #[arg(long, default_value = "left-pre-lie", value_parser = ORIENTATIONS)]
        orientation: String,
    },
    /// Sum of all trees of an order, decorated by one letter.
    Char {
        #[arg(long)]
        order: usize,
        #[arg(long, default_value = "x1")]
        letter: String,
    },
}

#[derive(Debug, Args)]
pub struct SignalArgs {
    /// `const:<matrix>[;<matrix>..]`, `csv:<path>` or `spin:<Bmag>,<schedule>`.
    #[arg(long)]
    pub signal: String,
    /// Number of grid panels (ignored for csv signals).
    #[arg(long, default_value_t = 1000)]
    pub grid: usize,
    /// Horizon T (ignored for csv signals).
    #[arg(long, default_value_t = 1.0)]
    pub horizon: f64,
    /// Write the full trajectory as CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum EvalCmd {
    /// Evaluate a tree or linear combination of trees.
    Tree {
        #[arg(long)]
        expr: String,
        #[command(flatten)]
        signal: SignalArgs,
    },
}

#[derive(Debug, Subcommand)]
pub enum FliessCmd {
    /// Evaluate a truncated Fliess operator.
    Eval {
        /// A series JSON file, or `dyson:N`.
        #[arg(long)]
        series: String,
        #[command(flatten)]
        signal: SignalArgs,
        /// Truncation order N.
        #[arg(long)]
        order: usize,
        /// Report the convergence certificate.
        #[arg(long)]
        certificate: bool,
    },
}

#[derive(Debug, Args)]
pub struct MagnusArgs {
    #[command(flatten)]
    pub signal: SignalArgs,
    #[arg(long)]
    pub order: usize,
    /// Compare exp(Ω_N) with an RK4 solution of the linear ODE.
    #[arg(long)]
    pub compare_rk4: bool,
    /// RK4 steps per grid panel.
    #[arg(long, default_value_t = 8)]
    pub refine: usize,
    #[arg(long, default_value = "left-pre-lie", value_parser = ORIENTATIONS)]
    pub orientation: String,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_parser = ["axioms", "catalan", "product-theorem", "bounds", "magnus", "all"])]
    pub suite: String,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}
