use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::path::PathBuf;

#[derive(Parser, Debug, Serialize)]
#[command(name = "rc", version, about = "Sheffer polynomials from quadratic Q: exact tables, contour asymptotics and critical-line zeros")]
pub struct Cli {
    /// Working precision in bits, at least 64 [default: 128 for analysis, 256 for zeros]
    #[arg(long, global = true, env = "RC_PRECISION")]
    pub precision: Option<u32>,
    /// Worker threads for parallel sweeps
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// Output format; each command has its own default
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of standard output
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Group,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Q given as (1+az)(1+bz) or as (z1−z)(z2−z); rationals like 3 or 3/2.
#[derive(Args, Debug, Clone, Serialize)]
pub struct QArgs {
    /// a in Q(z) = (1+az)(1+bz)
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<String>,
    /// b in Q(z) = (1+az)(1+bz)
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<String>,
    /// Smaller root in Q(z) = (z1−z)(z2−z), 0 < z1 < z2
    #[arg(long)]
    pub z1: Option<String>,
    /// Larger root in Q(z) = (z1−z)(z2−z)
    #[arg(long)]
    pub z2: Option<String>,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Group {
    /// H_n polynomials
    #[command(subcommand)]
    Sheffer(ShefferCmd),
    /// Exponential Riordan matrices
    #[command(subcommand)]
    Riordan(RiordanCmd),
    /// Generating trees and lattice paths
    #[command(subcommand)]
    Combinat(CombinatCmd),
    /// Critical curves and contour asymptotics
    #[command(subcommand)]
    Analysis(AnalysisCmd),
    /// Roots of H_n and the critical line
    #[command(subcommand)]
    Zeros(ZerosCmd),
}

/// x^k or the falling factorials (x)_k = x(x−1)…(x−k+1).
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Power,
    Falling,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ShefferCmd {
    /// Coefficients of H_0..H_nmax, lowest degree first.
    ///
    /// CSV columns: n, k, coeff. In the falling basis k indexes (x)_k.
    Coeffs {
        #[command(flatten)]
        q: QArgs,
        #[arg(long)]
        nmax: usize,
        #[arg(long, value_enum, default_value_t = Basis::Power)]
        basis: Basis,
    },
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RiordanCmd {
    /// Production matrix of L_Q with its pair (c, r) and the A·P = U·A check; (a, b) form only.
    ///
    /// CSV columns: i, j, p.
    Production {
        #[command(flatten)]
        q: QArgs,
        #[arg(long, default_value_t = 8)]
        size: usize,
    },
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CombinatCmd {
    /// Marked generating tree levels against the matrix recurrence; (a, b) form only.
    ///
    /// CSV columns: level, label, unmarked, marked, net, recurrence.
    Tree {
        #[command(flatten)]
        q: QArgs,
        #[arg(long, default_value_t = 6)]
        depth: usize,
    },
    /// Weighted lattice path sums σ(n,k) against the falling-factorial coefficients; (a, b) form only.
    ///
    /// CSV columns: n, k, sigma.
    Paths {
        #[command(flatten)]
        q: QArgs,
        #[arg(long)]
        nmax: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Saddle,
    Layer,
    Smallt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerArg {
    AtT,
    AtT1Minus,
    AtT1Plus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RouteArg {
    Auto,
    RealAxis,
    Steepest,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalysisCmd {
    /// ζ curves and φ(ζ₁(t), t) on an even grid of [0, T].
    ///
    /// CSV columns: t, re_zeta1, im_zeta1, re_zeta2, im_zeta2, re_phi, im_phi.
    /// φ is taken at (ζ₁(t), t); at t = 0 it is Log z1.
    Curves {
        #[arg(long)]
        z1: String,
        #[arg(long)]
        z2: String,
        #[arg(long, default_value_t = 400)]
        samples: usize,
    },
    /// Contour value of I₂ against one asymptotic approximant.
    Compare {
        #[arg(long)]
        z1: String,
        #[arg(long)]
        z2: String,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        t: f64,
        #[arg(long, value_enum)]
        method: Method,
        /// Which boundary layer for --method layer
        #[arg(long, value_enum, default_value_t = LayerArg::AtT)]
        layer: LayerArg,
        #[arg(long, value_enum, default_value_t = RouteArg::Auto)]
        route: RouteArg,
        /// Relative tolerance of the contour value
        #[arg(long, default_value_t = 1e-15)]
        tol: f64,
        /// Precision cap in bits for the contour; exceeding it exits with status 3
        #[arg(long, default_value_t = 1 << 15)]
        max_precision: u32,
        #[arg(long, default_value_t = 4.0)]
        gate_saddle: f64,
        #[arg(long, default_value_t = 10.0)]
        gate_smallt: f64,
        #[arg(long, default_value_t = 1.0)]
        gate_layer_lower: f64,
        #[arg(long, default_value_t = 1.0)]
        gate_layer_upper: f64,
    },
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ZerosCmd {
    /// Roots of H_n classified against Re x = 1/2; with --nmax, a sweep reporting n₀.
    ///
    /// CSV columns (single n): re, im, t, residual, kind, distance.
    Verify {
        #[command(flatten)]
        q: QArgs,
        #[arg(long)]
        n: usize,
        /// Sweep n..=nmax instead of a single index
        #[arg(long)]
        nmax: Option<usize>,
        /// Tolerance on |Re x − 1/2|
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Sign changes of H_n on the line over an open grid of (0, T); (z1, z2) form only.
    Count {
        #[command(flatten)]
        q: QArgs,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 400)]
        samples: usize,
    },
}
