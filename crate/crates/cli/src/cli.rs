//! Command-line surface: one subcommand per workflow.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "waring",
    version,
    about = "Exact counting and circle-method diagnostics for sums of k-th powers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Worker threads. Results are bytewise independent of this knob, so it
    /// is excluded from run manifests.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,

    /// Memory budget in bytes for table construction
    /// (env WARING_BUDGET_BYTES, default 4 GiB).
    #[arg(long, global = true)]
    pub budget_bytes: Option<u64>,

    /// Directory prepended to relative output paths (env WARING_OUT_DIR).
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the exact representation-count table R_{s,k}(n) for n <= N.
    Reps(RepsArgs),
    /// Evaluate the truncated singular series for one n or a range.
    Series(SeriesArgs),
    /// Build the per-n audit table (count, series, main term, E).
    Audit(AuditArgs),
    /// Exceptional-set scan over dyadic blocks.
    Scan(ScanArgs),
    /// Exact even moments over a P-ladder, or a mixed moment at one P.
    Moments(MomentsArgs),
    /// The kernel-constrained twelfth moment, by both evaluation routes.
    Theta(ThetaArgs),
    /// Major/minor arc membership reports and Weyl-sum evaluations.
    Arcs(ArcsArgs),
    /// The proved exceptional-set exponent table.
    Exponents(ExponentsArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct RepsArgs {
    #[arg(long)]
    pub s: u32,
    #[arg(long)]
    pub k: u32,
    #[arg(long = "N")]
    pub limit: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// csv or bin; inferred from the output extension when omitted
    #[arg(long, value_enum)]
    pub format: Option<RepsFormat>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, PartialEq)]
pub enum RepsFormat {
    Csv,
    Bin,
}

#[derive(Debug, Args, Serialize)]
pub struct SeriesArgs {
    /// evaluate at this n (repeatable)
    #[arg(long)]
    pub n: Vec<u64>,
    /// evaluate for every n in lo:hi inclusive
    #[arg(long, value_parser = parse_range)]
    pub n_range: Option<(u64, u64)>,
    #[arg(long)]
    pub s: u32,
    #[arg(long)]
    pub k: u32,
    #[arg(long = "Q")]
    pub q_limit: u64,
    /// JSON output path; stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// retain at most this many ledger terms per evaluation (0 drops all)
    #[arg(long, default_value_t = 4096)]
    pub max_terms: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct AuditArgs {
    #[arg(long)]
    pub s: u32,
    #[arg(long)]
    pub k: u32,
    #[arg(long = "N")]
    pub limit: u64,
    #[arg(long = "Q", default_value_t = 500)]
    pub q_limit: u64,
    /// load the count table from a reps binary instead of recomputing
    #[arg(long)]
    pub reps: Option<PathBuf>,
    /// audit binary output
    #[arg(long)]
    pub out: PathBuf,
    /// optional CSV mirror (n,count,series,mainTerm,E)
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ScanArgs {
    #[arg(long)]
    pub s: u32,
    #[arg(long)]
    pub k: u32,
    #[arg(long = "N")]
    pub limit: u64,
    #[arg(long = "Q", default_value_t = 500)]
    pub q_limit: u64,
    /// threshold function: log:C, pow:DELTA, or const:A
    #[arg(long, default_value = "log:1")]
    pub psi: String,
    /// smallest dyadic block to scan
    #[arg(long, default_value_t = 1024)]
    pub min_block: u64,
    #[arg(long)]
    pub reps: Option<PathBuf>,
    /// JSON report output
    #[arg(long)]
    pub out: PathBuf,
    /// optional CSV mirror
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, PartialEq)]
pub enum FamilyArg {
    Full,
    Dyadic,
    Smooth,
    Block,
}

#[derive(Debug, Args, Serialize)]
pub struct MomentsArgs {
    #[arg(long, value_enum, default_value_t = FamilyArg::Full)]
    pub family: FamilyArg,
    #[arg(long, default_value_t = 3)]
    pub k: u32,
    /// even moment order 2t
    #[arg(long, default_value_t = 2)]
    pub power: u32,
    /// comma-separated P ladder, e.g. 32,64,128,256
    #[arg(long = "P", value_delimiter = ',')]
    pub p_values: Vec<u64>,
    /// smoothness bound rule: "sqrt" for R = P^(1/2), or a fixed value
    #[arg(long = "R", default_value = "sqrt")]
    pub r_rule: String,
    /// mixed moment factors at a single P, e.g. "dyadic:2,smooth:4"
    #[arg(long)]
    pub mixed: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ThetaArgs {
    #[arg(long = "P")]
    pub p: u64,
    #[arg(long = "R")]
    pub r: f64,
    /// first linear form, e.g. 1,0,1
    #[arg(long, value_parser = parse_triple)]
    pub c: [i64; 3],
    /// second linear form, e.g. 0,1,1
    #[arg(long, value_parser = parse_triple)]
    pub d: [i64; 3],
    /// also evaluate the four-fold smooth twelfth moment over the kernel
    #[arg(long, default_value_t = false)]
    pub twelfth: bool,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// optional CSV report
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, PartialEq)]
pub enum SystemArg {
    Waring,
    Cubic5,
}

#[derive(Debug, Args, Serialize)]
pub struct ArcsArgs {
    #[arg(long, value_enum)]
    pub system: SystemArg,
    /// power k (waring system)
    #[arg(long, default_value_t = 3)]
    pub k: u32,
    /// height N (waring system)
    #[arg(long = "N")]
    pub limit: Option<u64>,
    /// P (cubic5 system)
    #[arg(long = "P")]
    pub p: Option<u64>,
    /// test this alpha (repeatable)
    #[arg(long)]
    pub alpha: Vec<f64>,
    /// test this exact rational alpha a/b (repeatable)
    #[arg(long)]
    pub rational: Vec<String>,
    /// additionally classify this many seeded uniform alphas
    #[arg(long, default_value_t = 0)]
    pub random: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// membership CSV (alpha, system, isMajor, q, a)
    #[arg(long)]
    pub out: PathBuf,
    /// optional Weyl-sum CSV (alpha, re, im) over the system's full family
    #[arg(long)]
    pub sums_out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ExponentsArgs {
    #[arg(long)]
    pub s: Option<u32>,
    #[arg(long)]
    pub k: Option<u32>,
    /// dump the whole covered table as CSV
    #[arg(long, default_value_t = false)]
    pub all: bool,
    /// include external comparison bounds
    #[arg(long, default_value_t = false)]
    pub context: bool,
    /// CSV output path; stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_triple(s: &str) -> Result<[i64; 3], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated integers, got `{s}`"));
    }
    let mut out = [0i64; 3];
    for (i, p) in parts.iter().enumerate() {
        out[i] = p
            .trim()
            .parse()
            .map_err(|e| format!("bad integer `{p}`: {e}"))?;
    }
    Ok(out)
}

fn parse_range(s: &str) -> Result<(u64, u64), String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("expected lo:hi, got `{s}`"))?;
    let lo: u64 = lo.parse().map_err(|e| format!("bad lower bound: {e}"))?;
    let hi: u64 = hi.parse().map_err(|e| format!("bad upper bound: {e}"))?;
    if lo == 0 || hi < lo {
        return Err("range must satisfy 1 <= lo <= hi".into());
    }
    Ok((lo, hi))
}
