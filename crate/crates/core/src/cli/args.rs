use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::format::parse_q;

pub const COMMANDS: [&str; 10] = [
    "dimension",
    "gamma",
    "words",
    "sigma",
    "delta",
    "entropy",
    "sample-field",
    "smalldev",
    "verify",
    "replay",
];

#[derive(Debug, Parser)]
#[command(name = "fractal-smalldev", version, about = "Mixed entropy and small-deviation rates of Gaussian fields on self-similar measures")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output prefix; writes <prefix>.manifest.json and the command's artifacts.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Caps the number of worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Similarity dimension D of a system.
    Dimension(SystemArg),
    /// Mixed exponent γ and the predicted rate a = γq/(q−γ).
    Gamma(GammaArgs),
    /// Enumerates the level-s word cover.
    Words(WordsArgs),
    /// Outer mixed entropy σ(n) (upper bounds from word covers, or exact on the line).
    Sigma(SigmaArgs),
    /// Inner mixed entropy δ(n) (lower bounds from dyadic cubes).
    Delta(DeltaArgs),
    /// Covering/packing numbers, inner entropy numbers and σ^{(H,∞)} of a point cloud.
    Entropy(EntropyArgs),
    /// Joint samples of a Gaussian field at stratified sites of a measure.
    SampleField(SampleFieldArgs),
    /// Monte Carlo small-deviation curve with an optional rate fit.
    Smalldev(SmalldevArgs),
    /// Estimates the small-deviation exponent and compares it with the prediction.
    Verify(VerifyArgs),
    /// Re-runs the configuration recorded in a manifest.
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Dimension(_) => "dimension",
            Command::Gamma(_) => "gamma",
            Command::Words(_) => "words",
            Command::Sigma(_) => "sigma",
            Command::Delta(_) => "delta",
            Command::Entropy(_) => "entropy",
            Command::SampleField(_) => "sample-field",
            Command::Smalldev(_) => "smalldev",
            Command::Verify(_) => "verify",
            Command::Replay(_) => "replay",
        }
    }

    pub fn system(&self) -> Option<&str> {
        match self {
            Command::Dimension(a) => Some(&a.system),
            Command::Gamma(a) => Some(&a.system.system),
            Command::Words(a) => Some(&a.system.system),
            Command::Sigma(a) => Some(&a.system.system),
            Command::Delta(a) => Some(&a.system.system),
            Command::Entropy(a) => a.system.as_deref(),
            Command::SampleField(a) => Some(&a.system.system),
            Command::Smalldev(a) => Some(&a.system.system),
            Command::Verify(a) => Some(&a.system.system),
            Command::Replay(_) => None,
        }
    }
}

fn q_arg(s: &str) -> Result<f64, String> {
    let q = parse_q(s)?;
    if !(q >= 1.0) {
        return Err(format!("q = {s} must be at least 1 (or inf)"));
    }
    Ok(q)
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct SystemArg {
    /// Config file (TOML or JSON) or built-in name: cantor, sierpinski, vicsek,
    /// lebesgue-interval, lebesgue-square.
    #[arg(long)]
    pub system: String,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct HqArgs {
    /// Smoothness exponent H in (0, 1].
    #[arg(long = "H", default_value_t = 0.5)]
    pub h: f64,
    /// Integrability exponent q >= 1, or inf.
    #[arg(long, value_parser = q_arg, default_value = "2")]
    #[serde(with = "crate::format::q_serde")]
    pub q: f64,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct GammaArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub system: SystemArg,
    #[command(flatten)]
    #[serde(flatten)]
    pub hq: HqArgs,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct WordsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub system: SystemArg,
    #[command(flatten)]
    #[serde(flatten)]
    pub hq: HqArgs,
    /// Cover level s > 0.
    #[arg(long)]
    pub s: f64,
    /// Maximum number of words.
    #[arg(long, default_value_t = crate::ifs::DEFAULT_WORD_CAP)]
    pub cap: usize,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct SigmaArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub system: SystemArg,
    #[command(flatten)]
    #[serde(flatten)]
    pub hq: HqArgs,
    /// Cover sizes n (comma separated); defaults to m, m², …, m⁸.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    /// Exact dynamic program over a discretization of a measure on the line.
    #[arg(long)]
    pub exact_line: bool,
    /// Atoms for the discretization used by --exact-line.
    #[arg(long, default_value_t = 4096)]
    pub atoms: usize,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct DeltaArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub system: SystemArg,
    #[command(flatten)]
    #[serde(flatten)]
    pub hq: HqArgs,
    /// Packing sizes n (comma separated); defaults to m, m², …, m⁸.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    /// Minimum number of atoms in the discretization of the measure.
    #[arg(long, default_value_t = 4096)]
    pub atoms: usize,
    /// Deepest dyadic level searched.
    #[arg(long, default_value_t = 20)]
    pub depth: u32,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct EntropyArgs {
    /// Point cloud from the cell anchors of a system.
    #[arg(long, conflicts_with = "grid")]
    pub system: Option<String>,
    /// Regular grid on [0,1]^N given as N:k (k points per axis).
    #[arg(long)]
    pub grid: Option<String>,
    /// Minimum number of anchors taken from --system.
    #[arg(long, default_value_t = 256)]
    pub atoms: usize,
    /// Smoothness exponent for σ^{(H,∞)}.
    #[arg(long = "H", default_value_t = 0.5)]
    pub h: f64,
    /// Radii for covering and packing numbers (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub eps: Vec<f64>,
    /// Sizes for inner entropy numbers and σ^{(H,∞)} (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct FieldArgs {
    /// fbm:<H>, bm or sheet.
    #[arg(long, default_value = "bm")]
    pub kernel: String,
    /// Random seed (required for reproducibility).
    #[arg(long)]
    pub seed: u64,
    /// Sites come from the first word cover with at least this many cells.
    #[arg(long, default_value_t = 256)]
    pub min_cells: usize,
    #[arg(long, default_value_t = 1)]
    pub points_per_cell: usize,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct SampleFieldArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub system: SystemArg,
    #[command(flatten)]
    #[serde(flatten)]
    pub field: FieldArgs,
    #[arg(long, default_value_t = 1000)]
    pub reps: usize,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct SmalldevArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub system: SystemArg,
    #[command(flatten)]
    #[serde(flatten)]
    pub field: FieldArgs,
    /// Integrability exponent q >= 1, or inf.
    #[arg(long, value_parser = q_arg, default_value = "2")]
    #[serde(with = "crate::format::q_serde")]
    pub q: f64,
    #[arg(long, default_value_t = 200_000)]
    pub reps: usize,
    /// Explicit ε values (comma separated).
    #[arg(long, value_delimiter = ',', conflicts_with = "eps_range")]
    pub eps: Vec<f64>,
    /// Geometric grid lo:hi:k.
    #[arg(long)]
    pub eps_range: Option<String>,
    /// Also fit the log-correction exponent β.
    #[arg(long)]
    pub fit_beta: bool,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct VerifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub system: SystemArg,
    #[command(flatten)]
    #[serde(flatten)]
    pub field: FieldArgs,
    /// Integrability exponent q >= 1, or inf.
    #[arg(long, value_parser = q_arg, default_value = "2")]
    #[serde(with = "crate::format::q_serde")]
    pub q: f64,
    #[arg(long, default_value_t = 200_000)]
    pub reps: usize,
    /// `adaptive` or a fixed range lo:hi.
    #[arg(long, default_value = "adaptive")]
    pub window: String,
    #[arg(long, default_value_t = 12)]
    pub grid_points: usize,
    #[arg(long, default_value_t = 0.25)]
    pub tolerance: f64,
    #[arg(long)]
    pub fit_beta: bool,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    /// Manifest written by an earlier run.
    #[arg(long)]
    pub manifest: PathBuf,
}
