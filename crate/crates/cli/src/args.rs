use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use dirinfo_mac::channels::FeedbackFn;
use dirinfo_mac::prob::Alphabet;
use dirinfo_mac::regions::{S0Mode, Variant};

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "dirinfo-mac",
    version,
    about = "Directed information and capacity regions of finite-state MACs"
)]
pub struct Cli {
    /// Cap on worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Grid inner or outer rate region as a vertex CSV with a JSON sidecar.
    Region(RegionArgs),
    /// Seeded property suites; exits 1 on any failure.
    Verify(VerifyArgs),
    /// Random code-tree ensemble with ML decoding.
    Simulate(SimulateArgs),
    /// Directed information at uniform inputs.
    Dirinfo(DirinfoArgs),
    /// Exponent curves at uniform inputs.
    Exponent(ExponentArgs),
    /// Entropy-rate bracket of the noise of an additive channel.
    Entropy(EntropyArgs),
    /// Rerun the command recorded in a manifest and compare output hashes.
    Replay(ReplayArgs),
}

impl Command {
    /// The `--out` path, for commands that have one.
    pub fn out(&self) -> Option<&PathBuf> {
        self.out_slot().and_then(|o| o.as_ref())
    }

    pub fn out_slot(&self) -> Option<&Option<PathBuf>> {
        match self {
            Command::Region(a) => Some(&a.out),
            Command::Verify(a) => Some(&a.out),
            Command::Simulate(a) => Some(&a.out),
            Command::Dirinfo(a) => Some(&a.out),
            Command::Exponent(a) => Some(&a.out),
            Command::Entropy(a) => Some(&a.out),
            Command::Replay(_) => None,
        }
    }

    pub fn out_mut(&mut self) -> Option<&mut Option<PathBuf>> {
        match self {
            Command::Region(a) => Some(&mut a.out),
            Command::Verify(a) => Some(&mut a.out),
            Command::Simulate(a) => Some(&mut a.out),
            Command::Dirinfo(a) => Some(&mut a.out),
            Command::Exponent(a) => Some(&mut a.out),
            Command::Entropy(a) => Some(&mut a.out),
            Command::Replay(_) => None,
        }
    }
}

/// How each user sees the channel output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum FeedbackMode {
    Perfect,
    None,
    Quantized(usize),
}

impl FeedbackMode {
    pub fn build(self, y: Alphabet) -> dirinfo_mac::Result<FeedbackFn> {
        match self {
            FeedbackMode::Perfect => Ok(FeedbackFn::perfect(y)),
            FeedbackMode::None => Ok(FeedbackFn::none(y)),
            FeedbackMode::Quantized(k) => FeedbackFn::quantized(y, k),
        }
    }
}

impl FromStr for FeedbackMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "perfect" => Ok(FeedbackMode::Perfect),
            "none" => Ok(FeedbackMode::None),
            _ => s
                .strip_prefix("quantized:")
                .and_then(|k| k.parse().ok())
                .map(FeedbackMode::Quantized)
                .ok_or_else(|| format!("expected perfect, none or quantized:K, got '{s}'")),
        }
    }
}

impl From<FeedbackMode> for String {
    fn from(m: FeedbackMode) -> String {
        match m {
            FeedbackMode::Perfect => "perfect".into(),
            FeedbackMode::None => "none".into(),
            FeedbackMode::Quantized(k) => format!("quantized:{k}"),
        }
    }
}

/// One block length or several: `3`, `1..3` or `1,2,4`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "Vec<usize>", try_from = "Vec<usize>")]
pub struct BlockLengths(pub Vec<usize>);

impl FromStr for BlockLengths {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("expected N, A..B or a comma list, got '{s}'");
        let v: Vec<usize> = if let Some((a, b)) = s.split_once("..") {
            let (a, b): (usize, usize) =
                (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
            (a..=b).collect()
        } else {
            s.split(',')
                .map(|p| p.trim().parse().map_err(|_| bad()))
                .collect::<Result<_, _>>()?
        };
        BlockLengths::try_from(v)
    }
}

impl TryFrom<String> for FeedbackMode {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<BlockLengths> for Vec<usize> {
    fn from(b: BlockLengths) -> Self {
        b.0
    }
}

impl TryFrom<Vec<usize>> for BlockLengths {
    type Error = String;
    fn try_from(v: Vec<usize>) -> Result<Self, String> {
        if v.is_empty() || v.contains(&0) {
            return Err(format!("block lengths must be positive, got {v:?}"));
        }
        Ok(BlockLengths(v))
    }
}

fn parse_s0(s: &str) -> Result<S0Mode, String> {
    s.parse().map_err(|e: dirinfo_mac::Error| e.to_string())
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse().map_err(|e: dirinfo_mac::Error| e.to_string())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Form {
    Iid,
    Feedback,
    OpenLoop,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SuiteArg {
    Lemmas,
    Exponents,
    Geometry,
    Zero,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum ErrorTypeArg {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    #[value(name = "3")]
    Three,
    #[value(name = "all")]
    All,
}

#[derive(Debug, Args, Serialize, Deserialize)]
pub struct RegionArgs {
    /// Channel spec (JSON).
    #[arg(long)]
    pub spec: PathBuf,
    /// Block lengths: `3`, `1..3` or `1,2,3`.
    #[arg(long, default_value = "1")]
    pub n: BlockLengths,
    /// Grid resolution: pmf entries are multiples of 1/grid.
    #[arg(long, default_value_t = 8)]
    pub grid: usize,
    /// Policy family; `feedback` when feedback is on, `iid` otherwise.
    #[arg(long, value_enum)]
    pub form: Option<Form>,
    #[arg(long, default_value = "none")]
    pub feedback: FeedbackMode,
    #[arg(long, default_value = "inner", value_parser = parse_variant)]
    pub variant: Variant,
    /// Initial-state convention of the outer region.
    #[arg(long, default_value = "stationary", value_parser = parse_s0)]
    pub s0: S0Mode,
    /// Vertex CSV; with several block lengths, one file per length is
    /// written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize, Deserialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: SuiteArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Instances per check; each suite has its own default.
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub spec: PathBuf,
    /// Depth of each concatenated tree.
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Trees concatenated per codeword.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, default_value_t = 2)]
    pub m1: usize,
    #[arg(long, default_value_t = 2)]
    pub m2: usize,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "given:0", value_parser = parse_s0)]
    pub s0: S0Mode,
    #[arg(long, default_value = "none")]
    pub feedback: FeedbackMode,
    /// Attach the best exact union bound over the default rho grid.
    #[arg(long)]
    pub bounds: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize, Deserialize)]
pub struct DirinfoArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long, default_value = "given:0", value_parser = parse_s0)]
    pub s0: S0Mode,
    #[arg(long, default_value = "none")]
    pub feedback: FeedbackMode,
    /// Also report the grid maximum of the sum rate at this resolution.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize, Deserialize)]
pub struct ExponentArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long = "type", value_enum, default_value = "all")]
    pub error_type: ErrorTypeArg,
    /// Uniform rho grid on [0, 1] with this many steps.
    #[arg(long, default_value_t = 20)]
    pub rho_steps: usize,
    #[arg(long, default_value = "none")]
    pub feedback: FeedbackMode,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize, Deserialize)]
pub struct EntropyArgs {
    #[arg(long)]
    pub spec: PathBuf,
    /// Largest block length of the bracket.
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    /// A `*.manifest.json` written by an earlier run. Relative paths in it
    /// resolve against the current directory.
    #[arg(long)]
    pub manifest: PathBuf,
}
