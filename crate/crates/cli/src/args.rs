//! Command-line surface and the resolved run configuration.

use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use shardstat::engine::{CostProfile, EngineConfig};
use shardstat::PrimeField;

#[derive(Parser, Debug)]
#[command(
    name = "shardstat",
    about = "Threshold secret-sharing MPC simulator with secure standard-deviation and chi-squared programs",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run one secure program over per-party input files and report the
    /// opened result plus the interactive-operation/round ledger.
    Run(RunArgs),
    /// Sweep input sizes, running the optimized and unoptimized variant
    /// of a program at each size, and tabulate costs.
    Bench(BenchArgs),
    /// Generate seeded random per-party input files.
    GenInputs(GenInputsArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ProgramKind {
    Stddev,
    StddevUnopt,
    Chisq,
    ChisqUnopt,
}

impl ProgramKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProgramKind::Stddev => "stddev",
            ProgramKind::StddevUnopt => "stddev-unopt",
            ProgramKind::Chisq => "chisq",
            ProgramKind::ChisqUnopt => "chisq-unopt",
        }
    }

    pub fn is_chisq(&self) -> bool {
        matches!(self, ProgramKind::Chisq | ProgramKind::ChisqUnopt)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    /// Flat key=value block (includes wall-clock time).
    Human,
    /// Reproducible JSON document (no timing, byte-identical across
    /// identically-seeded runs).
    Machine,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    /// TOML file with the same keys as the flags below; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub program: Option<ProgramKind>,

    /// Computational party count n (>= 3).
    #[arg(long)]
    pub parties: Option<usize>,

    /// Threshold t; honest majority requires n >= 2t+1.
    #[arg(long)]
    pub threshold: Option<usize>,

    /// Field modulus, decimal or 0x-hex (default 2^255 - 19).
    #[arg(long)]
    pub prime: Option<String>,

    /// Seed for all randomness; omit for fresh entropy.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Fixed-point fractional bits f.
    #[arg(long)]
    pub frac_bits: Option<u32>,

    /// Decimal digits of square-root precision (stddev programs).
    #[arg(long)]
    pub prec: Option<u32>,

    /// Maximum declared input bitlength.
    #[arg(long)]
    pub max_bits: Option<u32>,

    /// `default` or `picco-emulation` (fixed additions charged a round).
    #[arg(long)]
    pub cost_profile: Option<String>,

    /// Override the square root's prec+10 iteration budget.
    #[arg(long)]
    pub sqrt_iterations: Option<u32>,

    /// One input file per input party (repeatable).
    #[arg(long = "input")]
    pub inputs: Vec<PathBuf>,

    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// `stddev` or `chisq` (the sweep runs both variants of it).
    #[arg(long, value_enum)]
    pub program: ProgramKind,

    /// Sizes to sweep: `16,64,256` for stddev, `4x4,8x64` for chisq.
    /// Defaults to 2^4..2^12 (stddev) or the 4x4..8x64 grid (chisq).
    #[arg(long)]
    pub sweep: Option<String>,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long)]
    pub parties: Option<usize>,

    #[arg(long)]
    pub threshold: Option<usize>,

    #[arg(long)]
    pub prime: Option<String>,

    #[arg(long)]
    pub frac_bits: Option<u32>,

    #[arg(long)]
    pub prec: Option<u32>,

    #[arg(long)]
    pub max_bits: Option<u32>,

    #[arg(long)]
    pub cost_profile: Option<String>,

    #[arg(long, value_enum, default_value = "human")]
    pub format: OutputFormat,
}

#[derive(Args, Debug)]
pub struct GenInputsArgs {
    /// `stddev` (one value per line) or `chisq` (one row per file).
    #[arg(long, value_enum)]
    pub program: ProgramKind,

    /// Per-party data sizes for stddev, e.g. `8,8,16`.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Vec<usize>,

    /// Row count (= input party count) for chisq.
    #[arg(long)]
    pub rows: Option<usize>,

    /// Column count for chisq.
    #[arg(long)]
    pub cols: Option<usize>,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Smallest generated value (default 0 for stddev, 1 for chisq).
    #[arg(long)]
    pub min: Option<i64>,

    /// Largest generated value (default 1000 for stddev, 100 for chisq).
    #[arg(long)]
    pub max: Option<i64>,

    #[arg(long)]
    pub out_dir: PathBuf,
}

/// Keys accepted in the `--config` TOML file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    program: Option<String>,
    parties: Option<usize>,
    threshold: Option<usize>,
    prime: Option<String>,
    seed: Option<u64>,
    frac_bits: Option<u32>,
    prec: Option<u32>,
    max_bits: Option<u32>,
    cost_profile: Option<String>,
    sqrt_iterations: Option<u32>,
    inputs: Option<Vec<PathBuf>>,
    format: Option<String>,
}

/// Fully resolved configuration of one `run` invocation.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub program: ProgramKind,
    pub engine: EngineConfig,
    pub prec: u32,
    pub sqrt_iterations: Option<u32>,
    pub inputs: Vec<PathBuf>,
    pub format: OutputFormat,
}

impl RunConfig {
    pub fn resolve(args: &RunArgs) -> anyhow::Result<RunConfig> {
        let file: FileConfig = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("cannot read config file {}", path.display()))?;
                toml::from_str(&text)
                    .with_context(|| format!("cannot parse config file {}", path.display()))?
            }
            None => FileConfig::default(),
        };

        let program = match args.program {
            Some(p) => p,
            None => match file.program.as_deref() {
                Some("stddev") => ProgramKind::Stddev,
                Some("stddev-unopt") => ProgramKind::StddevUnopt,
                Some("chisq") => ProgramKind::Chisq,
                Some("chisq-unopt") => ProgramKind::ChisqUnopt,
                Some(other) => bail!("unknown program `{other}` in config file"),
                None => bail!("no program selected (use --program)"),
            },
        };

        let defaults = EngineConfig::default();
        let prime = match args.prime.as_deref().or(file.prime.as_deref()) {
            Some(s) => PrimeField::parse(s)?,
            None => defaults.field,
        };
        let profile: CostProfile = match args
            .cost_profile
            .as_deref()
            .or(file.cost_profile.as_deref())
        {
            Some(s) => s.parse()?,
            None => CostProfile::Default,
        };

        let engine = EngineConfig {
            parties: args.parties.or(file.parties).unwrap_or(defaults.parties),
            threshold: args
                .threshold
                .or(file.threshold)
                .unwrap_or(defaults.threshold),
            field: prime,
            seed: args.seed.or(file.seed),
            frac_bits: args
                .frac_bits
                .or(file.frac_bits)
                .unwrap_or(defaults.frac_bits),
            max_bits: args.max_bits.or(file.max_bits).unwrap_or(defaults.max_bits),
            profile,
        };

        let format = match args.format {
            Some(f) => f,
            None => match file.format.as_deref() {
                Some("human") | None => OutputFormat::Human,
                Some("machine") => OutputFormat::Machine,
                Some(other) => bail!("unknown format `{other}` in config file"),
            },
        };

        let inputs = if args.inputs.is_empty() {
            file.inputs.unwrap_or_default()
        } else {
            args.inputs.clone()
        };
        if inputs.is_empty() {
            bail!("no input files (use --input, once per input party)");
        }

        Ok(RunConfig {
            program,
            engine,
            prec: args.prec.or(file.prec).unwrap_or(1),
            sqrt_iterations: args.sqrt_iterations.or(file.sqrt_iterations),
            inputs,
            format,
        })
    }
}
