//! Command-line schema and the merge of `--config` JSON files under flags.

use std::path::PathBuf;

use clap::parser::ValueSource;
use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

#[derive(Parser, Debug)]
#[command(
    name = "quasi",
    version,
    about = "Numerical laboratory for quasi-periodic Schrödinger operators"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Estimate the exponential approximation rate beta of a frequency.
    Beta(BetaArgs),
    /// Check a Diophantine condition ||k alpha|| > kappa |k|^-tau.
    Dioph(DiophArgs),
    /// List the eps0-resonances of a phase.
    Resonances(ResonancesArgs),
    /// Lyapunov exponents over energies.
    Lyapunov(LyapunovArgs),
    /// Sup-norm growth profile of the transfer matrices at one energy.
    Growth(GrowthArgs),
    /// Rotation numbers over energies.
    Rotation(RotationArgs),
    /// Integrated density of states by eigenvalue counting.
    Ids(IdsArgs),
    /// Spectrum membership of one energy, or random spectral samples.
    Spectrum(SpectrumArgs),
    /// Spectral measure of e_{-1} + e_0 binned on a partition.
    Measure(MeasureArgs),
    /// Hölder ratios of the IDS.
    Holder(HolderArgs),
    /// Aubry dual spectra and bounded dual solutions.
    Dual(DualArgs),
    /// Run verification experiments.
    Verify(VerifyArgs),
    /// Sweep one parameter and tabulate a quantity.
    Sweep(SweepArgs),
}

#[derive(Args, Debug, Serialize, Clone)]
#[serde(rename_all = "kebab-case")]
pub struct RunArgs {
    /// JSON object of flag values; flags given on the command line win.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Output file (.json or .csv); stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also render an SVG plot to this path.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Include wall-clock timings in the outputs.
    #[arg(long)]
    pub timings: bool,
    /// Worker threads (default: available cores).
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Args, Debug, Serialize, Clone)]
#[serde(rename_all = "kebab-case")]
pub struct FreqArgs {
    /// golden, silver, e-2, or a decimal in (0, 1) [default: golden].
    #[arg(long, conflicts_with = "alpha_beta")]
    pub alpha: Option<String>,
    /// Build a frequency whose beta is approximately this value.
    #[arg(long)]
    pub alpha_beta: Option<f64>,
    /// Continued-fraction depth [default: 30, or 6 with --alpha-beta].
    #[arg(long)]
    pub depth: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialKind {
    /// 2 cos 2 pi x.
    Amo,
    Zero,
}

#[derive(Args, Debug, Serialize, Clone)]
#[serde(rename_all = "kebab-case")]
pub struct PotentialArgs {
    #[arg(long, value_enum, conflicts_with = "potential_file")]
    pub potential: Option<PotentialKind>,
    /// JSON file {lambda, coeffs: [{k, re, im}]}.
    #[arg(long)]
    pub potential_file: Option<PathBuf>,
    /// Coupling constant; overrides the file's value.
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
}

#[derive(Args, Debug, Serialize, Clone)]
#[serde(rename_all = "kebab-case")]
pub struct GridArgs {
    /// A single energy instead of a grid.
    #[arg(long, allow_negative_numbers = true, conflicts_with_all = ["emin", "emax", "points"])]
    pub energy: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub emin: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub emax: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct BetaArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub freq: FreqArgs,
    /// Number of trailing levels in the estimate.
    #[arg(long, default_value_t = 5)]
    pub window: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct DiophArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub freq: FreqArgs,
    #[arg(long)]
    pub kappa: f64,
    #[arg(long)]
    pub tau: f64,
    /// Largest |k| checked (arbitrary size integer).
    #[arg(long, default_value = "1000")]
    pub k_max: String,
    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct ResonancesArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub freq: FreqArgs,
    /// Decimal phase, or `alpha/2`.
    #[arg(long)]
    pub theta: String,
    /// Resonance rate [default: 10 times the estimated beta].
    #[arg(long)]
    pub epsilon0: Option<f64>,
    #[arg(long, default_value_t = 50)]
    pub k_max: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct LyapunovArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub potential: PotentialArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub freq: FreqArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value_t = 100_000)]
    pub steps: usize,
    #[arg(long, default_value_t = 8)]
    pub phases: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct GrowthArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub potential: PotentialArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub freq: FreqArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub energy: f64,
    #[arg(long, default_value_t = 100_000)]
    pub s_max: usize,
    #[arg(long, default_value_t = 16)]
    pub phases: usize,
    #[arg(long, default_value_t = 24)]
    pub checkpoints: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct RotationArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub potential: PotentialArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub freq: FreqArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value_t = 100_000)]
    pub steps: usize,
    #[arg(long, default_value_t = 8)]
    pub phases: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct IdsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub potential: PotentialArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub freq: FreqArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
    #[arg(long = "L", default_value_t = 2000)]
    #[serde(rename = "L")]
    pub l: usize,
    #[arg(long, default_value_t = 32)]
    pub phases: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SpectrumArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub potential: PotentialArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub freq: FreqArgs,
    /// Test membership of this energy instead of sampling.
    #[arg(long, allow_negative_numbers = true)]
    pub energy: Option<f64>,
    /// Number of spectral samples to draw.
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    #[arg(long = "L", default_value_t = 1000)]
    #[serde(rename = "L")]
    pub l: usize,
    #[arg(long, default_value_t = 8)]
    pub phases: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    EigenWeights,
    Herglotz,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct MeasureArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub potential: PotentialArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub freq: FreqArgs,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta: f64,
    #[arg(long = "L", default_value_t = 2000)]
    #[serde(rename = "L")]
    pub l: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::EigenWeights)]
    pub method: MethodArg,
    /// Partition bounds [default: the Gershgorin interval plus 0.5].
    #[arg(long, allow_negative_numbers = true)]
    pub emin: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub emax: Option<f64>,
    #[arg(long, default_value_t = 200)]
    pub cells: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct HolderArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub potential: PotentialArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub freq: FreqArgs,
    #[arg(long = "L", default_value_t = 2000)]
    #[serde(rename = "L")]
    pub l: usize,
    #[arg(long, default_value_t = 32)]
    pub phases: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.03, 0.01])]
    pub eps: Vec<f64>,
    /// Spectral samples for the lower ratio.
    #[arg(long, default_value_t = 10)]
    pub samples: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct DualArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub potential: PotentialArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub freq: FreqArgs,
    /// Find a bounded dual solution at this energy.
    #[arg(long, allow_negative_numbers = true, required_unless_present = "compare")]
    pub energy: Option<f64>,
    /// Compare direct and dual spectra instead.
    #[arg(long, conflicts_with = "energy")]
    pub compare: bool,
    #[arg(long = "L", default_value_t = 801)]
    #[serde(rename = "L")]
    pub l: usize,
    /// Coarse phase grid of the solution search.
    #[arg(long, default_value_t = 512)]
    pub grid: usize,
    /// Phases of the spectra comparison.
    #[arg(long, default_value_t = 16)]
    pub phases: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct VerifyArgs {
    /// Experiment name, or `all`.
    pub experiment: String,
    #[command(flatten)]
    #[serde(flatten)]
    pub potential: PotentialArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub freq: FreqArgs,
    /// JSON file overriding parts of the suite configuration.
    #[arg(long)]
    pub suite: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    Lyapunov,
    Rotation,
    Ids,
    /// Occupied energy bins of the truncated spectra (Hofstadter raster).
    Raster,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SweepArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub potential: PotentialArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub freq: FreqArgs,
    /// `name=start:stop:count` or `name=v1,v2,...` for name in lambda, energy, alpha.
    #[arg(long = "sweep", required = true)]
    pub sweep: Vec<String>,
    #[arg(long, value_enum)]
    pub quantity: Quantity,
    /// Energy for quantities evaluated at one energy.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub energy: f64,
    #[arg(long, default_value_t = 20_000)]
    pub steps: usize,
    #[arg(long, default_value_t = 8)]
    pub phases: usize,
    #[arg(long = "L", default_value_t = 400)]
    #[serde(rename = "L")]
    pub l: usize,
    /// Energy window and bins of the raster.
    #[arg(long, default_value_t = -4.0, allow_negative_numbers = true)]
    pub emin: f64,
    #[arg(long, default_value_t = 4.0, allow_negative_numbers = true)]
    pub emax: f64,
    #[arg(long, default_value_t = 200)]
    pub points: usize,
    /// Continue a previous run recorded in the progress manifest.
    #[arg(long)]
    pub resume: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
}

impl Command {
    pub fn run_args(&self) -> &RunArgs {
        match self {
            Command::Beta(a) => &a.run,
            Command::Dioph(a) => &a.run,
            Command::Resonances(a) => &a.run,
            Command::Lyapunov(a) => &a.run,
            Command::Growth(a) => &a.run,
            Command::Rotation(a) => &a.run,
            Command::Ids(a) => &a.run,
            Command::Spectrum(a) => &a.run,
            Command::Measure(a) => &a.run,
            Command::Holder(a) => &a.run,
            Command::Dual(a) => &a.run,
            Command::Verify(a) => &a.run,
            Command::Sweep(a) => &a.run,
        }
    }
}

pub enum ParseFailure {
    Clap(clap::Error),
    Config(String),
}

/// Parses `argv`, filling every flag not given on the command line from the
/// `--config` file of the subcommand, if any.
pub fn parse(argv: Vec<String>) -> Result<Cli, ParseFailure> {
    let cmd = Cli::command();
    let first = cmd.clone().try_get_matches_from(&argv).map_err(ParseFailure::Clap)?;
    let Some((name, sub)) = first.subcommand() else {
        return Cli::from_arg_matches(&first).map_err(ParseFailure::Clap);
    };
    let Some(path) = sub.get_one::<PathBuf>("config") else {
        return Cli::from_arg_matches(&first).map_err(ParseFailure::Clap);
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| ParseFailure::Config(format!("cannot read config {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| ParseFailure::Config(format!("config {} is not JSON: {e}", path.display())))?;
    let Value::Object(map) = value else {
        return Err(ParseFailure::Config("config must be a JSON object".into()));
    };
    let subcmd = cmd.find_subcommand(name).expect("matched subcommand exists");
    let mut extra = Vec::new();
    for (key, val) in &map {
        if key == "command" {
            if val.as_str() != Some(name) {
                return Err(ParseFailure::Config(format!("config is for `{val}`, not `{name}`")));
            }
            continue;
        }
        if let Some(arg) = subcmd.get_positionals().find(|a| a.get_id().as_str() == key) {
            // Positionals always come from the command line.
            let _ = arg;
            continue;
        }
        let arg = subcmd
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()))
            .ok_or_else(|| ParseFailure::Config(format!("unknown config key `{key}` for `{name}`")))?;
        if key == "config" {
            return Err(ParseFailure::Config("config files cannot nest".into()));
        }
        if sub.value_source(arg.get_id().as_str()) == Some(ValueSource::CommandLine) {
            continue;
        }
        let takes_values = arg.get_action().takes_values();
        let items = match val {
            Value::Array(items) => items.clone(),
            other => vec![other.clone()],
        };
        for item in items {
            match (item, takes_values) {
                (Value::Null, _) => {}
                (Value::Bool(b), false) => {
                    if b {
                        extra.push(format!("--{key}"));
                    }
                }
                (Value::String(s), true) => extra.push(format!("--{key}={s}")),
                (v @ (Value::Number(_) | Value::Bool(_)), true) => extra.push(format!("--{key}={v}")),
                (v, _) => {
                    return Err(ParseFailure::Config(format!("config key `{key}` has unsupported value {v}")));
                }
            }
        }
    }
    let pos = argv.iter().skip(1).position(|a| a == name).map_or(1, |p| p + 1);
    let mut full = argv;
    full.splice(pos + 1..pos + 1, extra);
    let matches = cmd.try_get_matches_from(full).map_err(ParseFailure::Clap)?;
    Cli::from_arg_matches(&matches).map_err(ParseFailure::Clap)
}
