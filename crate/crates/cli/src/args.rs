use std::convert::Infallible;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chanres::wiretap::DecoderKind;
use chanres::{Channel, Distribution};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::error::{CliError, Result};

/// Channel resolvability, identification and wire-tap coding on finite alphabets.
///
/// Every subcommand reads its parameters from long flags, from a JSON object given with
/// `--config`, or both (flags win). Keys in the config file are the flag names with `_` in place
/// of `-`. Thresholds are given either directly (`--threshold C`) or in nats
/// (`--log-threshold ln C`).
///
/// Exit codes: 0 success (including constructions that missed their targets), 2 invalid input,
/// 3 enumeration budget exceeded, 4 numerical failure.
#[derive(Debug, Parser)]
#[command(name = "chanres", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// JSON file holding the subcommand's parameters.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads. Results do not depend on this.
    #[arg(long, global = true, value_name = "N")]
    pub workers: Option<usize>,

    /// Write results here instead of standard output.
    #[arg(long, global = true, value_name = "FILE")]
    pub output: Option<PathBuf>,

    /// Cap on the number of joint states an exact enumeration may visit.
    #[arg(long, global = true, value_name = "N")]
    pub max_states: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tail pair and expectation bounds for a random code of M codewords.
    Bounds(BoundsArgs),
    /// Exponent bounds over a sweep of rates, as CSV (or JSON lines).
    Exponents(ExponentsArgs),
    /// Monte Carlo runs.
    Simulate {
        #[command(subcommand)]
        target: SimulateTarget,
    },
    /// Build or evaluate identification codes.
    Idcode {
        #[command(subcommand)]
        action: IdcodeAction,
    },
    /// Channel capacity, and a secrecy rate lower bound when an eavesdropper is given.
    Capacity(CapacityArgs),
    /// The five wire-tap code guarantees for given code dimensions and thresholds.
    WiretapBounds(WiretapBoundsArgs),
}

#[derive(Debug, Subcommand)]
pub enum SimulateTarget {
    /// Random resolvability codes: per-trial records, then one summary per metric.
    Resolvability(ResolvabilityArgs),
    /// Wire-tap code construction: per-attempt records, then a summary.
    Wiretap(WiretapArgs),
}

#[derive(Debug, Subcommand)]
pub enum IdcodeAction {
    /// Select codewords, build the set family and assemble the code.
    Build(Box<IdBuildArgs>),
    /// Exact error probabilities of a stored code.
    Eval(IdEvalArgs),
}

/// A value read from a JSON file (flags and string config values) or given inline in the
/// config file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Source<T> {
    File(PathBuf),
    Inline(T),
}

impl<T> FromStr for Source<T> {
    type Err = Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Infallible> {
        Ok(Source::File(s.into()))
    }
}

impl<T: DeserializeOwned + Clone> Source<T> {
    pub fn load(&self, what: &str) -> Result<T> {
        match self {
            Source::Inline(v) => Ok(v.clone()),
            Source::File(path) => read_json(path, what),
        }
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path, what: &str) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {what} file {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("invalid {what} in {}: {e}", path.display())))
}

/// The input law: `uniform`, `worst` (exponent sweeps only), a distribution file, or an inline
/// distribution in the config file.
#[derive(Debug, Clone)]
pub enum InputSpec {
    Uniform,
    Worst,
    File(PathBuf),
    Inline(Distribution),
}

impl FromStr for InputSpec {
    type Err = Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Infallible> {
        Ok(match s {
            "uniform" => InputSpec::Uniform,
            "worst" => InputSpec::Worst,
            path => InputSpec::File(path.into()),
        })
    }
}

impl Serialize for InputSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            InputSpec::Uniform => serializer.serialize_str("uniform"),
            InputSpec::Worst => serializer.serialize_str("worst"),
            InputSpec::File(path) => path.serialize(serializer),
            InputSpec::Inline(d) => d.serialize(serializer),
        }
    }
}

impl<'de> Deserialize<'de> for InputSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Inline(Distribution),
        }
        Ok(match Raw::deserialize(deserializer)? {
            Raw::Text(s) => s.parse().expect("infallible"),
            Raw::Inline(d) => InputSpec::Inline(d),
        })
    }
}

impl InputSpec {
    /// The input distribution for a channel with `size` inputs; `None` for the worst case.
    pub fn resolve(&self, size: usize) -> Result<Option<Distribution>> {
        match self {
            InputSpec::Uniform => Ok(Some(Distribution::uniform(size))),
            InputSpec::Worst => Ok(None),
            InputSpec::File(path) => read_json(path, "input distribution").map(Some),
            InputSpec::Inline(d) => Ok(Some(d.clone())),
        }
    }

    pub fn fixed(&self, size: usize) -> Result<Distribution> {
        self.resolve(size)?.ok_or_else(|| {
            CliError::Input("`worst` is only accepted by the exponents subcommand".into())
        })
    }
}

impl fmt::Display for InputSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputSpec::Uniform => f.write_str("uniform"),
            InputSpec::Worst => f.write_str("worst"),
            InputSpec::File(p) => write!(f, "{}", p.display()),
            InputSpec::Inline(_) => f.write_str("inline"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Decoder {
    MaximumLikelihood,
    Threshold,
}

impl From<Decoder> for DecoderKind {
    fn from(d: Decoder) -> Self {
        match d {
            Decoder::MaximumLikelihood => DecoderKind::MaximumLikelihood,
            Decoder::Threshold => DecoderKind::Threshold,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsArgs {
    /// Channel JSON file.
    #[arg(long, value_name = "FILE")]
    pub channel: Option<Source<Channel>>,
    /// `uniform` or a distribution JSON file.
    #[arg(long, value_name = "LAW")]
    pub input: Option<InputSpec>,
    /// Block length n.
    #[arg(long, value_name = "N")]
    pub block_length: Option<usize>,
    /// Number of codewords M.
    #[arg(long, value_name = "M")]
    pub codewords: Option<usize>,
    #[arg(long, value_name = "C")]
    pub threshold: Option<f64>,
    #[arg(long, value_name = "NATS")]
    pub log_threshold: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ExponentsArgs {
    #[arg(long, value_name = "FILE")]
    pub channel: Option<Source<Channel>>,
    /// `uniform`, `worst` or a distribution JSON file. A fixed law also reports the worst case.
    #[arg(long, value_name = "LAW")]
    pub input: Option<InputSpec>,
    #[arg(long, value_name = "NATS")]
    pub rate_start: Option<f64>,
    #[arg(long, value_name = "NATS")]
    pub rate_end: Option<f64>,
    /// Number of rates, endpoints included.
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ResolvabilityArgs {
    #[arg(long, value_name = "FILE")]
    pub channel: Option<Source<Channel>>,
    #[arg(long, value_name = "LAW")]
    pub input: Option<InputSpec>,
    #[arg(long, value_name = "N")]
    pub block_length: Option<usize>,
    #[arg(long, value_name = "M")]
    pub codewords: Option<usize>,
    #[arg(long, value_name = "C")]
    pub threshold: Option<f64>,
    #[arg(long, value_name = "NATS")]
    pub log_threshold: Option<f64>,
    /// Number of random codes, at least 100.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Master seed; a random one is drawn and recorded when absent.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Only print the summaries.
    #[arg(long)]
    pub summary_only: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct WiretapArgs {
    /// Bob's channel JSON file.
    #[arg(long, value_name = "FILE")]
    pub bob: Option<Source<Channel>>,
    /// Eve's channel JSON file.
    #[arg(long, value_name = "FILE")]
    pub eve: Option<Source<Channel>>,
    #[arg(long, value_name = "LAW")]
    pub input: Option<InputSpec>,
    #[arg(long, value_name = "N")]
    pub block_length: Option<usize>,
    /// Number of messages M.
    #[arg(long, value_name = "M")]
    pub messages: Option<usize>,
    /// Codewords per message L.
    #[arg(long, value_name = "L")]
    pub per_class: Option<usize>,
    /// Eve's threshold C.
    #[arg(long, value_name = "C")]
    pub threshold: Option<f64>,
    #[arg(long, value_name = "NATS")]
    pub log_threshold: Option<f64>,
    /// Bob's threshold C'.
    #[arg(long, value_name = "C")]
    pub threshold_prime: Option<f64>,
    #[arg(long, value_name = "NATS")]
    pub log_threshold_prime: Option<f64>,
    #[arg(long, value_enum)]
    pub decoder: Option<Decoder>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_retries: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct WiretapBoundsArgs {
    #[arg(long, value_name = "FILE")]
    pub bob: Option<Source<Channel>>,
    #[arg(long, value_name = "FILE")]
    pub eve: Option<Source<Channel>>,
    #[arg(long, value_name = "LAW")]
    pub input: Option<InputSpec>,
    #[arg(long, value_name = "N")]
    pub block_length: Option<usize>,
    #[arg(long, value_name = "M")]
    pub messages: Option<usize>,
    #[arg(long, value_name = "L")]
    pub per_class: Option<usize>,
    #[arg(long, value_name = "C")]
    pub threshold: Option<f64>,
    #[arg(long, value_name = "NATS")]
    pub log_threshold: Option<f64>,
    #[arg(long, value_name = "C")]
    pub threshold_prime: Option<f64>,
    #[arg(long, value_name = "NATS")]
    pub log_threshold_prime: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct CapacityArgs {
    #[arg(long, value_name = "FILE")]
    pub channel: Option<Source<Channel>>,
    /// Eavesdropper channel; adds a lower bound on the secrecy capacity.
    #[arg(long, value_name = "FILE")]
    pub eve: Option<Source<Channel>>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct IdBuildArgs {
    #[arg(long, value_name = "FILE")]
    pub channel: Option<Source<Channel>>,
    #[arg(long, value_name = "LAW")]
    pub input: Option<InputSpec>,
    #[arg(long, value_name = "N")]
    pub block_length: Option<usize>,
    /// Number of codewords M.
    #[arg(long, value_name = "M")]
    pub codewords: Option<usize>,
    #[arg(long, value_name = "C")]
    pub threshold: Option<f64>,
    #[arg(long, value_name = "NATS")]
    pub log_threshold: Option<f64>,
    /// Selection constants; all four default to `1 + 2/n` and `n + 2` when none is given.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub alpha_prime: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub beta_prime: Option<f64>,
    /// Subset fraction of the set family.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Overlap fraction of the set family.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Number of subsets to build; defaults to the guaranteed count.
    #[arg(long, value_name = "N")]
    pub messages: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Codeword selection attempts.
    #[arg(long)]
    pub max_retries: Option<usize>,
    /// Subset draws allowed when building the family.
    #[arg(long)]
    pub family_attempts: Option<usize>,
    /// Try the selection even when its success is not guaranteed.
    #[arg(long)]
    pub allow_infeasible: bool,
    /// Write the code JSON here; otherwise it is embedded in the summary.
    #[arg(long, value_name = "FILE")]
    pub code_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct IdEvalArgs {
    /// Code JSON file written by `idcode build`.
    #[arg(long, value_name = "FILE")]
    pub code_file: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub channel: Option<Source<Channel>>,
    #[arg(long, value_name = "LAW")]
    pub input: Option<InputSpec>,
    #[arg(long, value_name = "N")]
    pub block_length: Option<usize>,
}

/// Overlays the flags given on the command line onto the config file, if any.
pub fn merge<T: Serialize + DeserializeOwned>(flags: &T, config: Option<&Path>) -> Result<T> {
    let Some(path) = config else {
        return round_trip(serde_json::to_value(flags).expect("arguments serialize"));
    };
    let mut base: Value = read_json(path, "config")?;
    let Value::Object(target) = &mut base else {
        return Err(CliError::Input(format!(
            "config file {} must hold a JSON object",
            path.display()
        )));
    };
    if let Value::Object(given) = serde_json::to_value(flags).expect("arguments serialize") {
        for (key, value) in given {
            if !matches!(value, Value::Null | Value::Bool(false)) {
                target.insert(key, value);
            }
        }
    }
    round_trip(base).map_err(|e| CliError::Input(format!("in {}: {e}", path.display())))
}

fn round_trip<T: DeserializeOwned>(value: Value) -> Result<T> {
    serde_json::from_value(value).map_err(|e| CliError::Input(format!("invalid parameters: {e}")))
}

pub fn required<T: Clone>(value: &Option<T>, name: &str) -> Result<T> {
    value.clone().ok_or_else(|| {
        CliError::Input(format!(
            "missing parameter `{name}` (flag --{} or config key `{name}`)",
            name.replace('_', "-")
        ))
    })
}

/// Resolves a threshold given directly or in nats.
pub fn threshold(direct: Option<f64>, log: Option<f64>, name: &str) -> Result<f64> {
    match (direct, log) {
        (Some(c), None) => Ok(c),
        (None, Some(l)) => Ok(l.exp()),
        (None, None) => Err(CliError::Input(format!(
            "missing parameter `{name}` (or `log_{name}`)"
        ))),
        (Some(_), Some(_)) => Err(CliError::Input(format!(
            "give only one of `{name}` and `log_{name}`"
        ))),
    }
}
