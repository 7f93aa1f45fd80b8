//! Run configuration: flag groups shared by the subcommands, and the flat
//! TOML file format that mirrors them.
//!
//! A config file holds the same keys as the long flags, in snake_case
//! (`--scale-exp` becomes `scale_exp`). Flags given on the command line
//! override file values. Keys the subcommand does not accept are rejected.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Debug)]
pub enum CliError {
    Core(lattice_qd::Error),
    Config(String),
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::Config(_) => "config",
            CliError::Io { .. } => "io",
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Config(msg) => write!(f, "{msg}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
        }
    }
}

impl From<lattice_qd::Error> for CliError {
    fn from(e: lattice_qd::Error) -> Self {
        CliError::Core(e)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn config_err<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Config(msg.into()))
}

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Reversible,
    Asymmetric,
}

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Repr {
    Float,
    Fixed,
}

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum InitKind {
    Uniform,
    Point,
    Gaussian,
}

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Dir {
    Forward,
    Backward,
}

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Full,
    Reduced,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default, PartialEq)]
pub struct LatticeArgs {
    /// Number of lattice sites M.
    #[arg(long)]
    pub sites: Option<usize>,
    /// Lattice spacing a [default: 1].
    #[arg(long)]
    pub spacing: Option<f64>,
    /// Time step τ. Give this or --eps; if both, they must satisfy ε = τ/a².
    #[arg(long)]
    pub tau: Option<f64>,
    /// Hopping ratio ε = τ/a².
    #[arg(long, allow_hyphen_values = true)]
    pub eps: Option<f64>,
    /// zero | random:SEED:AMPLITUDE | harmonic:CENTER:STRENGTH [default: zero].
    #[arg(long)]
    pub potential: Option<String>,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default, PartialEq)]
pub struct InitArgs {
    /// Initial wave function [default: gaussian].
    #[arg(long, value_enum)]
    pub init: Option<InitKind>,
    /// Site of a point initial state [default: 0].
    #[arg(long)]
    pub init_site: Option<usize>,
    /// Gaussian center [default: middle of the lattice].
    #[arg(long)]
    pub center: Option<f64>,
    /// Gaussian width [default: M·a/16].
    #[arg(long)]
    pub width: Option<f64>,
    /// Gaussian wavenumber [default: 0].
    #[arg(long, allow_hyphen_values = true)]
    pub k0: Option<f64>,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default, PartialEq)]
pub struct FixedArgs {
    /// Field scale exponent s: values are integers / 2^s [default: 30].
    #[arg(long)]
    pub scale_exp: Option<u32>,
    /// Kernel coefficient exponent p [default: 30].
    #[arg(long)]
    pub coef_exp: Option<u32>,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default, PartialEq)]
pub struct EvolveArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub lattice: LatticeArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub init: InitArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub fixed: FixedArgs,
    /// Difference scheme [default: reversible].
    #[arg(long, value_enum)]
    pub scheme: Option<Scheme>,
    /// Arithmetic for the reversible scheme [default: float].
    #[arg(long, value_enum)]
    pub repr: Option<Repr>,
    /// Number of steps.
    #[arg(long)]
    pub steps: Option<u64>,
    /// Record a trace row every this many steps [default: 1].
    #[arg(long)]
    pub record_every: Option<usize>,
    /// Attach field snapshots every this many steps.
    #[arg(long)]
    pub snapshot_every: Option<usize>,
    /// Step direction for the reversible scheme [default: forward].
    #[arg(long, value_enum)]
    pub direction: Option<Dir>,
    /// Trace CSV output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Snapshot CSV output (needs --snapshot-every).
    #[arg(long)]
    pub snapshots: Option<PathBuf>,
    /// Start from a saved fixed-point state instead of --init.
    #[arg(long)]
    pub state_in: Option<PathBuf>,
    /// Save the final fixed-point state.
    #[arg(long)]
    pub state_out: Option<PathBuf>,
    /// JSON report output [default: stdout].
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default, PartialEq)]
pub struct ReverseCheckArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub lattice: LatticeArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub init: InitArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub fixed: FixedArgs,
    /// Arithmetic [default: fixed].
    #[arg(long, value_enum)]
    pub repr: Option<Repr>,
    /// Steps forward, then the same number backward.
    #[arg(long)]
    pub steps: Option<u64>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default, PartialEq)]
pub struct StabilityArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub lattice: LatticeArgs,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default, PartialEq)]
pub struct SpectralCheckArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub lattice: LatticeArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub init: InitArgs,
    /// Steps to compare [default: 100].
    #[arg(long)]
    pub steps: Option<u64>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default, PartialEq)]
pub struct GroverArgs {
    /// Number of items M.
    #[arg(long)]
    pub sites: Option<usize>,
    /// Index of the marked item [default: 0].
    #[arg(long)]
    pub marked: Option<usize>,
    /// `auto` for the optimal count, or a number [default: auto].
    #[arg(long)]
    pub iterations: Option<String>,
    /// Full state vector or the two-amplitude recursion [default: full].
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Sampling seed [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Measurement shots [default: 10000].
    #[arg(long)]
    pub shots: Option<u64>,
    /// Per-iteration CSV output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Histogram CSV output.
    #[arg(long)]
    pub histogram: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default, PartialEq)]
pub struct SampleArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub lattice: LatticeArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub init: InitArgs,
    /// Sample a saved fixed-point state instead of --init.
    #[arg(long)]
    pub state_in: Option<PathBuf>,
    /// Sampling seed [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Measurement shots [default: 10000].
    #[arg(long)]
    pub shots: Option<u64>,
    /// Histogram CSV output.
    #[arg(long)]
    pub histogram: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

/// Serializes to a JSON object without the unset keys.
pub fn to_object<T: Serialize>(value: &T) -> Map<String, Value> {
    match serde_json::to_value(value).expect("config types serialize") {
        Value::Object(map) => map.into_iter().filter(|(_, v)| !v.is_null()).collect(),
        _ => unreachable!("config types are structs"),
    }
}

/// Writes a config in the on-disk format.
#[cfg(test)]
pub fn to_toml<T: Serialize>(value: &T) -> String {
    toml::to_string(&to_object(value)).expect("flat config serializes")
}

/// Parses a config file body, rejecting keys outside `allowed`.
#[cfg(test)]
pub fn parse_toml<T: DeserializeOwned>(text: &str, allowed: &BTreeSet<String>) -> CliResult<T> {
    let object = parse_object(text, allowed)?;
    from_object(object)
}

fn parse_object(text: &str, allowed: &BTreeSet<String>) -> CliResult<Map<String, Value>> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| CliError::Config(format!("malformed config: {}", e.message())))?;
    if let Some(key) = table.keys().find(|k| !allowed.contains(*k)) {
        return config_err(format!("unknown config key `{key}`"));
    }
    match serde_json::to_value(table).map_err(|e| CliError::Config(e.to_string()))? {
        Value::Object(map) => Ok(map),
        _ => unreachable!("a TOML document is a table"),
    }
}

fn from_object<T: DeserializeOwned>(object: Map<String, Value>) -> CliResult<T> {
    serde_json::from_value(Value::Object(object)).map_err(|e| CliError::Config(format!("invalid config value: {e}")))
}

/// Layers command-line flags over an optional config file.
pub fn load<T: Serialize + DeserializeOwned>(flags: &T, file: Option<&Path>, allowed: &BTreeSet<String>) -> CliResult<T> {
    let Some(path) = file else {
        return from_object(to_object(flags));
    };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut merged = parse_object(&text, allowed)?;
    merged.extend(to_object(flags));
    from_object(merged)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn keys(list: &[&str]) -> BTreeSet<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    fn evolve_keys() -> BTreeSet<String> {
        keys(&[
            "sites", "spacing", "tau", "eps", "potential", "init", "init_site", "center", "width", "k0", "scale_exp",
            "coef_exp", "scheme", "repr", "steps", "record_every", "snapshot_every", "direction", "out", "snapshots",
            "state_in", "state_out", "report",
        ])
    }

    #[test]
    fn config_roundtrips_through_toml() {
        let args = EvolveArgs {
            lattice: LatticeArgs {
                sites: Some(256),
                spacing: Some(0.1),
                eps: Some(0.2),
                potential: Some("random:7:0.5".into()),
                ..Default::default()
            },
            init: InitArgs {
                init: Some(InitKind::Gaussian),
                k0: Some(-1.0 / 3.0),
                ..Default::default()
            },
            fixed: FixedArgs {
                scale_exp: Some(40),
                coef_exp: None,
            },
            scheme: Some(Scheme::Reversible),
            repr: Some(Repr::Fixed),
            steps: Some(10_000),
            direction: Some(Dir::Backward),
            out: Some("trace.csv".into()),
            ..Default::default()
        };
        let text = to_toml(&args);
        assert!(text.contains("scale_exp = 40"));
        assert!(!text.contains("coef_exp"));
        let back: EvolveArgs = parse_toml(&text, &evolve_keys()).unwrap();
        assert_eq!(back, args);
    }

    #[test]
    fn integers_are_accepted_for_float_keys() {
        let back: EvolveArgs = parse_toml("eps = 0\nspacing = 2", &evolve_keys()).unwrap();
        assert_eq!(back.lattice.eps, Some(0.0));
        assert_eq!(back.lattice.spacing, Some(2.0));
    }

    #[test]
    fn bad_files_are_config_errors() {
        for text in ["sites = ", "bogus = 1", "sites = \"many\"", "repr = \"decimal\""] {
            let err = parse_toml::<EvolveArgs>(text, &evolve_keys()).unwrap_err();
            assert_eq!(err.kind(), "config", "{text}");
        }
    }

    #[test]
    fn flags_override_file() {
        let dir = std::env::temp_dir().join(format!("lqd-config-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.toml");
        std::fs::write(&path, "sites = 64\neps = 0.1\nsteps = 5\n").unwrap();
        let flags = EvolveArgs {
            steps: Some(9),
            ..Default::default()
        };
        let merged = load(&flags, Some(&path), &evolve_keys()).unwrap();
        assert_eq!(merged.steps, Some(9));
        assert_eq!(merged.lattice.sites, Some(64));
        assert_eq!(merged.lattice.eps, Some(0.1));
        std::fs::remove_dir_all(dir).unwrap();
    }
}
