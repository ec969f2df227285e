//! Experiment configuration: a flat key-value file format, flag overlays,
//! and per-experiment validation with field-level diagnostics.
//!
//! Precedence is flags over file over defaults; the configuration is fully
//! validated before any computation starts.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use ruc_core::io::f64_repr;
use ruc_core::spheregeo::NetKind;
use ruc_core::{Error, Result};

/// Environment variable holding the default output directory.
pub const OUT_DIR_ENV: &str = "RUC_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Certify,
    NetBuild,
    NetVerify,
    Lde,
    Cramer,
    Concentration,
    Entanglement,
    Scaling,
    Chernoff,
    ShatterSearch,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Certify => "certify",
            ExperimentKind::NetBuild => "net-build",
            ExperimentKind::NetVerify => "net-verify",
            ExperimentKind::Lde => "lde",
            ExperimentKind::Cramer => "cramer",
            ExperimentKind::Concentration => "concentration",
            ExperimentKind::Entanglement => "entanglement",
            ExperimentKind::Scaling => "scaling",
            ExperimentKind::Chernoff => "chernoff",
            ExperimentKind::ShatterSearch => "shatter-search",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "certify" => ExperimentKind::Certify,
            "net-build" => ExperimentKind::NetBuild,
            "net-verify" => ExperimentKind::NetVerify,
            "lde" => ExperimentKind::Lde,
            "cramer" => ExperimentKind::Cramer,
            "concentration" => ExperimentKind::Concentration,
            "entanglement" => ExperimentKind::Entanglement,
            "scaling" => ExperimentKind::Scaling,
            "chernoff" => ExperimentKind::Chernoff,
            "shatter-search" => ExperimentKind::ShatterSearch,
            other => {
                return Err(Error::Domain(format!(
                    "unknown experiment name '{other}'"
                )))
            }
        })
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How the certification subject channel is obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelSpec {
    /// Fresh Haar channel of the configured dimensions.
    Haar,
    /// The qubit Pauli twirl fixture (d_A = 2, d_E = 4).
    Pauli,
    /// Single Haar unitary (d_E = 1).
    SingleUnitary,
    /// Load from a channel file.
    File(PathBuf),
}

/// Unvalidated key-value layer: file contents or flag overlay.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    pub experiment: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<String>,
    pub workers: Option<usize>,
    pub d_a: Option<usize>,
    pub d_b: Option<usize>,
    pub d_e: Option<usize>,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub trials: Option<u64>,
    pub samples: Option<u64>,
    pub p: Option<usize>,
    pub subspace_dim: Option<usize>,
    pub net_kind: Option<String>,
    pub net_constant_c: Option<f64>,
    pub adversarial_restarts: Option<usize>,
    pub channel: Option<String>,
    pub channel_file: Option<String>,
    pub net_file: Option<String>,
    pub dims: Option<String>,
    pub success_target: Option<f64>,
    pub seeds_per_point: Option<u64>,
    pub max_d_e: Option<usize>,
    pub t: Option<u64>,
    pub m: Option<usize>,
}

macro_rules! raw_fields {
    ($macro:ident) => {
        $macro!(
            (experiment, String),
            (seed, u64),
            (out, String),
            (workers, usize),
            (d_a, usize),
            (d_b, usize),
            (d_e, usize),
            (epsilon, f64),
            (delta, f64),
            (trials, u64),
            (samples, u64),
            (p, usize),
            (subspace_dim, usize),
            (net_kind, String),
            (net_constant_c, f64),
            (adversarial_restarts, usize),
            (channel, String),
            (channel_file, String),
            (net_file, String),
            (dims, String),
            (success_target, f64),
            (seeds_per_point, u64),
            (max_d_e, usize),
            (t, u64),
            (m, usize)
        );
    };
}

impl RawConfig {
    /// Parses the flat `key = value` format; `#` starts a comment line.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut map: BTreeMap<String, String> = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!("config line {}: expected key = value", lineno + 1))
            })?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        let mut cfg = RawConfig::default();
        macro_rules! take {
            ($(($field:ident, $ty:ident)),*) => {
                $(
                    if let Some(v) = map.remove(stringify!($field)) {
                        cfg.$field = Some(parse_value::<$ty>(stringify!($field), &v)?);
                    }
                )*
            };
        }
        raw_fields!(take);
        if let Some(unknown) = map.keys().next() {
            return Err(Error::Parse(format!("unknown config key '{unknown}'")));
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_text(&text)
    }

    /// Canonical file encoding: present keys in declaration order.
    pub fn to_file_text(&self) -> String {
        let mut out = String::new();
        emit_fields(self, &mut out);
        out
    }

    /// Overlay: `self` wins where present, `base` fills the rest.
    pub fn over(self, base: RawConfig) -> RawConfig {
        let mut merged = base;
        macro_rules! overlay {
            ($(($field:ident, $ty:ident)),*) => {
                $(
                    if self.$field.is_some() {
                        merged.$field = self.$field;
                    }
                )*
            };
        }
        raw_fields!(overlay);
        merged
    }
}

fn emit_fields(cfg: &RawConfig, out: &mut String) {
    macro_rules! emit {
        ($(($field:ident, $ty:ident)),*) => {
            $(
                if let Some(v) = &cfg.$field {
                    out.push_str(stringify!($field));
                    out.push_str(" = ");
                    out.push_str(&ValueRepr::repr(v));
                    out.push('\n');
                }
            )*
        };
    }
    raw_fields!(emit);
}

trait ValueRepr {
    fn repr(&self) -> String;
}

impl ValueRepr for String {
    fn repr(&self) -> String {
        self.clone()
    }
}

impl ValueRepr for u64 {
    fn repr(&self) -> String {
        self.to_string()
    }
}

impl ValueRepr for usize {
    fn repr(&self) -> String {
        self.to_string()
    }
}

impl ValueRepr for f64 {
    fn repr(&self) -> String {
        f64_repr(*self)
    }
}

trait ValueParse: Sized {
    fn parse_value(s: &str) -> Option<Self>;
}

impl ValueParse for String {
    fn parse_value(s: &str) -> Option<Self> {
        Some(s.to_string())
    }
}

impl ValueParse for u64 {
    fn parse_value(s: &str) -> Option<Self> {
        s.parse().ok()
    }
}

impl ValueParse for usize {
    fn parse_value(s: &str) -> Option<Self> {
        s.parse().ok()
    }
}

impl ValueParse for f64 {
    fn parse_value(s: &str) -> Option<Self> {
        s.parse().ok()
    }
}

fn parse_value<T: ValueParse>(field: &str, s: &str) -> Result<T> {
    T::parse_value(s).ok_or_else(|| Error::Parse(format!("config field '{field}': bad value '{s}'")))
}

/// Fully validated experiment parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Params {
    Certify {
        channel: ChannelSpec,
        d_a: usize,
        d_e: usize,
        epsilon: f64,
        net_kind: NetKind,
        net_constant_c: f64,
        adversarial_restarts: usize,
        net_file: Option<PathBuf>,
    },
    NetBuild {
        dim: usize,
        kind: NetKind,
        epsilon: f64,
        net_constant_c: f64,
    },
    NetVerify {
        net_file: PathBuf,
        epsilon: f64,
        trials: u64,
    },
    Lde {
        d_a: usize,
        d_e: usize,
        p: usize,
        epsilon: f64,
        trials: u64,
    },
    Cramer {
        d_b: usize,
        d_e: usize,
        epsilon: f64,
        trials: u64,
    },
    Concentration {
        d_b: usize,
        d_e: usize,
        epsilon: f64,
        trials: u64,
        net_constant_c: f64,
        adversarial_restarts: usize,
    },
    Entanglement {
        d_b: usize,
        d_e: usize,
        subspace_dim: usize,
        samples: u64,
    },
    Scaling {
        dims: Vec<usize>,
        epsilon: f64,
        success_target: f64,
        seeds_per_point: u64,
        net_constant_c: f64,
        max_d_e: usize,
    },
    Chernoff {
        /// A single (t, ε) check, or the full grid when t is absent.
        t: Option<u64>,
        epsilon: f64,
    },
    ShatterSearch {
        dim: usize,
        m: usize,
        samples: u64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub out: PathBuf,
    pub workers: usize,
    pub params: Params,
}

fn field_err(field: &str, msg: &str) -> Error {
    Error::Domain(format!("config field '{field}': {msg}"))
}

fn require<T: Copy>(value: Option<T>, field: &str) -> Result<T> {
    value.ok_or_else(|| field_err(field, "required but missing"))
}

/// Resolves file + overlay into a validated configuration.
///
/// `overlay` values (the flags) override file values; the experiment name
/// must come from either source.
pub fn load_config(file: Option<&Path>, overlay: RawConfig) -> Result<ExperimentConfig> {
    let base = match file {
        Some(path) => RawConfig::from_file(path)?,
        None => RawConfig::default(),
    };
    let raw = overlay.over(base);
    resolve(raw)
}

fn resolve(raw: RawConfig) -> Result<ExperimentConfig> {
    let experiment = ExperimentKind::parse(
        raw.experiment
            .as_deref()
            .ok_or_else(|| field_err("experiment", "required but missing"))?,
    )?;
    let seed = raw.seed.unwrap_or(0);
    let out = raw
        .out
        .clone()
        .or_else(|| std::env::var(OUT_DIR_ENV).ok())
        .unwrap_or_else(|| "ruc-out".to_string());
    let workers = raw.workers.unwrap_or(0);

    let net_kind = match raw.net_kind.as_deref() {
        None => NetKind::Measure,
        Some(s) => NetKind::parse(s)
            .map_err(|_| field_err("net_kind", "expected 'measure' or 'covering'"))?,
    };

    let params = match experiment {
        ExperimentKind::Certify => {
            let epsilon = require(raw.epsilon, "epsilon")?;
            if !(epsilon > 0.0 && epsilon <= 0.5) {
                return Err(field_err("epsilon", "certification requires (0, 1/2]"));
            }
            let channel = match (raw.channel.as_deref(), raw.channel_file.as_deref()) {
                (_, Some(path)) => ChannelSpec::File(PathBuf::from(path)),
                (None | Some("haar"), None) => ChannelSpec::Haar,
                (Some("pauli"), None) => ChannelSpec::Pauli,
                (Some("single"), None) => ChannelSpec::SingleUnitary,
                (Some(other), None) => {
                    return Err(field_err(
                        "channel",
                        &format!("unknown channel '{other}' (haar|pauli|single)"),
                    ))
                }
            };
            let (d_a, d_e) = match &channel {
                ChannelSpec::Pauli => (2, 4),
                ChannelSpec::SingleUnitary => (require(raw.d_a, "d_a")?, 1),
                ChannelSpec::File(_) => (0, 0), // dimensions come from the file
                ChannelSpec::Haar => (require(raw.d_a, "d_a")?, require(raw.d_e, "d_e")?),
            };
            if matches!(channel, ChannelSpec::Haar) && (d_a == 0 || d_e == 0) {
                return Err(field_err("d_a", "dimensions must be positive"));
            }
            Params::Certify {
                channel,
                d_a,
                d_e,
                epsilon,
                net_kind,
                net_constant_c: raw.net_constant_c.unwrap_or(10.0),
                adversarial_restarts: raw.adversarial_restarts.unwrap_or(3),
                net_file: raw.net_file.map(PathBuf::from),
            }
        }
        ExperimentKind::NetBuild => {
            let dim = require(raw.d_a, "d_a")?;
            if dim == 0 {
                return Err(field_err("d_a", "dimension must be positive"));
            }
            let epsilon = match net_kind {
                NetKind::Measure => {
                    let e = require(raw.epsilon, "epsilon")?;
                    if !(e > 0.0 && e <= 0.5) {
                        return Err(field_err("epsilon", "measure nets require (0, 1/2]"));
                    }
                    e
                }
                NetKind::Covering => {
                    let d = require(raw.delta, "delta")?;
                    if !(d > 0.0 && d <= 2.0) {
                        return Err(field_err("delta", "covering radius must lie in (0, 2]"));
                    }
                    d
                }
            };
            Params::NetBuild {
                dim,
                kind: net_kind,
                epsilon,
                net_constant_c: raw.net_constant_c.unwrap_or(10.0),
            }
        }
        ExperimentKind::NetVerify => {
            let net_file = raw
                .net_file
                .as_deref()
                .ok_or_else(|| field_err("net_file", "required but missing"))?;
            let epsilon = require(raw.epsilon, "epsilon")?;
            if !(epsilon > 0.0 && epsilon <= 1.0) {
                return Err(field_err("epsilon", "cap measure must lie in (0, 1]"));
            }
            Params::NetVerify {
                net_file: PathBuf::from(net_file),
                epsilon,
                trials: raw.trials.unwrap_or(10_000),
            }
        }
        ExperimentKind::Lde => {
            let d_a = require(raw.d_a, "d_a")?;
            let epsilon = require(raw.epsilon, "epsilon")?;
            if !(epsilon > 0.0 && epsilon < 1.0) {
                return Err(field_err("epsilon", "large-deviation check requires (0, 1)"));
            }
            let p = require(raw.p, "p")?;
            if p == 0 || p > d_a {
                return Err(field_err("p", "projector rank must lie in 1..=d_a"));
            }
            Params::Lde {
                d_a,
                d_e: require(raw.d_e, "d_e")?,
                p,
                epsilon,
                trials: raw.trials.unwrap_or(1_000),
            }
        }
        ExperimentKind::Cramer => {
            let epsilon = require(raw.epsilon, "epsilon")?;
            if !(epsilon > 0.0 && epsilon <= 1.0) {
                return Err(field_err("epsilon", "tail parameter must lie in (0, 1]"));
            }
            Params::Cramer {
                d_b: require(raw.d_b, "d_b")?,
                d_e: require(raw.d_e, "d_e")?,
                epsilon,
                trials: raw.trials.unwrap_or(1_000),
            }
        }
        ExperimentKind::Concentration => {
            let epsilon = require(raw.epsilon, "epsilon")?;
            if !(epsilon > 0.0 && epsilon <= 1.0) {
                return Err(field_err("epsilon", "tail parameter must lie in (0, 1]"));
            }
            Params::Concentration {
                d_b: require(raw.d_b, "d_b")?,
                d_e: require(raw.d_e, "d_e")?,
                epsilon,
                trials: raw.trials.unwrap_or(1_000),
                net_constant_c: raw.net_constant_c.unwrap_or(1.0),
                adversarial_restarts: raw.adversarial_restarts.unwrap_or(3),
            }
        }
        ExperimentKind::Entanglement => {
            let d_b = require(raw.d_b, "d_b")?;
            let d_e = require(raw.d_e, "d_e")?;
            if d_b == 0 || d_e == 0 {
                return Err(field_err("d_b", "dimensions must be positive"));
            }
            let total = d_b * d_e;
            let subspace_dim = raw.subspace_dim.unwrap_or(total);
            if subspace_dim == 0 || subspace_dim > total {
                return Err(field_err("subspace_dim", "must lie in 1..=d_b*d_e"));
            }
            Params::Entanglement {
                d_b,
                d_e,
                subspace_dim,
                samples: raw.samples.unwrap_or(1_000),
            }
        }
        ExperimentKind::Scaling => {
            let dims_text = raw
                .dims
                .as_deref()
                .ok_or_else(|| field_err("dims", "required but missing"))?;
            let dims: Result<Vec<usize>> = dims_text
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<usize>()
                        .map_err(|_| field_err("dims", "expected comma-separated integers"))
                })
                .collect();
            let dims = dims?;
            let epsilon = require(raw.epsilon, "epsilon")?;
            if !(epsilon > 0.0 && epsilon <= 0.5) {
                return Err(field_err("epsilon", "certification requires (0, 1/2]"));
            }
            let success_target = raw.success_target.unwrap_or(0.9);
            if !(success_target > 0.0 && success_target <= 1.0) {
                return Err(field_err("success_target", "must lie in (0, 1]"));
            }
            Params::Scaling {
                dims,
                epsilon,
                success_target,
                seeds_per_point: raw.seeds_per_point.unwrap_or(10),
                net_constant_c: raw.net_constant_c.unwrap_or(10.0),
                max_d_e: raw.max_d_e.unwrap_or(8_192),
            }
        }
        ExperimentKind::Chernoff => {
            let epsilon = raw.epsilon.unwrap_or(0.5);
            if !(epsilon > 0.0 && epsilon <= 1.0) {
                return Err(field_err("epsilon", "success probability must lie in (0, 1]"));
            }
            Params::Chernoff { t: raw.t, epsilon }
        }
        ExperimentKind::ShatterSearch => {
            let dim = raw.d_a.unwrap_or(1);
            let m = require(raw.m, "m")?;
            Params::ShatterSearch {
                dim,
                m,
                samples: raw.samples.unwrap_or(20),
            }
        }
    };

    Ok(ExperimentConfig {
        experiment,
        seed,
        out: PathBuf::from(out),
        workers,
        params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_text_round_trips() {
        let cfg = RawConfig {
            experiment: Some("lde".into()),
            seed: Some(17),
            epsilon: Some(0.25),
            d_a: Some(8),
            d_e: Some(40),
            p: Some(1),
            trials: Some(100),
            ..RawConfig::default()
        };
        let text = cfg.to_file_text();
        let parsed = RawConfig::parse_text(&text).unwrap();
        assert_eq!(parsed, cfg);
    }

    #[test]
    fn unknown_keys_and_values_are_rejected() {
        assert!(RawConfig::parse_text("frobnicate = 3\n").is_err());
        assert!(RawConfig::parse_text("seed = banana\n").is_err());
        assert!(RawConfig::parse_text("no separator here\n").is_err());
    }

    #[test]
    fn certify_epsilon_validation() {
        let raw = RawConfig {
            experiment: Some("certify".into()),
            epsilon: Some(0.7),
            d_a: Some(2),
            d_e: Some(4),
            ..RawConfig::default()
        };
        let err = resolve(raw).unwrap_err();
        assert!(err.to_string().contains("epsilon"));
    }

    #[test]
    fn flags_override_file_values() {
        let file = RawConfig {
            experiment: Some("cramer".into()),
            epsilon: Some(0.5),
            d_b: Some(8),
            d_e: Some(16),
            ..RawConfig::default()
        };
        let flags = RawConfig {
            epsilon: Some(0.25),
            ..RawConfig::default()
        };
        let merged = flags.over(file);
        assert_eq!(merged.epsilon, Some(0.25));
        assert_eq!(merged.d_b, Some(8));
        let cfg = resolve(merged).unwrap();
        match cfg.params {
            Params::Cramer { epsilon, .. } => assert_eq!(epsilon, 0.25),
            other => panic!("unexpected params {other:?}"),
        }
    }

    #[test]
    fn unknown_experiment_is_a_usage_error() {
        let raw = RawConfig {
            experiment: Some("frobnicate".into()),
            ..RawConfig::default()
        };
        assert!(resolve(raw).is_err());
    }

    #[test]
    fn missing_field_is_named() {
        let raw = RawConfig {
            experiment: Some("lde".into()),
            d_a: Some(4),
            d_e: Some(8),
            p: Some(1),
            ..RawConfig::default()
        };
        let err = resolve(raw).unwrap_err().to_string();
        assert!(err.contains("'epsilon'"), "{err}");
    }

    #[test]
    fn pauli_channel_fixes_dimensions() {
        let raw = RawConfig {
            experiment: Some("certify".into()),
            epsilon: Some(0.5),
            channel: Some("pauli".into()),
            ..RawConfig::default()
        };
        let cfg = resolve(raw).unwrap();
        match cfg.params {
            Params::Certify { d_a, d_e, .. } => {
                assert_eq!((d_a, d_e), (2, 4));
            }
            other => panic!("unexpected params {other:?}"),
        }
    }
}
