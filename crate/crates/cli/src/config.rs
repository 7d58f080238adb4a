use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use soskp_core::numerics::DEFAULT_PRECISION;

pub const PRECISION_ENV: &str = "SOSKP_PRECISION_BITS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    Construct,
    Verify,
    Rank,
    Sweep,
    Smooth,
    Bounds,
    CheckIj,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Symmetric,
    Dense,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum RegimeArg {
    Auto,
    Lower,
    Upper,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SweepKind {
    /// certlib `reported_degree`
    Degree,
    /// oracle SOS rank
    Rank,
}

/// Everything a run depends on. Serialized verbatim into every output header;
/// feeding it back through `--config` reproduces the run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<CommandName>,
    pub n: Option<u64>,
    /// Exact literal, e.g. `7/2`, `1+2^-12`, `0.25`.
    pub q: Option<String>,
    pub precision_bits: u32,
    pub tol: f64,
    pub eps: f64,
    /// Highest degree scanned by `rank` and `sweep --kind rank`; defaults to `n`.
    pub dmax: Option<u32>,
    pub sigma: Option<f64>,
    pub samples: u64,
    pub seed: u64,
    pub method: MethodArg,
    pub regime: RegimeArg,
    pub dense_limit: usize,
    /// `sweep`: integer part of q.
    pub q_floor: u64,
    /// `sweep`: exponents e of `q = q_floor + 2^-e`.
    pub e_min: u32,
    pub e_max: u32,
    pub sweep_kind: SweepKind,
    /// `smooth`: average oracle ranks instead of the closed-form bound (n <= 6).
    pub oracle: bool,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub jobs: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: None,
            n: None,
            q: None,
            precision_bits: DEFAULT_PRECISION,
            tol: 1e-12,
            eps: 1e-8,
            dmax: None,
            sigma: None,
            samples: 100_000,
            seed: 42,
            method: MethodArg::Symmetric,
            regime: RegimeArg::Auto,
            dense_limit: 1200,
            q_floor: 1,
            e_min: 1,
            e_max: 30,
            sweep_kind: SweepKind::Degree,
            oracle: false,
            input: None,
            output: None,
            format: None,
            jobs: None,
        }
    }
}

/// Flags shared by every subcommand. Unset flags fall back to the config
/// file, then to `SOSKP_PRECISION_BITS` (precision only), then to defaults.
#[derive(Args, Clone, Debug, Default)]
pub struct Flags {
    #[arg(long)]
    pub n: Option<u64>,
    /// Rational literal: integer, a/b, decimal, or sums/differences of terms like 2^-12.
    #[arg(long, allow_hyphen_values = true)]
    pub q: Option<String>,
    #[arg(long)]
    pub precision_bits: Option<u32>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub dmax: Option<u32>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    #[arg(long, value_enum)]
    pub regime: Option<RegimeArg>,
    #[arg(long)]
    pub dense_limit: Option<usize>,
    #[arg(long)]
    pub q_floor: Option<u64>,
    #[arg(long)]
    pub e_min: Option<u32>,
    #[arg(long)]
    pub e_max: Option<u32>,
    #[arg(long, value_enum)]
    pub kind: Option<SweepKind>,
    #[arg(long)]
    pub oracle: bool,
    #[arg(long, short = 'o')]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Worker threads for `sweep` and `smooth`; default is all logical cores.
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config {path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{PRECISION_ENV}={value:?} is not a bit count")]
    Env { value: String },
    #[error("config names command {config:?} but {given:?} was invoked")]
    CommandMismatch {
        config: CommandName,
        given: CommandName,
    },
}

pub fn load(path: &PathBuf) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.clone(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
        path: path.clone(),
        source,
    })
}

fn env_precision() -> Result<Option<u32>, ConfigError> {
    match std::env::var(PRECISION_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| ConfigError::Env { value: v }),
        Err(_) => Ok(None),
    }
}

/// Resolves the effective configuration for `command`.
pub fn resolve(
    command: Option<CommandName>,
    config: Option<&PathBuf>,
    input: Option<PathBuf>,
    flags: &Flags,
) -> Result<RunConfig, ConfigError> {
    let (mut cfg, from_file) = match config {
        Some(p) => (load(p)?, true),
        None => (RunConfig::default(), false),
    };
    match (cfg.command, command) {
        (Some(c), Some(g)) if c != g => {
            return Err(ConfigError::CommandMismatch { config: c, given: g })
        }
        (_, Some(g)) => cfg.command = Some(g),
        _ => {}
    }
    if !from_file {
        if let Some(p) = env_precision()? {
            cfg.precision_bits = p;
        }
    }
    macro_rules! take {
        ($flag:ident => $field:ident) => {
            if let Some(v) = flags.$flag.clone() {
                cfg.$field = v;
            }
        };
        (opt $flag:ident => $field:ident) => {
            if flags.$flag.is_some() {
                cfg.$field = flags.$flag.clone();
            }
        };
    }
    take!(opt n => n);
    take!(opt q => q);
    take!(precision_bits => precision_bits);
    take!(tol => tol);
    take!(eps => eps);
    take!(opt dmax => dmax);
    take!(opt sigma => sigma);
    take!(samples => samples);
    take!(seed => seed);
    take!(method => method);
    take!(regime => regime);
    take!(dense_limit => dense_limit);
    take!(q_floor => q_floor);
    take!(e_min => e_min);
    take!(e_max => e_max);
    take!(kind => sweep_kind);
    take!(opt out => output);
    take!(opt format => format);
    take!(opt jobs => jobs);
    if flags.oracle {
        cfg.oracle = true;
    }
    if input.is_some() {
        cfg.input = input;
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_values() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, r#"{"command":"rank","n":3,"q":"1/2","seed":7}"#).unwrap();
        let flags = Flags {
            n: Some(4),
            ..Flags::default()
        };
        let cfg = resolve(None, Some(&p), None, &flags).unwrap();
        assert_eq!(cfg.command, Some(CommandName::Rank));
        assert_eq!(cfg.n, Some(4));
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.q.as_deref(), Some("1/2"));
    }

    #[test]
    fn unknown_config_keys_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, r#"{"nn":3}"#).unwrap();
        assert!(load(&p).is_err());
    }

    #[test]
    fn roundtrip_through_json() {
        let cfg = RunConfig {
            command: Some(CommandName::Smooth),
            sigma: Some(0.01),
            ..RunConfig::default()
        };
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), cfg);
    }
}
