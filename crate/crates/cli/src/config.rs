//! Configuration layering: built-in defaults, then a key=value config file,
//! then command-line flags, then the SPHERICAL_RMT_SEED environment
//! variable (which outranks everything for the seed).

use std::fs;
use std::path::{Path, PathBuf};

use spherical_rmt::sampler::Ensemble;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum EnsembleArg {
    Gue,
    FixedTrace,
}

impl From<EnsembleArg> for Ensemble {
    fn from(e: EnsembleArg) -> Ensemble {
        match e {
            EnsembleArg::Gue => Ensemble::Gue,
            EnsembleArg::FixedTrace => Ensemble::FixedTrace,
        }
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub n: Vec<u32>,
    pub samples: u64,
    pub bins: u32,
    pub seed: u64,
    pub streams: u32,
    pub out_dir: PathBuf,
    pub format: OutputFormat,
    pub ensemble: Ensemble,
}

/// Optional values from one configuration source.
#[derive(Debug, Clone, Default)]
pub struct PartialConfig {
    pub n: Option<Vec<u32>>,
    pub samples: Option<u64>,
    pub bins: Option<u32>,
    pub seed: Option<u64>,
    pub streams: Option<u32>,
    pub out_dir: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub ensemble: Option<EnsembleArg>,
}

impl PartialConfig {
    /// Later sources win field by field.
    pub fn overlay(self, stronger: PartialConfig) -> PartialConfig {
        PartialConfig {
            n: stronger.n.or(self.n),
            samples: stronger.samples.or(self.samples),
            bins: stronger.bins.or(self.bins),
            seed: stronger.seed.or(self.seed),
            streams: stronger.streams.or(self.streams),
            out_dir: stronger.out_dir.or(self.out_dir),
            format: stronger.format.or(self.format),
            ensemble: stronger.ensemble.or(self.ensemble),
        }
    }

    pub fn resolve(self) -> Result<RunConfig, String> {
        let cfg = RunConfig {
            n: self.n.unwrap_or_else(|| vec![10]),
            samples: self.samples.unwrap_or(10_000),
            bins: self.bins.unwrap_or(200),
            seed: self.seed.unwrap_or(42),
            streams: self.streams.unwrap_or(0),
            out_dir: self.out_dir.unwrap_or_else(|| PathBuf::from(".")),
            format: self.format.unwrap_or(OutputFormat::Csv),
            ensemble: self.ensemble.map(Ensemble::from).unwrap_or(Ensemble::FixedTrace),
        };
        if cfg.n.is_empty() || cfg.n.contains(&0) {
            return Err("N values must be positive".into());
        }
        if cfg.samples == 0 {
            return Err("samples must be positive".into());
        }
        if cfg.bins < 10 {
            return Err("bins must be at least 10".into());
        }
        Ok(cfg)
    }
}

/// Parses a `key=value` config file; keys mirror the long flags.
pub fn parse_config_file(path: &Path) -> Result<PartialConfig, String> {
    let text =
        fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut cfg = PartialConfig::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("{}:{}: expected key=value", path.display(), lineno + 1))?;
        let key = key.trim();
        let value = value.trim();
        let fail = |e: String| format!("{}:{}: {key}: {e}", path.display(), lineno + 1);
        match key {
            "n" => {
                let parsed: Result<Vec<u32>, _> =
                    value.split(',').map(|v| v.trim().parse::<u32>()).collect();
                cfg.n = Some(parsed.map_err(|e| fail(e.to_string()))?);
            }
            "samples" => cfg.samples = Some(value.parse().map_err(|e: std::num::ParseIntError| fail(e.to_string()))?),
            "bins" => cfg.bins = Some(value.parse().map_err(|e: std::num::ParseIntError| fail(e.to_string()))?),
            "seed" => cfg.seed = Some(value.parse().map_err(|e: std::num::ParseIntError| fail(e.to_string()))?),
            "streams" => cfg.streams = Some(value.parse().map_err(|e: std::num::ParseIntError| fail(e.to_string()))?),
            "out-dir" => cfg.out_dir = Some(PathBuf::from(value)),
            "format" => {
                cfg.format = Some(match value {
                    "csv" => OutputFormat::Csv,
                    "json" => OutputFormat::Json,
                    other => return Err(fail(format!("unknown format {other:?}"))),
                })
            }
            "ensemble" => {
                cfg.ensemble = Some(match value {
                    "gue" => EnsembleArg::Gue,
                    "fixed-trace" | "fixed_trace" => EnsembleArg::FixedTrace,
                    other => return Err(fail(format!("unknown ensemble {other:?}"))),
                })
            }
            other => return Err(format!("{}:{}: unknown key {other:?}", path.display(), lineno + 1)),
        }
    }
    Ok(cfg)
}

/// Seed override from SPHERICAL_RMT_SEED, if set.
pub fn env_seed() -> Result<Option<u64>, String> {
    match std::env::var("SPHERICAL_RMT_SEED") {
        Ok(v) => v
            .trim()
            .parse::<u64>()
            .map(Some)
            .map_err(|e| format!("SPHERICAL_RMT_SEED={v:?}: {e}")),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(format!("SPHERICAL_RMT_SEED: {e}")),
    }
}
