//! Run configuration: defaults, config files, flag overrides.
//!
//! Every command resolves one [`RunConfig`] before doing any work.
//! Precedence is fixed: command-line flags override the config file,
//! the config file overrides built-in defaults, and the
//! `TRACE_LAB_THREADS` environment variable caps the resolved thread
//! count regardless of where it came from.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

/// Environment variable that caps worker threads for a process.
pub const THREADS_ENV: &str = "TRACE_LAB_THREADS";

/// Largest accepted grid density, matching the piece-cut cap downstream.
pub const MAX_SPU: u32 = 4096;

/// Largest point count a single sweep may materialize.
pub const MAX_GRID_ROWS: u64 = 2_000_000;

/// Configuration errors. These map to process exit code 2.
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("bad thresholds spec {0:?}: expected \"default\" or \"strict=<N>x\" with N >= 1")]
    BadThresholds(String),
    #[error("bad thread count {0:?}: expected a positive integer")]
    BadThreads(String),
    #[error("bad range {0:?}: expected <lo>..<hi> with lo < hi")]
    BadRange(String),
    #[error("samples per unit {0} out of range (1..={MAX_SPU})")]
    BadSpu(u32),
    #[error("sweep asks for {0} grid points (limit {MAX_GRID_ROWS})")]
    GridTooLarge(u64),
    #[error("sample count {0} out of range (2..=1000000)")]
    BadSamples(u32),
    #[error("cannot read config file {path}: {source}")]
    FileRead {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse config file {path}: {source}")]
    FileParse {
        path: PathBuf,
        source: serde_json::Error,
    },
}

/// On-disk configuration file. All fields are optional; absent fields
/// fall through to the defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    /// Grid density in samples per coordinate unit.
    pub spu: Option<u32>,
    /// Sample count for scale sweeps.
    pub samples: Option<u32>,
    /// Worker thread count for parallel sweeps.
    pub threads: Option<usize>,
    /// Threshold spec, same grammar as the `--thresholds` flag.
    pub thresholds: Option<String>,
}

impl FileConfig {
    /// Reads and parses a JSON config file.
    pub fn load(path: &Path) -> Result<FileConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::FileRead {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| ConfigError::FileParse {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Flag-level overrides collected from the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub spu: Option<u32>,
    pub samples: Option<u32>,
    pub threads: Option<usize>,
    pub thresholds: Option<String>,
}

/// Fully resolved configuration for one command invocation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    /// Grid density in samples per coordinate unit.
    pub spu: u32,
    /// Sample count for scale sweeps.
    pub samples: u32,
    /// Worker thread count for parallel sweeps.
    pub threads: usize,
    /// Divisor applied to the tolerances the acceptance battery marks
    /// as strict-scalable. 1 is the published battery.
    pub strict_divisor: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            spu: 64,
            samples: 200,
            threads: default_threads(),
            strict_divisor: 1.0,
        }
    }
}

impl RunConfig {
    /// Resolves the effective configuration from a parsed config file and
    /// flag overrides, then applies the environment thread cap and
    /// validates every field.
    pub fn resolve(file: Option<&FileConfig>, over: &Overrides) -> Result<RunConfig, ConfigError> {
        let mut cfg = RunConfig::default();
        if let Some(f) = file {
            if let Some(spu) = f.spu {
                cfg.spu = spu;
            }
            if let Some(samples) = f.samples {
                cfg.samples = samples;
            }
            if let Some(threads) = f.threads {
                cfg.threads = threads;
            }
            if let Some(spec) = &f.thresholds {
                cfg.strict_divisor = parse_thresholds(spec)?;
            }
        }
        if let Some(spu) = over.spu {
            cfg.spu = spu;
        }
        if let Some(samples) = over.samples {
            cfg.samples = samples;
        }
        if let Some(threads) = over.threads {
            cfg.threads = threads;
        }
        if let Some(spec) = &over.thresholds {
            cfg.strict_divisor = parse_thresholds(spec)?;
        }
        if let Some(cap) = threads_from_env()? {
            cfg.threads = cfg.threads.min(cap);
        }
        if cfg.spu == 0 || cfg.spu > MAX_SPU {
            return Err(ConfigError::BadSpu(cfg.spu));
        }
        if cfg.samples < 2 || cfg.samples > 1_000_000 {
            return Err(ConfigError::BadSamples(cfg.samples));
        }
        if cfg.threads == 0 {
            return Err(ConfigError::BadThreads("0".into()));
        }
        Ok(cfg)
    }

    /// The effective configuration as ordered JSON, for `--show-config`.
    pub fn show(&self) -> String {
        let mut map = BTreeMap::new();
        map.insert("samples", serde_json::json!(self.samples));
        map.insert("spu", serde_json::json!(self.spu));
        map.insert("strict_divisor", serde_json::json!(self.strict_divisor));
        map.insert("threads", serde_json::json!(self.threads));
        serde_json::to_string_pretty(&map).expect("flat map serializes")
    }
}

/// Default worker thread count: the machine's parallelism, capped at 8.
pub fn default_threads() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get().min(8))
        .unwrap_or(1)
}

/// Parses a thresholds spec: `default` keeps the published tolerances,
/// `strict=<N>x` divides the strict-scalable ones by `N >= 1`.
pub fn parse_thresholds(spec: &str) -> Result<f64, ConfigError> {
    let s = spec.trim();
    if s == "default" {
        return Ok(1.0);
    }
    if let Some(rest) = s.strip_prefix("strict=") {
        if let Some(num) = rest.strip_suffix('x') {
            if let Ok(n) = num.parse::<f64>() {
                if n.is_finite() && n >= 1.0 {
                    return Ok(n);
                }
            }
        }
    }
    Err(ConfigError::BadThresholds(spec.to_string()))
}

/// Reads the `TRACE_LAB_THREADS` cap from the environment.
/// Unset means no cap; anything that is not a positive integer is an error.
pub fn threads_from_env() -> Result<Option<usize>, ConfigError> {
    match std::env::var(THREADS_ENV) {
        Ok(raw) => threads_cap(&raw).map(Some),
        Err(_) => Ok(None),
    }
}

fn threads_cap(raw: &str) -> Result<usize, ConfigError> {
    match raw.trim().parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(ConfigError::BadThreads(raw.to_string())),
    }
}

/// Parses a sweep range `<lo>..<hi>` with an optional `r=` prefix for
/// residue sweeps. The range must be nonempty: `lo < hi`.
pub fn parse_range(spec: &str) -> Result<(f64, f64), ConfigError> {
    let bad = || ConfigError::BadRange(spec.to_string());
    let body = spec.trim().strip_prefix("r=").unwrap_or(spec.trim());
    let (lo_s, hi_s) = body.split_once("..").ok_or_else(bad)?;
    let lo: f64 = lo_s.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi_s.trim().parse().map_err(|_| bad())?;
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(bad());
    }
    Ok((lo, hi))
}
