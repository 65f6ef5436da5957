use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use serde::Deserialize;

use super::CliError;
use crate::engine::Pipeline;
use crate::rational::Angle;
use crate::two_distance::{BackendKind, Backends, ExternalSolver, SdpCache, SolverConfig};

pub const MAX_DIMENSION: u64 = 10_000;
pub const DEFAULT_BACKENDS: &str = "closed-form,negative-pair,cache";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Markdown,
    Csv,
    Tsv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table" | "text" => Ok(Format::Text),
            "markdown" | "md" => Ok(Format::Markdown),
            "csv" => Ok(Format::Csv),
            "tsv" | "tsv-plot" => Ok(Format::Tsv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected table, markdown, csv, tsv-plot or json)")),
        }
    }
}

/// Settings that may come from a TOML file; command-line flags win.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub backends: Option<Vec<String>>,
    pub cache: Option<PathBuf>,
    pub sdp_cmd: Option<String>,
    pub timeout_secs: Option<f64>,
    pub jobs: Option<usize>,
    pub allow_fallback: Option<bool>,
    pub format: Option<String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// Inclusive dimension range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DimRange {
    pub from: u64,
    pub to: u64,
}

impl DimRange {
    pub fn single(r: u64) -> Self {
        DimRange { from: r, to: r }
    }

    pub fn iter(self) -> std::ops::RangeInclusive<u64> {
        self.from..=self.to
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub dims: DimRange,
    pub angle: Option<Angle>,
    pub backends: Vec<BackendKind>,
    pub cache_path: Option<PathBuf>,
    pub sdp_cmd: Option<String>,
    pub timeout: Duration,
    pub format: Format,
    pub jobs: usize,
    pub allow_fallback: bool,
}

impl RunConfig {
    pub fn new(dims: DimRange) -> Self {
        RunConfig {
            dims,
            angle: None,
            backends: parse_backends(DEFAULT_BACKENDS).expect("default backends"),
            cache_path: None,
            sdp_cmd: None,
            timeout: Duration::from_secs(600),
            format: Format::Text,
            jobs: 1,
            allow_fallback: false,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.backends.is_empty() && !self.allow_fallback {
            return Err(CliError::Config("at least one backend must be enabled".into()));
        }
        let min = crate::engine::MIN_DIMENSION;
        if self.dims.from > self.dims.to {
            return Err(CliError::Config(format!("empty range {}..{}", self.dims.from, self.dims.to)));
        }
        if self.dims.from < min || self.dims.to > MAX_DIMENSION {
            return Err(CliError::Config(format!(
                "dimensions must lie in [{min}, {MAX_DIMENSION}], got {}..{}",
                self.dims.from, self.dims.to
            )));
        }
        if self.jobs == 0 {
            return Err(CliError::Config("--jobs must be positive".into()));
        }
        if self.backends.contains(&BackendKind::External) && self.sdp_cmd.is_none() {
            return Err(CliError::Config(format!(
                "the external backend needs --sdp-cmd or {}",
                crate::two_distance::SDP_CMD_ENV
            )));
        }
        Ok(())
    }

    /// Shipped cache merged with the configured cache file.
    pub fn load_cache(&self) -> Result<SdpCache, CliError> {
        let mut cache = SdpCache::shipped();
        if let Some(path) = &self.cache_path {
            if path.exists() {
                let extra = SdpCache::load(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                cache.merge(&extra);
            }
        }
        Ok(cache)
    }

    pub fn pipeline(&self) -> Result<Pipeline, CliError> {
        self.validate()?;
        let external = self
            .sdp_cmd
            .as_deref()
            .and_then(|c| SolverConfig::new(c, self.timeout, self.jobs))
            .map(ExternalSolver::new);
        let backends = Backends::from_kinds(&self.backends, self.load_cache()?, external);
        Ok(Pipeline::new(backends, self.allow_fallback))
    }
}

pub fn parse_backends(list: &str) -> Result<Vec<BackendKind>, CliError> {
    let mut out = Vec::new();
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let kind: BackendKind = item.parse().map_err(CliError::Config)?;
        if !out.contains(&kind) {
            out.push(kind);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        let mut c = RunConfig::new(DimRange::single(44));
        assert!(c.validate().is_ok());
        c.dims = DimRange { from: 10, to: 20 };
        assert!(c.validate().is_err());
        c.dims = DimRange { from: 20, to: 10_001 };
        assert!(c.validate().is_err());
        c.dims = DimRange::single(44);
        c.backends.clear();
        assert!(c.validate().is_err());
        c.backends = vec![BackendKind::External];
        assert!(c.validate().is_err());
    }

    #[test]
    fn backend_lists() {
        assert_eq!(parse_backends("cache, closed-form,cache").unwrap(), vec![BackendKind::Cache, BackendKind::ClosedForm]);
        assert!(parse_backends("magic").is_err());
        assert!(parse_backends("").unwrap().is_empty());
    }

    #[test]
    fn file_config() {
        let c: FileConfig = toml::from_str("backends = [\"cache\"]\njobs = 4\ntimeout_secs = 2.5\n").unwrap();
        assert_eq!(c.jobs, Some(4));
        assert!(toml::from_str::<FileConfig>("colour = 1").is_err());
    }
}
