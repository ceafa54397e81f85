//! Command implementations behind the `ris-scb` binary.
//!
//! Every command returns text (a report or a CSV document) instead of
//! printing, so the same code paths are exercised by the binary and the
//! integration tests.

pub mod analytic;
pub mod csv;
pub mod feasibility;
pub mod simulate;
pub mod table2;
pub mod validate;

use std::fs;
use std::path::Path;
use std::str::FromStr;

use ris_scb::montecarlo::{EngineError, EngineOptions, SweepError};
use ris_scb::{load_config, CancellationMode, ConfigError, RisScenario, ScenarioConfig};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Sweep(#[from] SweepError),
    #[error("{0}")]
    Usage(String),
    #[error("golden mismatch: {0}")]
    Golden(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Assumption(String),
    #[error("{failed} validation check(s) failed")]
    Validation { failed: usize },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Sweep(_) | CliError::Usage(_) => 2,
            CliError::Golden(_) => 3,
            CliError::Io { .. } => 4,
            CliError::Assumption(_) => 5,
            CliError::Validation { .. } => 6,
            CliError::Engine(EngineError::Config(_) | EngineError::Sweep(_) | EngineError::TooFewTrials(_)) => 2,
            CliError::Engine(_) => 1,
        }
    }
}

pub fn io_error(path: &Path, source: std::io::Error) -> CliError {
    CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// `ideal` or `bits=B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RisMode {
    Ideal,
    Bits(u32),
}

impl FromStr for RisMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "ideal" {
            return Ok(RisMode::Ideal);
        }
        s.strip_prefix("bits=")
            .and_then(|b| b.parse::<u32>().ok())
            .map(RisMode::Bits)
            .ok_or_else(|| format!("mode must be `ideal` or `bits=B`, got `{s}`"))
    }
}

pub fn mode_label(cfg: &ScenarioConfig) -> String {
    match cfg.ris.resolution_bits {
        None => "ideal".to_string(),
        Some(b) => format!("{b}-bit"),
    }
}

/// Command-line overrides applied on top of the loaded config.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub mode: Option<RisMode>,
    pub cancellation: Option<CancellationMode>,
    pub scenario: Option<RisScenario>,
}

impl Overrides {
    pub fn apply(&self, mut cfg: ScenarioConfig) -> Result<ScenarioConfig, CliError> {
        if let Some(seed) = self.seed {
            cfg.montecarlo.master_seed = seed;
        }
        if let Some(trials) = self.trials {
            cfg.montecarlo.trials = trials;
        }
        match self.mode {
            Some(RisMode::Ideal) => cfg.ris.resolution_bits = None,
            Some(RisMode::Bits(b)) => cfg.ris.resolution_bits = Some(b),
            None => {}
        }
        if let Some(mode) = self.cancellation {
            cfg.ris.cancellation_mode = mode;
        }
        if let Some(scenario) = self.scenario {
            cfg.ris.ris_scenario = scenario;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Loads `path`, or the two-antenna reference scenario when no path is given.
pub fn load_or_default(path: Option<&Path>) -> Result<ScenarioConfig, CliError> {
    match path {
        None => Ok(ScenarioConfig::baseline(2)),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| io_error(p, e))?;
            Ok(load_config(&text)?)
        }
    }
}

pub fn engine_options(threads: Option<usize>) -> EngineOptions {
    match threads {
        Some(t) => EngineOptions {
            threads: t.max(1),
            ..EngineOptions::default()
        },
        None => EngineOptions::default(),
    }
}

/// Writes `text` to `path`, or returns it for stdout when `path` is `None`.
pub fn emit(text: &str, path: Option<&Path>) -> Result<Option<String>, CliError> {
    match path {
        Some(p) => {
            fs::write(p, text).map_err(|e| io_error(p, e))?;
            Ok(None)
        }
        None => Ok(Some(text.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_parsing() {
        assert_eq!("ideal".parse::<RisMode>().unwrap(), RisMode::Ideal);
        assert_eq!("bits=3".parse::<RisMode>().unwrap(), RisMode::Bits(3));
        assert!("bits=x".parse::<RisMode>().is_err());
        assert!("3".parse::<RisMode>().is_err());
    }

    #[test]
    fn overrides_revalidate() {
        let cfg = ScenarioConfig::baseline(2);
        let o = Overrides {
            mode: Some(RisMode::Bits(0)),
            ..Default::default()
        };
        assert_eq!(o.apply(cfg.clone()).unwrap_err().exit_code(), 2);
        let o = Overrides {
            seed: Some(5),
            trials: Some(1000),
            mode: Some(RisMode::Bits(4)),
            cancellation: Some(CancellationMode::PerSymbol),
            scenario: Some(RisScenario::Anomalous),
        };
        let c = o.apply(cfg).unwrap();
        assert_eq!(
            (c.montecarlo.master_seed, c.montecarlo.trials, c.ris.resolution_bits),
            (5, 1000, Some(4))
        );
        assert_eq!(mode_label(&c), "4-bit");
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_or_default(Some(Path::new("/nonexistent/cfg.toml"))).unwrap_err();
        assert_eq!(err.exit_code(), 4);
    }
}
