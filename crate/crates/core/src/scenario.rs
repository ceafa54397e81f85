//! Experiment description, validation, and unit conversions.
//!
//! A [`ScenarioConfig`] is read from a TOML document with a handful of
//! top-level scalars and the dotted sections `geometry`, `noma`, `ris`,
//! `montecarlo` and `power_model`. Everything is validated once at load
//! time; afterwards the config is immutable and shared freely between
//! worker threads.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::pathloss;

/// Thermal noise density in dBm/Hz.
pub const THERMAL_NOISE_DBM_PER_HZ: f64 = -174.0;

/// Tolerance on the NOMA power budget `sum(power_alloc) == 1`.
pub const POWER_SUM_TOL: f64 = 1e-12;

/// Largest accepted phase/amplitude resolution in bits.
pub const MAX_RESOLUTION_BITS: u32 = 24;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid config field `{field}`: {reason}")]
    Invalid { field: String, reason: String },
    #[error("config serialization failed: {0}")]
    Serialize(String),
}

impl ConfigError {
    fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        ConfigError::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

/// Reflected-path large-scale fading law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RisScenario {
    /// Product-distance law (sub-6 GHz, element size comparable to the wavelength).
    Diffuse,
    /// Sum-distance law (mmWave, specular reflection).
    Anomalous,
}

impl RisScenario {
    pub fn as_str(&self) -> &'static str {
        match self {
            RisScenario::Diffuse => "diffuse",
            RisScenario::Anomalous => "anomalous",
        }
    }
}

impl std::str::FromStr for RisScenario {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "diffuse" => Ok(RisScenario::Diffuse),
            "anomalous" => Ok(RisScenario::Anomalous),
            other => Err(ConfigError::invalid(
                "ris_scenario",
                format!("unknown scenario `{other}` (expected diffuse|anomalous)"),
            )),
        }
    }
}

/// Row structure of the cancellation system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CancellationMode {
    /// One equation per (user, receive antenna): the reflected sum over all
    /// transmit antennas cancels the summed inter-cluster interference.
    Aggregate,
    /// One equation per (user, receive antenna, interfering transmit antenna).
    PerSymbol,
}

impl CancellationMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            CancellationMode::Aggregate => "aggregate",
            CancellationMode::PerSymbol => "per-symbol",
        }
    }
}

impl std::str::FromStr for CancellationMode {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "aggregate" => Ok(CancellationMode::Aggregate),
            "per-symbol" => Ok(CancellationMode::PerSymbol),
            other => Err(ConfigError::invalid(
                "cancellation_mode",
                format!("unknown mode `{other}` (expected aggregate|per-symbol)"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Geometry {
    /// BS to RIS distance in meters.
    #[serde(default = "default_d1")]
    pub d1: f64,
    /// RIS to user distances, indexed `[cluster][user]`.
    pub d_user: Vec<Vec<f64>>,
    /// BS to user distances, indexed `[cluster][user]`.
    pub d_direct: Vec<Vec<f64>>,
    #[serde(default = "default_alpha_reflect")]
    pub alpha1: f64,
    #[serde(default = "default_alpha_reflect")]
    pub alpha2: f64,
    #[serde(default = "default_alpha_direct")]
    pub alpha3: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NomaSettings {
    /// Squared power-allocation factors, weakest (farthest) user first.
    pub power_alloc: Vec<f64>,
    /// Target rates in bits per channel use.
    pub target_rate: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RisSettings {
    /// Element count. When absent, five times the minimal feasible count.
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub elements: Option<usize>,
    #[serde(default = "default_scenario")]
    pub ris_scenario: RisScenario,
    #[serde(default = "default_cancellation")]
    pub cancellation_mode: CancellationMode,
    /// Phase/amplitude resolution; absent means a continuous (ideal) surface.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution_bits: Option<u32>,
    #[serde(default = "default_rician")]
    pub rician_k1: f64,
    #[serde(default = "default_rician")]
    pub rician_k2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloSettings {
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default = "default_seed")]
    pub master_seed: u64,
}

impl Default for MonteCarloSettings {
    fn default() -> Self {
        MonteCarloSettings {
            trials: default_trials(),
            master_seed: default_seed(),
        }
    }
}

/// Circuit power model used by the energy-efficiency metric.
///
/// The defaults are placeholders chosen for this tool, not measured values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerModel {
    #[serde(default = "default_p_bs")]
    pub p_bs_watt: f64,
    #[serde(default = "default_p_user")]
    pub p_user_watt: f64,
    #[serde(default = "default_p_ris")]
    pub p_ris_watt: f64,
    /// Inverse power-amplifier efficiency, `>= 1`.
    #[serde(default = "default_amp_factor")]
    pub amp_factor: f64,
}

impl Default for PowerModel {
    fn default() -> Self {
        PowerModel {
            p_bs_watt: default_p_bs(),
            p_user_watt: default_p_user(),
            p_ris_watt: default_p_ris(),
            amp_factor: default_amp_factor(),
        }
    }
}

/// Full experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Transmit antennas, one cluster per antenna.
    #[serde(rename = "M")]
    pub clusters: usize,
    /// Users per cluster.
    #[serde(rename = "K")]
    pub users: usize,
    /// Receive antennas per user.
    #[serde(rename = "L")]
    pub rx_antennas: usize,
    #[serde(default = "default_tx_power")]
    pub tx_power_dbm: f64,
    #[serde(default = "default_bandwidth")]
    pub bandwidth_hz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_dbm_override: Option<f64>,
    pub geometry: Geometry,
    pub noma: NomaSettings,
    pub ris: RisSettings,
    #[serde(default)]
    pub montecarlo: MonteCarloSettings,
    #[serde(default)]
    pub power_model: PowerModel,
}

fn default_d1() -> f64 {
    80.0
}
fn default_alpha_reflect() -> f64 {
    2.2
}
fn default_alpha_direct() -> f64 {
    3.5
}
fn default_scenario() -> RisScenario {
    RisScenario::Diffuse
}
fn default_cancellation() -> CancellationMode {
    CancellationMode::Aggregate
}
fn default_rician() -> f64 {
    3.0
}
fn default_trials() -> u64 {
    100_000
}
fn default_seed() -> u64 {
    20_201_207
}
fn default_tx_power() -> f64 {
    30.0
}
fn default_bandwidth() -> f64 {
    1e8
}
fn default_p_bs() -> f64 {
    10.0
}
fn default_p_user() -> f64 {
    0.1
}
fn default_p_ris() -> f64 {
    0.01
}
fn default_amp_factor() -> f64 {
    1.2
}

/// `-174 + 10 log10(BW)` dBm.
pub fn noise_power_dbm(bandwidth_hz: f64) -> f64 {
    THERMAL_NOISE_DBM_PER_HZ + 10.0 * bandwidth_hz.log10()
}

pub fn dbm_to_watt(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watt_to_dbm(watt: f64) -> f64 {
    10.0 * watt.log10() + 30.0
}

/// Parses and validates a TOML scenario document.
pub fn load_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

impl ScenarioConfig {
    /// The configuration used throughout the numerical section: two
    /// clusters of two users with the second cluster mirroring the first.
    pub fn baseline(rx_antennas: usize) -> Self {
        ScenarioConfig {
            clusters: 2,
            users: 2,
            rx_antennas,
            tx_power_dbm: default_tx_power(),
            bandwidth_hz: default_bandwidth(),
            noise_dbm_override: None,
            geometry: Geometry {
                d1: 80.0,
                d_user: vec![vec![160.0, 80.0], vec![160.0, 80.0]],
                d_direct: vec![vec![200.0, 100.0], vec![200.0, 100.0]],
                alpha1: 2.2,
                alpha2: 2.2,
                alpha3: 3.5,
            },
            noma: NomaSettings {
                power_alloc: vec![0.6, 0.4],
                target_rate: vec![1.0, 1.5],
            },
            ris: RisSettings {
                elements: None,
                ris_scenario: RisScenario::Diffuse,
                cancellation_mode: CancellationMode::Aggregate,
                resolution_bits: None,
                rician_k1: 3.0,
                rician_k2: 3.0,
            },
            montecarlo: MonteCarloSettings::default(),
            power_model: PowerModel::default(),
        }
    }

    pub fn to_toml(&self) -> Result<String, ConfigError> {
        toml::to_string(self).map_err(|e| ConfigError::Serialize(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let (m, k) = (self.clusters, self.users);
        for (name, v) in [("M", m), ("K", k), ("L", self.rx_antennas)] {
            if v == 0 {
                return Err(ConfigError::invalid(name, "must be at least 1"));
            }
        }
        if let Some(0) = self.ris.elements {
            return Err(ConfigError::invalid("ris.N", "must be at least 1"));
        }
        if !self.tx_power_dbm.is_finite() {
            return Err(ConfigError::invalid("tx_power_dbm", "must be finite"));
        }
        if !(self.bandwidth_hz.is_finite() && self.bandwidth_hz > 0.0) {
            return Err(ConfigError::invalid("bandwidth_hz", "must be positive"));
        }
        if let Some(n) = self.noise_dbm_override {
            if !n.is_finite() {
                return Err(ConfigError::invalid("noise_dbm_override", "must be finite"));
            }
        }

        let geo = &self.geometry;
        positive("geometry.d1", geo.d1)?;
        positive("geometry.alpha1", geo.alpha1)?;
        positive("geometry.alpha2", geo.alpha2)?;
        positive("geometry.alpha3", geo.alpha3)?;
        check_grid("geometry.d_user", &geo.d_user, m, k)?;
        check_grid("geometry.d_direct", &geo.d_direct, m, k)?;

        for (name, v) in [
            ("ris.rician_k1", self.ris.rician_k1),
            ("ris.rician_k2", self.ris.rician_k2),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(ConfigError::invalid(
                    name,
                    "Rician factor must be finite and non-negative",
                ));
            }
        }
        if let Some(b) = self.ris.resolution_bits {
            if b == 0 || b > MAX_RESOLUTION_BITS {
                return Err(ConfigError::invalid(
                    "ris.resolution_bits",
                    format!("must be in 1..={MAX_RESOLUTION_BITS}"),
                ));
            }
        }

        let alloc = &self.noma.power_alloc;
        if alloc.len() != k {
            return Err(ConfigError::invalid(
                "noma.power_alloc",
                format!("expected {k} entries, found {}", alloc.len()),
            ));
        }
        if alloc.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(ConfigError::invalid("noma.power_alloc", "entries must be positive"));
        }
        let total: f64 = alloc.iter().sum();
        if (total - 1.0).abs() > POWER_SUM_TOL {
            return Err(ConfigError::invalid(
                "noma.power_alloc",
                format!("power allocation must sum to 1 (sum is {total})"),
            ));
        }
        if alloc.windows(2).any(|w| w[1] > w[0]) {
            return Err(ConfigError::invalid(
                "noma.power_alloc",
                "power allocation must be non-increasing in the user index",
            ));
        }
        let rates = &self.noma.target_rate;
        if rates.len() != k {
            return Err(ConfigError::invalid(
                "noma.target_rate",
                format!("expected {k} entries, found {}", rates.len()),
            ));
        }
        if rates.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(ConfigError::invalid(
                "noma.target_rate",
                "rates must be finite and non-negative",
            ));
        }

        let pm = &self.power_model;
        for (name, v) in [
            ("power_model.p_bs_watt", pm.p_bs_watt),
            ("power_model.p_user_watt", pm.p_user_watt),
            ("power_model.p_ris_watt", pm.p_ris_watt),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(ConfigError::invalid(name, "must be finite and non-negative"));
            }
        }
        if !(pm.amp_factor.is_finite() && pm.amp_factor >= 1.0) {
            return Err(ConfigError::invalid("power_model.amp_factor", "must be at least 1"));
        }
        if self.montecarlo.trials == 0 {
            return Err(ConfigError::invalid("montecarlo.trials", "must be at least 1"));
        }
        Ok(())
    }

    pub fn noise_dbm(&self) -> f64 {
        self.noise_dbm_override
            .unwrap_or_else(|| noise_power_dbm(self.bandwidth_hz))
    }

    pub fn noise_watt(&self) -> f64 {
        dbm_to_watt(self.noise_dbm())
    }

    pub fn tx_power_watt(&self) -> f64 {
        dbm_to_watt(self.tx_power_dbm)
    }

    /// RIS element count, resolving an absent value to `5 * min_ris_overall`.
    pub fn ris_elements(&self) -> usize {
        self.ris.elements.unwrap_or_else(|| 5 * pathloss::min_ris_overall(self))
    }

    /// Short stable hash of the canonical serialization (includes the seed).
    pub fn fingerprint(&self) -> String {
        let text = self.to_toml().unwrap_or_else(|_| format!("{self:?}"));
        let digest = Sha256::digest(text.as_bytes());
        hex::encode(&digest[..8])
    }
}

fn positive(field: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ConfigError::invalid(
            field,
            format!("must be strictly positive, got {v}"),
        ))
    }
}

fn check_grid(field: &str, grid: &[Vec<f64>], m: usize, k: usize) -> Result<(), ConfigError> {
    if grid.len() != m {
        return Err(ConfigError::invalid(
            field,
            format!("expected {m} clusters, found {}", grid.len()),
        ));
    }
    for (ci, row) in grid.iter().enumerate() {
        if row.len() != k {
            return Err(ConfigError::invalid(
                field,
                format!("cluster {} lists {} users, expected {k}", ci + 1, row.len()),
            ));
        }
        for &d in row {
            positive(field, d)?;
        }
    }
    Ok(())
}
