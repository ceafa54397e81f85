//! Link-level simulation and closed-form analysis of signal-cancellation
//! passive beamforming in RIS-aided MIMO-NOMA downlinks.
//!
//! The crate is organized bottom-up: [`scenario`] describes an experiment,
//! [`channel`] and [`pathloss`] produce fading and large-scale gains,
//! [`beamforming`] designs the RIS coefficients, [`link_metrics`] turns one
//! realization into SINRs and outage events, [`analytics`] holds the closed
//! forms, and [`montecarlo`] runs reproducible parallel estimation.

pub mod analytics;
pub mod beamforming;
pub mod channel;
pub mod link_metrics;
pub mod montecarlo;
pub mod numerics;
pub mod pathloss;
pub mod scenario;

pub use scenario::{load_config, CancellationMode, ConfigError, RisScenario, ScenarioConfig};
