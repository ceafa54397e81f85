//! Parameter sweeps: `VAR=start:stop:step` or `VAR=v1,v2,...`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::scenario::{ConfigError, ScenarioConfig};

#[derive(Debug, Error, PartialEq)]
pub enum SweepError {
    #[error("sweep must look like VAR=start:stop:step or VAR=v1,v2,...; got `{0}`")]
    Syntax(String),
    #[error("unknown sweep variable `{0}`")]
    UnknownVariable(String),
    #[error("bad sweep value `{0}`")]
    BadValue(String),
    #[error("sweep has no values")]
    Empty,
    #[error("{var} takes integer values, got {value}")]
    NotInteger { var: &'static str, value: f64 },
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    TxPowerDbm,
    Elements,
    /// `0` selects the ideal (unquantized) surface.
    ResolutionBits,
    RxAntennas,
    Alpha1,
    Alpha2,
    Alpha3,
    RicianK1,
    RicianK2,
    D1,
}

impl SweepVar {
    const ALL: [SweepVar; 10] = [
        SweepVar::TxPowerDbm,
        SweepVar::Elements,
        SweepVar::ResolutionBits,
        SweepVar::RxAntennas,
        SweepVar::Alpha1,
        SweepVar::Alpha2,
        SweepVar::Alpha3,
        SweepVar::RicianK1,
        SweepVar::RicianK2,
        SweepVar::D1,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SweepVar::TxPowerDbm => "tx_power_dbm",
            SweepVar::Elements => "N",
            SweepVar::ResolutionBits => "resolution_bits",
            SweepVar::RxAntennas => "L",
            SweepVar::Alpha1 => "alpha1",
            SweepVar::Alpha2 => "alpha2",
            SweepVar::Alpha3 => "alpha3",
            SweepVar::RicianK1 => "rician_k1",
            SweepVar::RicianK2 => "rician_k2",
            SweepVar::D1 => "d1",
        }
    }

    fn is_integer(&self) -> bool {
        matches!(
            self,
            SweepVar::Elements | SweepVar::ResolutionBits | SweepVar::RxAntennas
        )
    }

    /// Current value of this variable in `cfg`.
    pub fn current(&self, cfg: &ScenarioConfig) -> f64 {
        match self {
            SweepVar::TxPowerDbm => cfg.tx_power_dbm,
            SweepVar::Elements => cfg.ris_elements() as f64,
            SweepVar::ResolutionBits => cfg.ris.resolution_bits.unwrap_or(0) as f64,
            SweepVar::RxAntennas => cfg.rx_antennas as f64,
            SweepVar::Alpha1 => cfg.geometry.alpha1,
            SweepVar::Alpha2 => cfg.geometry.alpha2,
            SweepVar::Alpha3 => cfg.geometry.alpha3,
            SweepVar::RicianK1 => cfg.ris.rician_k1,
            SweepVar::RicianK2 => cfg.ris.rician_k2,
            SweepVar::D1 => cfg.geometry.d1,
        }
    }

    /// Copy of `cfg` with this variable set to `value`, revalidated.
    pub fn apply(&self, cfg: &ScenarioConfig, value: f64) -> Result<ScenarioConfig, SweepError> {
        if self.is_integer() && (value.fract() != 0.0 || value < 0.0) {
            return Err(SweepError::NotInteger {
                var: self.name(),
                value,
            });
        }
        let mut out = cfg.clone();
        match self {
            SweepVar::TxPowerDbm => out.tx_power_dbm = value,
            SweepVar::Elements => out.ris.elements = Some(value as usize),
            SweepVar::ResolutionBits => out.ris.resolution_bits = if value == 0.0 { None } else { Some(value as u32) },
            SweepVar::RxAntennas => out.rx_antennas = value as usize,
            SweepVar::Alpha1 => out.geometry.alpha1 = value,
            SweepVar::Alpha2 => out.geometry.alpha2 = value,
            SweepVar::Alpha3 => out.geometry.alpha3 = value,
            SweepVar::RicianK1 => out.ris.rician_k1 = value,
            SweepVar::RicianK2 => out.ris.rician_k2 = value,
            SweepVar::D1 => out.geometry.d1 = value,
        }
        out.validate()?;
        Ok(out)
    }
}

impl fmt::Display for SweepVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepVar {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let alias = match s {
            "p" | "p_dbm" | "tx_power" => Some(SweepVar::TxPowerDbm),
            "elements" => Some(SweepVar::Elements),
            "b" | "bits" => Some(SweepVar::ResolutionBits),
            "rx_antennas" => Some(SweepVar::RxAntennas),
            _ => None,
        };
        alias
            .or_else(|| SweepVar::ALL.iter().copied().find(|v| v.name() == s))
            .ok_or_else(|| SweepError::UnknownVariable(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub var: SweepVar,
    /// In the order given; ranges are ascending or descending per the step sign.
    pub values: Vec<f64>,
}

impl SweepSpec {
    pub fn new(var: SweepVar, values: Vec<f64>) -> Result<Self, SweepError> {
        if values.is_empty() {
            return Err(SweepError::Empty);
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(SweepError::BadValue(bad.to_string()));
        }
        Ok(SweepSpec { var, values })
    }

    /// A single point at the configuration's current value.
    pub fn single(var: SweepVar, cfg: &ScenarioConfig) -> Self {
        SweepSpec {
            var,
            values: vec![var.current(cfg)],
        }
    }
}

fn parse_number(s: &str) -> Result<f64, SweepError> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| SweepError::BadValue(s.trim().to_string()))
}

fn parse_range(start: f64, stop: f64, step: f64) -> Result<Vec<f64>, SweepError> {
    if step == 0.0 || !step.is_finite() || (stop - start) * step < 0.0 {
        return Err(SweepError::BadValue(format!("{start}:{stop}:{step}")));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    // Index-based generation keeps values free of accumulated drift.
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

impl FromStr for SweepSpec {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (var, rest) = s.split_once('=').ok_or_else(|| SweepError::Syntax(s.to_string()))?;
        let var: SweepVar = var.parse()?;
        let rest = rest.trim();
        if rest.is_empty() {
            return Err(SweepError::Empty);
        }
        let values = if rest.contains(':') {
            let parts: Vec<&str> = rest.split(':').collect();
            if parts.len() != 3 {
                return Err(SweepError::Syntax(s.to_string()));
            }
            parse_range(
                parse_number(parts[0])?,
                parse_number(parts[1])?,
                parse_number(parts[2])?,
            )?
        } else {
            rest.split(',').map(parse_number).collect::<Result<Vec<_>, _>>()?
        };
        SweepSpec::new(var, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_range_and_list() {
        let s: SweepSpec = "tx_power_dbm=0:50:10".parse().unwrap();
        assert_eq!(s.var, SweepVar::TxPowerDbm);
        assert_eq!(s.values, vec![0.0, 10.0, 20.0, 30.0, 40.0, 50.0]);
        let s: SweepSpec = "resolution_bits=3,4,5,6".parse().unwrap();
        assert_eq!(s.values, vec![3.0, 4.0, 5.0, 6.0]);
        let s: SweepSpec = "p=0:1:0.1".parse().unwrap();
        assert_eq!(s.values.len(), 11);
        let s: SweepSpec = "N=64:16:-16".parse().unwrap();
        assert_eq!(s.values, vec![64.0, 48.0, 32.0, 16.0]);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            "tx_power_dbm".parse::<SweepSpec>(),
            Err(SweepError::Syntax(_))
        ));
        assert!(matches!(
            "foo=1,2".parse::<SweepSpec>(),
            Err(SweepError::UnknownVariable(_))
        ));
        assert!(matches!("N=1:2".parse::<SweepSpec>(), Err(SweepError::Syntax(_))));
        assert!(matches!("N=1:5:-1".parse::<SweepSpec>(), Err(SweepError::BadValue(_))));
        assert!(matches!("N=a,b".parse::<SweepSpec>(), Err(SweepError::BadValue(_))));
        assert!(matches!("N=".parse::<SweepSpec>(), Err(SweepError::Empty)));
    }

    #[test]
    fn apply_values() {
        let cfg = ScenarioConfig::baseline(2);
        let c = SweepVar::ResolutionBits.apply(&cfg, 3.0).unwrap();
        assert_eq!(c.ris.resolution_bits, Some(3));
        assert_eq!(
            SweepVar::ResolutionBits.apply(&c, 0.0).unwrap().ris.resolution_bits,
            None
        );
        assert!(matches!(
            SweepVar::Elements.apply(&cfg, 2.5),
            Err(SweepError::NotInteger { .. })
        ));
        assert!(matches!(
            SweepVar::RxAntennas.apply(&cfg, 0.0),
            Err(SweepError::Config(_))
        ));
        assert_eq!(
            SweepVar::TxPowerDbm.current(&SweepVar::TxPowerDbm.apply(&cfg, 12.0).unwrap()),
            12.0
        );
    }
}
