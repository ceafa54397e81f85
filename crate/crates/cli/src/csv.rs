//! The single output table format shared by `simulate` and `analytic`.
//!
//! Cluster and user columns are 1-based; `0` marks a cluster-wide (user 0)
//! or network-wide (cluster 0, user 0) statistic. Floats use Rust's
//! locale-independent formatting: shortest round-trip for the sweep value
//! and scientific notation for estimates.

use std::fmt::Write;

use ris_scb::montecarlo::EstimatorResult;
use ris_scb::ScenarioConfig;

use crate::mode_label;

pub const HEADER: &str =
    "sweep_var,sweep_value,m,k,metric,estimate,stderr,trials,mode,cancellation_mode,scenario,config_fingerprint";

#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub sweep_var: String,
    pub sweep_value: f64,
    pub cluster: usize,
    pub user: usize,
    pub metric: String,
    pub estimate: f64,
    pub stderr: f64,
    pub trials: u64,
    pub mode: String,
    pub cancellation_mode: String,
    pub scenario: String,
    pub fingerprint: String,
}

impl CsvRow {
    /// Row skeleton carrying the configuration columns of `cfg`.
    pub fn for_config(cfg: &ScenarioConfig, sweep_var: &str, sweep_value: f64) -> Self {
        CsvRow {
            sweep_var: sweep_var.to_string(),
            sweep_value,
            cluster: 0,
            user: 0,
            metric: String::new(),
            estimate: 0.0,
            stderr: 0.0,
            trials: 0,
            mode: mode_label(cfg),
            cancellation_mode: cfg.ris.cancellation_mode.as_str().to_string(),
            scenario: cfg.ris.ris_scenario.as_str().to_string(),
            fingerprint: cfg.fingerprint(),
        }
    }

    pub fn from_result(base: &CsvRow, r: &EstimatorResult) -> Self {
        CsvRow {
            cluster: r.cluster.map_or(0, |m| m + 1),
            user: r.user.map_or(0, |k| k + 1),
            metric: r.metric.name().to_string(),
            estimate: r.estimate,
            stderr: r.std_error,
            trials: r.trials,
            fingerprint: if r.fingerprint.is_empty() {
                base.fingerprint.clone()
            } else {
                r.fingerprint.clone()
            },
            ..base.clone()
        }
    }

    pub fn render(&self) -> String {
        format!(
            "{},{},{},{},{},{:e},{:e},{},{},{},{},{}",
            self.sweep_var,
            self.sweep_value,
            self.cluster,
            self.user,
            self.metric,
            self.estimate,
            self.stderr,
            self.trials,
            self.mode,
            self.cancellation_mode,
            self.scenario,
            self.fingerprint
        )
    }
}

pub fn render_table(rows: &[CsvRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(HEADER);
    out.push('\n');
    for row in rows {
        writeln!(out, "{}", row.render()).expect("writing to a String cannot fail");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_row_layout() {
        let cfg = ScenarioConfig::baseline(2);
        let mut row = CsvRow::for_config(&cfg, "tx_power_dbm", 30.0);
        row.metric = "OP_user".into();
        row.estimate = 0.25;
        row.stderr = 1.5e-3;
        row.trials = 1000;
        row.cluster = 1;
        row.user = 2;
        let table = render_table(&[row]);
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines[0], HEADER);
        let fields: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(fields.len(), 12);
        assert_eq!(
            &fields[..9],
            &[
                "tx_power_dbm",
                "30",
                "1",
                "2",
                "OP_user",
                "2.5e-1",
                "1.5e-3",
                "1000",
                "ideal"
            ]
        );
        assert_eq!(fields[9], "aggregate");
        assert_eq!(fields[10], "diffuse");
        assert_eq!(fields[11].len(), 16);
    }
}
