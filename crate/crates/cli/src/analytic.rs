//! Closed-form curves in the simulation CSV layout.

use ris_scb::analytics::{
    er_ceiling, er_user_last, op_closed_form, op_oma, AnalyticsError, ClosedFormInputs, DEFAULT_CEILING_CAP,
};
use ris_scb::montecarlo::SweepSpec;
use ris_scb::ScenarioConfig;

use crate::csv::{render_table, CsvRow};
use crate::CliError;

pub const METRICS: [&str; 6] = ["OP_user", "OP_pair", "OP_oma", "OP_oma_pair", "ER_user", "ER_ceiling"];

/// Marker metric emitted next to rows whose SIC thresholds do not exist.
pub const VIOLATION_METRIC: &str = "assumption_violated";

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticReport {
    pub csv: String,
    /// One message per (sweep point, user) whose target rates are unreachable.
    pub violations: Vec<String>,
}

impl AnalyticReport {
    pub fn into_result(self) -> Result<String, (String, CliError)> {
        if self.violations.is_empty() {
            Ok(self.csv)
        } else {
            let msg = self.violations.join("; ");
            Err((self.csv, CliError::Assumption(msg)))
        }
    }
}

pub fn parse_metrics(list: Option<&str>) -> Result<Vec<&'static str>, CliError> {
    let Some(list) = list else {
        return Ok(METRICS.to_vec());
    };
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|name| {
            METRICS.iter().copied().find(|m| *m == name).ok_or_else(|| {
                CliError::Usage(format!(
                    "unknown analytic metric `{name}`; known: {}",
                    METRICS.join(",")
                ))
            })
        })
        .collect()
}

pub fn run(cfg: &ScenarioConfig, spec: &SweepSpec, metrics: &[&str]) -> Result<AnalyticReport, CliError> {
    let wants = |name: &str| metrics.contains(&name);
    let mut rows = Vec::new();
    let mut violations = Vec::new();
    for &value in &spec.values {
        let at = spec.var.apply(cfg, value)?;
        let base = CsvRow::for_config(&at, spec.var.name(), value);
        let p = at.tx_power_watt();
        let row = |m: usize, k: usize, metric: &str, estimate: f64| CsvRow {
            cluster: m,
            user: k,
            metric: metric.to_string(),
            estimate,
            ..base.clone()
        };
        for m in 0..at.clusters {
            let mut noma = Vec::with_capacity(at.users);
            let mut oma = Vec::with_capacity(at.users);
            for k in 0..at.users {
                let inp = ClosedFormInputs::for_user(&at, m, k, p);
                let op = match op_closed_form(&inp, k) {
                    Ok(v) => v,
                    Err(AnalyticsError::InfeasibleRates { user }) => {
                        violations.push(format!(
                            "{}={value}: user {} of cluster {} cannot reach its SIC rates (stage {})",
                            spec.var.name(),
                            k + 1,
                            m + 1,
                            user + 1
                        ));
                        rows.push(row(m + 1, k + 1, VIOLATION_METRIC, 1.0));
                        1.0
                    }
                    Err(e) => return Err(CliError::Assumption(e.to_string())),
                };
                let op_o = op_oma(&inp, k).map_err(|e| CliError::Assumption(e.to_string()))?;
                noma.push(op);
                oma.push(op_o);
                if wants("OP_user") {
                    rows.push(row(m + 1, k + 1, "OP_user", op));
                }
                if wants("OP_oma") {
                    rows.push(row(m + 1, k + 1, "OP_oma", op_o));
                }
                if k + 1 == at.users {
                    if wants("ER_user") {
                        let er = er_user_last(&inp).map_err(|e| CliError::Assumption(e.to_string()))?;
                        rows.push(row(m + 1, k + 1, "ER_user", er));
                    }
                } else if wants("ER_ceiling") {
                    if let Ok(c) = er_ceiling(&at.noma.power_alloc, k, DEFAULT_CEILING_CAP) {
                        rows.push(row(m + 1, k + 1, "ER_ceiling", c));
                    }
                }
            }
            if wants("OP_pair") {
                rows.push(row(m + 1, 0, "OP_pair", noma.iter().product()));
            }
            if wants("OP_oma_pair") {
                rows.push(row(m + 1, 0, "OP_oma_pair", oma.iter().product()));
            }
        }
    }
    Ok(AnalyticReport {
        csv: render_table(&rows),
        violations,
    })
}
