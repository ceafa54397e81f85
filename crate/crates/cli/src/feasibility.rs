use std::fmt::Write;

use ris_scb::pathloss::{feasibility_report, BindingConstraint};
use ris_scb::{CancellationMode, ScenarioConfig};

/// Minimal RIS sizes per user plus the overall requirement.
pub fn run(cfg: &ScenarioConfig) -> String {
    let rep = feasibility_report(cfg);
    let mut out = String::new();
    let _ = writeln!(out, "cluster,user,min_N_diffuse,min_N_anomalous");
    for u in &rep.per_user {
        let _ = writeln!(out, "{},{},{},{}", u.cluster + 1, u.user + 1, u.diffuse, u.anomalous);
    }
    let rank_label = match cfg.ris.cancellation_mode {
        CancellationMode::Aggregate => "MKL",
        CancellationMode::PerSymbol => "MKL(M-1)",
    };
    let binding = match rep.binding {
        BindingConstraint::Rank => rank_label.to_string(),
        BindingConstraint::PathLoss => format!("path loss ({})", cfg.ris.ris_scenario.as_str()),
    };
    let _ = writeln!(out, "scenario: {}", cfg.ris.ris_scenario.as_str());
    let _ = writeln!(out, "path-loss bound: {}", rep.pathloss_bound);
    let _ = writeln!(out, "{rank_label}: {}", rep.rank_bound);
    let _ = writeln!(out, "overall: {}", rep.overall);
    let _ = writeln!(out, "binding constraint: {binding}");
    if let Some(w) = rep.warning {
        let _ = writeln!(out, "warning: {w}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ris_scb::RisScenario;

    #[test]
    fn baseline_is_rank_bound() {
        let out = run(&ScenarioConfig::baseline(2));
        assert!(out.contains("overall: 8"));
        assert!(out.contains("binding constraint: MKL"));
    }

    #[test]
    fn anomalous_triple() {
        let mut cfg = ScenarioConfig::baseline(2);
        cfg.ris.ris_scenario = RisScenario::Anomalous;
        cfg.geometry.alpha1 = 3.5;
        cfg.geometry.alpha2 = 3.5;
        assert!(run(&cfg).contains("overall: 8"));
    }

    #[test]
    fn single_cluster_is_kl() {
        let mut cfg = ScenarioConfig::baseline(3);
        cfg.clusters = 1;
        cfg.geometry.d_user.truncate(1);
        cfg.geometry.d_direct.truncate(1);
        assert!(run(&cfg).contains("overall: 6"));
    }
}
