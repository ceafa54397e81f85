//! Monte Carlo sweeps and single-trial dumps.

use std::fmt::Write as _;
use std::io::Write;

use ris_scb::analytics::dissipated_power;
use ris_scb::beamforming::{build_effective_matrix, residue_vector};
use ris_scb::montecarlo::{run_sweep, EngineError, EngineOptions, Metric, Simulator, SweepSpec, SweepVar};
use ris_scb::ScenarioConfig;

use crate::csv::{render_table, CsvRow};
use crate::CliError;

#[derive(Debug)]
pub struct SimulationOutput {
    pub csv: String,
    /// Sweep points that produced no rows.
    pub failures: Vec<(f64, EngineError)>,
}

impl SimulationOutput {
    pub fn into_result(self) -> Result<String, (String, CliError)> {
        match self.failures.into_iter().next() {
            None => Ok(self.csv),
            Some((_, e)) => Err((self.csv, CliError::Engine(e))),
        }
    }
}

pub fn parse_metrics(list: Option<&str>) -> Result<Vec<Metric>, CliError> {
    match list {
        None => Ok(Metric::ALL.to_vec()),
        Some(list) => list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<Metric>().map_err(CliError::Usage))
            .collect(),
    }
}

/// Runs the sweep and renders every estimate as a CSV row.
///
/// Progress and the dissipated-power breakdown go to `log`.
pub fn run(
    cfg: &ScenarioConfig,
    spec: &SweepSpec,
    metrics: &[Metric],
    opts: &EngineOptions,
    log: &mut dyn Write,
) -> Result<SimulationOutput, CliError> {
    // Power sweeps share realizations, so they run as one batch.
    let batches: Vec<SweepSpec> = if spec.var == SweepVar::TxPowerDbm {
        vec![spec.clone()]
    } else {
        spec.values
            .iter()
            .map(|&v| SweepSpec::new(spec.var, vec![v]))
            .collect::<Result<_, _>>()?
    };
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let total = spec.values.len();
    let mut done = 0;
    for batch in &batches {
        let _ = writeln!(
            log,
            "[{}/{}] {}={:?}, {} trials",
            done + 1,
            total,
            spec.var.name(),
            batch.values,
            cfg.montecarlo.trials
        );
        for point in run_sweep(cfg, batch, metrics, opts)? {
            done += 1;
            let est = match point.outcome {
                Ok(est) => est,
                Err(e) => {
                    let _ = writeln!(log, "  {}={} failed: {e}", spec.var.name(), point.value);
                    failures.push((point.value, e));
                    continue;
                }
            };
            let at = spec.var.apply(cfg, point.value)?;
            log_power_model(&at, log);
            if est.failed_trials > 0 {
                let _ = writeln!(
                    log,
                    "  {} trial(s) failed numerically and were skipped",
                    est.failed_trials
                );
            }
            let base = CsvRow::for_config(&at, spec.var.name(), point.value);
            rows.extend(est.results.iter().map(|r| CsvRow::from_result(&base, r)));
        }
    }
    Ok(SimulationOutput {
        csv: render_table(&rows),
        failures,
    })
}

fn log_power_model(cfg: &ScenarioConfig, log: &mut dyn Write) {
    let pm = &cfg.power_model;
    let p = cfg.tx_power_watt();
    let n = cfg.ris_elements();
    let total = dissipated_power(pm, p, cfg.users, n);
    let _ = writeln!(
        log,
        "  power model at {} dBm: P_B={} W, K*P_U={} W, p*eps_b={:.6e} W, N*P_L={} W (N={n}), total={:.6e} W",
        cfg.tx_power_dbm,
        pm.p_bs_watt,
        cfg.users as f64 * pm.p_user_watt,
        p * pm.amp_factor,
        n as f64 * pm.p_ris_watt,
        total
    );
}

/// One realization as `block,row,col,re,im`: the effective matrix, the
/// cancellation target, the applied coefficients and per-user residue vectors
/// (rows of the residue block are `(m-1)*K + k`, columns the antenna).
pub fn dump_trial(cfg: &ScenarioConfig, index: u64) -> Result<String, CliError> {
    let sim = Simulator::new(cfg)?;
    let ch = sim.draw(index);
    let sys = build_effective_matrix(&ch, sim.gains(), cfg.ris.cancellation_mode);
    let pb = sim
        .beamforming(&ch)
        .map_err(|source| CliError::Engine(EngineError::Trial { index, source }))?;
    let mut out = String::from("block,row,col,re,im\n");
    for r in 0..sys.h_tilde.nrows() {
        for c in 0..sys.h_tilde.ncols() {
            let z = sys.h_tilde[(r, c)];
            let _ = writeln!(out, "H_tilde,{},{},{:e},{:e}", r + 1, c + 1, z.re, z.im);
        }
    }
    for (r, z) in sys.b_target.iter().enumerate() {
        let _ = writeln!(out, "B,{},1,{:e},{:e}", r + 1, z.re, z.im);
    }
    for (n, z) in pb.phi.iter().enumerate() {
        let _ = writeln!(out, "phi,{},1,{:e},{:e}", n + 1, z.re, z.im);
    }
    for m in 0..cfg.clusters {
        for k in 0..cfg.users {
            for (l, z) in residue_vector(&ch, sim.gains(), &pb, m, k).iter().enumerate() {
                let _ = writeln!(out, "residue,{},{},{:e},{:e}", m * cfg.users + k + 1, l + 1, z.re, z.im);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csv::HEADER;

    fn small() -> ScenarioConfig {
        let mut cfg = ScenarioConfig::baseline(2);
        cfg.ris.elements = Some(12);
        cfg.montecarlo.trials = 200;
        cfg
    }

    #[test]
    fn power_sweep_rows() {
        let cfg = small();
        let spec: SweepSpec = "tx_power_dbm=20:30:10".parse().unwrap();
        let mut log = Vec::new();
        let out = run(
            &cfg,
            &spec,
            &[Metric::OpUser, Metric::Se],
            &EngineOptions::single_threaded(),
            &mut log,
        )
        .unwrap();
        assert!(out.failures.is_empty());
        let lines: Vec<&str> = out.csv.lines().collect();
        assert_eq!(lines[0], HEADER);
        // 2 points × (4 OP_user + 2 SE)
        assert_eq!(lines.len(), 1 + 12);
        assert!(lines[1].starts_with("tx_power_dbm,20,1,1,OP_user,"));
        assert!(String::from_utf8(log).unwrap().contains("power model"));
    }

    #[test]
    fn invalid_point_is_recorded() {
        let cfg = small();
        let spec: SweepSpec = "resolution_bits=2.5,3".parse().unwrap();
        let out = run(
            &cfg,
            &spec,
            &[Metric::ResidueMean],
            &EngineOptions::single_threaded(),
            &mut Vec::new(),
        )
        .unwrap();
        assert_eq!(out.failures.len(), 1);
        assert_eq!(out.csv.lines().count(), 1 + 4);
        assert!(out.csv.lines().nth(1).unwrap().contains(",3-bit,"));
        assert_eq!(out.into_result().unwrap_err().1.exit_code(), 2);
    }

    #[test]
    fn dump_has_all_blocks() {
        let cfg = small();
        let dump = dump_trial(&cfg, 3).unwrap();
        for block in ["H_tilde,", "B,", "phi,", "residue,"] {
            assert!(dump.lines().any(|l| l.starts_with(block)), "{block}");
        }
        // M·K·L residue entries and N coefficients.
        assert_eq!(dump.lines().filter(|l| l.starts_with("residue,")).count(), 8);
        assert_eq!(dump.lines().filter(|l| l.starts_with("phi,")).count(), 12);
    }
}
