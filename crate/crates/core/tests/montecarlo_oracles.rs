use ris_scb::analytics::{er_user_last, op_closed_form, ClosedFormInputs};
use ris_scb::montecarlo::{estimate, estimate_powers, EngineOptions, Metric};
use ris_scb::scenario::dbm_to_watt;
use ris_scb::ScenarioConfig;

fn closed_inputs(cfg: &ScenarioConfig, m: usize, k: usize, p_dbm: f64) -> ClosedFormInputs {
    ClosedFormInputs {
        rx_antennas: cfg.rx_antennas,
        power_alloc: cfg.noma.power_alloc.clone(),
        target_rates: cfg.noma.target_rate.clone(),
        p_watt: dbm_to_watt(p_dbm),
        noise_watt: cfg.noise_watt(),
        l_direct: cfg.geometry.d_direct[m][k].powf(-cfg.geometry.alpha3),
    }
}

#[test]
fn single_cluster_outage_matches_closed_form() {
    let mut cfg = ScenarioConfig::baseline(1);
    cfg.clusters = 1;
    cfg.geometry.d_user.truncate(1);
    cfg.geometry.d_direct.truncate(1);
    cfg.ris.elements = Some(4);
    cfg.montecarlo.trials = 100_000;
    let powers = [-5.0, 0.0, 5.0];
    let est = estimate_powers(&cfg, &powers, &[Metric::OpUser], &EngineOptions::default()).unwrap();
    for (point, &p) in est.iter().zip(&powers) {
        for k in 0..2 {
            let r = point.find(Metric::OpUser, Some(0), Some(k)).unwrap();
            let closed = op_closed_form(&closed_inputs(&cfg, 0, k, p), k).unwrap();
            assert!(r.std_error > 0.0);
            assert!(
                r.within(closed, 3.0),
                "p={p} k={k}: {} vs {closed} (se {})",
                r.estimate,
                r.std_error
            );
        }
    }
}

#[test]
fn nearest_user_rate_matches_closed_form() {
    let mut cfg = ScenarioConfig::baseline(2);
    cfg.tx_power_dbm = 30.0;
    cfg.montecarlo.trials = 20_000;
    let est = estimate(&cfg, &[Metric::ErUser], &EngineOptions::default()).unwrap();
    for m in 0..2 {
        let r = est.find(Metric::ErUser, Some(m), Some(1)).unwrap();
        let closed = er_user_last(&closed_inputs(&cfg, m, 1, 30.0)).unwrap();
        assert!(
            r.within(closed, 3.0),
            "cluster {m}: {} vs {closed} (se {})",
            r.estimate,
            r.std_error
        );
    }
}

#[test]
fn quantized_surface_leaves_residue_and_flags_feasibility() {
    let mut cfg = ScenarioConfig::baseline(2);
    cfg.ris.resolution_bits = Some(3);
    cfg.montecarlo.trials = 500;
    let metrics = [Metric::ResidueMean, Metric::FeasibilityRate];
    let est = estimate(&cfg, &metrics, &EngineOptions::default()).unwrap();
    assert!(est.find(Metric::ResidueMean, Some(0), Some(0)).unwrap().estimate > 0.0);
    let f = est.find(Metric::FeasibilityRate, None, None).unwrap();
    assert!((0.0..=1.0).contains(&f.estimate));
    assert_eq!(est.failed_trials, 0);
}
