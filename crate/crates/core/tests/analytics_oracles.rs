use std::f64::consts::LN_2;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use ris_scb::analytics::{
    er_from_constant, op_closed_form, op_oma, op_oma_pair, op_pair_closed_form, ClosedFormInputs,
};
use ris_scb::numerics::{lower_incomplete_gamma_regularized, quadrature_semi_infinite};
use ris_scb::scenario::dbm_to_watt;

fn inputs(l: usize, p_dbm: f64) -> ClosedFormInputs {
    ClosedFormInputs {
        rx_antennas: l,
        power_alloc: vec![0.6, 0.4],
        target_rates: vec![1.0, 1.5],
        p_watt: dbm_to_watt(p_dbm),
        noise_watt: dbm_to_watt(-94.0),
        l_direct: 100f64.powf(-3.5),
    }
}

/// `(1/ln2)·∫₀^∞ (1 − F(x))/(1+x) dx` with `F` the SINR distribution of the
/// nearest user: `1 − F(x) = Q(L, C·x)`.
fn er_by_quadrature(c: f64, l: usize) -> f64 {
    quadrature_semi_infinite(
        |x| (1.0 - lower_incomplete_gamma_regularized(l as f64, c * x).unwrap()) / (1.0 + x),
        1e-12,
    )
    .unwrap()
        / LN_2
}

#[test]
fn ergodic_rate_matches_quadrature() {
    let mut worst: f64 = 0.0;
    for l in 1..=4 {
        for e in -8..=2 {
            for &mant in &[1.0, 3.0] {
                let c = mant * 10f64.powf(e as f64 / 2.0);
                if !(1e-4..=10.0).contains(&c) {
                    continue;
                }
                let closed = er_from_constant(c, l).unwrap();
                let quad = er_by_quadrature(c, l);
                worst = worst.max((closed - quad).abs());
                assert!((closed - quad).abs() < 1e-6, "L={l} C={c}: {closed} vs {quad}");
                assert!((closed - quad).abs() <= 1e-8 * quad.abs().max(1.0), "L={l} C={c}");
            }
        }
    }
    assert!(worst < 1e-8);
}

#[test]
fn outage_matches_gamma_sampling() {
    let n = 1_000_000usize;
    for l in 1..=4 {
        // Place the worst threshold where the OP is well resolved.
        let target = [0.05, 0.3, 0.8, 1.5][l - 1];
        let mut inp = inputs(l, 0.0);
        inp.p_watt = l as f64 * 2e-5 / target;
        let closed = op_closed_form(&inp, 1).unwrap();
        let thresholds = ris_scb::analytics::op_thresholds(&inp, 1).unwrap();
        let worst = thresholds.into_iter().fold(0.0, f64::max);
        let gamma = Gamma::new(l as f64, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(100 + l as u64);
        let hits = (0..n).filter(|_| gamma.sample(&mut rng) < worst).count();
        let p_hat = hits as f64 / n as f64;
        let se = (p_hat * (1.0 - p_hat) / n as f64).sqrt();
        assert!(closed > 1e-3 && closed < 0.5, "L={l} closed={closed}");
        assert!(
            (p_hat - closed).abs() <= 3.0 * se,
            "L={l}: {p_hat} vs {closed} (se {se})"
        );
    }
}

#[test]
fn pair_probabilities_are_valid() {
    for p in [0.0, 10.0, 20.0, 30.0] {
        let inp = ClosedFormInputs {
            target_rates: vec![1.0, 1.0],
            ..inputs(2, p)
        };
        let noma = op_pair_closed_form(&inp).unwrap();
        let oma = op_oma_pair(&inp).unwrap();
        assert!((0.0..=1.0).contains(&noma) && (0.0..=1.0).contains(&oma));
    }
}

#[test]
fn oma_single_user_identity() {
    for l in 1..=4 {
        for p in [-10.0, 0.0, 10.0, 25.0] {
            let inp = ClosedFormInputs {
                power_alloc: vec![1.0],
                target_rates: vec![0.7],
                ..inputs(l, p)
            };
            assert_eq!(op_oma(&inp, 0).unwrap(), op_closed_form(&inp, 0).unwrap());
        }
    }
}

proptest! {
    #[test]
    fn outage_monotone_in_power(l in 1usize..5, p in -20.0f64..40.0, dp in 0.0f64..10.0) {
        let lo = op_closed_form(&inputs(l, p), 1).unwrap();
        let hi = op_closed_form(&inputs(l, p + dp), 1).unwrap();
        prop_assert!(hi <= lo);
    }

    #[test]
    fn outage_monotone_in_rates(l in 1usize..5, p in -20.0f64..40.0, r1 in 0.0f64..1.3, r2 in 0.0f64..3.0, dr in 0.0f64..0.2) {
        let mut a = inputs(l, p);
        a.target_rates = vec![r1, r2];
        let mut b = a.clone();
        b.target_rates = vec![r1 + dr, r2 + dr];
        if let (Ok(x), Ok(y)) = (op_closed_form(&a, 1), op_closed_form(&b, 1)) {
            prop_assert!(y >= x);
        }
    }

    #[test]
    fn ergodic_rate_decreasing_in_c(l in 1usize..5, c in 1e-4f64..10.0, f in 1.01f64..3.0) {
        prop_assert!(er_from_constant(c * f, l).unwrap() < er_from_constant(c, l).unwrap());
    }
}
