use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ris_scb::montecarlo::{EstimatorResult, MeanAccumulator, Metric};

#[test]
fn bernoulli_interval_coverage() {
    let truth = 0.1;
    let reps = 200;
    let n = 2_000;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let covered = (0..reps)
        .filter(|_| {
            let mut acc = MeanAccumulator::default();
            for _ in 0..n {
                acc.push(if rng.random::<f64>() < truth { 1.0 } else { 0.0 });
            }
            EstimatorResult::from_proportion(Metric::OpUser, &acc).covers(truth)
        })
        .count();
    let coverage = covered as f64 / reps as f64;
    assert!((0.93..=0.97).contains(&coverage), "coverage {coverage}");
}

#[test]
fn mean_interval_coverage() {
    let reps = 400;
    let n = 500;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let covered = (0..reps)
        .filter(|_| {
            let mut acc = MeanAccumulator::default();
            for _ in 0..n {
                acc.push(-rng.random::<f64>().ln());
            }
            EstimatorResult::from_mean(Metric::ErUser, &acc).covers(1.0)
        })
        .count();
    let coverage = covered as f64 / reps as f64;
    assert!((0.92..=0.975).contains(&coverage), "coverage {coverage}");
}
