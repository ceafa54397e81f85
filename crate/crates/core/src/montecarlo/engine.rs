//! Deterministic parallel trial engine.
//!
//! Trials are split into fixed blocks of [`BLOCK_SIZE`] indices. Each block
//! is reduced sequentially with compensated sums and the blocks are merged
//! in index order, so the output does not depend on the worker count.

use std::ops::Range;

use rayon::prelude::*;
use thiserror::Error;

use crate::analytics::dissipated_power;
use crate::beamforming::{
    build_effective_matrix, quantize, residue_vector_with_sums, solve_passive, BeamformingError, PassiveBeamforming,
};
use crate::channel::{draw_realization_with, ChannelRealization};
use crate::link_metrics::{detector_coefficients, effective_gain, ExactLink, LinkMetrics, LinkParams, UserLink};
use crate::montecarlo::estimator::{EstimatorResult, MeanAccumulator, Metric, MetricScope, NeumaierSum};
use crate::montecarlo::rng::trial_stream;
use crate::montecarlo::sweep::{SweepError, SweepSpec, SweepVar};
use crate::pathloss::LargeScaleGains;
use crate::scenario::{dbm_to_watt, ConfigError, ScenarioConfig};

pub const BLOCK_SIZE: u64 = 1024;

/// Estimators refuse to run on fewer trials than this.
pub const MIN_TRIALS: u64 = 100;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Sweep(#[from] SweepError),
    #[error("need at least {MIN_TRIALS} trials, got {0}")]
    TooFewTrials(u64),
    #[error("thread pool: {0}")]
    ThreadPool(String),
    #[error("trial {index} failed: {source}")]
    Trial { index: u64, source: TrialError },
}

#[derive(Debug, Error)]
pub enum TrialError {
    #[error(transparent)]
    Beamforming(#[from] BeamformingError),
    #[error("non-finite channel statistic")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineOptions {
    /// Worker threads; `1` runs on the calling thread without a pool.
    pub threads: usize,
    /// Drop trials with an amplitude above one from every metric except
    /// the feasibility rate.
    pub condition_on_feasible: bool,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            threads: std::thread::available_parallelism().map_or(1, |n| n.get()),
            condition_on_feasible: false,
        }
    }
}

impl EngineOptions {
    pub fn single_threaded() -> Self {
        EngineOptions {
            threads: 1,
            condition_on_feasible: false,
        }
    }
}

/// The power-independent outcome of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialState {
    pub links: Vec<Vec<UserLink>>,
    pub exact: Vec<Vec<ExactLink>>,
    pub feasible: bool,
    /// The continuous cancellation system was solved exactly.
    pub consistent: bool,
}

/// Everything that stays fixed across the trials of one configuration.
#[derive(Debug, Clone)]
pub struct Simulator {
    cfg: ScenarioConfig,
    gains: LargeScaleGains,
    elements: usize,
}

impl Simulator {
    pub fn new(cfg: &ScenarioConfig) -> Result<Self, EngineError> {
        cfg.validate()?;
        Ok(Simulator {
            gains: LargeScaleGains::from_config(cfg),
            elements: cfg.ris_elements(),
            cfg: cfg.clone(),
        })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn gains(&self) -> &LargeScaleGains {
        &self.gains
    }

    pub fn elements(&self) -> usize {
        self.elements
    }

    pub fn draw(&self, trial_index: u64) -> ChannelRealization {
        let mut rng = trial_stream(self.cfg.montecarlo.master_seed, trial_index);
        draw_realization_with(&self.cfg, self.elements, &mut rng)
    }

    /// Continuous solve followed by quantization when a resolution is set.
    pub fn beamforming(&self, ch: &ChannelRealization) -> Result<PassiveBeamforming, TrialError> {
        let sys = build_effective_matrix(ch, &self.gains, self.cfg.ris.cancellation_mode);
        let pb = solve_passive(&sys, self.elements)?;
        Ok(match self.cfg.ris.resolution_bits {
            Some(bits) => quantize(&pb, bits),
            None => pb,
        })
    }

    pub fn realize(&self, trial_index: u64) -> Result<TrialState, TrialError> {
        let ch = self.draw(trial_index);
        let pb = self.beamforming(&ch)?;
        let h_sum = ch.bs_ris_row_sums();
        let (m_count, k_count) = (self.cfg.clusters, self.cfg.users);
        let mut links = Vec::with_capacity(m_count);
        let mut exact = Vec::with_capacity(m_count);
        for m in 0..m_count {
            let mut link_row = Vec::with_capacity(k_count);
            let mut exact_row = Vec::with_capacity(k_count);
            for k in 0..k_count {
                let residue: f64 = residue_vector_with_sums(&ch, &self.gains, &pb.phi, &h_sum, m, k)
                    .iter()
                    .map(|z| z.norm_sqr())
                    .sum();
                let eff_gain = effective_gain(&ch, m, k);
                if !(residue.is_finite() && eff_gain.is_finite()) {
                    return Err(TrialError::NonFinite);
                }
                link_row.push(UserLink {
                    eff_gain,
                    l_direct: self.gains.direct[m][k],
                    residue,
                });
                let coeffs = detector_coefficients(&ch, &self.gains, &pb, m, k);
                exact_row.push(ExactLink::from_coefficients(&coeffs, m));
            }
            links.push(link_row);
            exact.push(exact_row);
        }
        Ok(TrialState {
            links,
            exact,
            feasible: pb.feasible,
            consistent: pb.consistent,
        })
    }

    pub fn params(&self, p_watt: f64) -> LinkParams {
        LinkParams {
            p_watt,
            noise_watt: self.cfg.noise_watt(),
            rx_antennas: self.cfg.rx_antennas,
            power_alloc: self.cfg.noma.power_alloc.clone(),
            target_rates: self.cfg.noma.target_rate.clone(),
        }
    }

    pub fn evaluate(&self, state: &TrialState, params: &LinkParams) -> LinkMetrics {
        LinkMetrics::evaluate(&state.links, &state.exact, state.feasible, params)
    }
}

/// One end-to-end realization at the configured transmit power.
pub fn run_trial(cfg: &ScenarioConfig, trial_index: u64) -> Result<LinkMetrics, EngineError> {
    let sim = Simulator::new(cfg)?;
    let state = sim.realize(trial_index).map_err(|source| EngineError::Trial {
        index: trial_index,
        source,
    })?;
    Ok(sim.evaluate(&state, &sim.params(cfg.tx_power_watt())))
}

/// Running statistics for one operating point.
#[derive(Debug, Clone)]
struct PointAcc {
    op: Vec<Vec<MeanAccumulator>>,
    er: Vec<Vec<MeanAccumulator>>,
    residue: Vec<Vec<MeanAccumulator>>,
    oma: Vec<Vec<MeanAccumulator>>,
    er_exact: Vec<Vec<MeanAccumulator>>,
    se: Vec<MeanAccumulator>,
    ee: Vec<MeanAccumulator>,
    /// `Σ 1{out_j}·1{out_k}` per cluster.
    cross: Vec<Vec<Vec<NeumaierSum>>>,
    feasible: MeanAccumulator,
}

impl PointAcc {
    fn new(m: usize, k: usize) -> Self {
        let grid = || vec![vec![MeanAccumulator::default(); k]; m];
        PointAcc {
            op: grid(),
            er: grid(),
            residue: grid(),
            oma: grid(),
            er_exact: grid(),
            se: vec![MeanAccumulator::default(); m],
            ee: vec![MeanAccumulator::default(); m],
            cross: vec![vec![vec![NeumaierSum::default(); k]; k]; m],
            feasible: MeanAccumulator::default(),
        }
    }

    fn push(&mut self, lm: &LinkMetrics, total_power: f64, condition: bool) {
        self.feasible.push(if lm.feasible { 1.0 } else { 0.0 });
        if condition && !lm.feasible {
            return;
        }
        let ind = |b: bool| if b { 1.0 } else { 0.0 };
        for m in 0..self.op.len() {
            let mut se = NeumaierSum::default();
            for k in 0..self.op[m].len() {
                self.op[m][k].push(ind(lm.outage[m][k]));
                self.er[m][k].push(lm.rate[m][k]);
                self.residue[m][k].push(lm.residue[m][k]);
                self.oma[m][k].push(ind(lm.oma_outage[m][k]));
                self.er_exact[m][k].push(lm.exact_rate[m][k]);
                se.add(lm.rate[m][k]);
                for j in 0..self.op[m].len() {
                    self.cross[m][j][k].add(ind(lm.outage[m][j] && lm.outage[m][k]));
                }
            }
            self.se[m].push(se.value());
            self.ee[m].push(se.value() / total_power);
        }
    }

    fn merge(&mut self, other: &PointAcc) {
        fn merge_grid(a: &mut [Vec<MeanAccumulator>], b: &[Vec<MeanAccumulator>]) {
            for (ra, rb) in a.iter_mut().zip(b) {
                for (x, y) in ra.iter_mut().zip(rb) {
                    x.merge(y);
                }
            }
        }
        merge_grid(&mut self.op, &other.op);
        merge_grid(&mut self.er, &other.er);
        merge_grid(&mut self.residue, &other.residue);
        merge_grid(&mut self.oma, &other.oma);
        merge_grid(&mut self.er_exact, &other.er_exact);
        for (x, y) in self.se.iter_mut().zip(&other.se) {
            x.merge(y);
        }
        for (x, y) in self.ee.iter_mut().zip(&other.ee) {
            x.merge(y);
        }
        for (cm, om) in self.cross.iter_mut().zip(&other.cross) {
            for (cj, oj) in cm.iter_mut().zip(om) {
                for (x, y) in cj.iter_mut().zip(oj) {
                    x.merge(y);
                }
            }
        }
        self.feasible.merge(&other.feasible);
    }

    fn pair_result(&self, m: usize) -> EstimatorResult {
        let means: Vec<f64> = self.op[m].iter().map(|a| a.mean()).collect();
        let n = self.op[m].first().map_or(0, |a| a.count());
        let nf = n as f64;
        let cov: Vec<Vec<f64>> = (0..means.len())
            .map(|j| {
                (0..means.len())
                    .map(|k| {
                        if n < 2 {
                            0.0
                        } else {
                            (self.cross[m][j][k].value() - nf * means[j] * means[k]) / (nf - 1.0)
                        }
                    })
                    .collect()
            })
            .collect();
        EstimatorResult::from_product(Metric::OpPair, &means, &cov, n)
    }

    fn results(&self, metrics: &[Metric], fingerprint: &str) -> Vec<EstimatorResult> {
        let mut out = Vec::new();
        for &metric in metrics {
            match metric.scope() {
                MetricScope::User => {
                    let grid = match metric {
                        Metric::OpUser => &self.op,
                        Metric::ErUser => &self.er,
                        Metric::ResidueMean => &self.residue,
                        Metric::OpOma => &self.oma,
                        _ => &self.er_exact,
                    };
                    for (m, row) in grid.iter().enumerate() {
                        for (k, acc) in row.iter().enumerate() {
                            let r = match metric {
                                Metric::OpUser | Metric::OpOma => EstimatorResult::from_proportion(metric, acc),
                                _ => EstimatorResult::from_mean(metric, acc),
                            };
                            out.push(r.at(Some(m), Some(k)));
                        }
                    }
                }
                MetricScope::Cluster => {
                    for m in 0..self.op.len() {
                        let r = match metric {
                            Metric::OpPair => self.pair_result(m),
                            Metric::Se => EstimatorResult::from_mean(metric, &self.se[m]),
                            _ => EstimatorResult::from_mean(metric, &self.ee[m]),
                        };
                        out.push(r.at(Some(m), None));
                    }
                }
                MetricScope::Network => {
                    out.push(EstimatorResult::from_proportion(metric, &self.feasible).at(None, None));
                }
            }
        }
        out.into_iter().map(|r| r.with_fingerprint(fingerprint)).collect()
    }
}

#[derive(Debug, Clone)]
struct BlockAcc {
    points: Vec<PointAcc>,
    failures: u64,
}

/// Estimates for one operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointEstimates {
    pub results: Vec<EstimatorResult>,
    pub failed_trials: u64,
}

impl PointEstimates {
    pub fn find(&self, metric: Metric, cluster: Option<usize>, user: Option<usize>) -> Option<&EstimatorResult> {
        self.results
            .iter()
            .find(|r| r.metric == metric && r.cluster == cluster && r.user == user)
    }
}

fn blocks(trials: u64) -> Vec<Range<u64>> {
    (0..trials.div_ceil(BLOCK_SIZE))
        .map(|b| b * BLOCK_SIZE..((b + 1) * BLOCK_SIZE).min(trials))
        .collect()
}

/// Runs `f` over every block and returns the per-block results in order.
fn map_blocks<A, F>(trials: u64, threads: usize, f: F) -> Result<Vec<A>, EngineError>
where
    A: Send,
    F: Fn(Range<u64>) -> A + Sync + Send,
{
    let ranges = blocks(trials);
    if threads <= 1 {
        return Ok(ranges.into_iter().map(f).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| EngineError::ThreadPool(e.to_string()))?;
    Ok(pool.install(|| ranges.into_par_iter().map(&f).collect()))
}

/// Common-random-number estimates at several transmit powers.
///
/// Each trial is realized once and evaluated at every power, which is both
/// faster and less noisy across the curve than independent runs.
pub fn estimate_powers(
    cfg: &ScenarioConfig,
    powers_dbm: &[f64],
    metrics: &[Metric],
    opts: &EngineOptions,
) -> Result<Vec<PointEstimates>, EngineError> {
    let trials = cfg.montecarlo.trials;
    if trials < MIN_TRIALS {
        return Err(EngineError::TooFewTrials(trials));
    }
    let sim = Simulator::new(cfg)?;
    let params: Vec<LinkParams> = powers_dbm.iter().map(|&p| sim.params(dbm_to_watt(p))).collect();
    let totals: Vec<f64> = params
        .iter()
        .map(|lp| dissipated_power(&cfg.power_model, lp.p_watt, cfg.users, sim.elements()))
        .collect();
    let (m, k) = (cfg.clusters, cfg.users);

    let per_block = map_blocks(trials, opts.threads, |range| {
        let mut acc = BlockAcc {
            points: vec![PointAcc::new(m, k); params.len()],
            failures: 0,
        };
        for index in range {
            match sim.realize(index) {
                Ok(state) => {
                    for ((point, lp), &total) in acc.points.iter_mut().zip(&params).zip(&totals) {
                        point.push(&sim.evaluate(&state, lp), total, opts.condition_on_feasible);
                    }
                }
                Err(_) => acc.failures += 1,
            }
        }
        acc
    })?;

    let mut iter = per_block.into_iter();
    let mut total = iter.next().expect("at least one block");
    for block in iter {
        for (a, b) in total.points.iter_mut().zip(&block.points) {
            a.merge(b);
        }
        total.failures += block.failures;
    }

    Ok(total
        .points
        .iter()
        .zip(powers_dbm)
        .map(|(point, &p)| {
            let mut at = cfg.clone();
            at.tx_power_dbm = p;
            PointEstimates {
                results: point.results(metrics, &at.fingerprint()),
                failed_trials: total.failures,
            }
        })
        .collect())
}

/// Estimates at the configured transmit power.
pub fn estimate(cfg: &ScenarioConfig, metrics: &[Metric], opts: &EngineOptions) -> Result<PointEstimates, EngineError> {
    Ok(estimate_powers(cfg, &[cfg.tx_power_dbm], metrics, opts)?.remove(0))
}

#[derive(Debug)]
pub struct SweepPoint {
    pub value: f64,
    pub outcome: Result<PointEstimates, EngineError>,
}

/// One row group per sweep value, in the order given.
///
/// Transmit-power sweeps share realizations across points; every other
/// variable reruns the engine with the same master seed. A point whose
/// value is invalid or whose run fails is recorded and the sweep continues.
pub fn run_sweep(
    cfg: &ScenarioConfig,
    spec: &SweepSpec,
    metrics: &[Metric],
    opts: &EngineOptions,
) -> Result<Vec<SweepPoint>, EngineError> {
    if spec.var == SweepVar::TxPowerDbm {
        let points = estimate_powers(cfg, &spec.values, metrics, opts)?;
        return Ok(spec
            .values
            .iter()
            .zip(points)
            .map(|(&value, est)| SweepPoint {
                value,
                outcome: Ok(est),
            })
            .collect());
    }
    Ok(spec
        .values
        .iter()
        .map(|&value| SweepPoint {
            value,
            outcome: spec
                .var
                .apply(cfg, value)
                .map_err(EngineError::from)
                .and_then(|at| estimate(&at, metrics, opts)),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> ScenarioConfig {
        let mut cfg = ScenarioConfig::baseline(2);
        cfg.ris.elements = Some(10);
        cfg.montecarlo.trials = 300;
        cfg
    }

    #[test]
    fn trials_are_reproducible() {
        let cfg = small_cfg();
        assert_eq!(run_trial(&cfg, 17).unwrap(), run_trial(&cfg, 17).unwrap());
        assert_ne!(run_trial(&cfg, 17).unwrap(), run_trial(&cfg, 18).unwrap());
    }

    #[test]
    fn ideal_solve_leaves_no_residue() {
        let cfg = small_cfg();
        let sim = Simulator::new(&cfg).unwrap();
        for i in 0..20 {
            let state = sim.realize(i).unwrap();
            assert!(state.consistent);
            for (m, row) in state.links.iter().enumerate() {
                for u in row {
                    // Residue relative to the direct interference scale.
                    assert!(u.residue <= 1e-18 * sim.gains().direct[m][0] * 10.0, "{}", u.residue);
                }
            }
        }
    }

    #[test]
    fn block_layout() {
        assert_eq!(blocks(1), vec![0..1]);
        assert_eq!(blocks(2048).len(), 2);
        assert_eq!(blocks(2049).last().unwrap(), &(2048..2049));
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let mut cfg = small_cfg();
        cfg.montecarlo.trials = 2500;
        let metrics = Metric::ALL;
        let a = estimate(&cfg, &metrics, &EngineOptions::single_threaded()).unwrap();
        let b = estimate(
            &cfg,
            &metrics,
            &EngineOptions {
                threads: 3,
                condition_on_feasible: false,
            },
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_and_huge_rates() {
        let mut cfg = small_cfg();
        cfg.noma.target_rate = vec![0.0, 0.0];
        let est = estimate(&cfg, &[Metric::OpUser], &EngineOptions::single_threaded()).unwrap();
        assert!(est.results.iter().all(|r| r.estimate == 0.0 && r.std_error == 0.0));
        cfg.noma.target_rate = vec![60.0, 60.0];
        let est = estimate(&cfg, &[Metric::OpUser], &EngineOptions::single_threaded()).unwrap();
        assert!(est.results.iter().all(|r| r.estimate == 1.0));
    }

    #[test]
    fn too_few_trials() {
        let mut cfg = small_cfg();
        cfg.montecarlo.trials = 10;
        assert!(matches!(
            estimate(&cfg, &[Metric::OpUser], &EngineOptions::single_threaded()),
            Err(EngineError::TooFewTrials(10))
        ));
    }

    #[test]
    fn sweep_keeps_order_and_records_bad_points() {
        let cfg = small_cfg();
        let spec: SweepSpec = "N=12,0,8".parse().unwrap();
        let pts = run_sweep(&cfg, &spec, &[Metric::ResidueMean], &EngineOptions::single_threaded()).unwrap();
        assert_eq!(pts.iter().map(|p| p.value).collect::<Vec<_>>(), vec![12.0, 0.0, 8.0]);
        assert!(pts[0].outcome.is_ok());
        assert!(pts[1].outcome.is_err());
        let r = pts[2]
            .outcome
            .as_ref()
            .unwrap()
            .find(Metric::ResidueMean, Some(0), Some(0))
            .unwrap();
        assert!(r.estimate > 0.0);
    }

    #[test]
    fn power_sweep_matches_single_points() {
        let cfg = small_cfg();
        let spec: SweepSpec = "tx_power_dbm=10,30".parse().unwrap();
        let pts = run_sweep(&cfg, &spec, &[Metric::ErUser], &EngineOptions::single_threaded()).unwrap();
        let mut at = cfg.clone();
        at.tx_power_dbm = 30.0;
        let single = estimate(&at, &[Metric::ErUser], &EngineOptions::single_threaded()).unwrap();
        assert_eq!(pts[1].outcome.as_ref().unwrap(), &single);
    }
}
