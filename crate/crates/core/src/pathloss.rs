//! Large-scale fading and minimal RIS size.

use crate::scenario::{CancellationMode, RisScenario, ScenarioConfig};

/// Path-loss gains for every user, indexed `[cluster][user]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LargeScaleGains {
    pub direct: Vec<Vec<f64>>,
    pub reflect: Vec<Vec<f64>>,
}

impl LargeScaleGains {
    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        let geo = &cfg.geometry;
        let direct = geo
            .d_direct
            .iter()
            .map(|row| row.iter().map(|&d| largescale_direct(d, geo.alpha3)).collect())
            .collect();
        let reflect = geo
            .d_user
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&d2| reflected_gain(cfg.ris.ris_scenario, geo.d1, d2, geo.alpha1, geo.alpha2))
                    .collect()
            })
            .collect();
        LargeScaleGains { direct, reflect }
    }
}

/// `d^(−α₃)`.
pub fn largescale_direct(d: f64, alpha3: f64) -> f64 {
    d.powf(-alpha3)
}

/// Product-distance law `d1^(−α₁)·d2^(−α₂)`.
pub fn largescale_diffuse(d1: f64, d2: f64, alpha1: f64, alpha2: f64) -> f64 {
    d1.powf(-alpha1) * d2.powf(-alpha2)
}

/// Sum-distance law `(d1 + d2^(α₂/α₁))^(−α₁)`.
pub fn largescale_anomalous(d1: f64, d2: f64, alpha1: f64, alpha2: f64) -> f64 {
    let d2_eff = if alpha1 == alpha2 { d2 } else { d2.powf(alpha2 / alpha1) };
    (d1 + d2_eff).powf(-alpha1)
}

pub fn reflected_gain(scenario: RisScenario, d1: f64, d2: f64, alpha1: f64, alpha2: f64) -> f64 {
    match scenario {
        RisScenario::Diffuse => largescale_diffuse(d1, d2, alpha1, alpha2),
        RisScenario::Anomalous => largescale_anomalous(d1, d2, alpha1, alpha2),
    }
}

fn element_bound(clusters: usize, direct: f64, reflect: f64) -> usize {
    let n = (clusters.saturating_sub(1) as f64) * (direct / reflect).sqrt();
    (n.ceil() as usize).max(1)
}

/// Smallest `N` with `N² ≥ (M−1)² d_b^(−α₃) / (d1^(−α₁) d2^(−α₂))`.
pub fn min_ris_diffuse(clusters: usize, d1: f64, d2: f64, d_b: f64, alpha1: f64, alpha2: f64, alpha3: f64) -> usize {
    element_bound(
        clusters,
        largescale_direct(d_b, alpha3),
        largescale_diffuse(d1, d2, alpha1, alpha2),
    )
}

/// Smallest `N` with `N² ≥ (M−1)² d_b^(−α₃) / (d1 + d2^(α₂/α₁))^(−α₁)`.
pub fn min_ris_anomalous(clusters: usize, d1: f64, d2: f64, d_b: f64, alpha1: f64, alpha2: f64, alpha3: f64) -> usize {
    element_bound(
        clusters,
        largescale_direct(d_b, alpha3),
        largescale_anomalous(d1, d2, alpha1, alpha2),
    )
}

/// Number of cancellation equations for a configuration.
pub fn equation_count(cfg: &ScenarioConfig, mode: CancellationMode) -> usize {
    let base = cfg.clusters * cfg.users * cfg.rx_antennas;
    match mode {
        CancellationMode::Aggregate => base,
        CancellationMode::PerSymbol => base * cfg.clusters.saturating_sub(1),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BindingConstraint {
    /// The reflected path must be strong enough to match the direct interference.
    PathLoss,
    /// The cancellation system needs at least as many unknowns as equations.
    Rank,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserFeasibility {
    pub cluster: usize,
    pub user: usize,
    pub diffuse: usize,
    pub anomalous: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub per_user: Vec<UserFeasibility>,
    /// Worst-case path-loss bound for the configured scenario.
    pub pathloss_bound: usize,
    /// `MKL` (aggregate) or `MKL(M−1)` (per-symbol).
    pub rank_bound: usize,
    pub overall: usize,
    pub binding: BindingConstraint,
    pub warning: Option<String>,
}

pub fn feasibility_report(cfg: &ScenarioConfig) -> FeasibilityReport {
    let geo = &cfg.geometry;
    let mut per_user = Vec::with_capacity(cfg.clusters * cfg.users);
    for m in 0..cfg.clusters {
        for k in 0..cfg.users {
            let (d2, d_b) = (geo.d_user[m][k], geo.d_direct[m][k]);
            per_user.push(UserFeasibility {
                cluster: m,
                user: k,
                diffuse: min_ris_diffuse(cfg.clusters, geo.d1, d2, d_b, geo.alpha1, geo.alpha2, geo.alpha3),
                anomalous: min_ris_anomalous(cfg.clusters, geo.d1, d2, d_b, geo.alpha1, geo.alpha2, geo.alpha3),
            });
        }
    }
    let pathloss_bound = per_user
        .iter()
        .map(|u| match cfg.ris.ris_scenario {
            RisScenario::Diffuse => u.diffuse,
            RisScenario::Anomalous => u.anomalous,
        })
        .max()
        .unwrap_or(1);
    let rank_bound = equation_count(cfg, cfg.ris.cancellation_mode);
    let (overall, binding) = if rank_bound >= pathloss_bound {
        (rank_bound, BindingConstraint::Rank)
    } else {
        (pathloss_bound, BindingConstraint::PathLoss)
    };
    let warning = match cfg.ris.ris_scenario {
        RisScenario::Diffuse => diffuse_applicability_warning(geo.alpha1, geo.alpha2, geo.alpha3),
        RisScenario::Anomalous => None,
    };
    FeasibilityReport {
        per_user,
        pathloss_bound,
        rank_bound,
        overall: overall.max(1),
        binding,
        warning,
    }
}

/// Minimal element count: the worst user's path-loss bound or the equation
/// count, whichever is larger.
pub fn min_ris_overall(cfg: &ScenarioConfig) -> usize {
    feasibility_report(cfg).overall
}

/// The diffuse design needs reflected links with smaller exponents than the
/// direct link; anything else blows up the required element count.
pub fn diffuse_applicability_warning(alpha1: f64, alpha2: f64, alpha3: f64) -> Option<String> {
    if alpha1 < alpha3 && alpha2 < alpha3 {
        None
    } else {
        Some(format!(
            "diffuse scattering with alpha1={alpha1}, alpha2={alpha2} not below alpha3={alpha3}: \
             the reflected links are too weak and the required RIS size grows quickly"
        ))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table2Row {
    pub scenario: RisScenario,
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
    pub min_n: usize,
}

/// Exponent triples of the reference feasibility table.
pub const TABLE2_EXPONENTS: [(f64, f64, f64); 3] = [(3.5, 3.5, 3.5), (2.2, 3.5, 3.5), (2.2, 2.2, 3.5)];

/// Reference feasibility table: `M = 2`, `d1 = d2 = 80 m`, `d_b = 100 m`.
pub fn table2() -> Vec<Table2Row> {
    let (clusters, d1, d2, d_b) = (2, 80.0, 80.0, 100.0);
    let mut rows = Vec::with_capacity(6);
    for scenario in [RisScenario::Diffuse, RisScenario::Anomalous] {
        for &(alpha1, alpha2, alpha3) in &TABLE2_EXPONENTS {
            let min_n = match scenario {
                RisScenario::Diffuse => min_ris_diffuse(clusters, d1, d2, d_b, alpha1, alpha2, alpha3),
                RisScenario::Anomalous => min_ris_anomalous(clusters, d1, d2, d_b, alpha1, alpha2, alpha3),
            };
            rows.push(Table2Row {
                scenario,
                alpha1,
                alpha2,
                alpha3,
                min_n,
            });
        }
    }
    rows
}

pub fn table2_csv(rows: &[Table2Row]) -> String {
    let mut out = String::from("scenario,alpha1,alpha2,alpha3,min_N\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.scenario.as_str(),
            r.alpha1,
            r.alpha2,
            r.alpha3,
            r.min_n
        ));
    }
    out
}
