//! Closed-form outage probability, ergodic rate, slopes and efficiency.
//!
//! All expressions treat the ideal design, where inter-cluster interference
//! is fully cancelled and the effective gain of each user is Gamma(L, 1).

use std::f64::consts::LN_2;

use thiserror::Error;

use crate::numerics::{lower_incomplete_gamma_regularized, scaled_exp_e1, SpecialFnError};
use crate::pathloss::largescale_direct;
use crate::scenario::{PowerModel, ScenarioConfig};

/// Ceilings above this many bits per channel use are rejected as degenerate.
pub const DEFAULT_CEILING_CAP: f64 = 64.0;

#[derive(Debug, Error, PartialEq)]
pub enum AnalyticsError {
    #[error("target rate of user {user} is unreachable with the given power allocation")]
    InfeasibleRates { user: usize },
    #[error("user index {user} out of range for {users} users")]
    BadUser { user: usize, users: usize },
    #[error("{0}")]
    Domain(String),
    #[error("need at least two usable points, got {0}")]
    InsufficientPoints(usize),
    #[error("the nearest user has no rate ceiling")]
    NoCeiling,
    #[error("rate ceiling {0} exceeds the cap")]
    CeilingCap(f64),
    #[error("total dissipated power is zero")]
    ZeroPower,
    #[error(transparent)]
    Special(#[from] SpecialFnError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormInputs {
    pub rx_antennas: usize,
    /// `α_v²`.
    pub power_alloc: Vec<f64>,
    /// `R_v`.
    pub target_rates: Vec<f64>,
    pub p_watt: f64,
    pub noise_watt: f64,
    /// Direct-link large-scale gain `L_b` of the user under study.
    pub l_direct: f64,
}

impl ClosedFormInputs {
    /// Inputs for user `k` of cluster `m` at transmit power `p_watt`.
    pub fn for_user(cfg: &ScenarioConfig, m: usize, k: usize, p_watt: f64) -> Self {
        ClosedFormInputs {
            rx_antennas: cfg.rx_antennas,
            power_alloc: cfg.noma.power_alloc.clone(),
            target_rates: cfg.noma.target_rate.clone(),
            p_watt,
            noise_watt: cfg.noise_watt(),
            l_direct: largescale_direct(cfg.geometry.d_direct[m][k], cfg.geometry.alpha3),
        }
    }

    pub fn users(&self) -> usize {
        self.power_alloc.len()
    }

    fn check_user(&self, k: usize) -> Result<(), AnalyticsError> {
        if k < self.users() {
            Ok(())
        } else {
            Err(AnalyticsError::BadUser {
                user: k,
                users: self.users(),
            })
        }
    }
}

/// `ε = 2^R − 1`.
pub fn rate_threshold(rate: f64) -> f64 {
    rate.exp2() - 1.0
}

/// SIC thresholds `I_v = L·ε_v·σ² / (p·L_b·(α_v² − ε_v·Σ_{q>v} α_q²))` for `v ≤ k`.
pub fn op_thresholds(inp: &ClosedFormInputs, k: usize) -> Result<Vec<f64>, AnalyticsError> {
    inp.check_user(k)?;
    let l = inp.rx_antennas as f64;
    (0..=k)
        .map(|v| {
            let eps = rate_threshold(inp.target_rates[v]);
            let weaker: f64 = inp.power_alloc[v + 1..].iter().sum();
            let margin = inp.power_alloc[v] - eps * weaker;
            if margin <= 0.0 {
                return Err(AnalyticsError::InfeasibleRates { user: v });
            }
            Ok(l * eps * inp.noise_watt / (inp.p_watt * inp.l_direct * margin))
        })
        .collect()
}

/// Outage probability of user `k`: `γ(L, max_v I_v)/Γ(L)`.
pub fn op_closed_form(inp: &ClosedFormInputs, k: usize) -> Result<f64, AnalyticsError> {
    let worst = op_thresholds(inp, k)?.into_iter().fold(0.0, f64::max);
    Ok(lower_incomplete_gamma_regularized(inp.rx_antennas as f64, worst)?)
}

/// Product of the per-user outage probabilities of one cluster.
pub fn op_pair_closed_form(inp: &ClosedFormInputs) -> Result<f64, AnalyticsError> {
    (0..inp.users()).map(|k| op_closed_form(inp, k)).product()
}

/// Orthogonal baseline with a `1/K` pre-log: threshold `L·(2^{K·R_k}−1)·σ²/(p·L_b)`.
pub fn op_oma(inp: &ClosedFormInputs, k: usize) -> Result<f64, AnalyticsError> {
    inp.check_user(k)?;
    let l = inp.rx_antennas as f64;
    let eps = rate_threshold(inp.users() as f64 * inp.target_rates[k]);
    let threshold = l * eps * inp.noise_watt / (inp.p_watt * inp.l_direct * 1.0);
    Ok(lower_incomplete_gamma_regularized(l, threshold)?)
}

pub fn op_oma_pair(inp: &ClosedFormInputs) -> Result<f64, AnalyticsError> {
    (0..inp.users()).map(|k| op_oma(inp, k)).product()
}

/// Negative log-log slope between the two highest-power points with
/// `0 < P < 1e-2`. Points are `(p, P)` with `p` in linear units.
pub fn diversity_order(curve: &[(f64, f64)]) -> Result<f64, AnalyticsError> {
    let mut pts: Vec<(f64, f64)> = curve
        .iter()
        .copied()
        .filter(|&(p, op)| p > 0.0 && op > 0.0 && op < 1e-2)
        .collect();
    if pts.len() < 2 {
        return Err(AnalyticsError::InsufficientPoints(pts.len()));
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (p1, q1) = pts[pts.len() - 2];
    let (p2, q2) = pts[pts.len() - 1];
    Ok(-(q2.log10() - q1.log10()) / (p2.log10() - p1.log10()))
}

/// `ΔR / Δlog₂ p` between the two highest-power points.
pub fn high_snr_slope(curve: &[(f64, f64)]) -> Result<f64, AnalyticsError> {
    let mut pts: Vec<(f64, f64)> = curve
        .iter()
        .copied()
        .filter(|&(p, r)| p > 0.0 && r.is_finite())
        .collect();
    if pts.len() < 2 {
        return Err(AnalyticsError::InsufficientPoints(pts.len()));
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (p1, r1) = pts[pts.len() - 2];
    let (p2, r2) = pts[pts.len() - 1];
    Ok((r2 - r1) / (p2.log2() - p1.log2()))
}

/// Terms `T_i = C^i/i! · ∫₀^∞ x^i e^{−Cx}/(1+x) dx` for `i < count`.
///
/// Uses `T_0 = e^C·E1(C)` and `T_i = 1/i − (C/i)·T_{i−1}`, which follows from
/// `x^i/(1+x) = x^{i−1} − x^{i−1}/(1+x)`. Equivalently the integral equals
/// `(−1)^{i+1}·[e^C·Ei(−C) + Σ_{a=1}^{i} (−1)^{a−1}(a−1)!·C^{−a}]`.
fn weighted_moments(c: f64, count: usize) -> Result<Vec<f64>, AnalyticsError> {
    let mut terms = Vec::with_capacity(count);
    let mut t = scaled_exp_e1(c)?;
    for i in 0..count {
        if i > 0 {
            let fi = i as f64;
            t = 1.0 / fi - (c / fi) * t;
        }
        terms.push(t);
    }
    Ok(terms)
}

/// `∫₀^∞ x^i e^{−Cx}/(1+x) dx`.
pub fn laplace_rational_moment(i: usize, c: f64) -> Result<f64, AnalyticsError> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(AnalyticsError::Domain(format!(
            "C must be positive and finite, got {c}"
        )));
    }
    let t = weighted_moments(c, i + 1)?[i];
    // Undo the C^i/i! weight.
    let log_weight = i as f64 * c.ln() - crate::numerics::ln_gamma(i as f64 + 1.0);
    Ok(t * (-log_weight).exp())
}

/// Ergodic rate of the nearest user given `C = L·σ²/(p·L_b·α_K²)`:
/// `(1/ln2)·Σ_{i<L} C^i/i! · ∫₀^∞ x^i e^{−Cx}/(1+x) dx`.
pub fn er_from_constant(c: f64, rx_antennas: usize) -> Result<f64, AnalyticsError> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(AnalyticsError::Domain(format!(
            "C must be positive and finite, got {c}"
        )));
    }
    let terms = weighted_moments(c, rx_antennas)?;
    Ok(terms.iter().sum::<f64>() / LN_2)
}

pub fn er_constant(inp: &ClosedFormInputs) -> f64 {
    let alpha_k = *inp.power_alloc.last().expect("at least one user");
    inp.rx_antennas as f64 * inp.noise_watt / (inp.p_watt * inp.l_direct * alpha_k)
}

/// Closed-form ergodic rate of the nearest user.
pub fn er_user_last(inp: &ClosedFormInputs) -> Result<f64, AnalyticsError> {
    er_from_constant(er_constant(inp), inp.rx_antennas)
}

/// High-SNR rate ceiling `log₂(1 + α_k²/Σ_{q>k} α_q²)` of a non-nearest user.
pub fn er_ceiling(power_alloc: &[f64], k: usize, cap: f64) -> Result<f64, AnalyticsError> {
    if k + 1 >= power_alloc.len() {
        return Err(AnalyticsError::NoCeiling);
    }
    let weaker: f64 = power_alloc[k + 1..].iter().sum();
    let ceiling = (1.0 + power_alloc[k] / weaker).log2();
    if !(ceiling <= cap) {
        return Err(AnalyticsError::CeilingCap(ceiling));
    }
    Ok(ceiling)
}

/// Sum of per-user ergodic rates of one cluster.
pub fn spectral_efficiency(rates: &[f64]) -> Result<f64, AnalyticsError> {
    if rates.is_empty() {
        return Err(AnalyticsError::InsufficientPoints(0));
    }
    Ok(rates.iter().sum())
}

/// `P_B + K·P_U + p·ε_b + N·P_L`.
pub fn dissipated_power(pm: &PowerModel, p_watt: f64, users: usize, elements: usize) -> f64 {
    pm.p_bs_watt + users as f64 * pm.p_user_watt + p_watt * pm.amp_factor + elements as f64 * pm.p_ris_watt
}

pub fn energy_efficiency(
    se: f64,
    pm: &PowerModel,
    p_watt: f64,
    users: usize,
    elements: usize,
) -> Result<f64, AnalyticsError> {
    let total = dissipated_power(pm, p_watt, users, elements);
    if total <= 0.0 {
        return Err(AnalyticsError::ZeroPower);
    }
    Ok(se / total)
}
