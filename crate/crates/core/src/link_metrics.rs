//! Per-realization SINRs, rates and outage events.
//!
//! User indices are zero-based and follow the decoding order: user 0 is the
//! farthest (largest power share) and user `K−1` the nearest.

use num_complex::Complex64;

use crate::beamforming::PassiveBeamforming;
use crate::channel::ChannelRealization;
use crate::pathloss::LargeScaleGains;

/// `Σ_l |w_{l,m}|²` over the desired column of the direct channel.
pub fn effective_gain(ch: &ChannelRealization, cluster: usize, user: usize) -> f64 {
    let w = &ch.direct[cluster][user];
    w.column(cluster).iter().map(|z| z.norm_sqr()).sum()
}

/// `|Σ_l w_{l,m}|²`, the gain an all-ones detector actually sees.
pub fn detector_gain(ch: &ChannelRealization, cluster: usize, user: usize) -> f64 {
    let w = &ch.direct[cluster][user];
    w.column(cluster).iter().sum::<Complex64>().norm_sqr()
}

/// Shared link parameters for one operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkParams {
    pub p_watt: f64,
    pub noise_watt: f64,
    pub rx_antennas: usize,
    /// `α_k²`, non-increasing.
    pub power_alloc: Vec<f64>,
    /// `R_k` in bits per channel use.
    pub target_rates: Vec<f64>,
}

impl LinkParams {
    pub fn users(&self) -> usize {
        self.power_alloc.len()
    }

    fn noise_term(&self) -> f64 {
        self.rx_antennas as f64 * self.noise_watt
    }
}

/// The realization-dependent inputs of one user's SINR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserLink {
    pub eff_gain: f64,
    pub l_direct: f64,
    pub residue: f64,
}

/// SINR of a user decoding the message of user `v`.
///
/// `g·L_b·p·α_v² / (Î·p + g·L_b·p·Σ_{q>v} α_q² + L·σ²)`. A zero residue
/// reproduces the ideal expression exactly.
pub fn sinr_decode(link: &UserLink, params: &LinkParams, v: usize) -> f64 {
    let signal = link.eff_gain * link.l_direct * params.p_watt;
    let weaker: f64 = params.power_alloc[v + 1..].iter().sum();
    signal * params.power_alloc[v] / (link.residue * params.p_watt + signal * weaker + params.noise_term())
}

pub fn sinr_ideal(eff_gain: f64, l_direct: f64, params: &LinkParams, k: usize) -> f64 {
    sinr_nonideal(eff_gain, 0.0, l_direct, params, k)
}

pub fn sinr_nonideal(eff_gain: f64, residue: f64, l_direct: f64, params: &LinkParams, k: usize) -> f64 {
    let link = UserLink {
        eff_gain,
        l_direct,
        residue,
    };
    sinr_decode(&link, params, k)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SicOutcome {
    pub outage: bool,
    /// `log₂(1+SINR_{k→k})`, or zero when any stage fails.
    pub rate: f64,
}

/// Successive decoding of users `0..=k` at user `k`.
pub fn sic_chain(link: &UserLink, params: &LinkParams, k: usize) -> SicOutcome {
    let mut outage = false;
    let mut own = 0.0;
    for v in 0..=k {
        let rate = (1.0 + sinr_decode(link, params, v)).log2();
        if rate <= params.target_rates[v] {
            outage = true;
        }
        if v == k {
            own = rate;
        }
    }
    SicOutcome {
        outage,
        rate: if outage { 0.0 } else { own },
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmaOutcome {
    pub snr: f64,
    pub outage: bool,
}

/// Orthogonal baseline: user `k` owns a `1/K` time slot at full power.
pub fn oma_snr(link: &UserLink, params: &LinkParams, k: usize) -> OmaOutcome {
    let snr = params.p_watt * link.l_direct * link.eff_gain / (link.residue * params.p_watt + params.noise_term());
    let users = params.users() as f64;
    let outage = (1.0 + snr).log2() / users <= params.target_rates[k];
    OmaOutcome { snr, outage }
}

/// Per-interferer coefficients seen through the all-ones detector:
/// `c_{m'} = Σ_l ([G·diag(φ)·H]_{l,m'}·√L_r + w_{l,m'}·√L_b)`.
pub fn detector_coefficients(
    ch: &ChannelRealization,
    gains: &LargeScaleGains,
    pb: &PassiveBeamforming,
    cluster: usize,
    user: usize,
) -> Vec<Complex64> {
    let g = &ch.ris_user[cluster][user];
    let w = &ch.direct[cluster][user];
    let sr = gains.reflect[cluster][user].sqrt();
    let sb = gains.direct[cluster][user].sqrt();
    // Σ_l g_{l,n}, shared by every column.
    let g_sum: Vec<Complex64> = (0..g.ncols()).map(|n| g.column(n).iter().sum()).collect();
    (0..ch.clusters())
        .map(|mp| {
            let reflected: Complex64 = (0..g.ncols()).map(|n| g_sum[n] * pb.phi[n] * ch.bs_ris[(n, mp)]).sum();
            let direct: Complex64 = w.column(mp).iter().sum();
            reflected * sr + direct * sb
        })
        .collect()
}

/// Desired and inter-cluster powers (per unit transmit power) behind the
/// exact diagnostic SINR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactLink {
    pub desired: f64,
    pub inter_cluster: f64,
}

impl ExactLink {
    pub fn from_coefficients(coeffs: &[Complex64], cluster: usize) -> Self {
        let inter_cluster = coeffs
            .iter()
            .enumerate()
            .filter(|&(mp, _)| mp != cluster)
            .map(|(_, c)| c.norm_sqr())
            .sum();
        ExactLink {
            desired: coeffs[cluster].norm_sqr(),
            inter_cluster,
        }
    }
}

/// SINR computed from the true per-symbol coefficients, reflected desired
/// signal included. Every interfering cluster carries unit total power.
pub fn exact_per_symbol_sinr(exact: &ExactLink, params: &LinkParams, k: usize) -> f64 {
    let p = params.p_watt;
    let total: f64 = params.power_alloc.iter().sum();
    let weaker: f64 = params.power_alloc[k + 1..].iter().sum();
    exact.desired * p * params.power_alloc[k]
        / (exact.inter_cluster * p * total + exact.desired * p * weaker + params.noise_term())
}

/// Everything the estimators need from one realization at one power.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkMetrics {
    pub eff_gain: Vec<Vec<f64>>,
    pub residue: Vec<Vec<f64>>,
    /// `sinr[m][k][v]` for `v ≤ k`.
    pub sinr: Vec<Vec<Vec<f64>>>,
    /// Unconditional `log₂(1+SINR_{k→k})`.
    pub rate: Vec<Vec<f64>>,
    pub outage: Vec<Vec<bool>>,
    pub oma_outage: Vec<Vec<bool>>,
    pub exact_rate: Vec<Vec<f64>>,
    pub feasible: bool,
}

impl LinkMetrics {
    pub fn evaluate(links: &[Vec<UserLink>], exact: &[Vec<ExactLink>], feasible: bool, params: &LinkParams) -> Self {
        let mut out = LinkMetrics {
            eff_gain: Vec::with_capacity(links.len()),
            residue: Vec::with_capacity(links.len()),
            sinr: Vec::with_capacity(links.len()),
            rate: Vec::with_capacity(links.len()),
            outage: Vec::with_capacity(links.len()),
            oma_outage: Vec::with_capacity(links.len()),
            exact_rate: Vec::with_capacity(links.len()),
            feasible,
        };
        for (row, ex_row) in links.iter().zip(exact) {
            out.eff_gain.push(row.iter().map(|u| u.eff_gain).collect());
            out.residue.push(row.iter().map(|u| u.residue).collect());
            out.sinr.push(
                row.iter()
                    .enumerate()
                    .map(|(k, u)| (0..=k).map(|v| sinr_decode(u, params, v)).collect())
                    .collect(),
            );
            out.rate.push(
                row.iter()
                    .enumerate()
                    .map(|(k, u)| (1.0 + sinr_decode(u, params, k)).log2())
                    .collect(),
            );
            out.outage.push(
                row.iter()
                    .enumerate()
                    .map(|(k, u)| sic_chain(u, params, k).outage)
                    .collect(),
            );
            out.oma_outage.push(
                row.iter()
                    .enumerate()
                    .map(|(k, u)| oma_snr(u, params, k).outage)
                    .collect(),
            );
            out.exact_rate.push(
                ex_row
                    .iter()
                    .enumerate()
                    .map(|(k, e)| (1.0 + exact_per_symbol_sinr(e, params, k)).log2())
                    .collect(),
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::CMatrix;

    fn params(p: f64, noise: f64, l: usize, rates: Vec<f64>) -> LinkParams {
        LinkParams {
            p_watt: p,
            noise_watt: noise,
            rx_antennas: l,
            power_alloc: vec![0.6, 0.4],
            target_rates: rates,
        }
    }

    #[test]
    fn all_ones_gain() {
        let ch = ChannelRealization {
            bs_ris: CMatrix::from_element(1, 2, Complex64::new(1.0, 0.0)),
            direct: vec![vec![CMatrix::from_element(3, 2, Complex64::new(1.0, 0.0))]; 2],
            ris_user: vec![vec![CMatrix::from_element(3, 1, Complex64::new(1.0, 0.0))]; 2],
        };
        assert_eq!(effective_gain(&ch, 0, 0), 3.0);
        assert_eq!(detector_gain(&ch, 1, 0), 9.0);
    }

    #[test]
    fn nearest_user_formula() {
        let p = params(1.0, 3.98e-13, 2, vec![1.0, 1.5]);
        let s = sinr_ideal(1.0, 1e-7, &p, 1);
        assert!((s - 1e-7 * 0.4 / (2.0 * 3.98e-13)).abs() < 1e-9 * s);
        assert!((s - 5.025e4).abs() / 5.025e4 < 1e-3, "{s}");
    }

    #[test]
    fn far_user_ceiling() {
        let p = params(1e12, 3.98e-13, 2, vec![1.0, 1.5]);
        let s = sinr_ideal(1.0, 1e-7, &p, 0);
        assert!((s - 1.5).abs() < 1e-9);
    }

    #[test]
    fn residue_zero_is_bit_exact() {
        let p = params(0.37, 1e-12, 2, vec![1.0, 1.5]);
        for k in 0..2 {
            assert_eq!(
                sinr_ideal(0.8, 2e-7, &p, k).to_bits(),
                sinr_nonideal(0.8, 0.0, 2e-7, &p, k).to_bits()
            );
        }
    }

    #[test]
    fn residue_ceiling_and_monotonicity() {
        let p = params(1e15, 1e-12, 2, vec![1.0, 1.5]);
        let s = sinr_nonideal(1.2, 1e-9, 1e-7, &p, 1);
        assert!((s - 1.2 * 1e-7 * 0.4 / 1e-9).abs() < 1e-6 * s);
        let p = params(1.0, 1e-12, 2, vec![1.0, 1.5]);
        let a = sinr_nonideal(1.0, 1e-10, 1e-7, &p, 1);
        let b = sinr_nonideal(1.0, 2e-10, 1e-7, &p, 1);
        assert!(b < a && a < sinr_ideal(1.0, 1e-7, &p, 1));
    }

    #[test]
    fn sic_outage_rules() {
        let link = UserLink {
            eff_gain: 1.0,
            l_direct: 1e-7,
            residue: 0.0,
        };
        let p = params(1e6, 1e-20, 2, vec![0.0, 0.0]);
        assert!(!sic_chain(&link, &p, 1).outage);
        // Noise-free limit: stage 0 sees SINR 1.5 < 2^1.4 − 1.
        let p = params(1e6, 1e-20, 2, vec![1.0, 1.5]);
        assert!(!sic_chain(&link, &p, 1).outage);
        let p = params(1e6, 1e-20, 2, vec![1.4, 1.5]);
        let out = sic_chain(&link, &p, 1);
        assert!(out.outage && out.rate == 0.0);
    }

    #[test]
    fn oma_matches_noma_scaling() {
        let link = UserLink {
            eff_gain: 0.7,
            l_direct: 1e-7,
            residue: 3e-12,
        };
        let p = params(0.5, 1e-12, 2, vec![1.0, 1.0]);
        let noma = sinr_decode(&link, &p, 1);
        let oma = oma_snr(&link, &p, 1);
        assert!((oma.snr * 0.4 - noma).abs() < 1e-12 * noma);
        let single = LinkParams {
            power_alloc: vec![1.0],
            target_rates: vec![1.0],
            ..p.clone()
        };
        assert_eq!(oma_snr(&link, &single, 0).outage, sic_chain(&link, &single, 0).outage);
    }

    #[test]
    fn exact_link_split() {
        let coeffs = [
            Complex64::new(1.0, 1.0),
            Complex64::new(0.0, 2.0),
            Complex64::new(1.0, 0.0),
        ];
        let e = ExactLink::from_coefficients(&coeffs, 1);
        assert_eq!(e.desired, 4.0);
        assert_eq!(e.inter_cluster, 3.0);
    }
}
