//! Signal-cancellation passive beamforming.
//!
//! The RIS vector `φ` is chosen so that the reflected signal at every user
//! equals the negative of the inter-cluster interference on its direct link:
//! `H̃·φ = B`. With more elements than equations the system is
//! underdetermined and the minimum-norm solution is used.

use std::f64::consts::TAU;

use num_complex::Complex64;
use thiserror::Error;

use crate::channel::ChannelRealization;
use crate::numerics::{min_norm_solve, CMatrix, CVector, ComplexLinearSystem, LinalgError, DEFAULT_RANK_TOL};
use crate::pathloss::LargeScaleGains;
use crate::scenario::CancellationMode;

/// Amplitudes above this are physically unrealizable by a passive surface.
pub const AMPLITUDE_FEASIBILITY_TOL: f64 = 1e-12;

/// Relative residual below which the cancellation system counts as solved.
pub const CONSISTENCY_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum BeamformingError {
    #[error("system has {columns} columns but {elements} RIS elements were requested")]
    ShapeMismatch { columns: usize, elements: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Which equation a row of the stacked system belongs to (zero-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RowIndex {
    pub cluster: usize,
    pub user: usize,
    pub antenna: usize,
    /// Interfering transmit antenna, per-symbol mode only.
    pub interferer: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct EffectiveSystem {
    pub h_tilde: CMatrix,
    pub b_target: CVector,
    pub rows: Vec<RowIndex>,
    pub mode: CancellationMode,
}

/// RIS coefficients `φ_n = β_n e^{jθ_n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PassiveBeamforming {
    pub phi: CVector,
    pub amplitudes: Vec<f64>,
    /// Phases in `[0, 2π)`.
    pub phases: Vec<f64>,
    /// Every amplitude is at most one.
    pub feasible: bool,
    /// `Some(b)` once quantized to `b` bits.
    pub resolution_bits: Option<u32>,
    /// `‖H̃φ − B‖₂` of the continuous solve.
    pub residual_norm: f64,
    /// The continuous solve met the cancellation equality.
    pub consistent: bool,
}

impl PassiveBeamforming {
    pub fn from_phi(phi: CVector, residual_norm: f64, consistent: bool) -> Self {
        let amplitudes: Vec<f64> = phi.iter().map(|z| z.norm()).collect();
        let phases = phi.iter().map(|z| wrap_phase(z.arg())).collect();
        let feasible = amplitudes.iter().all(|&a| a <= 1.0 + AMPLITUDE_FEASIBILITY_TOL);
        PassiveBeamforming {
            phi,
            amplitudes,
            phases,
            feasible,
            resolution_bits: None,
            residual_norm,
            consistent,
        }
    }

    pub fn zeros(elements: usize) -> Self {
        Self::from_phi(CVector::zeros(elements), 0.0, true)
    }

    pub fn is_quantized(&self) -> bool {
        self.resolution_bits.is_some()
    }

    pub fn max_amplitude(&self) -> f64 {
        self.amplitudes.iter().cloned().fold(0.0, f64::max)
    }
}

fn wrap_phase(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

fn row_indices(clusters: usize, users: usize, antennas: usize, mode: CancellationMode) -> Vec<RowIndex> {
    let mut rows = Vec::new();
    if clusters < 2 {
        return rows;
    }
    for m in 0..clusters {
        for k in 0..users {
            for l in 0..antennas {
                match mode {
                    CancellationMode::Aggregate => rows.push(RowIndex {
                        cluster: m,
                        user: k,
                        antenna: l,
                        interferer: None,
                    }),
                    CancellationMode::PerSymbol => {
                        for mp in (0..clusters).filter(|&mp| mp != m) {
                            rows.push(RowIndex {
                                cluster: m,
                                user: k,
                                antenna: l,
                                interferer: Some(mp),
                            });
                        }
                    }
                }
            }
        }
    }
    rows
}

/// Direct-link interference to cancel: `B`.
///
/// Aggregate rows carry `−[W̄·1]_l·√L_b`; per-symbol rows carry
/// `−w_{l,m'}·√L_b`. A single cluster has nothing to cancel and yields an
/// empty vector.
pub fn build_interference_target(ch: &ChannelRealization, gains: &LargeScaleGains, mode: CancellationMode) -> CVector {
    let clusters = ch.clusters();
    let users = ch.direct.first().map_or(0, |c| c.len());
    let antennas = ch.direct.first().and_then(|c| c.first()).map_or(0, |w| w.nrows());
    let rows = row_indices(clusters, users, antennas, mode);
    target_for_rows(ch, gains, &rows)
}

fn target_for_rows(ch: &ChannelRealization, gains: &LargeScaleGains, rows: &[RowIndex]) -> CVector {
    CVector::from_iterator(
        rows.len(),
        rows.iter().map(|r| {
            let w = &ch.direct[r.cluster][r.user];
            let scale = gains.direct[r.cluster][r.user].sqrt();
            let interference: Complex64 = match r.interferer {
                None => (0..w.ncols())
                    .filter(|&mp| mp != r.cluster)
                    .map(|mp| w[(r.antenna, mp)])
                    .sum(),
                Some(mp) => w[(r.antenna, mp)],
            };
            -interference * scale
        }),
    )
}

/// Stacked effective reflection matrix `H̃` together with the target `B`.
///
/// Aggregate row `(m,k,l)`, column `n`: `√L_r·g_{l,n}·Σ_{m'} h_{n,m'}`.
/// Per-symbol row `(m,k,l,m')`: `√L_r·g_{l,n}·h_{n,m'}`. The reflected gain
/// `L_r` already reflects the configured scenario.
pub fn build_effective_matrix(
    ch: &ChannelRealization,
    gains: &LargeScaleGains,
    mode: CancellationMode,
) -> EffectiveSystem {
    let clusters = ch.clusters();
    let elements = ch.elements();
    let users = ch.direct.first().map_or(0, |c| c.len());
    let antennas = ch.direct.first().and_then(|c| c.first()).map_or(0, |w| w.nrows());
    let rows = row_indices(clusters, users, antennas, mode);
    let h_sum = ch.bs_ris_row_sums();

    let mut h_tilde = CMatrix::zeros(rows.len(), elements);
    for (i, r) in rows.iter().enumerate() {
        let g = &ch.ris_user[r.cluster][r.user];
        let scale = gains.reflect[r.cluster][r.user].sqrt();
        for n in 0..elements {
            let h = match r.interferer {
                None => h_sum[n],
                Some(mp) => ch.bs_ris[(n, mp)],
            };
            h_tilde[(i, n)] = g[(r.antenna, n)] * h * scale;
        }
    }
    let b_target = target_for_rows(ch, gains, &rows);
    EffectiveSystem {
        h_tilde,
        b_target,
        rows,
        mode,
    }
}

/// Minimum-norm solution of `H̃·φ = B`.
///
/// Amplitudes above one are flagged but never clipped. When the system is
/// overdetermined or rank-deficient the least-squares `φ` is returned with
/// `consistent == false`.
pub fn solve_passive(sys: &EffectiveSystem, elements: usize) -> Result<PassiveBeamforming, BeamformingError> {
    if sys.h_tilde.ncols() != elements {
        return Err(BeamformingError::ShapeMismatch {
            columns: sys.h_tilde.ncols(),
            elements,
        });
    }
    if sys.b_target.is_empty() {
        return Ok(PassiveBeamforming::zeros(elements));
    }
    let system = ComplexLinearSystem::new(sys.h_tilde.clone(), sys.b_target.clone())?;
    let sol = min_norm_solve(&system, DEFAULT_RANK_TOL)?;
    let b_norm = sys.b_target.norm();
    let consistent = sol.residual_norm <= CONSISTENCY_TOL * b_norm.max(f64::MIN_POSITIVE);
    Ok(PassiveBeamforming::from_phi(sol.x, sol.residual_norm, consistent))
}

/// Nearest level in `{0, Δ, …, (T−1)Δ}` with `Δ = 1/T`; ties go down.
fn quantize_amplitude(beta: f64, levels: usize) -> f64 {
    let step = 1.0 / levels as f64;
    let scaled = beta / step;
    let mut idx = scaled.floor();
    if scaled - idx > 0.5 {
        idx += 1.0;
    }
    let idx = idx.clamp(0.0, (levels - 1) as f64);
    idx * step
}

/// Nearest level in `{0, Δθ, …, (T−1)Δθ}` on the circle; ties go to the
/// smaller level, and the wrap-around tie goes to level 0.
fn quantize_phase(theta: f64, levels: usize) -> f64 {
    let step = TAU / levels as f64;
    let scaled = wrap_phase(theta) / step;
    let mut idx = scaled.floor();
    let frac = scaled - idx;
    let last = (levels - 1) as f64;
    if frac > 0.5 || (frac == 0.5 && idx == last) {
        idx += 1.0;
    }
    let idx = (idx as usize) % levels;
    idx as f64 * step
}

/// Rounds every amplitude and phase independently to a `bits`-bit grid.
pub fn quantize(pb: &PassiveBeamforming, bits: u32) -> PassiveBeamforming {
    let levels = 1usize << bits;
    let amplitudes: Vec<f64> = pb.amplitudes.iter().map(|&b| quantize_amplitude(b, levels)).collect();
    let phases: Vec<f64> = pb.phases.iter().map(|&t| quantize_phase(t, levels)).collect();
    let phi = CVector::from_iterator(
        amplitudes.len(),
        amplitudes
            .iter()
            .zip(&phases)
            .map(|(&b, &t)| Complex64::from_polar(b, t)),
    );
    PassiveBeamforming {
        phi,
        feasible: amplitudes.iter().all(|&a| a <= 1.0 + AMPLITUDE_FEASIBILITY_TOL),
        amplitudes,
        phases,
        resolution_bits: Some(bits),
        residual_norm: pb.residual_norm,
        consistent: pb.consistent,
    }
}

/// Per-antenna error `G·diag(φ)·H·√L_r·1_M + W̄·√L_b·1_{M−1}` for one user.
pub fn residue_vector(
    ch: &ChannelRealization,
    gains: &LargeScaleGains,
    pb: &PassiveBeamforming,
    cluster: usize,
    user: usize,
) -> Vec<Complex64> {
    let h_sum = ch.bs_ris_row_sums();
    residue_vector_with_sums(ch, gains, &pb.phi, &h_sum, cluster, user)
}

pub(crate) fn residue_vector_with_sums(
    ch: &ChannelRealization,
    gains: &LargeScaleGains,
    phi: &CVector,
    h_sum: &[Complex64],
    cluster: usize,
    user: usize,
) -> Vec<Complex64> {
    let g = &ch.ris_user[cluster][user];
    let w = &ch.direct[cluster][user];
    let reflect = gains.reflect[cluster][user].sqrt();
    let direct = gains.direct[cluster][user].sqrt();
    (0..g.nrows())
        .map(|l| {
            let reflected: Complex64 = (0..g.ncols()).map(|n| g[(l, n)] * phi[n] * h_sum[n]).sum();
            let interference: Complex64 = (0..w.ncols()).filter(|&mp| mp != cluster).map(|mp| w[(l, mp)]).sum();
            reflected * reflect + interference * direct
        })
        .collect()
}

/// Interference residue `Î_{m,k}`: squared norm of the user's block of `H̃φ − B`.
pub fn residue(
    ch: &ChannelRealization,
    gains: &LargeScaleGains,
    pb: &PassiveBeamforming,
    cluster: usize,
    user: usize,
) -> f64 {
    residue_vector(ch, gains, pb, cluster, user)
        .iter()
        .map(|z| z.norm_sqr())
        .sum()
}
