//! Small-scale fading draws.
//!
//! All generators have unit average power per entry; path loss is applied
//! separately. Entries are drawn in row-major order so that a given random
//! stream always produces the same matrix.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::numerics::CMatrix;
use crate::scenario::ScenarioConfig;

/// One joint draw of every fading matrix in the network.
///
/// Indices are zero-based: `direct[m][k]` belongs to user `k` of cluster `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// BS–RIS fading, `N × M`.
    pub bs_ris: CMatrix,
    /// BS–user fading, `L × M` per user.
    pub direct: Vec<Vec<CMatrix>>,
    /// RIS–user fading, `L × N` per user.
    pub ris_user: Vec<Vec<CMatrix>>,
}

impl ChannelRealization {
    pub fn clusters(&self) -> usize {
        self.bs_ris.ncols()
    }

    pub fn elements(&self) -> usize {
        self.bs_ris.nrows()
    }

    /// `Σ_{m'} h_{n,m'}` for every element `n`.
    pub fn bs_ris_row_sums(&self) -> Vec<Complex64> {
        self.bs_ris.row_iter().map(|r| r.iter().sum()).collect()
    }
}

/// Unit-variance circularly-symmetric complex Gaussian sample.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn draw_rayleigh_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    let data: Vec<Complex64> = (0..rows * cols).map(|_| complex_gaussian(rng)).collect();
    CMatrix::from_row_slice(rows, cols, &data)
}

/// Rician entries `√(K/(K+1))·1 + √(1/(K+1))·z`; the line-of-sight term is the
/// constant 1, so `K → ∞` yields an all-ones matrix and `K = 0` is Rayleigh.
pub fn draw_rician_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, k_factor: f64, rng: &mut R) -> CMatrix {
    let los = (k_factor / (k_factor + 1.0)).sqrt();
    let scatter = (1.0 / (k_factor + 1.0)).sqrt();
    let data: Vec<Complex64> = (0..rows * cols)
        .map(|_| Complex64::new(los, 0.0) + complex_gaussian(rng) * scatter)
        .collect();
    CMatrix::from_row_slice(rows, cols, &data)
}

/// Draws `H`, then `W` and `G` for each user in `(m, k)` lexicographic order.
pub fn draw_realization<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> ChannelRealization {
    draw_realization_with(cfg, cfg.ris_elements(), rng)
}

/// As [`draw_realization`] with an explicit element count.
pub fn draw_realization_with<R: Rng + ?Sized>(
    cfg: &ScenarioConfig,
    elements: usize,
    rng: &mut R,
) -> ChannelRealization {
    let (m_count, k_count, l_count) = (cfg.clusters, cfg.users, cfg.rx_antennas);
    let bs_ris = draw_rician_matrix(elements, m_count, cfg.ris.rician_k1, rng);
    let mut direct = Vec::with_capacity(m_count);
    let mut ris_user = Vec::with_capacity(m_count);
    for _ in 0..m_count {
        let mut w_row = Vec::with_capacity(k_count);
        let mut g_row = Vec::with_capacity(k_count);
        for _ in 0..k_count {
            w_row.push(draw_rayleigh_matrix(l_count, m_count, rng));
            g_row.push(draw_rician_matrix(l_count, elements, cfg.ris.rician_k2, rng));
        }
        direct.push(w_row);
        ris_user.push(g_row);
    }
    ChannelRealization {
        bs_ris,
        direct,
        ris_user,
    }
}
