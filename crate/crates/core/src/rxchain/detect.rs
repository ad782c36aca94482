//! Pilot detection and MRC soft demodulation.

use crate::analysis::chi2_inv;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::pilots::PilotCodebook;
use crate::Complex64;

/// A pilot row whose correlator energy crossed the threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotDetection {
    pub index: usize,
    /// `||u_l||^2` with `u_l = Y_p b_l^T / sqrt(n_p)`.
    pub energy: f64,
    /// Unnormalised correlations `Y_p b_l^T`, one per antenna.
    pub correlation: Vec<Complex64>,
}

/// Correlations of every antenna row of `yp` with every codebook row,
/// laid out as `out[l][m]`.
pub fn pilot_correlations(yp: &CMatrix, codebook: &PilotCodebook) -> Vec<Vec<Complex64>> {
    let n_p = codebook.len();
    let mut out = vec![Vec::with_capacity(yp.nrows()); n_p];
    let mut row = vec![Complex64::new(0.0, 0.0); yp.ncols()];
    for m in 0..yp.nrows() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = yp[(m, c)];
        }
        for (l, c) in codebook.correlate_all(&row).into_iter().enumerate() {
            out[l].push(c);
        }
    }
    out
}

/// Energy threshold `0.5 delta Gamma^-1_{2M}(1 - gamma)` of the level-`gamma` test.
pub fn np_threshold(antennas: usize, gamma: f64, noise_level: f64) -> f64 {
    0.5 * noise_level * chi2_inv(2.0 * antennas as f64, 1.0 - gamma)
}

/// Pilot rows whose energy reaches `threshold`, strongest first.
pub fn detect_pilots(yp: &CMatrix, codebook: &PilotCodebook, threshold: f64) -> Vec<PilotDetection> {
    let n_p = codebook.len() as f64;
    let mut found: Vec<PilotDetection> = pilot_correlations(yp, codebook)
        .into_iter()
        .enumerate()
        .filter_map(|(index, correlation)| {
            let energy = correlation.iter().map(|c| c.norm_sqr()).sum::<f64>() / n_p;
            (energy >= threshold).then_some(PilotDetection { index, energy, correlation })
        })
        .collect();
    found.sort_by(|a, b| b.energy.total_cmp(&a.energy).then(a.index.cmp(&b.index)));
    found
}

/// `h = Y_p b^T / (n_p sqrt(P_p))`.
pub fn estimate_channel(yp: &CMatrix, row: &[i8], pilot_power: f64) -> Vec<Complex64> {
    let scale = 1.0 / (row.len() as f64 * pilot_power.sqrt());
    (0..yp.nrows())
        .map(|m| {
            row.iter()
                .enumerate()
                .map(|(c, &b)| yp[(m, c)] * b as f64)
                .sum::<Complex64>()
                * scale
        })
        .collect()
}

/// Channel estimate from a detection's stored correlations.
pub fn estimate_from_detection(det: &PilotDetection, n_p: usize, pilot_power: f64) -> Vec<Complex64> {
    let scale = 1.0 / (n_p as f64 * pilot_power.sqrt());
    det.correlation.iter().map(|c| c * scale).collect()
}

/// Interleaves `[Im(v_0), Re(v_0), Im(v_1), ...]`, matching the QPSK bit order.
pub fn demod_reshuffle(v: &[Complex64]) -> Vec<f64> {
    v.iter().flat_map(|s| [s.im, s.re]).collect()
}

/// `v = w^H Y_c` for a combining vector `w`.
pub fn combine(w: &[Complex64], yc: &CMatrix) -> Vec<Complex64> {
    (0..yc.ncols())
        .map(|t| w.iter().enumerate().map(|(m, c)| c.conj() * yc[(m, t)]).sum())
        .collect()
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// MRC soft demodulation of one user: `f = 2 sqrt(2 P_c) ||h||^2 / sigma_o^2 * g`
/// with `sigma_o^2 = P_c sum_k |h^H h_k|^2 + delta ||h||^2` over the other
/// detected users `k`.
pub fn mrc_demod_llr(
    h: &[Complex64],
    yc: &CMatrix,
    interferers: &[&[Complex64]],
    coded_power: f64,
    noise_level: f64,
) -> Result<Vec<f64>> {
    let gain: f64 = h.iter().map(|c| c.norm_sqr()).sum();
    if !(gain > 0.0) || !gain.is_finite() {
        return Err(Error::DegenerateEstimate);
    }
    let interference: f64 = interferers.iter().map(|k| inner(h, k).norm_sqr()).sum();
    let sigma = coded_power * interference + noise_level * gain;
    let mut scale = 2.0 * (2.0 * coded_power).sqrt() * gain / sigma;
    if !scale.is_finite() || scale <= 0.0 {
        scale = 1.0;
    }
    Ok(demod_reshuffle(&combine(h, yc)).into_iter().map(|g| scale * g).collect())
}
