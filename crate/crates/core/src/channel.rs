//! Rayleigh block-fading multiple-access channel for one slot.
//!
//! `Y = H X + Z` with `H` of size `M x K_s` and `X` stacking the users'
//! slot signals row-wise. Random draws are antenna-major: for each antenna
//! the `K_s` fading coefficients are drawn, then the `L` noise samples.
//! With that order, `V` single-antenna draws made one after another give
//! the same numbers as one `V`-antenna draw.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{param, Error, Result};
use crate::linalg::CMatrix;
use crate::txchain::FrameLayout;
use crate::Complex64;

/// Fading matrix and noise level of one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDraw {
    /// `M x K_s` fading coefficients.
    pub h: CMatrix,
    pub noise_var: f64,
}

/// Received slot matrix and its interference-cancelled residual.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotObservation {
    pub y: CMatrix,
    pub residual: CMatrix,
    pub layout: FrameLayout,
}

impl SlotObservation {
    pub fn new(y: CMatrix, layout: FrameLayout) -> Result<Self> {
        if y.ncols() != layout.slot_len() {
            return Err(Error::Input(format!(
                "observation has {} columns, slot length is {}",
                y.ncols(),
                layout.slot_len()
            )));
        }
        Ok(Self { residual: y.clone(), y, layout })
    }

    pub fn antennas(&self) -> usize {
        self.y.nrows()
    }

    /// Residual columns of pilot part `j`.
    pub fn pilot_part(&self, j: usize) -> CMatrix {
        pilot_part(&self.residual, &self.layout, j)
    }

    /// Residual columns of the coded part.
    pub fn coded_part(&self) -> CMatrix {
        coded_part(&self.residual, &self.layout)
    }
}

/// Columns of pilot part `j` of any `M x L` slot matrix.
pub fn pilot_part(m: &CMatrix, layout: &FrameLayout, j: usize) -> CMatrix {
    let r = layout.pilot_range(j);
    m.columns(r.start, r.len()).into_owned()
}

/// Coded-part columns of any `M x L` slot matrix.
pub fn coded_part(m: &CMatrix, layout: &FrameLayout) -> CMatrix {
    let r = layout.coded_range();
    m.columns(r.start, r.len()).into_owned()
}

/// One `CN(0, var)` sample (real part drawn first).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// Passes the slot signals through an `antennas`-branch Rayleigh channel.
///
/// `signals` may be empty, in which case `slot_len` fixes the number of
/// columns. Returns the received matrix and the hidden channel draw.
pub fn transmit_slot<R: Rng + ?Sized>(
    signals: &[&[Complex64]],
    slot_len: usize,
    antennas: usize,
    noise_var: f64,
    rng: &mut R,
) -> Result<(CMatrix, ChannelDraw)> {
    if let Some(bad) = signals.iter().find(|s| s.len() != slot_len) {
        return Err(Error::Input(format!(
            "signal of length {} in a slot of length {slot_len}",
            bad.len()
        )));
    }
    if noise_var < 0.0 || !noise_var.is_finite() {
        return param(format!("noise variance {noise_var} must be finite and non-negative"));
    }
    let k = signals.len();
    let mut h = CMatrix::zeros(antennas, k);
    let mut y = CMatrix::zeros(antennas, slot_len);
    for m in 0..antennas {
        for i in 0..k {
            h[(m, i)] = complex_gaussian(rng, 1.0);
        }
        for t in 0..slot_len {
            let mut acc = if noise_var > 0.0 {
                complex_gaussian(rng, noise_var)
            } else {
                Complex64::new(0.0, 0.0)
            };
            for (i, x) in signals.iter().enumerate() {
                acc += h[(m, i)] * x[t];
            }
            y[(m, t)] = acc;
        }
    }
    Ok((y, ChannelDraw { h, noise_var }))
}

/// Stacks `V` sub-frame observations of the same slot as `V * M` rows.
pub fn stack_subframes(parts: &[CMatrix]) -> Result<CMatrix> {
    let Some(first) = parts.first() else {
        return param("no sub-frames to stack");
    };
    let cols = first.ncols();
    if parts.iter().any(|p| p.ncols() != cols) {
        return Err(Error::Input("sub-frames differ in length".into()));
    }
    let rows: usize = parts.iter().map(|p| p.nrows()).sum();
    let mut out = CMatrix::zeros(rows, cols);
    let mut r0 = 0;
    for p in parts {
        out.rows_mut(r0, p.nrows()).copy_from(p);
        r0 += p.nrows();
    }
    Ok(out)
}

/// `10 log10(V L P / (sigma^2 B))`.
pub fn ebn0_db(power: f64, slot_len: usize, message_bits: usize, noise_var: f64, subframes: usize) -> Result<f64> {
    if !(power > 0.0) || slot_len == 0 || message_bits == 0 || !(noise_var > 0.0) || subframes == 0 {
        return param("Eb/N0 inputs must be positive");
    }
    Ok(10.0
        * (subframes as f64 * slot_len as f64 * power / (noise_var * message_bits as f64)).log10())
}

/// Average per-sample power `P` that realises `ebn0_db`.
pub fn power_for_ebn0(ebn0_db: f64, slot_len: usize, message_bits: usize, noise_var: f64, subframes: usize) -> f64 {
    10f64.powf(ebn0_db / 10.0) * noise_var * message_bits as f64 / (subframes as f64 * slot_len as f64)
}
