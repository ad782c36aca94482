//! Iterative multi-stage receiver.
//!
//! Each iteration picks a `(group, pilot part)` pair, detects active pilots
//! in that part of the residual, decodes every detected user (MRC or, for
//! messages whose pilot bits are not encoded, the iterative inter-symbol
//! decoder), keeps the users that pass the success check and finally
//! cancels all users decoded so far from the original slot matrix.
//! Decoding stops after a full cycle of pairs without a new success.

mod detect;
mod iisd;
mod sic;

pub use detect::{
    combine, demod_reshuffle, detect_pilots, estimate_channel, estimate_from_detection, mrc_demod_llr,
    np_threshold, pilot_correlations, PilotDetection,
};
pub use iisd::{iisd, refine_channel_mmse, IisdOutcome};
pub use sic::{ls_sic, SicResult};

use std::collections::HashSet;
use std::io::Write;

use serde::Serialize;

use crate::analysis::chi2_inv;
use crate::channel::{coded_part, pilot_part};
use crate::error::{config, Error, Result};
use crate::linalg::{energy, stack_rows, CMatrix};
use crate::txchain::{Interleaver, PayloadCoding, Powers, SlotEncoder};
use crate::Complex64;

/// Transmit powers of one user group and how the receiver treats it.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupProfile {
    pub powers: Powers,
    pub interleaver: Interleaver,
    /// `delta_g`, the noise level assumed while this group is dominant.
    pub noise_level: f64,
}

/// Everything the receiver knows about the scheme.
#[derive(Debug, Clone)]
pub struct DecoderConfig {
    pub encoder: SlotEncoder,
    pub antennas: usize,
    pub noise_var: f64,
    pub gamma: f64,
    /// Groups in ascending power; the last one is decoded first.
    pub groups: Vec<GroupProfile>,
    /// Cap on IISD passes per detection set.
    pub iisd_max_passes: usize,
    chi2_quantile: f64,
}

/// Default cap on IISD passes.
pub const DEFAULT_IISD_PASSES: usize = 10;

impl DecoderConfig {
    pub fn new(
        encoder: SlotEncoder,
        antennas: usize,
        noise_var: f64,
        gamma: f64,
        groups: Vec<GroupProfile>,
    ) -> Result<Self> {
        if antennas == 0 {
            return config("receiver needs at least one antenna");
        }
        if !(gamma > 0.0 && gamma <= 1.0) {
            return config(format!("false-alarm level {gamma} outside (0, 1]"));
        }
        if groups.is_empty() {
            return config("at least one user group is required");
        }
        let l = encoder.layout.slot_len();
        if groups.iter().any(|g| g.interleaver.len() != l) {
            return config("interleaver length differs from the slot length");
        }
        Ok(Self {
            encoder,
            antennas,
            noise_var,
            gamma,
            groups,
            iisd_max_passes: DEFAULT_IISD_PASSES,
            chi2_quantile: chi2_inv(2.0 * antennas as f64, 1.0 - gamma),
        })
    }

    /// Single group, identity interleaver, noise level `sigma^2`.
    pub fn single_group(encoder: SlotEncoder, antennas: usize, noise_var: f64, gamma: f64, powers: Powers) -> Result<Self> {
        let l = encoder.layout.slot_len();
        let group = GroupProfile { powers, interleaver: Interleaver::identity(l), noise_level: noise_var };
        Self::new(encoder, antennas, noise_var, gamma, vec![group])
    }

    /// Detection threshold for noise level `delta`.
    pub fn threshold(&self, noise_level: f64) -> f64 {
        0.5 * noise_level * self.chi2_quantile
    }

    /// Iteration schedule: groups from strongest to weakest, parts in order.
    pub fn schedule(&self) -> Vec<(usize, usize)> {
        let parts = self.encoder.layout.pilot_parts;
        (0..self.groups.len()).rev().flat_map(|g| (0..parts).map(move |j| (g, j))).collect()
    }

    /// Transmitted (power-scaled, interleaved) signal of a message in group `g`.
    pub fn regenerate(&self, message: &[u8], group: usize) -> Result<Vec<Complex64>> {
        let grp = &self.groups[group];
        let msg = self.encoder.split(message)?;
        Ok(grp.interleaver.interleave(&self.encoder.assemble(&msg, grp.powers)))
    }
}

/// A decode attempt that produced a message candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    /// Reconstructed `B`-bit message.
    pub message: Vec<u8>,
    /// Polar information bits as decoded.
    pub payload: Vec<u8>,
    /// Flag of the CRC checked inside the list decoder.
    pub outer_crc: bool,
}

/// Acceptance rule. Joint coding: the CRC passes and pilot part `part` of
/// the message maps back to the detected row. Pilot bits not encoded: both
/// CRCs pass.
pub fn success_check(encoder: &SlotEncoder, cand: &Candidate, detected_index: usize, part: usize) -> bool {
    if !cand.outer_crc || cand.message.len() != encoder.message_bits {
        return false;
    }
    match &encoder.coding {
        PayloadCoding::Joint { .. } => {
            let bp = encoder.layout.pilot_bits;
            let seg = &cand.message[part * bp..(part + 1) * bp];
            crate::pilots::bits_to_index(seg) == detected_index
        }
        PayloadCoding::WithoutPilotBits { message, .. } => {
            let bc = encoder.message_bits - encoder.layout.pilot_parts * encoder.layout.pilot_bits;
            cand.payload.len() >= bc + message.degree()
                && cand.payload[bc..bc + message.degree()] == message.compute(&cand.message)[..]
        }
    }
}

/// A user accepted by the receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodedUser {
    pub message: Vec<u8>,
    /// Signal as transmitted, used to cancel the user.
    pub signal: Vec<Complex64>,
    pub group: usize,
    pub part: usize,
    pub pilot_index: usize,
}

/// One record per receiver iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationTrace {
    pub iteration: usize,
    pub group: usize,
    pub part: usize,
    pub detected: usize,
    pub successes: usize,
    pub residual_energy: f64,
}

/// Writes trace records as newline-delimited JSON.
pub fn write_trace<W: Write>(out: &mut W, trace: &[IterationTrace]) -> Result<()> {
    for t in trace {
        let line = serde_json::to_string(t).map_err(|e| Error::Io(e.into()))?;
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Result of decoding one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotDecoding {
    pub users: Vec<DecodedUser>,
    pub iterations: usize,
    pub trace: Vec<IterationTrace>,
    /// Some SIC solve needed diagonal loading.
    pub regularized_sic: bool,
}

impl SlotDecoding {
    pub fn messages(&self) -> impl Iterator<Item = &[u8]> {
        self.users.iter().map(|u| u.message.as_slice())
    }
}

fn deinterleave_columns(y: &CMatrix, pi: &Interleaver) -> CMatrix {
    if pi.is_identity() {
        return y.clone();
    }
    let mut out = CMatrix::zeros(y.nrows(), y.ncols());
    for (k, &p) in pi.permutation().iter().enumerate() {
        out.set_column(p, &y.column(k));
    }
    out
}

/// Candidates of one MRC iteration, paired with their detection index.
fn mrc_iteration(
    cfg: &DecoderConfig,
    detections: &[PilotDetection],
    yc: &CMatrix,
    group: &GroupProfile,
) -> Vec<(usize, Candidate)> {
    let enc = &cfg.encoder;
    let n_p = enc.layout.n_p();
    let crc = enc.coding.decoder_crc();
    let estimates: Vec<Vec<Complex64>> = detections
        .iter()
        .map(|d| estimate_from_detection(d, n_p, group.powers.pilot))
        .collect();
    let mut out = Vec::new();
    for (i, h) in estimates.iter().enumerate() {
        let others: Vec<&[Complex64]> = estimates
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != i)
            .map(|(_, e)| e.as_slice())
            .collect();
        let Ok(llr) = mrc_demod_llr(h, yc, &others, group.powers.coded, group.noise_level) else {
            continue;
        };
        let Ok(dec) = enc.code.decode(&llr, crc) else { continue };
        let message = dec.info[..enc.message_bits].to_vec();
        out.push((i, Candidate { message, payload: dec.info, outer_crc: dec.crc_pass }));
    }
    out
}

/// Runs the iterative receiver on the received slot matrix `y`.
pub fn decode_slot(y: &CMatrix, cfg: &DecoderConfig) -> Result<SlotDecoding> {
    let layout = cfg.encoder.layout;
    let l = layout.slot_len();
    if y.ncols() != l || y.nrows() != cfg.antennas {
        return Err(Error::Input(format!(
            "slot matrix is {}x{}, expected {}x{l}",
            y.nrows(),
            y.ncols(),
            cfg.antennas
        )));
    }
    let schedule = cfg.schedule();
    let mut residual = y.clone();
    let mut users: Vec<DecodedUser> = Vec::new();
    let mut seen: HashSet<Vec<u8>> = HashSet::new();
    let mut trace = Vec::new();
    let mut regularized = false;
    let mut failures = 0;
    let mut iteration = 0;

    while failures < schedule.len() && users.len() < l {
        let (g, j) = schedule[iteration % schedule.len()];
        iteration += 1;
        let group = &cfg.groups[g];
        let view = deinterleave_columns(&residual, &group.interleaver);
        let yp = pilot_part(&view, &layout, j);
        let yc = coded_part(&view, &layout);
        let detections = detect_pilots(&yp, &cfg.encoder.codebook, cfg.threshold(group.noise_level));

        let accepted: Vec<(usize, Vec<u8>)> = match &cfg.encoder.coding {
            PayloadCoding::Joint { .. } => mrc_iteration(cfg, &detections, &yc, group)
                .into_iter()
                .filter(|(i, c)| success_check(&cfg.encoder, c, detections[*i].index, j))
                .map(|(i, c)| (i, c.message))
                .collect(),
            PayloadCoding::WithoutPilotBits { .. } => iisd(cfg, &view, j, &detections, group)
                .accepted
                .into_iter()
                .filter(|(i, c)| success_check(&cfg.encoder, c, detections[*i].index, j))
                .map(|(i, c)| (i, c.message))
                .collect(),
        };

        let mut successes = 0;
        for (i, message) in accepted {
            if users.len() >= l || seen.contains(&message) {
                continue;
            }
            let signal = cfg.regenerate(&message, g)?;
            seen.insert(message.clone());
            users.push(DecodedUser { message, signal, group: g, part: j, pilot_index: detections[i].index });
            successes += 1;
        }
        if successes == 0 {
            failures += 1;
        } else {
            failures = 0;
            let x = stack_rows(users.iter().map(|u| u.signal.as_slice()), l);
            let sic = ls_sic(y, &x);
            regularized |= sic.regularized;
            residual = sic.residual;
        }
        trace.push(IterationTrace {
            iteration,
            group: g,
            part: j,
            detected: detections.len(),
            successes,
            residual_energy: energy(&residual),
        });
    }
    Ok(SlotDecoding { users, iterations: iteration, trace, regularized_sic: regularized })
}
