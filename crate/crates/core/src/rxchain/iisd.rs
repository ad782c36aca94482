//! Iterative inter-symbol decoder for messages whose pilot bits are not
//! polar encoded.
//!
//! One pass: (1) MMSE-combine and list-decode every detected user,
//! (2) re-estimate the channels of the users whose outer CRC passes from
//! their detected pilot and re-encoded codeword, (3) recover their other
//! pilot rows by channel-vector matching, (4) re-estimate the channels from
//! the complete signals. Passes repeat until the number of outer-CRC
//! passes stops changing.

use crate::channel::{coded_part, pilot_part};
use crate::linalg::{solve_hermitian, stack_rows, CMatrix};
use crate::txchain::qpsk_modulate;
use crate::Complex64;

use super::detect::{combine, demod_reshuffle, estimate_from_detection, pilot_correlations, PilotDetection};
use super::{Candidate, DecoderConfig, GroupProfile};

/// Outcome of the inter-symbol decoder on one detection set.
#[derive(Debug, Clone, PartialEq)]
pub struct IisdOutcome {
    /// Candidates with a passing outer CRC, keyed by detection index.
    pub accepted: Vec<(usize, Candidate)>,
    pub passes: usize,
    /// Outer-CRC pass count after each pass.
    pub crc_counts: Vec<usize>,
}

/// MMSE channel estimate `Y Q^H (delta I + Q Q^H)^-1` for known rows `Q`.
pub fn refine_channel_mmse(y: &CMatrix, q: &CMatrix, noise_level: f64) -> CMatrix {
    let qh = q.adjoint();
    let mut gram = q * &qh;
    for i in 0..gram.nrows() {
        gram[(i, i)] += Complex64::new(noise_level, 0.0);
    }
    let cross = y * &qh;
    solve_hermitian(&gram, &cross.adjoint()).solution.adjoint()
}

fn column(m: &CMatrix, c: usize) -> Vec<Complex64> {
    m.column(c).iter().copied().collect()
}

/// Runs the inter-symbol decoder on the deinterleaved residual `view`
/// for users detected in pilot part `part`.
pub fn iisd(
    cfg: &DecoderConfig,
    view: &CMatrix,
    part: usize,
    detections: &[PilotDetection],
    group: &GroupProfile,
) -> IisdOutcome {
    let enc = &cfg.encoder;
    let layout = enc.layout;
    let n_p = layout.n_p();
    let parts = layout.pilot_parts;
    let m = view.nrows();
    let pp = group.powers.pilot;
    let pc = group.powers.coded;
    let delta = group.noise_level;
    let crc = enc.coding.decoder_crc();
    let bc = enc.message_bits - parts * layout.pilot_bits;

    let yc = coded_part(view, &layout);
    let ypj = pilot_part(view, &layout, part);
    let mut yq = CMatrix::zeros(m, n_p + layout.n_c);
    yq.columns_mut(0, n_p).copy_from(&ypj);
    yq.columns_mut(n_p, layout.n_c).copy_from(&yc);
    // Candidate channel vectors s_ft for every other part f and row t.
    let scale = 1.0 / (n_p as f64 * pp.sqrt());
    let other_parts: Vec<(usize, Vec<Vec<Complex64>>)> = (0..parts)
        .filter(|&f| f != part)
        .map(|f| {
            let s = pilot_correlations(&pilot_part(view, &layout, f), &enc.codebook)
                .into_iter()
                .map(|c| c.into_iter().map(|v| v * scale).collect())
                .collect();
            (f, s)
        })
        .collect();

    let mut h: Vec<Vec<Complex64>> = detections.iter().map(|d| estimate_from_detection(d, n_p, pp)).collect();
    let mut prev = 0;
    let mut counts = Vec::new();
    let mut accepted = Vec::new();
    let mut passes = 0;

    while passes < cfg.iisd_max_passes.max(1) && !detections.is_empty() {
        passes += 1;
        // Step 1: MMSE combining with R_h = delta I + P_c sum h h^H.
        let mut rh = CMatrix::identity(m, m) * Complex64::new(delta, 0.0);
        for hl in &h {
            for a in 0..m {
                for b in 0..m {
                    rh[(a, b)] += hl[a] * hl[b].conj() * pc;
                }
            }
        }
        let hmat = CMatrix::from_fn(m, h.len(), |a, i| h[i][a]);
        let w = solve_hermitian(&rh, &hmat).solution;
        let mut passing: Vec<(usize, Vec<u8>, Vec<Complex64>)> = Vec::new();
        for (i, hi) in h.iter().enumerate() {
            let wi = column(&w, i);
            let quad: f64 = hi.iter().zip(&wi).map(|(a, b)| (a.conj() * b).re).sum();
            let denom = 1.0 - pc * quad;
            if !(denom > 0.0) || !quad.is_finite() {
                continue;
            }
            let gscale = 2.0 * (2.0 * pc).sqrt() / denom;
            let llr: Vec<f64> = demod_reshuffle(&combine(&wi, &yc)).into_iter().map(|g| g * gscale).collect();
            let Ok(dec) = enc.code.decode(&llr, crc) else { continue };
            if dec.crc_pass {
                let cw = enc.code.encode(&dec.info).expect("decoder returns info_length bits");
                let v = qpsk_modulate(&cw, pc).expect("even block length");
                passing.push((i, dec.info, v));
            }
        }
        let count = passing.len();
        counts.push(count);

        let mut pilots: Vec<Vec<usize>> = Vec::with_capacity(count);
        if count > 0 {
            // Step 2: refine from [sqrt(P_p) b_j, v].
            let amp = pp.sqrt();
            let q_rows: Vec<Vec<Complex64>> = passing
                .iter()
                .map(|(i, _, v)| {
                    let row = enc.codebook.row(detections[*i].index);
                    row.iter().map(|&b| Complex64::new(amp * b as f64, 0.0)).chain(v.iter().copied()).collect()
                })
                .collect();
            let q = stack_rows(q_rows.iter().map(Vec::as_slice), n_p + layout.n_c);
            let hq = refine_channel_mmse(&yq, &q, delta);
            for (c, (i, _, _)) in passing.iter().enumerate() {
                h[*i] = column(&hq, c);
            }
            // Step 3: match the remaining pilot parts.
            for (i, _, _) in &passing {
                let mut idx = vec![0usize; parts];
                idx[part] = detections[*i].index;
                for (f, cands) in &other_parts {
                    let mut best = (f64::NEG_INFINITY, 0usize);
                    for (t, s) in cands.iter().enumerate() {
                        let norm: f64 = s.iter().map(|v| v.norm_sqr()).sum();
                        if norm <= 0.0 {
                            continue;
                        }
                        let corr: Complex64 = h[*i].iter().zip(s).map(|(a, b)| a.conj() * b).sum();
                        let score = corr.norm_sqr() / norm;
                        if score > best.0 {
                            best = (score, t);
                        }
                    }
                    idx[*f] = best.1;
                }
                pilots.push(idx);
            }
            // Step 4: refine from the complete signals.
            let x_rows: Vec<Vec<Complex64>> = passing
                .iter()
                .zip(&pilots)
                .map(|((_, _, v), idx)| enc.assemble_from_parts(idx, v, pp))
                .collect();
            let x = stack_rows(x_rows.iter().map(Vec::as_slice), layout.slot_len());
            let hx = refine_channel_mmse(view, &x, delta);
            for (c, (i, _, _)) in passing.iter().enumerate() {
                h[*i] = column(&hx, c);
            }
        }

        accepted = passing
            .into_iter()
            .zip(pilots)
            .map(|((i, info, _), idx)| {
                let mut message = Vec::with_capacity(enc.message_bits);
                for t in idx {
                    message.extend(enc.codebook.bits_of(t));
                }
                message.extend_from_slice(&info[..bc]);
                (i, Candidate { message, payload: info, outer_crc: true })
            })
            .collect();
        if count == prev {
            break;
        }
        prev = count;
    }
    IisdOutcome { accepted, passes, crc_counts: counts }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::complex_gaussian;
    use crate::linalg::energy;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn mmse_refinement_noiseless_limit() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let q = CMatrix::from_fn(2, 50, |_, _| complex_gaussian(&mut rng, 1.0));
        let h = CMatrix::from_fn(3, 2, |_, _| complex_gaussian(&mut rng, 1.0));
        let y = &h * &q;
        let est = refine_channel_mmse(&y, &q, 1e-12);
        assert!(energy(&(est - h)) < 1e-16);
    }
}
