//! Transmitter chain from message bits to slot signals.
//!
//! A user's slot signal is `J` pilot parts followed by one coded part:
//! `x = [sqrt(P_p) b_1, ..., sqrt(P_p) b_J, v]`, of length `L = J n_p + n_c`.

use std::ops::Range;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{config, param, Result};
use crate::pilots::{bits_to_index, PilotCodebook};
use crate::polar::{CrcSpec, PolarCodeSpec};
use crate::Complex64;

/// Sizes of the slot signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameLayout {
    /// Number of pilot parts `J`.
    pub pilot_parts: usize,
    /// Bits per pilot part `B_p`; `n_p = 2^B_p`.
    pub pilot_bits: usize,
    /// QPSK symbols in the coded part.
    pub n_c: usize,
}

impl FrameLayout {
    pub fn n_p(&self) -> usize {
        1 << self.pilot_bits
    }

    /// Slot length `L`.
    pub fn slot_len(&self) -> usize {
        self.pilot_parts * self.n_p() + self.n_c
    }

    /// Sample range of pilot part `j` (zero based).
    pub fn pilot_range(&self, j: usize) -> Range<usize> {
        let n_p = self.n_p();
        j * n_p..(j + 1) * n_p
    }

    pub fn coded_range(&self) -> Range<usize> {
        let start = self.pilot_parts * self.n_p();
        start..start + self.n_c
    }

    /// Energy `E_x = J n_p P_p + n_c P_c` of one assembled signal.
    pub fn signal_energy(&self, powers: Powers) -> f64 {
        (self.pilot_parts * self.n_p()) as f64 * powers.pilot + self.n_c as f64 * powers.coded
    }
}

/// Per-sample powers of the pilot and coded parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Powers {
    pub pilot: f64,
    pub coded: f64,
}

impl Powers {
    /// Splits an average per-sample power `P` with ratio `phi = P_p / P_c`.
    pub fn from_average(average: f64, phi: f64, layout: &FrameLayout) -> Self {
        let coded = average * layout.slot_len() as f64
            / ((layout.pilot_parts * layout.n_p()) as f64 * phi + layout.n_c as f64);
        Self { pilot: phi * coded, coded }
    }
}

/// A message split into `J` pilot segments and one coded segment.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UserMessage {
    bits: Vec<u8>,
    pilot_parts: usize,
    pilot_bits: usize,
}

impl UserMessage {
    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn pilot_segment(&self, j: usize) -> &[u8] {
        &self.bits[j * self.pilot_bits..(j + 1) * self.pilot_bits]
    }

    pub fn pilot_index(&self, j: usize) -> usize {
        bits_to_index(self.pilot_segment(j))
    }

    /// The `B_c` bits that are not pilot segments.
    pub fn coded_segment(&self) -> &[u8] {
        &self.bits[self.pilot_parts * self.pilot_bits..]
    }

    pub fn into_bits(self) -> Vec<u8> {
        self.bits
    }
}

/// Splits `bits` into `J` pilot segments of `B_p` bits, the rest forming `w_c`.
pub fn split_message(bits: &[u8], pilot_parts: usize, pilot_bits: usize) -> Result<UserMessage> {
    if bits.len() < pilot_parts * pilot_bits {
        return config(format!(
            "message of {} bits cannot hold {pilot_parts} pilot segments of {pilot_bits} bits",
            bits.len()
        ));
    }
    Ok(UserMessage { bits: bits.to_vec(), pilot_parts, pilot_bits })
}

/// Gray-mapped QPSK: bit `2t` drives the imaginary part and bit `2t + 1`
/// the real part of symbol `t`, with 0 -> `+sqrt(P_c / 2)`.
pub fn qpsk_modulate(bits: &[u8], coded_power: f64) -> Result<Vec<Complex64>> {
    if !bits.len().is_multiple_of(2) {
        return param(format!("QPSK needs an even bit count, got {}", bits.len()));
    }
    let a = (coded_power / 2.0).sqrt();
    let level = |b: u8| if b & 1 == 0 { a } else { -a };
    Ok(bits
        .chunks_exact(2)
        .map(|pair| Complex64::new(level(pair[1]), level(pair[0])))
        .collect())
}

/// How message bits reach the polar encoder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PayloadCoding {
    /// All `B` message bits plus one CRC are encoded.
    Joint { crc: CrcSpec },
    /// Only `w_c` is encoded, protected by `c_2 = CRC(w)` and
    /// `c_1 = CRC(w_c || c_2)`.
    WithoutPilotBits { outer: CrcSpec, message: CrcSpec },
}

impl PayloadCoding {
    /// The CRC the list decoder checks on its candidates.
    pub fn decoder_crc(&self) -> &CrcSpec {
        match self {
            PayloadCoding::Joint { crc } => crc,
            PayloadCoding::WithoutPilotBits { outer, .. } => outer,
        }
    }
}

/// Shared transmitter/receiver description of one scheme's encoder.
#[derive(Debug, Clone)]
pub struct SlotEncoder {
    pub layout: FrameLayout,
    pub codebook: PilotCodebook,
    pub code: PolarCodeSpec,
    pub coding: PayloadCoding,
    /// Message length `B`.
    pub message_bits: usize,
}

impl SlotEncoder {
    pub fn new(
        layout: FrameLayout,
        message_bits: usize,
        coding: PayloadCoding,
        list_size: usize,
    ) -> Result<Self> {
        let pilot_total = layout.pilot_parts * layout.pilot_bits;
        if message_bits <= pilot_total {
            return config(format!(
                "B = {message_bits} leaves no coded bits after {pilot_total} pilot bits"
            ));
        }
        let info_length = match &coding {
            PayloadCoding::Joint { crc } => message_bits + crc.degree(),
            PayloadCoding::WithoutPilotBits { outer, message } => {
                message_bits - pilot_total + outer.degree() + message.degree()
            }
        };
        let block_length = 2 * layout.n_c;
        if info_length > block_length {
            return config(format!(
                "polar payload of {info_length} bits exceeds block length {block_length}"
            ));
        }
        let codebook = PilotCodebook::build(layout.pilot_bits)?;
        let code = PolarCodeSpec::new(block_length, info_length, list_size)
            .map_err(|e| crate::Error::Config(e.to_string()))?;
        Ok(Self { layout, codebook, code, coding, message_bits })
    }

    pub fn split(&self, bits: &[u8]) -> Result<UserMessage> {
        if bits.len() != self.message_bits {
            return config(format!("expected {} message bits, got {}", self.message_bits, bits.len()));
        }
        split_message(bits, self.layout.pilot_parts, self.layout.pilot_bits)
    }

    /// Bits handed to the polar encoder.
    pub fn polar_payload(&self, msg: &UserMessage) -> Vec<u8> {
        match &self.coding {
            PayloadCoding::Joint { crc } => crc.attach(msg.bits()),
            PayloadCoding::WithoutPilotBits { outer, message } => {
                let c2 = message.compute(msg.bits());
                let mut inner = msg.coded_segment().to_vec();
                inner.extend(c2);
                outer.attach(&inner)
            }
        }
    }

    pub fn codeword(&self, msg: &UserMessage) -> Vec<u8> {
        self.code
            .encode(&self.polar_payload(msg))
            .expect("payload length fixed at construction")
    }

    /// QPSK coded part `v` of a message.
    pub fn coded_symbols(&self, msg: &UserMessage, coded_power: f64) -> Vec<Complex64> {
        qpsk_modulate(&self.codeword(msg), coded_power).expect("block length is even")
    }

    /// Full un-interleaved slot signal.
    pub fn assemble(&self, msg: &UserMessage, powers: Powers) -> Vec<Complex64> {
        let mut x = Vec::with_capacity(self.layout.slot_len());
        let amp = powers.pilot.sqrt();
        for j in 0..self.layout.pilot_parts {
            let row = self.codebook.row(msg.pilot_index(j));
            x.extend(row.iter().map(|&b| Complex64::new(amp * b as f64, 0.0)));
        }
        x.extend(self.coded_symbols(msg, powers.coded));
        x
    }

    /// Signal built from explicit pilot indices and a polar payload whose
    /// pilot bits may not be encoded (used by the receiver for WOPBE).
    pub fn assemble_from_parts(
        &self,
        pilot_indices: &[usize],
        codeword_symbols: &[Complex64],
        pilot_power: f64,
    ) -> Vec<Complex64> {
        let amp = pilot_power.sqrt();
        let mut x = Vec::with_capacity(self.layout.slot_len());
        for &idx in pilot_indices {
            x.extend(self.codebook.row(idx).iter().map(|&b| Complex64::new(amp * b as f64, 0.0)));
        }
        x.extend_from_slice(codeword_symbols);
        x
    }
}

/// One user's transmitted slot signal.
#[derive(Debug, Clone, PartialEq)]
pub struct TxSignal {
    pub samples: Vec<Complex64>,
    pub slot: usize,
    pub group: usize,
    /// Trial-local bookkeeping id; never visible to the receiver.
    pub user_id: usize,
}

/// Assembles a user's slot signal.
pub fn assemble_signal(
    encoder: &SlotEncoder,
    msg: &UserMessage,
    powers: Powers,
    slot: usize,
    user_id: usize,
) -> TxSignal {
    TxSignal { samples: encoder.assemble(msg, powers), slot, group: 0, user_id }
}

/// Sample permutation assigned to a user group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interleaver {
    /// Output sample `k` is input sample `perm[k]`.
    perm: Vec<usize>,
}

impl Interleaver {
    pub fn identity(len: usize) -> Self {
        Self { perm: (0..len).collect() }
    }

    /// Fisher-Yates permutation seeded by `(seed, group)`.
    pub fn random(seed: u64, group: usize, len: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(crate::harness::splitmix64(
            seed ^ 0x696e_7465_726c_6576u64.wrapping_add(group as u64),
        ));
        let mut perm: Vec<usize> = (0..len).collect();
        perm.shuffle(&mut rng);
        Self { perm }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(k, &p)| k == p)
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn interleave<T: Copy>(&self, x: &[T]) -> Vec<T> {
        self.perm.iter().map(|&p| x[p]).collect()
    }

    pub fn deinterleave<T: Copy + Default>(&self, x: &[T]) -> Vec<T> {
        let mut out = vec![T::default(); x.len()];
        for (k, &p) in self.perm.iter().enumerate() {
            out[p] = x[k];
        }
        out
    }
}

/// Applies a group's interleaver to a signal assembled with that group's powers.
pub fn msug_transform(x: &TxSignal, group: usize, interleaver: &Interleaver) -> TxSignal {
    TxSignal {
        samples: interleaver.interleave(&x.samples),
        slot: x.slot,
        group,
        user_id: x.user_id,
    }
}

/// Where a user's repeated signal goes in a sub-framed frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SraPlacement {
    pub slot: usize,
    pub subframes: usize,
    pub slots_per_subframe: usize,
}

impl SraPlacement {
    /// `(sub-frame, slot)` pairs carrying the signal, one per sub-frame.
    pub fn instances(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.subframes).map(move |v| (v, self.slot))
    }

    /// Slot-instances per frame.
    pub fn total_slot_instances(&self) -> usize {
        self.subframes * self.slots_per_subframe
    }
}

/// Places a signal of length `L` into slot `slot` of each of `V` sub-frames
/// of a frame of length `n = V * S * L`.
pub fn sra_layout(
    x: &TxSignal,
    subframes: usize,
    slots: usize,
    slot: usize,
    frame_len: usize,
) -> Result<SraPlacement> {
    if subframes == 0 || slots == 0 {
        return config("sub-frame and slot counts must be positive");
    }
    if frame_len != subframes * slots * x.samples.len() {
        return config(format!(
            "frame length {frame_len} != V * S * L = {}",
            subframes * slots * x.samples.len()
        ));
    }
    if slot >= slots {
        return config(format!("slot {slot} out of range 0..{slots}"));
    }
    Ok(SraPlacement { slot, subframes, slots_per_subframe: slots })
}
