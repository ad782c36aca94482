//! Sylvester-Hadamard pilot codebook.
//!
//! Row `l` of the order-`n_p` matrix is the pilot selected by the `B_p`-bit
//! pilot segment whose big-endian integer value is `l`. Entries are stored as
//! signed integers; power scaling happens in the transmitter.

use crate::error::{param, Result};
use crate::Complex64;

/// Largest supported number of pilot bits.
pub const MAX_PILOT_BITS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PilotCodebook {
    bits: usize,
    n_p: usize,
    /// Row-major `n_p x n_p` entries in {+1, -1}.
    rows: Vec<i8>,
}

impl PilotCodebook {
    /// Builds the Sylvester-Hadamard matrix of order `2^bits`.
    pub fn build(bits: usize) -> Result<Self> {
        if !(1..=MAX_PILOT_BITS).contains(&bits) {
            return param(format!("pilot bit count {bits} outside 1..={MAX_PILOT_BITS}"));
        }
        let n_p = 1usize << bits;
        let mut rows = vec![1i8];
        let mut order = 1;
        while order < n_p {
            let next = order * 2;
            let mut grown = vec![0i8; next * next];
            for r in 0..order {
                for c in 0..order {
                    let v = rows[r * order + c];
                    grown[r * next + c] = v;
                    grown[r * next + c + order] = v;
                    grown[(r + order) * next + c] = v;
                    grown[(r + order) * next + c + order] = -v;
                }
            }
            rows = grown;
            order = next;
        }
        Ok(Self { bits, n_p, rows })
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    /// Codebook dimension `n_p = 2^B_p`.
    pub fn len(&self) -> usize {
        self.n_p
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn row(&self, index: usize) -> &[i8] {
        &self.rows[index * self.n_p..(index + 1) * self.n_p]
    }

    /// Row selected by a pilot bit segment (first bit most significant).
    pub fn pilot_row(&self, bits: &[u8]) -> Result<&[i8]> {
        Ok(self.row(self.index_of(bits)?))
    }

    /// Big-endian integer value of a `B_p`-bit segment.
    pub fn index_of(&self, bits: &[u8]) -> Result<usize> {
        if bits.len() != self.bits {
            return param(format!(
                "pilot segment has {} bits, codebook expects {}",
                bits.len(),
                self.bits
            ));
        }
        Ok(bits_to_index(bits))
    }

    /// Inverse of [`PilotCodebook::index_of`].
    pub fn bits_of(&self, index: usize) -> Vec<u8> {
        (0..self.bits)
            .map(|k| ((index >> (self.bits - 1 - k)) & 1) as u8)
            .collect()
    }

    /// Correlates one length-`n_p` sequence against every row:
    /// `out[l] = sum_t seq[t] * row_l[t]`, via a fast Walsh-Hadamard transform.
    pub fn correlate_all(&self, seq: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(seq.len(), self.n_p, "sequence length must equal n_p");
        let mut buf = seq.to_vec();
        fwht(&mut buf);
        buf
    }
}

pub(crate) fn bits_to_index(bits: &[u8]) -> usize {
    bits.iter().fold(0usize, |acc, &b| (acc << 1) | (b & 1) as usize)
}

/// In-place natural-order fast Walsh-Hadamard transform. Because the
/// Sylvester matrix is symmetric this yields `seq * B^T`.
fn fwht(buf: &mut [Complex64]) {
    let n = buf.len();
    let mut h = 1;
    while h < n {
        for start in (0..n).step_by(2 * h) {
            for i in start..start + h {
                let a = buf[i];
                let b = buf[i + h];
                buf[i] = a + b;
                buf[i + h] = a - b;
            }
        }
        h *= 2;
    }
}
