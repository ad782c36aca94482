//! Polar codes with CRC-aided successive-cancellation list decoding.
//!
//! Codewords are `x = u * F^{(x)m}` with `F = [[1, 0], [1, 1]]` in natural
//! index order (no bit reversal). LLRs are positive when bit 0 is more likely.

mod construct;
mod crc;
mod scl;

pub use construct::{
    build_frozen_set, gaussian_approximation_means, gaussian_approximation_order, reliability_order,
    render_table, DESIGN_ES_N0_DB, MAX_LOG2_LEN, MIN_LOG2_LEN, TABLE_VERSION,
};
pub use crc::CrcSpec;
pub use scl::ListDecoding;

use crate::error::{param, Result, Error};

/// Default list size.
pub const DEFAULT_LIST_SIZE: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolarCodeSpec {
    block_length: usize,
    info_length: usize,
    frozen: Vec<bool>,
    info_positions: Vec<usize>,
    list_size: usize,
}

impl PolarCodeSpec {
    /// Builds a `(block_length, info_length)` code from the shipped
    /// reliability table.
    pub fn new(block_length: usize, info_length: usize, list_size: usize) -> Result<Self> {
        let frozen_set = build_frozen_set(block_length, info_length)?;
        Self::with_frozen_set(block_length, &frozen_set, list_size)
    }

    /// Builds a code from an explicit frozen index set.
    pub fn with_frozen_set(block_length: usize, frozen_set: &[usize], list_size: usize) -> Result<Self> {
        if !block_length.is_power_of_two() || block_length < 2 {
            return param(format!("block length {block_length} is not a power of two >= 2"));
        }
        if list_size == 0 {
            return param("list size must be positive");
        }
        let mut frozen = vec![false; block_length];
        for &i in frozen_set {
            if i >= block_length || frozen[i] {
                return param(format!("frozen index {i} out of range or repeated"));
            }
            frozen[i] = true;
        }
        let info_positions: Vec<usize> = (0..block_length).filter(|&i| !frozen[i]).collect();
        Ok(Self {
            block_length,
            info_length: info_positions.len(),
            frozen,
            info_positions,
            list_size,
        })
    }

    pub fn block_length(&self) -> usize {
        self.block_length
    }

    pub fn info_length(&self) -> usize {
        self.info_length
    }

    pub fn list_size(&self) -> usize {
        self.list_size
    }

    pub fn with_list_size(&self, list_size: usize) -> Self {
        Self { list_size: list_size.max(1), ..self.clone() }
    }

    pub fn is_frozen(&self, index: usize) -> bool {
        self.frozen[index]
    }

    pub fn info_positions(&self) -> &[usize] {
        &self.info_positions
    }

    pub fn frozen_set(&self) -> Vec<usize> {
        (0..self.block_length).filter(|&i| self.frozen[i]).collect()
    }

    /// Places `info` in the non-frozen positions and applies the polar transform.
    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        if info.len() != self.info_length {
            return param(format!(
                "polar encoder expects {} info bits, got {}",
                self.info_length,
                info.len()
            ));
        }
        let mut u = vec![0u8; self.block_length];
        for (&pos, &b) in self.info_positions.iter().zip(info) {
            u[pos] = b & 1;
        }
        polar_transform(&mut u);
        Ok(u)
    }

    /// CRC-aided SCL decoding. Returns the most likely CRC-passing candidate
    /// when one exists, otherwise the most likely candidate with the flag
    /// cleared.
    pub fn decode(&self, llr: &[f64], crc: &CrcSpec) -> Result<ListDecoding> {
        if llr.len() != self.block_length {
            return Err(Error::Input(format!(
                "expected {} LLRs, got {}",
                self.block_length,
                llr.len()
            )));
        }
        if llr.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("non-finite LLR".into()));
        }
        Ok(scl::decode(self, llr, crc))
    }
}

/// In-place `x = u * F^{(x)m}` over GF(2).
pub fn polar_transform(bits: &mut [u8]) {
    let n = bits.len();
    let mut h = 1;
    while h < n {
        for start in (0..n).step_by(2 * h) {
            for i in start..start + h {
                bits[i] ^= bits[i + h];
            }
        }
        h *= 2;
    }
}
