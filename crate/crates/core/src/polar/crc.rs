//! Cyclic redundancy checks over bit vectors.
//!
//! Bits are processed most-significant first through a Galois-style shift
//! register; with a zero initial register the result equals the remainder of
//! `m(x) * x^degree` divided by the generator polynomial.

use crate::error::{param, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CrcSpec {
    degree: usize,
    /// Generator coefficients below the leading term (`x^degree` implied).
    polynomial: u64,
    init: u64,
}

impl CrcSpec {
    pub fn new(degree: usize, polynomial: u64, init: u64) -> Result<Self> {
        if degree == 0 || degree > 63 {
            return param(format!("CRC degree {degree} outside 1..=63"));
        }
        let mask = (1u64 << degree) - 1;
        if polynomial & !mask != 0 || init & !mask != 0 {
            return param(format!("CRC polynomial/init wider than degree {degree}"));
        }
        if polynomial & 1 == 0 {
            return param("CRC polynomial must have a non-zero constant term");
        }
        Ok(Self { degree, polynomial, init })
    }

    /// A well-known generator for the given degree, zero initial register.
    pub fn standard(degree: usize) -> Result<Self> {
        let poly = match degree {
            1 => 0x1,
            2 => 0x3,
            3 => 0x3,
            4 => 0x3,
            5 => 0x05,
            6 => 0x21,
            7 => 0x09,
            8 => 0x07,
            10 => 0x233,
            11 => 0x621,
            12 => 0x80F,
            13 => 0x1CF5,
            14 => 0x0805,
            15 => 0x4599,
            16 => 0x1021,
            17 => 0x1685B,
            24 => 0xB2B117,
            _ => return param(format!("no standard CRC polynomial of degree {degree}")),
        };
        Self::new(degree, poly, 0)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn polynomial(&self) -> u64 {
        self.polynomial
    }

    /// CRC field of `payload`, most significant bit first.
    pub fn compute(&self, payload: &[u8]) -> Vec<u8> {
        let reg = self.register(payload);
        (0..self.degree)
            .map(|k| ((reg >> (self.degree - 1 - k)) & 1) as u8)
            .collect()
    }

    fn register(&self, payload: &[u8]) -> u64 {
        let top = self.degree - 1;
        let mask = (1u64 << self.degree) - 1;
        let mut reg = self.init;
        for &b in payload {
            let feedback = ((reg >> top) & 1) ^ (b & 1) as u64;
            reg = (reg << 1) & mask;
            if feedback == 1 {
                reg ^= self.polynomial;
            }
        }
        reg
    }

    /// `payload || crc(payload)`.
    pub fn attach(&self, payload: &[u8]) -> Vec<u8> {
        let mut out = Vec::with_capacity(payload.len() + self.degree);
        out.extend_from_slice(payload);
        out.extend(self.compute(payload));
        out
    }

    /// True when the trailing `degree` bits equal the CRC of the preceding bits.
    pub fn check(&self, word: &[u8]) -> bool {
        if word.len() < self.degree {
            return false;
        }
        let (payload, field) = word.split_at(word.len() - self.degree);
        let expected = self.register(payload);
        let got = field.iter().fold(0u64, |acc, &b| (acc << 1) | (b & 1) as u64);
        expected == got
    }
}
