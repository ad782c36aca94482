//! Flat `key = value` experiment configuration.

use std::fmt;
use std::str::FromStr;

use crate::error::{config, Error, Result};

/// Transmission scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    MsMra,
    MsMraWopbe,
    MsugMra,
    MsSra,
    MsugSra,
}

impl Variant {
    pub const ALL: [Variant; 5] = [Variant::MsMra, Variant::MsMraWopbe, Variant::MsugMra, Variant::MsSra, Variant::MsugSra];

    pub fn name(self) -> &'static str {
        match self {
            Variant::MsMra => "MS-MRA",
            Variant::MsMraWopbe => "MS-MRA-WOPBE",
            Variant::MsugMra => "MSUG-MRA",
            Variant::MsSra => "MS-SRA",
            Variant::MsugSra => "MSUG-SRA",
        }
    }

    pub fn is_grouped(self) -> bool {
        matches!(self, Variant::MsugMra | Variant::MsugSra)
    }

    pub fn is_repeated(self) -> bool {
        matches!(self, Variant::MsSra | Variant::MsugSra)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown variant '{s}'")))
    }
}

/// How group interleavers are generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterleaverKind {
    Random,
    Identity,
}

/// All parameters of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub variant: Variant,
    /// Message length `B`.
    pub message_bits: usize,
    /// CRC length `r` of the joint encoding.
    pub crc_bits: usize,
    /// Outer CRC `r_1` when pilot bits are not encoded.
    pub crc_outer_bits: usize,
    /// Message CRC `r_2` when pilot bits are not encoded.
    pub crc_message_bits: usize,
    pub pilot_parts: usize,
    pub n_p: usize,
    pub n_c: usize,
    pub slots: usize,
    pub antennas: usize,
    pub subframes: usize,
    pub active_users: usize,
    pub groups: usize,
    pub gamma: f64,
    /// Pilot-to-coded power ratio `phi`.
    pub phi: f64,
    pub list_size: usize,
    pub ebn0_db: Vec<f64>,
    pub target_pe: f64,
    pub search_lo_db: f64,
    pub search_hi_db: f64,
    pub seed: u64,
    pub trials: usize,
    pub interleaver: InterleaverKind,
    pub interleaver_seed: u64,
    pub iisd_max_passes: usize,
    pub noise_var: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            variant: Variant::MsMra,
            message_bits: 100,
            crc_bits: 11,
            crc_outer_bits: 6,
            crc_message_bits: 5,
            pilot_parts: 2,
            n_p: 32,
            n_c: 128,
            slots: 2,
            antennas: 16,
            subframes: 1,
            active_users: 12,
            groups: 1,
            gamma: 0.1,
            phi: 1.0,
            list_size: 64,
            ebn0_db: vec![-6.0, -5.0, -4.0, -3.0, -2.0, -1.0, 0.0],
            target_pe: 0.05,
            search_lo_db: -10.0,
            search_hi_db: 6.0,
            seed: 1,
            trials: 200,
            interleaver: InterleaverKind::Random,
            interleaver_seed: 0x5eed,
            iisd_max_passes: crate::rxchain::DEFAULT_IISD_PASSES,
            noise_var: 1.0,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("invalid value '{value}' for '{key}'")))
}

impl SystemConfig {
    /// Parses `key = value` lines over the defaults. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", n + 1)))?;
            cfg.set(k.trim(), v.trim())?;
        }
        Ok(cfg)
    }

    /// Sets one key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "variant" => self.variant = value.parse()?,
            "B" => self.message_bits = parse(key, value)?,
            "r" => self.crc_bits = parse(key, value)?,
            "r1" => self.crc_outer_bits = parse(key, value)?,
            "r2" => self.crc_message_bits = parse(key, value)?,
            "J" => self.pilot_parts = parse(key, value)?,
            "np" => self.n_p = parse(key, value)?,
            "nc" => self.n_c = parse(key, value)?,
            "S" => self.slots = parse(key, value)?,
            "M" => self.antennas = parse(key, value)?,
            "V" => self.subframes = parse(key, value)?,
            "Ka" => self.active_users = parse(key, value)?,
            "G" => self.groups = parse(key, value)?,
            "gamma" => self.gamma = parse(key, value)?,
            "phi" => self.phi = parse(key, value)?,
            "list_size" => self.list_size = parse(key, value)?,
            "ebn0_db" => {
                self.ebn0_db = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| parse(key, s))
                    .collect::<Result<_>>()?
            }
            "target_pe" => self.target_pe = parse(key, value)?,
            "search_lo_db" => self.search_lo_db = parse(key, value)?,
            "search_hi_db" => self.search_hi_db = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "trials" => self.trials = parse(key, value)?,
            "interleaver" => {
                self.interleaver = match value.to_ascii_lowercase().as_str() {
                    "random" => InterleaverKind::Random,
                    "identity" => InterleaverKind::Identity,
                    _ => return config(format!("interleaver must be 'random' or 'identity', got '{value}'")),
                }
            }
            "interleaver_seed" => self.interleaver_seed = parse(key, value)?,
            "iisd_max_passes" => self.iisd_max_passes = parse(key, value)?,
            "noise_var" => self.noise_var = parse(key, value)?,
            _ => return config(format!("unknown key '{key}'")),
        }
        Ok(())
    }

    pub fn pilot_bits(&self) -> usize {
        self.n_p.trailing_zeros() as usize
    }

    /// `L = J n_p + n_c`.
    pub fn slot_len(&self) -> usize {
        self.pilot_parts * self.n_p + self.n_c
    }

    /// Frame length `n = V S L`.
    pub fn frame_len(&self) -> usize {
        self.subframes * self.slots * self.slot_len()
    }

    /// Receive branches seen by the decoder, `M V`.
    pub fn effective_antennas(&self) -> usize {
        self.antennas * self.subframes
    }

    /// Checks internal consistency.
    pub fn validate(&self) -> Result<()> {
        if !self.n_p.is_power_of_two() || self.n_p < 2 {
            return config(format!("np = {} must be a power of two >= 2", self.n_p));
        }
        if self.pilot_parts == 0 {
            return config("J must be at least 1");
        }
        if self.message_bits <= self.pilot_parts * self.pilot_bits() {
            return config(format!(
                "B = {} leaves no coded bits after J * B_p = {}",
                self.message_bits,
                self.pilot_parts * self.pilot_bits()
            ));
        }
        if !(2 * self.n_c).is_power_of_two() {
            return config(format!("2 nc = {} must be a power of two", 2 * self.n_c));
        }
        if self.slots == 0 || self.antennas == 0 || self.subframes == 0 || self.groups == 0 {
            return config("S, M, V and G must be positive");
        }
        if !self.variant.is_repeated() && self.subframes != 1 {
            return config(format!("{} uses V = 1", self.variant));
        }
        if !self.variant.is_grouped() && self.groups != 1 {
            return config(format!("{} uses G = 1", self.variant));
        }
        if self.variant == Variant::MsMraWopbe && self.crc_outer_bits + self.crc_message_bits != self.crc_bits {
            return config(format!(
                "r1 + r2 = {} must equal r = {}",
                self.crc_outer_bits + self.crc_message_bits,
                self.crc_bits
            ));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return config(format!("gamma = {} must lie in (0, 1)", self.gamma));
        }
        if !(self.phi > 0.0) || !(self.noise_var > 0.0) {
            return config("phi and noise_var must be positive");
        }
        if self.list_size == 0 {
            return config("list_size must be positive");
        }
        if !(self.target_pe > 0.0 && self.target_pe < 1.0) {
            return config(format!("target_pe = {} must lie in (0, 1)", self.target_pe));
        }
        if self.search_lo_db >= self.search_hi_db {
            return config("search_lo_db must be below search_hi_db");
        }
        Ok(())
    }

    /// Fully resolved configuration as ordered key/value pairs.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        let grid: Vec<String> = self.ebn0_db.iter().map(|v| v.to_string()).collect();
        vec![
            ("variant", self.variant.to_string()),
            ("B", self.message_bits.to_string()),
            ("r", self.crc_bits.to_string()),
            ("r1", self.crc_outer_bits.to_string()),
            ("r2", self.crc_message_bits.to_string()),
            ("J", self.pilot_parts.to_string()),
            ("np", self.n_p.to_string()),
            ("nc", self.n_c.to_string()),
            ("S", self.slots.to_string()),
            ("M", self.antennas.to_string()),
            ("V", self.subframes.to_string()),
            ("Ka", self.active_users.to_string()),
            ("G", self.groups.to_string()),
            ("gamma", self.gamma.to_string()),
            ("phi", self.phi.to_string()),
            ("list_size", self.list_size.to_string()),
            ("ebn0_db", grid.join(",")),
            ("target_pe", self.target_pe.to_string()),
            ("search_lo_db", self.search_lo_db.to_string()),
            ("search_hi_db", self.search_hi_db.to_string()),
            ("seed", self.seed.to_string()),
            ("trials", self.trials.to_string()),
            (
                "interleaver",
                match self.interleaver {
                    InterleaverKind::Random => "random",
                    InterleaverKind::Identity => "identity",
                }
                .to_string(),
            ),
            ("interleaver_seed", self.interleaver_seed.to_string()),
            ("iisd_max_passes", self.iisd_max_passes.to_string()),
            ("noise_var", self.noise_var.to_string()),
        ]
    }

    /// Config file text that parses back to `self`.
    pub fn render(&self) -> String {
        self.to_pairs().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}
