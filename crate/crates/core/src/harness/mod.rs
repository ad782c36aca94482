//! Monte Carlo driver for Eb/N0 sweeps and target searches.
//!
//! Trial `t` of an experiment with master seed `s` uses the seed
//! `trial_seed(s, t) = splitmix64(s ^ splitmix64(t))`. Each trial seeds a
//! ChaCha8 generator and reads a separate stream for every random quantity,
//! so the same trial index draws the same users and channels at every
//! Eb/N0 point.

mod config;
mod output;

pub use config::{InterleaverKind, SystemConfig, Variant};
pub use output::{emit_results, write_csv, write_ndtext, OutputFormat, ResultRow, Source, CSV_HEADER};

use std::collections::{BTreeSet, HashSet};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analysis::{msug_powers, pupe_analytic, AnalyticConfig, MsugPowerProblem};
use crate::channel::{power_for_ebn0, stack_subframes, transmit_slot};
use crate::error::{config, Error, Result};
use crate::linalg::CMatrix;
use crate::polar::CrcSpec;
use crate::rxchain::{decode_slot, DecoderConfig, GroupProfile};
use crate::txchain::{FrameLayout, Interleaver, PayloadCoding, Powers, SlotEncoder};
use crate::Complex64;

/// Minimum trials per point for the normal-approximation interval.
pub const MIN_SWEEP_TRIALS: usize = 100;

/// Resolution of the target-PUPE search.
pub const SEARCH_STEP_DB: f64 = 0.25;

const STREAM_MESSAGES: u64 = 0;
const STREAM_SLOTS: u64 = 1;
const STREAM_GROUPS: u64 = 2;
const STREAM_CHANNEL: u64 = 3;

/// SplitMix64 finaliser.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of trial `index` under `master`.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Per-trial error counts.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialMetrics {
    pub active: usize,
    pub missed: usize,
    pub false_alarms: usize,
    /// `|L_d|`, distinct messages decoded over all slots.
    pub decoded: usize,
    pub p_md: f64,
    pub p_fa: f64,
    pub wall_time_s: f64,
}

impl TrialMetrics {
    /// Builds the metrics from transmitted and decoded message sets.
    pub fn from_sets(sent: &BTreeSet<Vec<u8>>, decoded: &BTreeSet<Vec<u8>>, wall_time_s: f64) -> Self {
        let missed = sent.difference(decoded).count();
        let false_alarms = decoded.difference(sent).count();
        let p_md = if sent.is_empty() { 0.0 } else { missed as f64 / sent.len() as f64 };
        let p_fa = if decoded.is_empty() { 0.0 } else { false_alarms as f64 / decoded.len() as f64 };
        Self { active: sent.len(), missed, false_alarms, decoded: decoded.len(), p_md, p_fa, wall_time_s }
    }

    /// `P_e = p_md + p_fa` of this trial.
    pub fn pupe(&self) -> f64 {
        self.p_md + self.p_fa
    }
}

/// A trial's metrics together with its decoded list.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub metrics: TrialMetrics,
    pub decoded: BTreeSet<Vec<u8>>,
}

/// Receiver and transmitter description at one power level.
pub fn build_scheme(cfg: &SystemConfig, power: f64) -> Result<DecoderConfig> {
    cfg.validate()?;
    let layout = FrameLayout { pilot_parts: cfg.pilot_parts, pilot_bits: cfg.pilot_bits(), n_c: cfg.n_c };
    let std_crc = |d: usize| CrcSpec::standard(d).map_err(|e| Error::Config(e.to_string()));
    let coding = match cfg.variant {
        Variant::MsMraWopbe => PayloadCoding::WithoutPilotBits {
            outer: std_crc(cfg.crc_outer_bits)?,
            message: std_crc(cfg.crc_message_bits)?,
        },
        _ => PayloadCoding::Joint { crc: std_crc(cfg.crc_bits)? },
    };
    let encoder = SlotEncoder::new(layout, cfg.message_bits, coding, cfg.list_size)?;
    let base = Powers::from_average(power, cfg.phi, &layout);
    let antennas = cfg.effective_antennas();
    let l = layout.slot_len();
    let groups = if cfg.variant.is_grouped() {
        let problem = MsugPowerProblem {
            groups: cfg.groups,
            mean_power: base.coded,
            phi: cfg.phi,
            k0: cfg.active_users as f64 / (cfg.slots * cfg.groups) as f64,
            antennas,
            slot_len: l,
            n_p: cfg.n_p,
            pilot_parts: cfg.pilot_parts,
            noise_var: cfg.noise_var,
        };
        let coded = msug_powers(&problem)?;
        let deltas = problem.noise_levels(&coded);
        coded
            .iter()
            .zip(deltas)
            .enumerate()
            .map(|(g, (&pc, delta))| GroupProfile {
                powers: Powers { pilot: cfg.phi * pc, coded: pc },
                interleaver: match cfg.interleaver {
                    InterleaverKind::Random => Interleaver::random(cfg.interleaver_seed, g, l),
                    InterleaverKind::Identity => Interleaver::identity(l),
                },
                noise_level: delta,
            })
            .collect()
    } else {
        vec![GroupProfile { powers: base, interleaver: Interleaver::identity(l), noise_level: cfg.noise_var }]
    };
    let mut dec = DecoderConfig::new(encoder, antennas, cfg.noise_var, cfg.gamma, groups)?;
    dec.iisd_max_passes = cfg.iisd_max_passes;
    Ok(dec)
}

/// Draws `count` distinct `bits`-bit messages.
pub fn draw_messages<R: Rng + ?Sized>(rng: &mut R, count: usize, bits: usize) -> Vec<Vec<u8>> {
    let mut seen = HashSet::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let m: Vec<u8> = (0..bits).map(|_| rng.random_range(0..2u8)).collect();
        if seen.insert(m.clone()) {
            out.push(m);
        }
    }
    out
}

/// Simulates and decodes one frame.
pub fn run_trial(cfg: &SystemConfig, scheme: &DecoderConfig, seed: u64) -> Result<TrialOutcome> {
    let start = Instant::now();
    let mut msg_rng = stream(seed, STREAM_MESSAGES);
    let mut slot_rng = stream(seed, STREAM_SLOTS);
    let mut group_rng = stream(seed, STREAM_GROUPS);
    let mut chan_rng = stream(seed, STREAM_CHANNEL);

    let messages = draw_messages(&mut msg_rng, cfg.active_users, cfg.message_bits);
    let slots: Vec<usize> = (0..messages.len()).map(|_| slot_rng.random_range(0..cfg.slots)).collect();
    let groups: Vec<usize> = (0..messages.len()).map(|_| group_rng.random_range(0..cfg.groups)).collect();
    let signals: Vec<Vec<Complex64>> = messages
        .iter()
        .zip(&groups)
        .map(|(m, &g)| scheme.regenerate(m, g))
        .collect::<Result<_>>()?;

    let l = cfg.slot_len();
    let mut decoded = BTreeSet::new();
    for s in 0..cfg.slots {
        let in_slot: Vec<&[Complex64]> =
            (0..messages.len()).filter(|&i| slots[i] == s).map(|i| signals[i].as_slice()).collect();
        let parts: Vec<CMatrix> = (0..cfg.subframes)
            .map(|_| transmit_slot(&in_slot, l, cfg.antennas, cfg.noise_var, &mut chan_rng).map(|r| r.0))
            .collect::<Result<_>>()?;
        let y = if parts.len() == 1 { parts.into_iter().next().expect("one part") } else { stack_subframes(&parts)? };
        for m in decode_slot(&y, scheme)?.messages() {
            decoded.insert(m.to_vec());
        }
    }
    let sent: BTreeSet<Vec<u8>> = messages.into_iter().collect();
    Ok(TrialOutcome {
        metrics: TrialMetrics::from_sets(&sent, &decoded, start.elapsed().as_secs_f64()),
        decoded,
    })
}

/// Builds the scheme at average power `power` and runs trial `index`.
pub fn run_trial_at_power(cfg: &SystemConfig, power: f64, index: u64) -> Result<TrialOutcome> {
    let scheme = build_scheme(cfg, power)?;
    run_trial(cfg, &scheme, trial_seed(cfg.seed, index))
}

/// Mean PUPE and its normal-approximation 95% interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointEstimate {
    pub pe: f64,
    pub pmd: f64,
    pub pfa: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub trials: usize,
}

/// Aggregates per-trial metrics (order independent up to rounding).
pub fn aggregate(metrics: &[TrialMetrics]) -> PointEstimate {
    let n = metrics.len();
    if n == 0 {
        return PointEstimate { pe: 0.0, pmd: 0.0, pfa: 0.0, ci_lo: 0.0, ci_hi: 0.0, trials: 0 };
    }
    let nf = n as f64;
    let pe = metrics.iter().map(TrialMetrics::pupe).sum::<f64>() / nf;
    let pmd = metrics.iter().map(|m| m.p_md).sum::<f64>() / nf;
    let pfa = metrics.iter().map(|m| m.p_fa).sum::<f64>() / nf;
    let var = if n > 1 {
        metrics.iter().map(|m| (m.pupe() - pe).powi(2)).sum::<f64>() / (nf - 1.0)
    } else {
        0.0
    };
    let half = 1.96 * (var / nf).sqrt();
    PointEstimate { pe, pmd, pfa, ci_lo: (pe - half).max(0.0), ci_hi: pe + half, trials: n }
}

/// Average per-sample power of an Eb/N0 point for `cfg`.
pub fn power_of(cfg: &SystemConfig, ebn0_db: f64) -> f64 {
    power_for_ebn0(ebn0_db, cfg.slot_len(), cfg.message_bits, cfg.noise_var, cfg.subframes)
}

/// Runs `cfg.trials` trials at one Eb/N0 point.
pub fn simulate_point(cfg: &SystemConfig, ebn0_db: f64) -> Result<ResultRow> {
    if cfg.trials < MIN_SWEEP_TRIALS {
        return config(format!("sweeps need at least {MIN_SWEEP_TRIALS} trials, got {}", cfg.trials));
    }
    let scheme = build_scheme(cfg, power_of(cfg, ebn0_db))?;
    let metrics: Vec<TrialMetrics> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| run_trial(cfg, &scheme, trial_seed(cfg.seed, t)).map(|o| o.metrics))
        .collect::<Result<_>>()?;
    Ok(ResultRow::simulated(cfg, ebn0_db, aggregate(&metrics)))
}

/// Grid sweep over `cfg.ebn0_db`.
pub fn run_sweep(cfg: &SystemConfig) -> Result<Vec<ResultRow>> {
    if cfg.ebn0_db.is_empty() {
        return config("empty Eb/N0 grid");
    }
    cfg.ebn0_db.iter().map(|&e| simulate_point(cfg, e)).collect()
}

/// Result of a target-PUPE search.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    /// Lowest evaluated grid point whose interval upper bound meets the target.
    pub attained: Option<ResultRow>,
    /// Eb/N0 values bracketing the requirement (failing, meeting).
    pub bracket: (f64, f64),
    pub evaluated: Vec<ResultRow>,
}

/// Bisection over the `SEARCH_STEP_DB` grid in `[search_lo_db, search_hi_db]`.
pub fn run_search(cfg: &SystemConfig) -> Result<SearchOutcome> {
    cfg.validate()?;
    let steps = ((cfg.search_hi_db - cfg.search_lo_db) / SEARCH_STEP_DB).ceil() as i64;
    let at = |k: i64| cfg.search_lo_db + k as f64 * SEARCH_STEP_DB;
    let mut evaluated: Vec<(i64, ResultRow)> = Vec::new();
    let mut eval = |k: i64| -> Result<bool> {
        if let Some((_, r)) = evaluated.iter().find(|(i, _)| *i == k) {
            return Ok(r.ci_hi <= cfg.target_pe);
        }
        let row = simulate_point(cfg, at(k))?;
        let ok = row.ci_hi <= cfg.target_pe;
        evaluated.push((k, row));
        Ok(ok)
    };
    let (mut lo, mut hi) = (0i64, steps);
    let result = if !eval(hi)? {
        None
    } else if eval(lo)? {
        Some(0)
    } else {
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if eval(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Some(hi)
    };
    evaluated.sort_by_key(|(k, _)| *k);
    let attained = result.and_then(|k| evaluated.iter().find(|(i, _)| *i == k).map(|(_, r)| r.clone()));
    let bracket = match result {
        Some(0) => (f64::NEG_INFINITY, at(0)),
        Some(k) => (at(lo), at(k)),
        None => (at(steps), f64::INFINITY),
    };
    Ok(SearchOutcome { attained, bracket, evaluated: evaluated.into_iter().map(|(_, r)| r).collect() })
}

/// Analytic model of `cfg` at average power `power`.
pub fn analytic_config(cfg: &SystemConfig, power: f64) -> Result<AnalyticConfig> {
    cfg.validate()?;
    if !matches!(cfg.variant, Variant::MsMra | Variant::MsSra) {
        return config(format!("no closed-form predictor for {}", cfg.variant));
    }
    let layout = FrameLayout { pilot_parts: cfg.pilot_parts, pilot_bits: cfg.pilot_bits(), n_c: cfg.n_c };
    let p = Powers::from_average(power, cfg.phi, &layout);
    Ok(AnalyticConfig {
        active_users: cfg.active_users,
        slots: cfg.slots,
        antennas: cfg.effective_antennas(),
        pilot_parts: cfg.pilot_parts,
        n_p: cfg.n_p,
        n_c: cfg.n_c,
        message_bits: cfg.message_bits,
        crc_bits: cfg.crc_bits,
        pilot_power: p.pilot,
        coded_power: p.coded,
        noise_var: cfg.noise_var,
        gamma: cfg.gamma,
    })
}

/// Analytic PUPE rows over `cfg.ebn0_db`.
pub fn predict(cfg: &SystemConfig) -> Result<Vec<ResultRow>> {
    cfg.ebn0_db
        .iter()
        .map(|&e| {
            let pe = pupe_analytic(&analytic_config(cfg, power_of(cfg, e))?)?;
            Ok(ResultRow::analytic(cfg, e, pe))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SystemConfig {
        SystemConfig { list_size: 8, active_users: 4, antennas: 8, trials: 100, ..Default::default() }
    }

    #[test]
    fn metrics_definitions() {
        let sent: BTreeSet<Vec<u8>> = (0..10u8).map(|i| vec![i]).collect();
        let mut dec: BTreeSet<Vec<u8>> = (0..9u8).map(|i| vec![i]).collect();
        dec.insert(vec![99]);
        let m = TrialMetrics::from_sets(&sent, &dec, 0.0);
        assert_eq!(m.missed, 1);
        assert!((m.p_fa - 0.1).abs() < 1e-15);
        assert!((m.p_md - 0.1).abs() < 1e-15);
        let empty = TrialMetrics::from_sets(&BTreeSet::new(), &BTreeSet::new(), 0.0);
        assert_eq!((empty.p_md, empty.p_fa), (0.0, 0.0));
        let all = TrialMetrics::from_sets(&sent, &sent, 0.0);
        assert_eq!(all.pupe(), 0.0);
    }

    #[test]
    fn seeds_are_distinct_and_stable() {
        let s: HashSet<u64> = (0..1000).map(|t| trial_seed(7, t)).collect();
        assert_eq!(s.len(), 1000);
        assert_eq!(trial_seed(7, 3), trial_seed(7, 3));
        assert_ne!(trial_seed(7, 3), trial_seed(8, 3));
    }

    #[test]
    fn messages_are_distinct() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = draw_messages(&mut rng, 16, 4);
        assert_eq!(m.iter().collect::<HashSet<_>>().len(), 16);
    }

    #[test]
    fn aggregate_interval() {
        let mk = |p: f64| TrialMetrics { active: 1, missed: 0, false_alarms: 0, decoded: 0, p_md: p, p_fa: 0.0, wall_time_s: 0.0 };
        let est = aggregate(&[mk(0.0), mk(1.0), mk(0.0), mk(1.0)]);
        assert!((est.pe - 0.5).abs() < 1e-15);
        let half = 1.96 * (1.0f64 / 3.0 / 4.0).sqrt();
        assert!((est.ci_hi - 0.5 - half).abs() < 1e-12);
        let rev = aggregate(&[mk(1.0), mk(0.0), mk(1.0), mk(0.0)]);
        assert_eq!(est, rev);
    }

    #[test]
    fn zero_users_trial() {
        let cfg = SystemConfig { active_users: 0, ..small() };
        let out = run_trial_at_power(&cfg, 1.0, 0).unwrap();
        assert_eq!(out.metrics.pupe(), 0.0);
        assert!(out.decoded.is_empty());
    }

    #[test]
    fn trial_is_deterministic() {
        let cfg = small();
        let a = run_trial_at_power(&cfg, 0.5, 3).unwrap();
        let b = run_trial_at_power(&cfg, 0.5, 3).unwrap();
        assert_eq!(a.decoded, b.decoded);
        assert_eq!(a.metrics.missed, b.metrics.missed);
    }

    #[test]
    fn sweep_requires_enough_trials() {
        let cfg = SystemConfig { trials: 10, ..small() };
        assert!(simulate_point(&cfg, 0.0).is_err());
    }

    #[test]
    fn msug_scheme_has_ascending_groups() {
        let cfg = SystemConfig { variant: Variant::MsugMra, groups: 2, ..small() };
        let s = build_scheme(&cfg, 0.5).unwrap();
        assert_eq!(s.groups.len(), 2);
        assert!(s.groups[0].powers.coded < s.groups[1].powers.coded);
        assert!(s.groups[0].noise_level < s.groups[1].noise_level);
        let mean = (s.groups[0].powers.coded + s.groups[1].powers.coded) / 2.0;
        let layout = FrameLayout { pilot_parts: 2, pilot_bits: 5, n_c: 128 };
        assert!((mean - Powers::from_average(0.5, 1.0, &layout).coded).abs() < 1e-9);
    }

    #[test]
    fn predict_rejects_grouped_variants() {
        let cfg = SystemConfig { variant: Variant::MsugMra, groups: 2, ..small() };
        assert!(predict(&cfg).is_err());
        let rows = predict(&small()).unwrap();
        assert_eq!(rows.len(), small().ebn0_db.len());
        assert!(rows.iter().all(|r| r.source == Source::Analytic));
    }
}
