//! Full transmit-receive chain on small slots.

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ura_core::channel::transmit_slot;
use ura_core::harness::{
    build_scheme, draw_messages, power_of, run_trial, run_trial_at_power, simulate_point, trial_seed, SystemConfig,
    Variant,
};
use ura_core::rxchain::decode_slot;
use ura_core::Complex64;

fn base() -> SystemConfig {
    SystemConfig { list_size: 16, ..SystemConfig::default() }
}

/// Sends `messages` through one slot at Eb/N0 `ebn0` and returns the decoded set.
fn decode_messages(cfg: &SystemConfig, messages: &[Vec<u8>], groups: &[usize], ebn0: f64, seed: u64) -> BTreeSet<Vec<u8>> {
    let scheme = build_scheme(cfg, power_of(cfg, ebn0)).unwrap();
    let signals: Vec<Vec<Complex64>> =
        messages.iter().zip(groups).map(|(m, &g)| scheme.regenerate(m, g).unwrap()).collect();
    let refs: Vec<&[Complex64]> = signals.iter().map(Vec::as_slice).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (y, _) = transmit_slot(&refs, cfg.slot_len(), cfg.effective_antennas(), cfg.noise_var, &mut rng).unwrap();
    decode_slot(&y, &scheme).unwrap().messages().map(<[u8]>::to_vec).collect()
}

#[test]
fn two_users_are_recovered() {
    let cfg = base();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let msgs = draw_messages(&mut rng, 2, cfg.message_bits);
    let got = decode_messages(&cfg, &msgs, &[0, 0], 2.0, 7);
    assert_eq!(got, msgs.into_iter().collect());
}

#[test]
fn collision_in_one_part_is_resolved_through_the_other() {
    let cfg = base();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut msgs = draw_messages(&mut rng, 2, cfg.message_bits);
    // Same part-0 pilot bits, different part-1 bits.
    let bp = cfg.pilot_bits();
    let head: Vec<u8> = msgs[0][..bp].to_vec();
    msgs[1][..bp].copy_from_slice(&head);
    msgs[1][bp] ^= 1;
    let got = decode_messages(&cfg, &msgs, &[0, 0], 2.0, 8);
    assert_eq!(got, msgs.into_iter().collect());
}

#[test]
fn wopbe_recovers_a_small_slot() {
    let cfg = SystemConfig { variant: Variant::MsMraWopbe, ..base() };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let msgs = draw_messages(&mut rng, 3, cfg.message_bits);
    let got = decode_messages(&cfg, &msgs, &[0, 0, 0], 2.0, 9);
    assert_eq!(got, msgs.into_iter().collect());
}

#[test]
fn msug_two_groups_recovers_both_groups() {
    let cfg = SystemConfig { variant: Variant::MsugMra, groups: 2, ..base() };
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let msgs = draw_messages(&mut rng, 4, cfg.message_bits);
    let got = decode_messages(&cfg, &msgs, &[0, 1, 0, 1], 2.0, 10);
    assert_eq!(got, msgs.into_iter().collect());
}

#[test]
fn sra_trial_runs_at_high_snr() {
    let cfg = SystemConfig { variant: Variant::MsSra, antennas: 4, subframes: 4, active_users: 6, ..base() };
    let mut pe = 0.0;
    for t in 0..10 {
        pe += run_trial_at_power(&cfg, power_of(&cfg, 2.0), t).unwrap().metrics.pupe();
    }
    assert!(pe / 10.0 < 0.1, "MS-SRA PUPE {}", pe / 10.0);
}

#[test]
fn noise_only_frames_decode_nothing() {
    let cfg = SystemConfig { active_users: 0, ..base() };
    let scheme = build_scheme(&cfg, 1.0).unwrap();
    for t in 0..50 {
        let out = run_trial(&cfg, &scheme, trial_seed(5, t)).unwrap();
        assert!(out.decoded.is_empty(), "false decode in noise-only trial {t}");
    }
}

#[test]
fn sweep_point_is_reproducible_and_sane() {
    let cfg = SystemConfig { trials: 100, active_users: 4, ..base() };
    let a = simulate_point(&cfg, 0.0).unwrap();
    let b = simulate_point(&cfg, 0.0).unwrap();
    assert_eq!(a, b);
    assert!(a.pe < 0.05, "P_e {} at 0 dB with 4 users", a.pe);
    assert!(a.ci_lo <= a.pe && a.pe <= a.ci_hi);
    assert_eq!(a.trials, 100);
}

#[test]
fn grouped_interleaving_changes_nothing_without_interference() {
    // One user per group, any interleaver: the strong user is decoded
    // first and the weak one after cancellation.
    let cfg = SystemConfig { variant: Variant::MsugMra, groups: 3, ..base() };
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let msgs = draw_messages(&mut rng, 3, cfg.message_bits);
    let got = decode_messages(&cfg, &msgs, &[0, 1, 2], 3.0, 11);
    assert_eq!(got, msgs.into_iter().collect());
}

/// Accepted messages per noise-only slot stay within
/// `n_p gamma 2^-r` plus three standard errors over 10^5 slots.
#[test]
fn false_decode_rate_on_noise_only_slots() {
    use rayon::prelude::*;
    let cfg = SystemConfig { list_size: 8, ..SystemConfig::default() };
    let scheme = build_scheme(&cfg, power_of(&cfg, 0.0)).unwrap();
    let slots = 100_000u64;
    let counts: Vec<f64> = (0..slots)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(77, s));
            let (y, _) = transmit_slot(&[], cfg.slot_len(), cfg.antennas, cfg.noise_var, &mut rng).unwrap();
            decode_slot(&y, &scheme).unwrap().users.len() as f64
        })
        .collect();
    let n = slots as f64;
    let mean = counts.iter().sum::<f64>() / n;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let bound = cfg.n_p as f64 * cfg.gamma / 2f64.powi(cfg.crc_bits as i32) + 3.0 * (var / n).sqrt();
    println!("noise-only slots: {mean:.2e} accepted per slot (bound {bound:.2e})");
    assert!(mean <= bound, "{mean} false decodes per slot exceeds {bound}");
}
