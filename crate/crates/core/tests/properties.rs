//! Property tests for the invariants of each module.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ura_core::analysis::{collision_model, detection_probability, pupe_analytic, AnalyticConfig};
use ura_core::channel::{complex_gaussian, transmit_slot};
use ura_core::harness::{aggregate, build_scheme, draw_messages, power_of, trial_seed, SystemConfig, TrialMetrics, Variant};
use ura_core::linalg::{energy, CMatrix};
use ura_core::pilots::PilotCodebook;
use ura_core::polar::{CrcSpec, PolarCodeSpec};
use ura_core::rxchain::{decode_slot, ls_sic};
use ura_core::Complex64;

fn random_matrix(rows: usize, cols: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(&mut rng, 1.0))
}

fn analytic(scale: f64) -> AnalyticConfig {
    AnalyticConfig {
        active_users: 12,
        slots: 2,
        antennas: 16,
        pilot_parts: 2,
        n_p: 32,
        n_c: 128,
        message_bits: 100,
        crc_bits: 11,
        pilot_power: 0.1 * scale,
        coded_power: 0.1 * scale,
        noise_var: 1.0,
        gamma: 0.1,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pilot_mapping_roundtrips(bits in 1usize..=10, raw in any::<u64>()) {
        let cb = PilotCodebook::build(bits).unwrap();
        let seg: Vec<u8> = (0..bits).map(|k| (raw >> k & 1) as u8).collect();
        let idx = cb.index_of(&seg).unwrap();
        prop_assert_eq!(cb.bits_of(idx), seg);
    }

    #[test]
    fn polar_noiseless_loopback(seed in any::<u64>(), k in 20usize..=120) {
        let crc = CrcSpec::standard(11).unwrap();
        let code = PolarCodeSpec::new(256, k + 11, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let payload = draw_messages(&mut rng, 1, k).remove(0);
        let word = crc.attach(&payload);
        let llr: Vec<f64> = code.encode(&word).unwrap().iter().map(|&c| if c == 0 { 4.0 } else { -4.0 }).collect();
        let d = code.decode(&llr, &crc).unwrap();
        prop_assert!(d.crc_pass);
        prop_assert_eq!(d.info, word);
    }

    #[test]
    fn encoder_is_deterministic_and_payloads_fit(seed in any::<u64>(), wopbe in any::<bool>()) {
        let variant = if wopbe { Variant::MsMraWopbe } else { Variant::MsMra };
        let cfg = SystemConfig { variant, list_size: 4, ..SystemConfig::default() };
        let scheme = build_scheme(&cfg, 0.3).unwrap();
        let enc = &scheme.encoder;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let msg = draw_messages(&mut rng, 1, cfg.message_bits).remove(0);
        prop_assert_eq!(scheme.regenerate(&msg, 0).unwrap(), scheme.regenerate(&msg, 0).unwrap());
        let payload = enc.polar_payload(&enc.split(&msg).unwrap());
        let expect = if wopbe {
            cfg.message_bits - cfg.pilot_parts * cfg.pilot_bits() + cfg.crc_outer_bits + cfg.crc_message_bits
        } else {
            cfg.message_bits + cfg.crc_bits
        };
        prop_assert_eq!(payload.len(), expect);
        prop_assert!(payload.len() <= 2 * cfg.n_c);
    }

    #[test]
    fn msug_groups_average_to_base_power(groups in 2usize..=3, ebn0 in -6.0f64..2.0) {
        let cfg = SystemConfig { variant: Variant::MsugMra, groups, list_size: 4, ..SystemConfig::default() };
        let base = SystemConfig { list_size: 4, ..SystemConfig::default() };
        let p = power_of(&cfg, ebn0);
        let grouped = build_scheme(&cfg, p).unwrap();
        let single = build_scheme(&base, p).unwrap();
        let mean = grouped.groups.iter().map(|g| g.powers.coded).sum::<f64>() / groups as f64;
        let target = single.groups[0].powers.coded;
        prop_assert!(((mean - target) / target).abs() < 1e-10);
    }

    #[test]
    fn channel_is_reproducible(seed in any::<u64>(), k in 0usize..4) {
        let sig: Vec<Vec<Complex64>> = (0..k).map(|i| vec![Complex64::new(i as f64, 1.0); 16]).collect();
        let refs: Vec<&[Complex64]> = sig.iter().map(Vec::as_slice).collect();
        let a = transmit_slot(&refs, 16, 3, 1.0, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap().0;
        let b = transmit_slot(&refs, 16, 3, 1.0, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap().0;
        prop_assert_eq!(a, b);
    }

    #[test]
    fn sic_is_an_idempotent_projection(seed in any::<u64>(), m in 1usize..12, k in 1usize..10) {
        let x = random_matrix(k, 48, seed);
        let y = random_matrix(m, 48, seed ^ 1);
        let r1 = ls_sic(&y, &x).residual;
        let r2 = ls_sic(&r1, &x).residual;
        prop_assert!(energy(&(&r2 - &r1)).sqrt() <= 1e-8 * energy(&y).sqrt());
        prop_assert!(energy(&(&r1 * x.adjoint())).sqrt() <= 1e-8 * energy(&y).sqrt() * energy(&x).sqrt());
        prop_assert!(energy(&r1) <= energy(&y) * (1.0 + 1e-12));
    }

    #[test]
    fn detection_probability_increases_in_every_argument(
        gamma in 0.01f64..0.5, m in 1usize..16, np_bits in 1u32..8, pp in 0.01f64..2.0,
    ) {
        let n_p = 1usize << np_bits;
        let base = detection_probability(gamma, m, n_p, pp, 1.0);
        prop_assert!(base > gamma && base < 1.0 || base == 1.0);
        prop_assert!(detection_probability((gamma * 1.5).min(0.99), m, n_p, pp, 1.0) >= base);
        prop_assert!(detection_probability(gamma, m + 1, n_p, pp, 1.0) >= base);
        prop_assert!(detection_probability(gamma, m, 2 * n_p, pp, 1.0) >= base);
        prop_assert!(detection_probability(gamma, m, n_p, 1.5 * pp, 1.0) >= base);
    }

    #[test]
    fn collision_mass_drops_by_one(k_s in 1usize..60, np_bits in 2u32..7, parts in 1usize..4) {
        let n_p = 1usize << np_bits;
        let prof = collision_model(k_s, n_p, parts).unwrap();
        let mass = |k: usize| (1..=prof.max_multiplicity()).map(|i| i as f64 * prof.n(i, k)).sum::<f64>();
        for i in 1..=prof.max_multiplicity() {
            prop_assert!(prof.n(i, 1) >= 0.0);
        }
        prop_assert!((mass(1) - k_s as f64).abs() < 1e-8 * k_s as f64 + 1e-9);
        for k in 1..k_s {
            prop_assert!((mass(k) - mass(k + 1) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn aggregation_is_order_independent(values in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 2..200), rot in 0usize..200) {
        let metrics: Vec<TrialMetrics> = values
            .iter()
            .map(|&(p_md, p_fa)| TrialMetrics { active: 1, missed: 0, false_alarms: 0, decoded: 0, p_md, p_fa, wall_time_s: 0.0 })
            .collect();
        let mut rotated = metrics.clone();
        rotated.rotate_left(rot % metrics.len());
        let a = aggregate(&metrics);
        let b = aggregate(&rotated);
        prop_assert!((a.pe - b.pe).abs() < 1e-12 && (a.ci_hi - b.ci_hi).abs() < 1e-12);
    }

    #[test]
    fn trial_seeds_do_not_repeat(master in any::<u64>()) {
        let seeds: std::collections::HashSet<u64> = (0..256).map(|t| trial_seed(master, t)).collect();
        prop_assert_eq!(seeds.len(), 256);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn decoder_loop_terminates_within_bound(seed in any::<u64>(), k in 0usize..6, ebn0 in -8.0f64..2.0) {
        let cfg = SystemConfig { list_size: 8, ..SystemConfig::default() };
        let scheme = build_scheme(&cfg, power_of(&cfg, ebn0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let msgs = draw_messages(&mut rng, k, cfg.message_bits);
        let sig: Vec<Vec<Complex64>> = msgs.iter().map(|m| scheme.regenerate(m, 0).unwrap()).collect();
        let refs: Vec<&[Complex64]> = sig.iter().map(Vec::as_slice).collect();
        let (y, _) = transmit_slot(&refs, cfg.slot_len(), cfg.antennas, 1.0, &mut rng).unwrap();
        let out = decode_slot(&y, &scheme).unwrap();
        let period = scheme.schedule().len();
        prop_assert!(out.iterations <= (out.users.len() + 1) * period);
        let successes: usize = out.trace.iter().map(|t| t.successes).sum();
        prop_assert_eq!(successes, out.users.len());
    }
}

#[test]
fn analytic_pupe_non_increasing_in_power() {
    let mut prev = f64::INFINITY;
    for step in 0..20 {
        let pe = pupe_analytic(&analytic(1.25f64.powi(step))).unwrap();
        assert!(pe <= prev + 1e-12, "P_e rose to {pe} at step {step}");
        prev = pe;
    }
}
