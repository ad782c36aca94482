//! Closed-form performance predictors for the multi-stage MRA receiver.
//!
//! Everything here is a deterministic function of an [`AnalyticConfig`].
//! Per-iteration error probabilities are built from the detector, the
//! post-MRC SINR and the collision recursion, then composed into slot
//! errors and the frame PUPE.

mod collision;
mod msug;
mod special;

pub use collision::{collision_model, CollisionProfile, POISSON_TRUNCATION};
pub use msug::{msug_powers, MsugPowerProblem};
pub use special::{chi2_cdf, chi2_inv, chi2_pdf, integrate, q_function, CHI2_INV_TOL};

use statrs::function::factorial::ln_binomial;

use crate::error::{param, Result};

/// Relative tolerance of [`trunc_moment`].
pub const MOMENT_REL_TOL: f64 = 1e-10;

/// Parameters of the analytic model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticConfig {
    pub active_users: usize,
    pub slots: usize,
    pub antennas: usize,
    pub pilot_parts: usize,
    pub n_p: usize,
    pub n_c: usize,
    pub message_bits: usize,
    pub crc_bits: usize,
    pub pilot_power: f64,
    pub coded_power: f64,
    pub noise_var: f64,
    pub gamma: f64,
}

impl AnalyticConfig {
    /// `E_x = J n_p P_p + n_c P_c`.
    pub fn signal_energy(&self) -> f64 {
        (self.pilot_parts * self.n_p) as f64 * self.pilot_power + self.n_c as f64 * self.coded_power
    }

    /// `sigma^2 / (n_p P_p)`, the relative channel-estimation noise.
    fn estimation_noise(&self) -> f64 {
        self.noise_var / (self.n_p as f64 * self.pilot_power)
    }
}

/// Probability that the energy detector flags a non-colliding user.
pub fn detection_probability(gamma: f64, antennas: usize, n_p: usize, pilot_power: f64, noise_var: f64) -> f64 {
    let dof = 2.0 * antennas as f64;
    let thr = noise_var * chi2_inv(dof, 1.0 - gamma) / (noise_var + n_p as f64 * pilot_power);
    1.0 - chi2_cdf(dof, thr)
}

/// `E[eta^m | eta among the k weakest of K_s]` for `eta ~ Gamma(M, 1)`,
/// i.e. the moment of `||h||^2` truncated at `0.5 Gamma^-1_{2M}(k / K_s)`.
pub fn trunc_moment(k: usize, k_s: usize, antennas: usize, m: u32) -> Result<f64> {
    if k == 0 || k > k_s {
        return param(format!("moment index k = {k} outside 1..={k_s}"));
    }
    if antennas == 0 || m == 0 {
        return param("antenna count and moment order must be positive");
    }
    let mf = antennas as f64;
    if k == k_s {
        return Ok((0..m).map(|i| mf + i as f64).product());
    }
    let upper = 0.5 * chi2_inv(2.0 * mf, k as f64 / k_s as f64);
    // Integrate eta^a e^-eta scaled by its maximum on [0, upper].
    let scaled = |a: f64| -> (f64, f64) {
        let peak = a.min(upper);
        let log_peak = if peak > 0.0 { a * peak.ln() - peak } else { 0.0 };
        let f = move |x: f64| {
            if x <= 0.0 {
                if a == 0.0 { 1.0 } else { 0.0 }
            } else {
                (a * x.ln() - x - log_peak).exp()
            }
        };
        (integrate(f, 0.0, upper, MOMENT_REL_TOL * 1e-2), log_peak)
    };
    let (num, ln_num) = scaled(mf - 1.0 + m as f64);
    let (den, ln_den) = scaled(mf - 1.0);
    Ok(num / den * (ln_num - ln_den).exp())
}

/// Post-MRC SINR of a non-colliding user at SIC iteration `t` of a slot
/// with `k_s` users.
pub fn sinr_alpha(cfg: &AnalyticConfig, k_s: usize, t: usize) -> Result<f64> {
    if t == 0 || t > k_s {
        return param(format!("iteration t = {t} outside 1..={k_s}"));
    }
    let ex = cfg.signal_energy();
    let done = (t - 1) as f64;
    let s_p = 1.0 - cfg.pilot_power * done / ex;
    let s_c = 1.0 - cfg.coded_power * done / ex;
    let k = k_s - t + 1;
    let mu1 = trunc_moment(k, k_s, cfg.antennas, 1)?;
    let mu2 = trunc_moment(k, k_s, cfg.antennas, 2)?;
    let x = cfg.estimation_noise();
    let pc = cfg.coded_power;
    Ok(s_c * pc * (s_p * mu2 + x * mu1)
        / ((pc * (k_s - t) as f64 + cfg.noise_var) * (s_p * mu1 + cfg.antennas as f64 * x)))
}

/// Simplified first-iteration SINR `P_c M / ((sigma^2 + P_c K_s)(1 + sigma^2 / (n_p P_p)))`.
pub fn sinr_first_iteration(cfg: &AnalyticConfig, k_s: usize) -> f64 {
    cfg.coded_power * cfg.antennas as f64
        / ((cfg.noise_var + cfg.coded_power * k_s as f64) * (1.0 + cfg.estimation_noise()))
}

/// Normal approximation of the block error probability of a rate
/// `(B + r) / (2 n_c)` code on a real channel of SINR `alpha`.
pub fn dec_error_prob(alpha: f64, message_bits: usize, crc_bits: usize, n_c: usize) -> f64 {
    let log2e = std::f64::consts::LOG2_E;
    let n = n_c as f64;
    let capacity = 0.5 * (1.0 + alpha).log2();
    let rate = (message_bits + crc_bits) as f64 / (2.0 * n);
    let dispersion = alpha * (alpha + 2.0) * log2e * log2e / (2.0 * (alpha + 1.0) * (alpha + 1.0));
    let sd = (dispersion / (2.0 * n)).sqrt();
    if sd == 0.0 {
        return if capacity > rate { 0.0 } else { 1.0 };
    }
    q_function((capacity - rate) / sd)
}

/// Per-user error of a slot given the per-iteration error probabilities
/// `e_1..e_r` of a slot with `r = e.len()` users.
pub fn slot_error(e: &[f64]) -> f64 {
    let r = e.len();
    let mut survive = 1.0;
    let mut eps = 0.0;
    for (idx, &ej) in e.iter().enumerate() {
        let j = idx + 1;
        let stall = ej.powi((r - j + 1) as i32);
        eps += (r - j + 1) as f64 / r as f64 * stall * survive;
        survive *= 1.0 - stall;
    }
    eps
}

/// Per-iteration error probabilities `e_{t,r}` for a slot with `r` users.
pub fn iteration_errors(cfg: &AnalyticConfig, r: usize) -> Result<Vec<f64>> {
    let pd = detection_probability(cfg.gamma, cfg.antennas, cfg.n_p, cfg.pilot_power, cfg.noise_var);
    let col = collision_model(r, cfg.n_p, cfg.pilot_parts)?;
    (1..=r)
        .map(|t| {
            let alpha = sinr_alpha(cfg, r, t)?;
            let pdec = dec_error_prob(alpha, cfg.message_bits, cfg.crc_bits, cfg.n_c);
            Ok(1.0 - pd * (1.0 - pdec) * (1.0 - col.p_col(t)))
        })
        .collect()
}

/// Predicted PUPE over `S` slots and `K_a` users.
pub fn pupe_analytic(cfg: &AnalyticConfig) -> Result<f64> {
    let ka = cfg.active_users;
    if ka == 0 {
        return Ok(0.0);
    }
    if cfg.slots == 0 {
        return param("slot count must be positive");
    }
    let s = cfg.slots as f64;
    let mut ok = 0.0;
    for r in 1..=ka {
        let weight = if cfg.slots == 1 {
            if r == ka { 1.0 } else { 0.0 }
        } else {
            (ln_binomial((ka - 1) as u64, (r - 1) as u64)
                + (r - 1) as f64 * (1.0 / s).ln()
                + (ka - r) as f64 * (1.0 - 1.0 / s).ln())
            .exp()
        };
        if weight < 1e-16 {
            continue;
        }
        ok += (1.0 - slot_error(&iteration_errors(cfg, r)?)) * weight;
    }
    Ok((1.0 - ok).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::gamma_lr;

    fn cfg() -> AnalyticConfig {
        AnalyticConfig {
            active_users: 12,
            slots: 2,
            antennas: 16,
            pilot_parts: 2,
            n_p: 32,
            n_c: 128,
            message_bits: 100,
            crc_bits: 11,
            pilot_power: 0.3,
            coded_power: 0.3,
            noise_var: 1.0,
            gamma: 0.1,
        }
    }

    #[test]
    fn detection_probability_reference_values() {
        assert!((detection_probability(0.1, 1, 1, 1.0, 1.0) - 0.1f64.sqrt()).abs() < 1e-12);
        assert!((detection_probability(0.1, 4, 10, 1.0, 1.0) - 0.996_494_694_689_486_5).abs() < 1e-10);
        assert!((detection_probability(0.1, 8, 1, 1.0, 1.0) - 0.759_593_417_682_566).abs() < 1e-10);
        assert!((detection_probability(0.1, 8, 32, 0.0, 1.0) - 0.1).abs() < 1e-12);
        assert!(detection_probability(0.1, 8, 32, 1e6, 1.0) > 1.0 - 1e-12);
    }

    #[test]
    fn detection_probability_is_monotone() {
        let base = detection_probability(0.1, 4, 32, 0.05, 1.0);
        assert!(detection_probability(0.2, 4, 32, 0.05, 1.0) > base);
        assert!(detection_probability(0.1, 8, 32, 0.05, 1.0) > base);
        assert!(detection_probability(0.1, 4, 64, 0.05, 1.0) > base);
        assert!(detection_probability(0.1, 4, 32, 0.1, 1.0) > base);
    }

    #[test]
    fn trunc_moment_reference_values() {
        let v = trunc_moment(1, 2, 1, 1).unwrap();
        assert!((v - 0.306_852_819_440_054_7).abs() < 1e-9);
        let v = trunc_moment(3, 10, 4, 1).unwrap();
        assert!((v / 1.956_222_683_445_980_7 - 1.0).abs() < 1e-8);
        let v = trunc_moment(3, 10, 4, 2).unwrap();
        assert!((v / 4.132_703_478_828_316 - 1.0).abs() < 1e-8);
        let v = trunc_moment(5, 12, 16, 1).unwrap();
        assert!((v / 12.351_616_312_636_61 - 1.0).abs() < 1e-8);
        let v = trunc_moment(5, 12, 16, 2).unwrap();
        assert!((v / 155.794_782_153_229_46 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn trunc_moment_matches_incomplete_gamma() {
        for m in [1usize, 2, 8, 16, 50] {
            for (k, ks) in [(1, 15), (4, 9), (7, 8)] {
                let x = 0.5 * chi2_inv(2.0 * m as f64, k as f64 / ks as f64);
                let mf = m as f64;
                let exact1 = mf * gamma_lr(mf + 1.0, x) / gamma_lr(mf, x);
                let exact2 = mf * (mf + 1.0) * gamma_lr(mf + 2.0, x) / gamma_lr(mf, x);
                let q1 = trunc_moment(k, ks, m, 1).unwrap();
                let q2 = trunc_moment(k, ks, m, 2).unwrap();
                assert!((q1 / exact1 - 1.0).abs() < 1e-8, "M={m} k={k}/{ks}");
                assert!((q2 / exact2 - 1.0).abs() < 1e-8, "M={m} k={k}/{ks}");
                assert!(q2 >= q1 * q1);
            }
        }
    }

    #[test]
    fn trunc_moment_edges() {
        assert_eq!(trunc_moment(7, 7, 16, 1).unwrap(), 16.0);
        assert_eq!(trunc_moment(7, 7, 16, 2).unwrap(), 16.0 * 17.0);
        assert!(trunc_moment(8, 7, 16, 1).is_err());
        assert!(trunc_moment(0, 7, 16, 1).is_err());
    }

    #[test]
    fn first_iteration_sinr() {
        let c = cfg();
        let x = c.noise_var / (32.0 * 0.3);
        let full = sinr_alpha(&c, 6, 1).unwrap();
        let closed = 0.3 * (17.0 + x) / ((0.3 * 5.0 + 1.0) * (1.0 + x));
        assert!((full - closed).abs() < 1e-12);
        let simple = sinr_first_iteration(&c, 6);
        assert!((simple - 0.3 * 16.0 / ((1.0 + 0.3 * 6.0) * (1.0 + x))).abs() < 1e-12);
        let mut prev = f64::INFINITY;
        for ks in 1..20 {
            let a = sinr_first_iteration(&c, ks);
            assert!(a < prev);
            prev = a;
        }
        let big = AnalyticConfig { antennas: 160, ..c };
        assert!((sinr_first_iteration(&big, 6) / simple - 10.0).abs() < 1e-12);
        assert!(sinr_alpha(&c, 6, 7).is_err());
    }

    #[test]
    fn later_iterations_see_weaker_users() {
        let c = cfg();
        let a: Vec<f64> = (1..=6).map(|t| sinr_alpha(&c, 6, t).unwrap()).collect();
        assert!(a.iter().all(|v| v.is_finite() && *v > 0.0));
    }

    #[test]
    fn dec_error_reference_values() {
        assert!((dec_error_prob(0.2, 100, 11, 512) - 0.094_772_223_638_680_43).abs() < 1e-12);
        assert!((dec_error_prob(1.0, 100, 11, 128) - 0.114_556_157_614_122_16).abs() < 1e-12);
        // Capacity exactly at the rate.
        let rate = 111.0 / 256.0;
        let alpha = 2f64.powf(2.0 * rate) - 1.0;
        assert!((dec_error_prob(alpha, 100, 11, 128) - 0.5).abs() < 1e-12);
        assert!(dec_error_prob(1e6, 100, 11, 128) < 1e-12);
    }

    #[test]
    fn slot_error_edges() {
        assert_eq!(slot_error(&[0.0; 5]), 0.0);
        assert!((slot_error(&[1.0, 0.3, 0.2]) - 1.0).abs() < 1e-15);
        assert!((slot_error(&[0.4]) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn pupe_single_slot_is_slot_error() {
        let c = AnalyticConfig { slots: 1, active_users: 5, ..cfg() };
        let direct = slot_error(&iteration_errors(&c, 5).unwrap());
        assert!((pupe_analytic(&c).unwrap() - direct).abs() < 1e-15);
    }

    #[test]
    fn pupe_decreases_with_power() {
        let mut prev = 1.0;
        for p in [0.05, 0.1, 0.2, 0.4, 0.8, 1.6] {
            let c = AnalyticConfig { pilot_power: p, coded_power: p, ..cfg() };
            let pe = pupe_analytic(&c).unwrap();
            assert!(pe <= prev + 1e-12, "P = {p}: {pe} > {prev}");
            prev = pe;
        }
    }
}
