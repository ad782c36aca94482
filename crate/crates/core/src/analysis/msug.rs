//! Group power allocation for the multi-group (MSUG) schemes.
//!
//! Groups are indexed `1..=G` from weakest to strongest. When group `g` is
//! dominant, the stronger groups are already cancelled and the weaker ones
//! act as white noise of level `delta_g = zeta K_0 sum_{f<g} P_f + sigma^2`.
//! Powers are chosen so every group sees the same first-iteration SINR
//! `beta'`, subject to the mean group power being `P`.

use crate::error::{Error, Result};

/// Inputs of the power allocation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MsugPowerProblem {
    pub groups: usize,
    /// Target mean of the per-group coded powers.
    pub mean_power: f64,
    /// Pilot-to-coded power ratio `phi`.
    pub phi: f64,
    /// Expected users per group and slot, `K_a / (S G)`.
    pub k0: f64,
    pub antennas: usize,
    pub slot_len: usize,
    pub n_p: usize,
    pub pilot_parts: usize,
    pub noise_var: f64,
}

impl MsugPowerProblem {
    /// Average power of a Gaussian-modelled interferer relative to `P_c`.
    pub fn zeta(&self) -> f64 {
        let n_c = self.slot_len - self.pilot_parts * self.n_p;
        (self.pilot_parts as f64 * self.phi * self.n_p as f64 + n_c as f64) / self.slot_len as f64
    }

    /// `rho_g = 1 - K_0 (G - g) / L` for one-based `g`.
    pub fn rho(&self, g: usize) -> f64 {
        1.0 - self.k0 * (self.groups - g) as f64 / self.slot_len as f64
    }

    /// Effective noise levels `delta_1..delta_G` for ascending powers.
    pub fn noise_levels(&self, powers: &[f64]) -> Vec<f64> {
        let z = self.zeta() * self.k0;
        let mut acc = 0.0;
        powers
            .iter()
            .map(|&p| {
                let d = z * acc + self.noise_var;
                acc += p;
                d
            })
            .collect()
    }

    /// `beta'_g` for one-based `g` given all group powers.
    pub fn beta(&self, g: usize, powers: &[f64]) -> f64 {
        let delta = self.noise_levels(powers)[g - 1];
        let p = powers[g - 1];
        let rho = self.rho(g);
        let m = self.antennas as f64;
        let npphi = self.n_p as f64 * self.phi;
        (rho * m * p * p + delta / npphi * p)
            / ((p * (self.k0 - 1.0) + delta) * (p + delta / (rho * npphi)))
    }

    /// Group powers that all reach `beta`, or `None` when some group cannot.
    fn powers_for_beta(&self, beta: f64) -> Option<Vec<f64>> {
        let m = self.antennas as f64;
        let npphi = self.n_p as f64 * self.phi;
        let z = self.zeta() * self.k0;
        let mut out = Vec::with_capacity(self.groups);
        let mut acc = 0.0;
        for g in 1..=self.groups {
            let rho = self.rho(g);
            let delta = z * acc + self.noise_var;
            let c1 = (self.k0 - 1.0) - rho * m / beta;
            let c2 = delta * (1.0 + (self.k0 - 1.0) / (npphi * rho) - 1.0 / (npphi * beta));
            let c3 = delta * delta / (npphi * rho);
            if c1 >= 0.0 {
                return None;
            }
            // With c1 < 0 < c3 the roots have opposite signs; this is the
            // positive one written without cancellation.
            let disc = c2 * c2 - 4.0 * c1 * c3;
            let p = 2.0 * c3 / (-c2 + disc.sqrt());
            if !(p.is_finite() && p > 0.0) {
                return None;
            }
            acc += p;
            out.push(p);
        }
        Some(out)
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Ascending per-group coded powers with equal `beta'` and mean `P`.
pub fn msug_powers(problem: &MsugPowerProblem) -> Result<Vec<f64>> {
    let pr = problem;
    if pr.groups == 0 || !(pr.mean_power > 0.0) || !(pr.phi > 0.0) || !(pr.noise_var > 0.0) {
        return Err(Error::Parameter("group count, power, phi and noise must be positive".into()));
    }
    if pr.slot_len <= pr.pilot_parts * pr.n_p {
        return Err(Error::Parameter("slot has no coded part".into()));
    }
    if pr.groups == 1 {
        return Ok(vec![pr.mean_power]);
    }
    if let Some(g) = (1..=pr.groups).find(|&g| pr.rho(g) <= 0.0) {
        return Err(Error::Infeasible(format!(
            "rho_{g} = {} <= 0: K_0 = {} users per group do not fit a slot of length {}",
            pr.rho(g),
            pr.k0,
            pr.slot_len
        )));
    }
    let m = pr.antennas as f64;
    // beta' is bounded by rho_g M / (K_0 - 1), its limit as P_g grows.
    let mut hi = if pr.k0 > 1.0 {
        (1..=pr.groups).map(|g| pr.rho(g) * m / (pr.k0 - 1.0)).fold(f64::INFINITY, f64::min)
    } else {
        let mut h = 1.0;
        while pr.powers_for_beta(h).is_some_and(|p| mean(&p) < pr.mean_power) && h < 1e12 {
            h *= 2.0;
        }
        h
    };
    let mut lo = 0.0;
    let reaches = |b: f64| pr.powers_for_beta(b).is_none_or(|p| mean(&p) >= pr.mean_power);
    if !reaches(hi) {
        return Err(Error::Infeasible(format!(
            "no beta' in (0, {hi:.6e}) gives mean group power {}",
            pr.mean_power
        )));
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if reaches(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let candidates = [lo, hi]
        .into_iter()
        .filter_map(|b| pr.powers_for_beta(b))
        .filter(|p| !p.is_empty());
    let best = candidates
        .min_by(|a, b| {
            (mean(a) - pr.mean_power).abs().total_cmp(&(mean(b) - pr.mean_power).abs())
        })
        .ok_or_else(|| Error::Infeasible(format!("beta' bracket [{lo:.6e}, {hi:.6e}] has no solution")))?;
    if best.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Infeasible(format!(
            "equal-beta' powers are not ascending (beta' ~ {lo:.6e}): {best:?}"
        )));
    }
    Ok(best)
}
