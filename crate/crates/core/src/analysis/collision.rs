//! Mean-field pilot-collision recursion across SIC iterations.

use statrs::function::gamma::ln_gamma;

use crate::error::{param, Result};

/// Poisson mass below which multiplicities are truncated.
pub const POISSON_TRUNCATION: f64 = 1e-12;

/// Expected collision counts `N_i^(k)` and per-iteration collision
/// probabilities of a slot.
#[derive(Debug, Clone, PartialEq)]
pub struct CollisionProfile {
    /// `counts[k - 1][i - 1] = N_i^(k)`.
    counts: Vec<Vec<f64>>,
    /// `collision[t - 1] = P^col_{K_s, t}`.
    collision: Vec<f64>,
}

impl CollisionProfile {
    /// Expected number of pilots selected by exactly `i` remaining users at
    /// iteration `k` (both one based).
    pub fn n(&self, i: usize, k: usize) -> f64 {
        self.counts
            .get(k - 1)
            .and_then(|row| row.get(i - 1))
            .copied()
            .unwrap_or(0.0)
    }

    /// Collision probability of a remaining user at iteration `t`.
    pub fn p_col(&self, t: usize) -> f64 {
        self.collision[t - 1]
    }

    pub fn collision_probabilities(&self) -> &[f64] {
        &self.collision
    }

    pub fn iterations(&self) -> usize {
        self.counts.len()
    }

    pub fn max_multiplicity(&self) -> usize {
        self.counts.first().map_or(0, Vec::len)
    }
}

fn poisson_pmf(i: usize, lambda: f64) -> f64 {
    (-lambda + i as f64 * lambda.ln() - ln_gamma(i as f64 + 1.0)).exp()
}

/// Runs the collision recursion for a slot with `k_s` users, `n_p` pilots
/// per part and `parts` pilot parts.
pub fn collision_model(k_s: usize, n_p: usize, parts: usize) -> Result<CollisionProfile> {
    if k_s == 0 || n_p == 0 || parts == 0 {
        return param("collision model needs K_s, n_p and J >= 1");
    }
    let lambda = k_s as f64 / n_p as f64;
    let mut first = Vec::new();
    for i in 1.. {
        let pmf = poisson_pmf(i, lambda);
        if pmf < POISSON_TRUNCATION && i as f64 > lambda {
            break;
        }
        first.push(n_p as f64 * pmf);
    }
    let imax = first.len();
    let mut counts = vec![first];
    let j = parts as f64;
    for k in 1..k_s {
        let kappa = (j - 1.0) / (j * (k_s - k + 1) as f64);
        let cur = &counts[k - 1];
        let at = |i: usize| if i <= imax { cur[i - 1] } else { 0.0 };
        let next: Vec<f64> = (1..=imax)
            .map(|i| {
                let flow = kappa * ((i + 1) as f64 * at(i + 1) - i as f64 * at(i));
                if i == 1 {
                    at(1) + flow - 1.0 / j
                } else {
                    at(i) + flow
                }
            })
            .collect();
        counts.push(next);
    }
    let collision = (1..=k_s)
        .map(|t| {
            let n1 = counts[t - 1].first().copied().unwrap_or(0.0);
            (1.0 - n1 / (k_s - t + 1) as f64).clamp(0.0, 1.0)
        })
        .collect();
    Ok(CollisionProfile { counts, collision })
}
