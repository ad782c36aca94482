//! Frozen-set construction from shipped reliability tables.
//!
//! Each table lists the synthetic-channel indices of a length-`N` code from
//! most to least reliable, one index per line. The tables were produced by
//! [`gaussian_approximation_means`] at [`DESIGN_ES_N0_DB`] and are
//! regenerated by `cargo run --example gen_reliability`.

use crate::error::{param, Result};

/// Design Es/N0 (dB, per coded BPSK symbol) of the shipped tables.
pub const DESIGN_ES_N0_DB: f64 = 2.0;

/// Format version written in every table header.
pub const TABLE_VERSION: u32 = 1;

pub const MIN_LOG2_LEN: u32 = 1;
pub const MAX_LOG2_LEN: u32 = 12;

const TABLES: [&str; 12] = [
    include_str!("../../data/reliability/n2.txt"),
    include_str!("../../data/reliability/n4.txt"),
    include_str!("../../data/reliability/n8.txt"),
    include_str!("../../data/reliability/n16.txt"),
    include_str!("../../data/reliability/n32.txt"),
    include_str!("../../data/reliability/n64.txt"),
    include_str!("../../data/reliability/n128.txt"),
    include_str!("../../data/reliability/n256.txt"),
    include_str!("../../data/reliability/n512.txt"),
    include_str!("../../data/reliability/n1024.txt"),
    include_str!("../../data/reliability/n2048.txt"),
    include_str!("../../data/reliability/n4096.txt"),
];

/// Reliability order (most reliable first) for a supported block length.
pub fn reliability_order(block_length: usize) -> Result<Vec<usize>> {
    if !block_length.is_power_of_two() {
        return param(format!("block length {block_length} is not a power of two"));
    }
    let m = block_length.trailing_zeros();
    if !(MIN_LOG2_LEN..=MAX_LOG2_LEN).contains(&m) {
        return param(format!("no reliability table for block length {block_length}"));
    }
    Ok(parse_table(TABLES[(m - 1) as usize]))
}

fn parse_table(text: &str) -> Vec<usize> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.parse().expect("malformed reliability table"))
        .collect()
}

/// Sorted frozen indices: all but the `info_length` most reliable positions.
pub fn build_frozen_set(block_length: usize, info_length: usize) -> Result<Vec<usize>> {
    if info_length > block_length {
        return param(format!("info length {info_length} exceeds block length {block_length}"));
    }
    let order = reliability_order(block_length)?;
    let mut frozen = order[info_length..].to_vec();
    frozen.sort_unstable();
    Ok(frozen)
}

/// Mean LLR of every synthetic channel under the Gaussian approximation of
/// density evolution, natural (non bit-reversed) index order.
pub fn gaussian_approximation_means(block_length: usize, design_es_n0_db: f64) -> Vec<f64> {
    assert!(block_length.is_power_of_two());
    let es_n0 = 10f64.powf(design_es_n0_db / 10.0);
    let mut means = vec![4.0 * es_n0];
    while means.len() < block_length {
        // The most significant index bit selects the transform applied
        // next to the physical channel, so each step splits every
        // existing channel into an adjacent (check, variable) pair.
        means = means.iter().flat_map(|&z| [check_node_mean(z), 2.0 * z]).collect();
    }
    means
}

/// Reliability order implied by [`gaussian_approximation_means`], ties
/// broken by lower index first.
pub fn gaussian_approximation_order(block_length: usize, design_es_n0_db: f64) -> Vec<usize> {
    let means = gaussian_approximation_means(block_length, design_es_n0_db);
    let mut idx: Vec<usize> = (0..block_length).collect();
    idx.sort_by(|&a, &b| means[b].total_cmp(&means[a]).then(a.cmp(&b)));
    idx
}

/// Natural log of Chung's phi function.
fn ln_phi(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x < 10.0 {
        -0.4527 * x.powf(0.86) + 0.0218
    } else {
        0.5 * (std::f64::consts::PI / x).ln() - x / 4.0 + (1.0 - 10.0 / (7.0 * x)).ln()
    }
}

/// Inverts `ln_phi` by bisection; it is strictly decreasing on (0, inf).
fn inv_ln_phi(target: f64) -> f64 {
    if target >= 0.0 {
        return 0.0;
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while ln_phi(hi) > target {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ln_phi(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// `phi^-1(1 - (1 - phi(z))^2)` evaluated in the log domain.
fn check_node_mean(z: f64) -> f64 {
    let lp = ln_phi(z);
    let p = lp.exp();
    inv_ln_phi(lp + (2.0 - p).ln())
}

/// Renders a table in the shipped text format.
pub fn render_table(block_length: usize) -> String {
    let mut s = format!(
        "# polar reliability order, most reliable first\n# version {TABLE_VERSION}; N = {block_length}; GA design Es/N0 = {DESIGN_ES_N0_DB} dB\n"
    );
    for i in gaussian_approximation_order(block_length, DESIGN_ES_N0_DB) {
        s.push_str(&format!("{i}\n"));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_tables_match_generator() {
        for m in MIN_LOG2_LEN..=MAX_LOG2_LEN {
            let n = 1usize << m;
            assert_eq!(
                reliability_order(n).unwrap(),
                gaussian_approximation_order(n, DESIGN_ES_N0_DB),
                "table for N = {n} is stale"
            );
        }
    }

    #[test]
    fn tables_are_permutations() {
        for m in MIN_LOG2_LEN..=MAX_LOG2_LEN {
            let n = 1usize << m;
            let mut t = reliability_order(n).unwrap();
            t.sort_unstable();
            assert_eq!(t, (0..n).collect::<Vec<_>>());
        }
    }

    #[test]
    fn extreme_info_lengths() {
        assert!(build_frozen_set(256, 256).unwrap().is_empty());
        assert_eq!(build_frozen_set(256, 0).unwrap(), (0..256).collect::<Vec<_>>());
        assert!(build_frozen_set(256, 257).is_err());
        assert!(build_frozen_set(96, 10).is_err());
    }

    #[test]
    fn extreme_channels_are_ordered() {
        let order = reliability_order(256).unwrap();
        assert_eq!(order[0], 255);
        assert_eq!(*order.last().unwrap(), 0);
    }

    /// Erasure probabilities of `x = u F^(x)m` over a BEC(`e`), computed by
    /// peeling the transform one stage at a time on explicit codewords.
    fn bec_erasure_by_enumeration(n: usize, e: f64) -> Vec<f64> {
        // u_i is recoverable from (y, u_0..u_{i-1}) iff no codeword of the
        // coset generated by u_i = 1 and u_{>i} free agrees with zero on all
        // unerased positions. Exhaustive over erasure patterns for small n.
        let rows: Vec<Vec<u8>> = (0..n)
            .map(|i| {
                let mut u = vec![0u8; n];
                u[i] = 1;
                crate::polar::polar_transform(&mut u);
                u
            })
            .collect();
        let mut out = vec![0.0; n];
        for pattern in 0..(1u32 << n) {
            let erased: Vec<bool> = (0..n).map(|k| pattern >> k & 1 == 1).collect();
            let p: f64 = erased.iter().map(|&x| if x { e } else { 1.0 - e }).product();
            for i in 0..n {
                let free = (i + 1)..n;
                let combos = 1u32 << free.len();
                let ambiguous = (0..combos).any(|c| {
                    let mut x = rows[i].clone();
                    for (b, r) in free.clone().enumerate() {
                        if c >> b & 1 == 1 {
                            for (xk, rk) in x.iter_mut().zip(&rows[r]) {
                                *xk ^= rk;
                            }
                        }
                    }
                    x.iter().zip(&erased).all(|(&xk, &er)| xk == 0 || er)
                });
                if ambiguous {
                    out[i] += p;
                }
            }
        }
        out
    }

    #[test]
    fn ordering_follows_the_transform() {
        let z = bec_erasure_by_enumeration(8, 0.4);
        let mut bec: Vec<usize> = (0..8).collect();
        bec.sort_by(|&a, &b| z[a].total_cmp(&z[b]));
        assert_eq!(gaussian_approximation_order(8, 0.0)[..4], bec[..4]);
        assert_eq!(gaussian_approximation_order(4, 0.0), vec![3, 2, 1, 0]);
    }

    #[test]
    fn check_node_degrades_and_variable_node_improves() {
        for z in [0.1, 1.0, 5.0, 30.0, 500.0] {
            let c = check_node_mean(z);
            assert!(c > 0.0 && c < z);
        }
    }
}
