//! Successive-cancellation list decoder.
//!
//! Depth-first traversal of the decoding tree. Each path keeps one LLR
//! buffer and one left-child partial-sum buffer per tree depth; buffers are
//! reference counted so forking a path is O(depth) and a buffer is only
//! copied when a shared one is about to be overwritten.
//!
//! Node updates use the min-sum check-node rule and the path metric
//! `PM += |llr|` on a decision against the LLR sign, so the ranking of
//! paths is invariant to a positive scaling of the channel LLRs.

use std::rc::Rc;

use super::{CrcSpec, PolarCodeSpec};

/// Outcome of a list decode.
#[derive(Debug, Clone, PartialEq)]
pub struct ListDecoding {
    /// Decoded bits at the information positions.
    pub info: Vec<u8>,
    /// Whether `info` passes the CRC check.
    pub crc_pass: bool,
    /// Path metric of the returned candidate (lower is more likely).
    pub metric: f64,
}

#[derive(Clone)]
struct Path {
    alpha: Vec<Rc<Vec<f64>>>,
    beta_left: Vec<Rc<Vec<u8>>>,
    info: Vec<u8>,
    metric: f64,
}

#[inline]
fn check_node(a: f64, b: f64) -> f64 {
    let m = a.abs().min(b.abs());
    if (a < 0.0) ^ (b < 0.0) {
        -m
    } else {
        m
    }
}

fn writable(buf: &mut Rc<Vec<f64>>, len: usize) -> &mut Vec<f64> {
    if Rc::get_mut(buf).is_none() {
        *buf = Rc::new(vec![0.0; len]);
    }
    Rc::get_mut(buf).expect("unique after replacement")
}

impl Path {
    fn new(llr: &Rc<Vec<f64>>, depth: usize, info_len: usize) -> Self {
        let n = llr.len();
        let mut alpha = Vec::with_capacity(depth + 1);
        alpha.push(Rc::clone(llr));
        let mut beta_left = Vec::with_capacity(depth + 1);
        beta_left.push(Rc::new(Vec::new()));
        for d in 1..=depth {
            alpha.push(Rc::new(vec![0.0; n >> d]));
            beta_left.push(Rc::new(Vec::new()));
        }
        Self { alpha, beta_left, info: Vec::with_capacity(info_len), metric: 0.0 }
    }

    /// Fills the LLR buffers down to the leaf `phi` and returns the leaf LLR.
    fn descend(&mut self, phi: usize, depth: usize, n: usize) -> f64 {
        let first = if phi == 0 {
            0
        } else {
            // Deepest common ancestor of leaves phi - 1 and phi.
            let ancestor = depth - phi.trailing_zeros() as usize - 1;
            let half = n >> (ancestor + 1);
            let (upper, lower) = self.alpha.split_at_mut(ancestor + 1);
            let parent = &upper[ancestor];
            let left_bits = &self.beta_left[ancestor + 1];
            let child = writable(&mut lower[0], half);
            for i in 0..half {
                let sign = if left_bits[i] == 0 { 1.0 } else { -1.0 };
                child[i] = parent[i + half] + sign * parent[i];
            }
            ancestor + 1
        };
        for d in first..depth {
            let half = n >> (d + 1);
            let (upper, lower) = self.alpha.split_at_mut(d + 1);
            let parent = &upper[d];
            let child = writable(&mut lower[0], half);
            for i in 0..half {
                child[i] = check_node(parent[i], parent[i + half]);
            }
        }
        self.alpha[depth][0]
    }

    /// Records the decision for leaf `phi` and propagates partial sums.
    fn commit(&mut self, phi: usize, bit: u8, depth: usize) {
        let mut val = vec![bit];
        let mut d = depth;
        let mut idx = phi;
        while d > 0 && idx & 1 == 1 {
            let left = &self.beta_left[d];
            let mut merged = Vec::with_capacity(2 * val.len());
            merged.extend(left.iter().zip(&val).map(|(a, b)| a ^ b));
            merged.extend_from_slice(&val);
            val = merged;
            d -= 1;
            idx >>= 1;
        }
        if d > 0 {
            self.beta_left[d] = Rc::new(val);
        }
    }
}

pub(super) fn decode(code: &PolarCodeSpec, llr: &[f64], crc: &CrcSpec) -> ListDecoding {
    let n = code.block_length();
    let depth = n.trailing_zeros() as usize;
    let list_size = code.list_size();
    let channel = Rc::new(llr.to_vec());

    let mut paths = vec![Path::new(&channel, depth, code.info_length())];
    let mut leaf = Vec::with_capacity(2 * list_size);
    let mut candidates: Vec<(f64, usize, u8)> = Vec::with_capacity(2 * list_size);

    for phi in 0..n {
        leaf.clear();
        for p in paths.iter_mut() {
            leaf.push(p.descend(phi, depth, n));
        }
        if code.is_frozen(phi) {
            for (p, &l) in paths.iter_mut().zip(&leaf) {
                if l < 0.0 {
                    p.metric += -l;
                }
                p.commit(phi, 0, depth);
            }
            continue;
        }

        candidates.clear();
        for (k, (p, &l)) in paths.iter().zip(&leaf).enumerate() {
            let (zero_cost, one_cost) = if l >= 0.0 { (0.0, l) } else { (-l, 0.0) };
            candidates.push((p.metric + zero_cost, k, 0));
            candidates.push((p.metric + one_cost, k, 1));
        }
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        candidates.truncate(list_size);

        let mut survivors = vec![0u8; paths.len()];
        for c in &candidates {
            survivors[c.1] += 1;
        }
        let mut old: Vec<Option<Path>> = paths.into_iter().map(Some).collect();
        let mut next = Vec::with_capacity(candidates.len());
        for &(metric, k, bit) in &candidates {
            // The last surviving child takes the parent by value.
            survivors[k] -= 1;
            let mut p = if survivors[k] == 0 {
                old[k].take().expect("parent moved once")
            } else {
                old[k].as_ref().expect("parent still present").clone()
            };
            p.metric = metric;
            p.info.push(bit);
            p.commit(phi, bit, depth);
            next.push(p);
        }
        paths = next;
    }

    paths.sort_by(|a, b| a.metric.total_cmp(&b.metric));
    let best = paths
        .iter()
        .find(|p| crc.check(&p.info))
        .map(|p| (p, true))
        .unwrap_or((&paths[0], false));
    ListDecoding { info: best.0.info.clone(), crc_pass: best.1, metric: best.0.metric }
}
