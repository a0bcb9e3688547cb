//! Permutation operators shared by the TSP and bin-packing adapters.
//!
//! Each operator has a deterministic core taking explicit positions and a
//! randomized wrapper drawing them from an RNG.

use rand::seq::SliceRandom;
use rand::Rng;

use super::DynRng;

pub fn random_permutation(n: usize, rng: &mut DynRng) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// Reverses positions `i..=j`.
pub fn reverse_segment(perm: &[usize], i: usize, j: usize) -> Vec<usize> {
    let mut out = perm.to_vec();
    out[i..=j].reverse();
    out
}

/// 2-opt move with endpoints drawn uniformly among pairs `i < j`.
pub fn two_opt(perm: &[usize], rng: &mut DynRng) -> Vec<usize> {
    let n = perm.len();
    if n < 2 {
        return perm.to_vec();
    }
    let a = rng.gen_range(0..n);
    let mut b = rng.gen_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    reverse_segment(perm, a.min(b), a.max(b))
}

/// Child takes the first `k` values of `p2`, then the values missing from
/// that prefix in the order they appear in `p1`.
pub fn single_point_crossover(p1: &[usize], p2: &[usize], k: usize) -> Vec<usize> {
    let n = p1.len();
    let mut used = vec![false; n];
    let mut child = Vec::with_capacity(n);
    for &v in &p2[..k] {
        used[v] = true;
        child.push(v);
    }
    child.extend(p1.iter().copied().filter(|&v| !used[v]));
    child
}

pub fn single_point_crossover_random(p1: &[usize], p2: &[usize], rng: &mut DynRng) -> Vec<usize> {
    let n = p1.len();
    let k = if n < 2 { 0 } else { rng.gen_range(1..n) };
    single_point_crossover(p1, p2, k)
}

/// Computes `p1 - p2 + p3` componentwise and returns the positions ordered by
/// ascending value (stable on ties).
pub fn ternary(p1: &[usize], p2: &[usize], p3: &[usize]) -> Vec<usize> {
    let n = p1.len();
    // values lie in [-(n-1), 2(n-1)], so a counting sort is stable and linear
    let offset = n as i64;
    let mut counts = vec![0usize; 3 * n + 1];
    let keys: Vec<usize> = p1
        .iter()
        .zip(p2)
        .zip(p3)
        .map(|((&a, &b), &c)| (a as i64 - b as i64 + c as i64 + offset).clamp(0, 3 * n as i64) as usize)
        .collect();
    for &k in &keys {
        counts[k] += 1;
    }
    let mut start = 0;
    for c in counts.iter_mut() {
        let here = *c;
        *c = start;
        start += here;
    }
    let mut order = vec![0usize; n];
    for (i, &k) in keys.iter().enumerate() {
        order[counts[k]] = i;
        counts[k] += 1;
    }
    order
}

/// Lexicographic successor in place; false when `perm` is the last one.
pub fn next_lexicographic(perm: &mut [usize]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// Moves the block `start..start + len` to the end of the permutation.
pub fn displace_block(perm: &[usize], start: usize, len: usize) -> Vec<usize> {
    let end = start + len;
    let mut out = Vec::with_capacity(perm.len());
    out.extend_from_slice(&perm[..start]);
    out.extend_from_slice(&perm[end..]);
    out.extend_from_slice(&perm[start..end]);
    out
}

/// Largest displacement block for a permutation of length `n`.
pub fn max_displacement_block(n: usize) -> usize {
    ((0.005 * n as f64).ceil() as usize).max(1)
}

/// Displacement with a block length drawn from `1..=cap`.
pub fn displacement(perm: &[usize], cap: usize, rng: &mut DynRng) -> Vec<usize> {
    let n = perm.len();
    if n < 2 {
        return perm.to_vec();
    }
    let cap = cap.clamp(1, n - 1);
    let len = rng.gen_range(1..=cap);
    let start = rng.gen_range(0..=n - len);
    displace_block(perm, start, len)
}

/// Moves the element at `pos` to the last position.
pub fn shift_to_end(perm: &[usize], pos: usize) -> Vec<usize> {
    displace_block(perm, pos, 1)
}

pub fn shift_mutation(perm: &[usize], rng: &mut DynRng) -> Vec<usize> {
    if perm.is_empty() {
        return Vec::new();
    }
    shift_to_end(perm, rng.gen_range(0..perm.len()))
}

/// Order crossover: positions `a..=b` come from `p1`, the remaining
/// positions are filled left to right with the unused values of `p2` in
/// their `p2` order.
pub fn order_crossover(p1: &[usize], p2: &[usize], a: usize, b: usize) -> Vec<usize> {
    let n = p1.len();
    let mut used = vec![false; n];
    for &v in &p1[a..=b] {
        used[v] = true;
    }
    let mut fill = p2.iter().copied().filter(|&v| !used[v]);
    (0..n).map(|i| if (a..=b).contains(&i) { p1[i] } else { fill.next().expect("fill exhausted") }).collect()
}

pub fn order_crossover_random(p1: &[usize], p2: &[usize], rng: &mut DynRng) -> Vec<usize> {
    let n = p1.len();
    if n == 0 {
        return Vec::new();
    }
    let x = rng.gen_range(0..n);
    let y = rng.gen_range(0..n);
    order_crossover(p1, p2, x.min(y), x.max(y))
}
