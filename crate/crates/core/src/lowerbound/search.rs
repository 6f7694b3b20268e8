//! Adversarial search for slow middle starts.

use serde::{Deserialize, Serialize};

use crate::lowerbound::table::TransitionTable1Bit;
use crate::lowerbound::walk::{walk_to_endpoint, PathInit, Rules, Walk, MAX_PATH};

pub const BEAM_WIDTH: usize = 32;
pub const EXHAUSTIVE_MAX: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Exhaustive,
    Guided,
}

pub fn budget_for(n: usize) -> u64 {
    10 * (n as u64) * (n as u64)
}

pub fn middle(n: usize) -> usize {
    n / 2
}

/// Worst (or looping) initialization found at one size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResult {
    pub n: usize,
    pub walk: Walk,
    pub witness: PathInit,
}

impl SearchResult {
    pub fn steps(&self) -> u64 {
        self.walk.steps()
    }

    pub fn censored(&self) -> bool {
        matches!(self.walk, Walk::Censored { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Candidate {
    steps: u64,
    bits: u128,
    orient: u128,
}

/// Ranked candidates at one size, or the first loop found.
enum Level {
    Loop(SearchResult),
    Ranked(Vec<Candidate>),
}

fn evaluate(rules: Rules, n: usize, state: bool, bits: u128, orient: u128) -> Walk {
    walk_to_endpoint(rules, n, bits, orient, middle(n), state, budget_for(n))
}

fn rank(mut all: Vec<Candidate>, keep: usize) -> Vec<Candidate> {
    all.sort_by(|x, y| y.steps.cmp(&x.steps).then(x.bits.cmp(&y.bits)).then(x.orient.cmp(&y.orient)));
    all.dedup_by(|x, y| x.bits == y.bits && x.orient == y.orient);
    all.truncate(keep);
    all
}

fn result(n: usize, state: bool, walk: Walk, c: &Candidate) -> SearchResult {
    SearchResult {
        n,
        walk,
        witness: PathInit::from_packed(n, c.bits, c.orient, middle(n), state),
    }
}

/// All internal bits and orientations; endpoint bits are irrelevant and kept at 0.
fn exhaustive_level(rules: Rules, n: usize, state: bool, keep: usize) -> Level {
    let k = n.saturating_sub(2);
    let mut all = Vec::with_capacity(1 << (2 * k));
    for b in 0u128..(1 << k) {
        let bits = b << 1;
        for o in 0u128..(1 << k) {
            let orient = o << 1;
            let walk = evaluate(rules, n, state, bits, orient);
            let c = Candidate { steps: walk.steps(), bits, orient };
            if walk.is_loop() {
                return Level::Loop(result(n, state, walk, &c));
            }
            all.push(c);
        }
    }
    Level::Ranked(rank(all, keep))
}

/// Uniform and alternating bits crossed with simple orientation patterns.
fn structured(n: usize) -> Vec<(u128, u128)> {
    let mid = middle(n);
    let bit_patterns: [fn(usize) -> bool; 4] = [|_| false, |_| true, |i| i % 2 == 0, |i| i % 2 == 1];
    let orient_patterns: Vec<Box<dyn Fn(usize) -> bool>> = vec![
        Box::new(|_| true),
        Box::new(|_| false),
        // port 1 towards the middle, and away from it
        Box::new(move |i| i >= mid),
        Box::new(move |i| i < mid),
        Box::new(|i| i % 2 == 0),
        Box::new(|i| i % 2 == 1),
    ];
    let mut out = Vec::new();
    for bp in bit_patterns {
        for op in &orient_patterns {
            let mut bits = 0u128;
            let mut orient = 0u128;
            for i in 1..n - 1 {
                bits |= u128::from(bp(i)) << i;
                orient |= u128::from(op(i)) << i;
            }
            out.push((bits, orient));
        }
    }
    out
}

/// Grows every ranked candidate by one node per side (the old endpoints
/// become internal with every bit and orientation) and adds the structured families.
fn guided_level(rules: Rules, n: usize, state: bool, prev: &[Candidate]) -> Level {
    let mut pool: Vec<(u128, u128)> = Vec::with_capacity(prev.len() * 16 + 24);
    for c in prev {
        let bits = c.bits << 1;
        let orient = c.orient << 1;
        let clear = !((1u128 << 1) | (1u128 << (n - 2)));
        for ext in 0u8..16 {
            let b = (bits & clear) | (u128::from(ext & 1) << 1) | (u128::from(ext >> 1 & 1) << (n - 2));
            let o = (orient & clear) | (u128::from(ext >> 2 & 1) << 1) | (u128::from(ext >> 3 & 1) << (n - 2));
            pool.push((b, o));
        }
    }
    pool.extend(structured(n));
    let mut all = Vec::with_capacity(pool.len());
    for (bits, orient) in pool {
        let walk = evaluate(rules, n, state, bits, orient);
        let c = Candidate { steps: walk.steps(), bits, orient };
        if walk.is_loop() {
            return Level::Loop(result(n, state, walk, &c));
        }
        all.push(c);
    }
    Level::Ranked(rank(all, BEAM_WIDTH))
}

/// Worst time to the first endpoint from the middle for one start state.
pub fn worst_for_state(table: &TransitionTable1Bit, n: usize, strategy: Strategy, state: bool) -> SearchResult {
    assert!((2..=MAX_PATH).contains(&n), "path length out of range");
    let rules = Rules::new(table);
    match strategy {
        Strategy::Exhaustive => {
            assert!(n <= EXHAUSTIVE_MAX, "exhaustive search is limited to n <= {EXHAUSTIVE_MAX}");
            match exhaustive_level(rules, n, state, 1) {
                Level::Loop(r) => r,
                Level::Ranked(top) => {
                    let walk = evaluate(rules, n, state, top[0].bits, top[0].orient);
                    result(n, state, walk, &top[0])
                }
            }
        }
        Strategy::Guided => guided_growth(table, state, n).pop().expect("at least one level"),
    }
}

/// Worst over both start states; ties prefer state 0.
pub fn worst_time_to_endpoint(table: &TransitionTable1Bit, n: usize, strategy: Strategy) -> SearchResult {
    let r0 = worst_for_state(table, n, strategy, false);
    if r0.walk.is_loop() {
        return r0;
    }
    let r1 = worst_for_state(table, n, strategy, true);
    if r1.walk.is_loop() || r1.steps() > r0.steps() {
        r1
    } else {
        r0
    }
}

/// Beam search from the exhaustive seed up to `max_n`, in steps of two nodes.
///
/// Returns one result per size (seed included); stops early at the first loop,
/// which is then the last entry.
pub fn guided_growth(table: &TransitionTable1Bit, state: bool, max_n: usize) -> Vec<SearchResult> {
    let rules = Rules::new(table);
    let seed = if max_n % 2 == 1 { EXHAUSTIVE_MAX } else { EXHAUSTIVE_MAX - 1 };
    let seed = seed.min(max_n);
    let mut out = Vec::new();
    let mut level = exhaustive_level(rules, seed, state, BEAM_WIDTH);
    let mut n = seed;
    loop {
        let top = match level {
            Level::Loop(r) => {
                out.push(r);
                return out;
            }
            Level::Ranked(top) => top,
        };
        let walk = evaluate(rules, n, state, top[0].bits, top[0].orient);
        out.push(result(n, state, walk, &top[0]));
        if n + 2 > max_n {
            return out;
        }
        n += 2;
        level = guided_level(rules, n, state, &top);
    }
}

/// Least-squares slope of `ln steps` against `ln n`.
pub fn fit_exponent(samples: &[(usize, u64)]) -> Option<f64> {
    if samples.len() < 2 || samples.iter().any(|&(_, s)| s == 0) {
        return None;
    }
    let pts: Vec<(f64, f64)> = samples.iter().map(|&(n, s)| ((n as f64).ln(), (s as f64).ln())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lowerbound::table::named_table;

    #[test]
    fn two_nodes_take_zero_steps() {
        let t = TransitionTable1Bit::from_id(1234).unwrap();
        assert_eq!(worst_time_to_endpoint(&t, 2, Strategy::Exhaustive).steps(), 0);
    }

    #[test]
    fn exponent_of_a_square() {
        let e = fit_exponent(&[(17, 289), (33, 1089), (65, 4225)]).unwrap();
        assert!((e - 2.0).abs() < 1e-9);
    }

    #[test]
    fn guided_seed_matches_exhaustive() {
        let x = named_table("x").unwrap();
        let g = guided_growth(&x, false, 11);
        assert_eq!(g[0].steps(), worst_for_state(&x, 9, Strategy::Exhaustive, false).steps());
        assert_eq!(g.len(), 2);
    }
}
