//! Path initializations and a packed walker for the 1-bit model.
//!
//! The walker keeps vertex bits in a `u128`, so paths have at most 128 nodes.
//! It agrees step for step with `PathTableModel` under the generic engine.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::algorithms::{Bit, EndpointBehavior, PathTableModel};
use crate::engine::{run, RunOptions, RunOutcome, RunStatus, Stop};
use crate::lowerbound::table::{Symmetry, TransitionTable1Bit};
use crate::topology::{build_path, MemoryInit, PathInstance, TopologyError};

pub const MAX_PATH: usize = 128;

/// Vertex bits, port orientation, start node and start state of a path.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PathInit {
    pub bits: Vec<bool>,
    /// Same convention as `build_path`: entry `i - 1` is true iff port 1 of node `i` leads left.
    pub orientation: Vec<bool>,
    pub start: usize,
    pub state: bool,
}

impl PathInit {
    pub fn n(&self) -> usize {
        self.bits.len()
    }

    pub fn path(&self) -> Result<PathInstance, TopologyError> {
        build_path(self.n(), &self.orientation)
    }

    pub fn memory(&self, path: &PathInstance) -> MemoryInit<Bit> {
        MemoryInit::explicit(path.tree(), self.bits.iter().map(|&b| Bit(b)).collect())
            .expect("bits are admissible everywhere")
    }

    /// The same initialization seen through a relabeling of the table.
    pub fn relabel(&self, g: Symmetry) -> PathInit {
        PathInit {
            bits: self.bits.iter().map(|&b| b ^ g.flip_v).collect(),
            orientation: self.orientation.iter().map(|&o| o ^ g.flip_p).collect(),
            start: self.start,
            state: self.state ^ g.flip_a,
        }
    }

    /// Compact form `orientation|bits|state@start`.
    pub fn witness(&self) -> String {
        self.to_string()
    }

    pub fn parse_witness(text: &str) -> Result<PathInit, String> {
        let (head, start) = text.rsplit_once('@').ok_or("missing '@'")?;
        let mut parts = head.split('|');
        let (o, b, s) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
            (Some(o), Some(b), Some(s), None) => (o, b, s),
            _ => return Err(format!("expected three '|' fields in {text:?}")),
        };
        let bits01 = |field: &str| -> Result<Vec<bool>, String> {
            field
                .chars()
                .map(|c| match c {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    _ => Err(format!("bad bit {c:?}")),
                })
                .collect()
        };
        let bits = bits01(b)?;
        let orientation = bits01(o)?;
        if bits.len() < 2 || orientation.len() + 2 != bits.len() {
            return Err(format!("{} bits but {} orientation entries", bits.len(), orientation.len()));
        }
        let state = match s {
            "0" => false,
            "1" => true,
            _ => return Err(format!("bad state {s:?}")),
        };
        let start: usize = start.parse().map_err(|e| format!("bad start: {e}"))?;
        if start >= bits.len() {
            return Err(format!("start {start} outside path"));
        }
        Ok(PathInit { bits, orientation, start, state })
    }

    pub(crate) fn packed(&self) -> (u128, u128) {
        let mut bits = 0u128;
        for (i, &b) in self.bits.iter().enumerate() {
            bits |= u128::from(b) << i;
        }
        let mut orient = 0u128;
        for (i, &o) in self.orientation.iter().enumerate() {
            orient |= u128::from(o) << (i + 1);
        }
        (bits, orient)
    }

    pub(crate) fn from_packed(n: usize, bits: u128, orient: u128, start: usize, state: bool) -> PathInit {
        PathInit {
            bits: (0..n).map(|i| bits >> i & 1 == 1).collect(),
            orientation: (1..n - 1).map(|i| orient >> i & 1 == 1).collect(),
            start,
            state,
        }
    }
}

impl fmt::Display for PathInit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = |v: &[bool]| v.iter().map(|&b| if b { '1' } else { '0' }).collect::<String>();
        write!(f, "{}|{}|{}@{}", s(&self.orientation), s(&self.bits), u8::from(self.state), self.start)
    }
}

/// How a walk ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Walk {
    /// The target event happened after `steps` moves.
    Reached { steps: u64 },
    /// A configuration repeated before the target event.
    Loop { steps: u64, period: u64 },
    /// Neither happened within the budget.
    Censored { steps: u64 },
}

impl Walk {
    pub fn steps(&self) -> u64 {
        match *self {
            Walk::Reached { steps } | Walk::Loop { steps, .. } | Walk::Censored { steps } => steps,
        }
    }

    pub fn is_loop(&self) -> bool {
        matches!(self, Walk::Loop { .. })
    }
}

/// Table rows as entry codes `P + 2V + 4A`, indexed by `2a + v`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Rules([u8; 4]);

impl Rules {
    pub(crate) fn new(table: &TransitionTable1Bit) -> Self {
        let mut r = [0u8; 4];
        for (k, e) in table.rows().iter().enumerate() {
            r[k] = e.code() as u8;
        }
        Rules(r)
    }

    #[inline]
    fn apply(&self, a: bool, v: bool) -> (bool, bool, bool) {
        let c = self.0[2 * usize::from(a) + usize::from(v)];
        (c & 4 != 0, c & 2 != 0, c & 1 != 0)
    }
}

/// Moves from an internal start until an endpoint is visited.
///
/// Cycles are found with Brent's method on `(position, agent, bits)`.
pub(crate) fn walk_to_endpoint(
    rules: Rules,
    n: usize,
    mut bits: u128,
    orient: u128,
    mut pos: usize,
    mut a: bool,
    budget: u64,
) -> Walk {
    if pos == 0 || pos == n - 1 {
        return Walk::Reached { steps: 0 };
    }
    let mut saved = (pos, a, bits);
    let mut power = 1u64;
    let mut lam = 0u64;
    let mut steps = 0u64;
    loop {
        if steps >= budget {
            return Walk::Censored { steps };
        }
        let (na, nv, p) = rules.apply(a, bits >> pos & 1 == 1);
        bits = (bits & !(1u128 << pos)) | (u128::from(nv) << pos);
        a = na;
        let left = p ^ (orient >> pos & 1 == 1);
        pos = if left { pos - 1 } else { pos + 1 };
        steps += 1;
        if pos == 0 || pos == n - 1 {
            return Walk::Reached { steps };
        }
        lam += 1;
        if (pos, a, bits) == saved {
            return Walk::Loop { steps, period: lam };
        }
        if lam == power {
            saved = (pos, a, bits);
            power *= 2;
            lam = 0;
        }
    }
}

/// Moves until every node has been visited, endpoints included.
pub(crate) fn walk_to_cover(
    rules: Rules,
    endpoint: EndpointBehavior,
    n: usize,
    mut bits: u128,
    orient: u128,
    mut pos: usize,
    mut a: bool,
    budget: u64,
) -> Walk {
    let full = if n == MAX_PATH { u128::MAX } else { (1u128 << n) - 1 };
    let mut visited = 1u128 << pos;
    if visited == full {
        return Walk::Reached { steps: 0 };
    }
    let mut saved = (pos, a, bits);
    let mut power = 1u64;
    let mut lam = 0u64;
    let mut steps = 0u64;
    loop {
        if steps >= budget {
            return Walk::Censored { steps };
        }
        let v = bits >> pos & 1 == 1;
        let next;
        if pos == 0 || pos == n - 1 {
            let (na, nv) = endpoint.get(a, v);
            a = na;
            bits = (bits & !(1u128 << pos)) | (u128::from(nv) << pos);
            next = if pos == 0 { 1 } else { n - 2 };
        } else {
            let (na, nv, p) = rules.apply(a, v);
            a = na;
            bits = (bits & !(1u128 << pos)) | (u128::from(nv) << pos);
            next = if p ^ (orient >> pos & 1 == 1) { pos - 1 } else { pos + 1 };
        }
        pos = next;
        steps += 1;
        visited |= 1u128 << pos;
        if visited == full {
            return Walk::Reached { steps };
        }
        lam += 1;
        if (pos, a, bits) == saved {
            return Walk::Loop { steps, period: lam };
        }
        if lam == power {
            saved = (pos, a, bits);
            power *= 2;
            lam = 0;
        }
    }
}

/// Time to the first endpoint visit under `table`.
pub fn time_to_endpoint(table: &TransitionTable1Bit, init: &PathInit, budget: u64) -> Walk {
    assert!(init.n() >= 2 && init.n() <= MAX_PATH, "path length out of range");
    let (bits, orient) = init.packed();
    walk_to_endpoint(Rules::new(table), init.n(), bits, orient, init.start, init.state, budget)
}

/// Cover time under `table` with the given degree-1 behavior.
pub fn time_to_cover(table: &TransitionTable1Bit, endpoint: EndpointBehavior, init: &PathInit, budget: u64) -> Walk {
    assert!(init.n() >= 2 && init.n() <= MAX_PATH, "path length out of range");
    let (bits, orient) = init.packed();
    walk_to_cover(Rules::new(table), endpoint, init.n(), bits, orient, init.start, init.state, budget)
}

/// Runs the generic engine on `init` with the given stop condition and loop detection.
pub fn engine_run(
    table: &TransitionTable1Bit,
    endpoint: EndpointBehavior,
    init: &PathInit,
    stop: Stop,
    budget: u64,
    trace: bool,
) -> RunOutcome<bool, Bit> {
    let path = init.path().expect("valid path init");
    let model = PathTableModel::new(*table, init.state).with_endpoint(endpoint);
    let mut options = RunOptions::new(budget, stop).with_loops();
    options.record_trace = trace;
    run(&model, path.tree(), &init.memory(&path), init.start, options, &mut [])
}

/// Confirms under the generic engine that `init` loops without ever touching an endpoint.
///
/// Returns the period on success.
pub fn verify_loop(table: &TransitionTable1Bit, init: &PathInit) -> Result<u64, String> {
    let n = init.n() as u64;
    // The configuration space bounds the time until a repeat.
    let budget = n.saturating_mul(2).saturating_mul(1u64 << init.n().min(40)).min(1 << 24);
    let out = engine_run(table, EndpointBehavior::from_table(table), init, Stop::FirstEndpointVisited, budget, false);
    let period = match out.status {
        RunStatus::LoopDetected { period } => period,
        other => return Err(format!("expected a loop, got {}", other.label())),
    };
    let witness = out.loop_witness.expect("loop carries a witness");
    let path = init.path().expect("valid path init");
    let model = PathTableModel::new(*table, init.state);
    if !crate::engine::replay_loop(&model, path.tree(), &witness, period) {
        return Err("repeated configuration does not replay".into());
    }
    Ok(period)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lowerbound::table::named_table;
    use rand::Rng;

    #[test]
    fn witness_round_trip() {
        let init = PathInit {
            bits: vec![true, false, true, true],
            orientation: vec![false, true],
            start: 2,
            state: true,
        };
        assert_eq!(init.witness(), "01|1011|1@2");
        assert_eq!(PathInit::parse_witness(&init.witness()).unwrap(), init);
        assert!(PathInit::parse_witness("0|1011|1@2").is_err());
    }

    #[test]
    fn packed_walker_matches_engine() {
        let mut rng = crate::topology::rng_from_seed(11);
        for _ in 0..300 {
            let table = TransitionTable1Bit::from_id(rng.gen_range(0..4096)).unwrap();
            let n = rng.gen_range(3..12);
            let init = PathInit {
                bits: (0..n).map(|_| rng.gen()).collect(),
                orientation: (0..n - 2).map(|_| rng.gen()).collect(),
                start: rng.gen_range(1..n - 1),
                state: rng.gen(),
            };
            let fast = time_to_endpoint(&table, &init, 500);
            let slow = engine_run(&table, EndpointBehavior::from_table(&table), &init, Stop::FirstEndpointVisited, 500, false);
            match (fast, &slow.status) {
                (Walk::Reached { steps }, RunStatus::EndpointReached) => assert_eq!(steps, slow.steps),
                (Walk::Loop { period, .. }, RunStatus::LoopDetected { period: p }) => assert_eq!(period, *p),
                (Walk::Censored { .. }, RunStatus::BudgetExhausted) => {}
                other => panic!("walkers disagree on {} {}: {other:?}", table.id(), init),
            }
            let endpoint = EndpointBehavior(rng.gen());
            let fast = time_to_cover(&table, endpoint, &init, 500);
            let slow = engine_run(&table, endpoint, &init, Stop::AllVisited, 500, false);
            match (fast, &slow.status) {
                (Walk::Reached { steps }, RunStatus::CoverReached) => assert_eq!(steps, slow.steps),
                (Walk::Loop { period, .. }, RunStatus::LoopDetected { period: p }) => assert_eq!(period, *p),
                (Walk::Censored { .. }, RunStatus::BudgetExhausted) => {}
                other => panic!("cover walkers disagree on {} {}: {other:?}", table.id(), init),
            }
        }
    }

    #[test]
    fn relabeled_init_walks_the_same() {
        let x = named_table("x").unwrap();
        let init = PathInit::parse_witness("0110|101100|0@3").unwrap();
        let base = time_to_endpoint(&x, &init, 1000);
        for g in Symmetry::all() {
            assert_eq!(time_to_endpoint(&x.relabel(g), &init.relabel(g), 1000), base);
        }
    }
}
