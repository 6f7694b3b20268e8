//! Tables that flip every vertex bit and use one port in exactly three of the four inputs.

use serde::Serialize;

use crate::algorithms::EndpointBehavior;
use crate::engine::Stop;
use crate::lowerbound::table::TransitionTable1Bit;
use crate::lowerbound::walk::{engine_run, PathInit};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ThreePortsCheck {
    pub init: PathInit,
    /// `None` if the walk never covers the path (it loops).
    pub cover_time: Option<u64>,
    /// `2 * sum_{i=1}^{n-2} i`.
    pub bound: u64,
    /// For each internal node whose successor is eventually reached, whether
    /// node 0 was visited between the two first visits.
    pub returns: Vec<bool>,
}

impl ThreePortsCheck {
    pub fn holds(&self) -> bool {
        self.returns.iter().all(|&r| r) && self.cover_time.is_none_or(|c| c >= self.bound)
    }
}

/// The lone input `(a, v)` whose port differs from the other three, if the table qualifies.
pub fn odd_input(table: &TransitionTable1Bit) -> Option<(bool, bool)> {
    let inputs = [(false, false), (false, true), (true, false), (true, true)];
    if inputs.iter().any(|&(a, v)| table.vertex(a, v) == v) {
        return None;
    }
    let ones = inputs.iter().filter(|&&(a, v)| table.port(a, v)).count();
    let minority = match ones {
        1 => true,
        3 => false,
        _ => return None,
    };
    inputs.into_iter().find(|&(a, v)| table.port(a, v) == minority)
}

/// Runs the path whose ports all point right with the odd port, every bit set to
/// the complement of the odd input's bit, starting at the left endpoint.
pub fn threeports_check(table: &TransitionTable1Bit, n: usize, state: bool) -> Option<ThreePortsCheck> {
    assert!(n >= 3);
    let (a0, v0) = odd_input(table)?;
    let p = table.port(a0, v0);
    // Right port is p, so port 1 leads left iff p is port 2.
    let init = PathInit {
        bits: vec![!v0; n],
        orientation: vec![p; n - 2],
        start: 0,
        state,
    };
    let budget = 100 * (n * n) as u64;
    let out = engine_run(table, EndpointBehavior::from_table(table), &init, Stop::AllVisited, budget, true);
    let path = init.path().ok()?;
    let mut first = vec![None; n];
    first[0] = Some(0u64);
    let mut visits0 = vec![0u64];
    let mut t = 0;
    for r in out.trace.expect("trace requested") {
        if let Some(port) = r.out_port {
            t += 1;
            let w = path.tree().neighbor(r.position, port)?;
            first[w].get_or_insert(t);
            if w == 0 {
                visits0.push(t);
            }
        }
    }
    let returns = (1..n - 1)
        .map_while(|i| match (first[i], first[i + 1]) {
            (Some(s), Some(e)) => Some(visits0.iter().any(|&x| x > s && x < e)),
            _ => None,
        })
        .collect();
    let m = n as u64 - 2;
    Some(ThreePortsCheck {
        init,
        cover_time: out.cover_time,
        bound: m * (m + 1),
        returns,
    })
}

/// Every qualifying table id.
pub fn qualifying_tables() -> Vec<u16> {
    crate::lowerbound::table::enumerate_tables()
        .filter(|t| odd_input(t).is_some())
        .map(|t| t.id())
        .collect()
}
