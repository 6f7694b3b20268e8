//! Verdicts for every 1-bit table.

use rayon::prelude::*;
use serde::Serialize;

use crate::algorithms::EndpointBehavior;
use crate::lowerbound::gadgets::{first_loop_gadget, gadget_suite, GadgetTemplate};
use crate::lowerbound::search::{fit_exponent, guided_growth, worst_for_state, Strategy};
use crate::lowerbound::table::{Symmetry, TransitionTable1Bit, TABLE_COUNT};
use crate::lowerbound::walk::{walk_to_cover, PathInit, Rules, Walk};

pub const EXHAUSTIVE_SIZES: [usize; 3] = [5, 7, 9];
pub const GROWTH_SIZES: [usize; 3] = [17, 33, 65];
pub const EXPONENT_THRESHOLD: f64 = 1.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Loop,
    Superlinear,
    Unclassified,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::Loop => "loop",
            Verdict::Superlinear => "superlinear",
            Verdict::Unclassified => "unclassified",
        }
    }
}

/// Verdict for one start state of the agent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StartVerdict {
    pub state: bool,
    pub verdict: Verdict,
    /// Which stage decided: `gadget:<name>`, `exhaustive:<n>`, `guided:<n>`, `growth`, `fallback`.
    pub provenance: String,
    pub witness: Option<PathInit>,
    pub period: Option<u64>,
    /// `(n, worst steps)` from the growth stage.
    pub samples: Vec<(usize, u64)>,
    pub exponent: Option<f64>,
    pub censored: bool,
}

impl StartVerdict {
    fn relabel(&self, g: Symmetry) -> StartVerdict {
        StartVerdict {
            state: self.state ^ g.flip_a,
            witness: self.witness.as_ref().map(|w| w.relabel(g)),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub id: u16,
    pub canonical_id: u16,
    pub verdict: Verdict,
    /// Indexed by start state.
    pub starts: [StartVerdict; 2],
}

impl Classification {
    pub fn detail(&self) -> String {
        self.starts
            .iter()
            .map(|s| {
                let mut d = format!("s{}:{}:{}", u8::from(s.state), s.verdict.label(), s.provenance);
                if let Some(p) = s.period {
                    d.push_str(&format!(":period={p}"));
                }
                if let Some(e) = s.exponent {
                    d.push_str(&format!(":exponent={e:.3}"));
                }
                if s.censored {
                    d.push_str(":censored");
                }
                d
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn witness(&self) -> String {
        self.starts
            .iter()
            .map(|s| s.witness.as_ref().map(|w| w.witness()).unwrap_or_default())
            .collect::<Vec<_>>()
            .join(";")
    }

    pub fn max_exponent(&self) -> Option<f64> {
        self.starts.iter().filter_map(|s| s.exponent).reduce(f64::max)
    }
}

fn loop_verdict(state: bool, provenance: String, witness: PathInit, period: u64) -> StartVerdict {
    StartVerdict {
        state,
        verdict: Verdict::Loop,
        provenance,
        witness: Some(witness),
        period: Some(period),
        samples: Vec::new(),
        exponent: None,
        censored: false,
    }
}

/// Pipeline for one start state: gadgets, exhaustive search, guided growth, fallback.
pub fn classify_start(table: &TransitionTable1Bit, state: bool, suite: &[GadgetTemplate]) -> StartVerdict {
    if let Some((name, init, period)) = first_loop_gadget(suite, table, state) {
        return loop_verdict(state, format!("gadget:{name}"), init, period);
    }
    for n in EXHAUSTIVE_SIZES {
        let r = worst_for_state(table, n, Strategy::Exhaustive, state);
        if let Walk::Loop { period, .. } = r.walk {
            return loop_verdict(state, format!("exhaustive:{n}"), r.witness, period);
        }
    }
    let max_n = *GROWTH_SIZES.last().unwrap();
    let levels = guided_growth(table, state, max_n);
    let last = levels.last().expect("growth yields a level");
    if let Walk::Loop { period, .. } = last.walk {
        return loop_verdict(state, format!("guided:{}", last.n), last.witness.clone(), period);
    }
    let samples: Vec<(usize, u64)> = levels
        .iter()
        .filter(|r| GROWTH_SIZES.contains(&r.n))
        .map(|r| (r.n, r.steps()))
        .collect();
    let censored = levels.iter().any(|r| GROWTH_SIZES.contains(&r.n) && r.censored());
    let exponent = fit_exponent(&samples);
    if exponent.is_some_and(|e| e >= EXPONENT_THRESHOLD) {
        return StartVerdict {
            state,
            verdict: Verdict::Superlinear,
            provenance: "growth".into(),
            witness: Some(last.witness.clone()),
            period: None,
            samples,
            exponent,
            censored,
        };
    }
    if let Some((init, period)) = fallback_loop(table, state) {
        return loop_verdict(state, "fallback".into(), init, period);
    }
    StartVerdict {
        state,
        verdict: Verdict::Unclassified,
        provenance: "growth".into(),
        witness: Some(last.witness.clone()),
        period: None,
        samples,
        exponent,
        censored,
    }
}

/// Full-exploration fallback on small paths: succeeds only if, for every one of
/// the 256 degree-1 behaviors, some initialization loops before covering the path.
/// Returns the witness for the behavior copied from the table.
fn fallback_loop(table: &TransitionTable1Bit, state: bool) -> Option<(PathInit, u64)> {
    let rules = Rules::new(table);
    let find = |endpoint: EndpointBehavior| -> Option<(PathInit, u64)> {
        for n in [5usize, 7] {
            let k = n - 2;
            for bits in 0u128..(1 << n) {
                for o in 0u128..(1 << k) {
                    for start in 0..n {
                        let orient = o << 1;
                        let w = walk_to_cover(rules, endpoint, n, bits, orient, start, state, 1 << 16);
                        if let Walk::Loop { period, .. } = w {
                            return Some((PathInit::from_packed(n, bits, orient, start, state), period));
                        }
                    }
                }
            }
        }
        None
    };
    if EndpointBehavior::all().any(|e| find(e).is_none()) {
        return None;
    }
    find(EndpointBehavior::from_table(table))
}

fn combine(starts: &[StartVerdict; 2]) -> Verdict {
    let v = [starts[0].verdict, starts[1].verdict];
    if v.iter().all(|&x| x == Verdict::Loop) {
        Verdict::Loop
    } else if v.contains(&Verdict::Unclassified) {
        Verdict::Unclassified
    } else {
        Verdict::Superlinear
    }
}

/// Classifies `table` directly, without symmetry reduction.
pub fn classify(table: &TransitionTable1Bit) -> Classification {
    classify_with(table, &gadget_suite())
}

fn classify_with(table: &TransitionTable1Bit, suite: &[GadgetTemplate]) -> Classification {
    let starts = [classify_start(table, false, suite), classify_start(table, true, suite)];
    Classification {
        id: table.id(),
        canonical_id: table.canonicalize().0,
        verdict: combine(&starts),
        starts,
    }
}

/// Carries a canonical classification over to `table = canonical.relabel(g)`.
fn transfer(canon: &Classification, table: &TransitionTable1Bit, g: Symmetry) -> Classification {
    let mut starts = [canon.starts[0].relabel(g), canon.starts[1].relabel(g)];
    starts.sort_by_key(|s| s.state);
    Classification {
        id: table.id(),
        canonical_id: canon.id,
        verdict: canon.verdict,
        starts,
    }
}

/// Classifies every table in id order: canonical representatives in parallel,
/// then each member through its symmetry element.
pub fn classify_all(ids: &[u16]) -> Vec<Classification> {
    let suite = gadget_suite();
    let mut canon_ids: Vec<u16> = ids
        .iter()
        .map(|&id| TransitionTable1Bit::from_id(id).expect("id in range").canonicalize().0)
        .collect();
    canon_ids.sort_unstable();
    canon_ids.dedup();
    let canon: Vec<Classification> = canon_ids
        .par_iter()
        .map(|&id| classify_with(&TransitionTable1Bit::from_id(id).unwrap(), &suite))
        .collect();
    ids.iter()
        .map(|&id| {
            let table = TransitionTable1Bit::from_id(id).unwrap();
            let (cid, g) = table.canonicalize();
            let c = &canon[canon_ids.binary_search(&cid).expect("canonical id present")];
            transfer(c, &table, g)
        })
        .collect()
}

pub fn all_ids() -> Vec<u16> {
    (0..TABLE_COUNT).collect()
}

/// Number of orbits of the symmetry group, counted by canonical ids.
pub fn orbit_count() -> usize {
    let mut c: Vec<u16> = (0..TABLE_COUNT)
        .map(|id| TransitionTable1Bit::from_id(id).unwrap().canonicalize().0)
        .collect();
    c.sort_unstable();
    c.dedup();
    c.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transfer_keeps_witnesses_valid() {
        let table = TransitionTable1Bit::from_id(0o1234).unwrap();
        let direct = classify(&table);
        let via = classify_all(&[table.id()]).pop().unwrap();
        assert_eq!(direct.verdict, via.verdict);
        for s in &via.starts {
            if s.verdict == Verdict::Loop {
                let w = s.witness.as_ref().unwrap();
                assert_eq!(w.state, s.state);
                assert!(crate::lowerbound::walk::verify_loop(&table, w).is_ok());
            }
        }
    }
}
