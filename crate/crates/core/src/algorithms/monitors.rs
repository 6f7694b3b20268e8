//! Per-step checkers that compare a run against the true tree rooted at the start.
//!
//! Moment `t` is the move into the current node followed by the transition
//! there; moment 0 is the first transition at the start node. The action of
//! a moment is the agent state it entered with, with `Rr` split by whether the
//! token is found at the node.

use std::collections::HashMap;

use crate::engine::{Configuration, Exit, Monitor, Rooted, RunStatus, StepContext, Violation};
use crate::topology::{Port, PortLabeledTree};

use super::cleanmem::{CleanMemCell, CleanMemState};
use super::token::{TokenCell, TokenState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Act {
    Initial,
    Roam,
    Rr0,
    Rr1,
    Down,
    Up,
    Terminated,
}

fn action_of(state: TokenState, token_here: bool) -> Act {
    match state {
        TokenState::Initial => Act::Initial,
        TokenState::Roam => Act::Roam,
        TokenState::Rr if token_here => Act::Rr1,
        TokenState::Rr => Act::Rr0,
        TokenState::Down => Act::Down,
        TokenState::Up => Act::Up,
        TokenState::Terminated => Act::Terminated,
    }
}

#[derive(Debug, Clone, Copy)]
struct Mark {
    last: Port,
    parent_null: bool,
}

/// Properties P.1-P.10 and the token discipline of the token algorithm.
///
/// Two readings are adjusted so that the checks are true statements about the
/// algorithm: root progress only covers ports strictly below the root pointer,
/// and the final transition (whose pointer wrap-around triggers termination)
/// is exempt from the pointer non-repetition checks.
#[derive(Debug, Default)]
pub struct TokenPropertyMonitor {
    violations: Vec<Violation>,
    seen: Vec<bool>,
    prev_node: Option<usize>,
    history: Vec<Vec<Mark>>,
    pub checked_moments: u64,
}

impl TokenPropertyMonitor {
    pub fn new() -> Self {
        Self::default()
    }

    fn flag(&mut self, t: u64, property: &str, detail: String) {
        if self.violations.len() < 64 {
            self.violations.push(Violation {
                step: t,
                property: property.into(),
                detail,
            });
        }
    }

    fn explored(&self, rooted: &Rooted, v: usize) -> bool {
        rooted.subtree(v).all(|w| self.seen[w])
    }
}

impl Monitor<TokenState, TokenCell> for TokenPropertyMonitor {
    fn on_step(&mut self, ctx: &StepContext<'_, TokenState, TokenCell>) {
        let tree = ctx.tree;
        let rooted = ctx.rooted;
        let rec = &ctx.record;
        let n = tree.n();
        if self.seen.is_empty() {
            self.seen = vec![false; n];
            self.history = vec![Vec::new(); n];
        }
        let w = rec.from;
        let t = match rec.to {
            Some(_) => rec.step - 1,
            None => rec.step,
        };
        self.checked_moments += 1;
        let act = action_of(rec.view.agent_state, rec.view.tokens_at_node == 1);
        let before = rec.view.node_state;
        let after = rec.action.node_state;
        let end_state = rec.action.agent_state;
        let first_visit = !self.seen[w];
        let terminating = matches!(rec.action.exit, Exit::Halt);

        // Token discipline: Roam and Rr never carry it, Initial, Down and Up do.
        let holds = rec.view.tokens_at_agent == 1;
        let should_hold = matches!(act, Act::Initial | Act::Down | Act::Up);
        if holds != should_hold {
            self.flag(t, "token-discipline", format!("{act:?} entered with token held = {holds}"));
        }

        // P.8 reads the root pointer at the end of the previous moment.
        let root = rooted.root;
        let root_last_prev = if w == root {
            before.last
        } else {
            ctx.config.node_states[root].last
        };

        if t > 0 {
            let u = self.prev_node.expect("a move preceded this moment");
            let downward = rooted.parent(w) == Some(u);
            match act {
                Act::Down | Act::Roam if !downward => {
                    self.flag(t, "P.1", format!("{act:?} moved {u} -> {w} towards the root"))
                }
                Act::Up | Act::Rr1 if downward => {
                    self.flag(t, "P.1", format!("{act:?} moved {u} -> {w} away from the root"))
                }
                _ => {}
            }
        }

        let tok = ctx.config.token_node.unwrap_or(w);
        if !rooted.in_subtree(tok, w) {
            self.flag(t, "P.2", format!("agent at {w} outside the subtree of token node {tok}"));
        }

        if first_visit {
            let allowed = matches!(act, Act::Initial | Act::Roam | Act::Rr0);
            let cleaned = after.parent.is_none() && (after.root == (act == Act::Initial));
            if !allowed || !cleaned {
                self.flag(t, "P.3", format!("first visit of {w} by {act:?} left {after:?}"));
            }
        }

        let mut x = tok;
        while x != root {
            if ctx.config.node_states[x].parent.is_none() {
                self.flag(t, "P.4", format!("node {x} above the token has no parent pointer"));
            }
            x = rooted.parent(x).expect("non-root has a parent");
        }

        if !first_visit && before.parent.is_some() && matches!(act, Act::Roam | Act::Rr0) {
            self.flag(t, "P.5", format!("{act:?} re-cleaned {w} whose parent was set"));
        }

        if let Some(p) = after.parent {
            if tree.neighbor(w, p) != rooted.parent(w) {
                self.flag(t, "P.6", format!("parent pointer {p} at {w} does not lead to the root"));
            }
        }

        if t > 0 {
            for x in 1..root_last_prev {
                let Some(c) = tree.neighbor(root, x) else { continue };
                if !self.explored(rooted, c) {
                    self.flag(t, "P.8", format!("root port {x} subtree unexplored while root pointer is {root_last_prev}"));
                }
            }
        }

        self.seen[w] = true;

        if end_state == TokenState::Up && !self.explored(rooted, w) {
            self.flag(t, "P.7", format!("Up at {w} with its subtree not explored"));
        }

        if !terminating {
            let cur = Mark {
                last: after.last,
                parent_null: after.parent.is_none(),
            };
            let hist = &self.history[w];
            let repeat = hist.iter().enumerate().find_map(|(i, h)| {
                let changed_since = hist[i + 1..].iter().any(|g| g.last != cur.last);
                if h.last != cur.last || !changed_since {
                    None
                } else if h.parent_null && cur.parent_null {
                    Some("P.9")
                } else if !h.parent_null {
                    Some("P.10")
                } else {
                    None
                }
            });
            if let Some(property) = repeat {
                self.flag(t, property, format!("pointer at {w} returned to {} after changing", cur.last));
            }
            self.history[w].push(cur);
        }

        self.prev_node = Some(w);
    }

    fn violations(&self) -> &[Violation] {
        &self.violations
    }
}

/// Counts traversals per directed edge and flags any above `limit`.
#[derive(Debug)]
pub struct EdgeUseMonitor {
    limit: u32,
    uses: HashMap<(usize, usize), u32>,
    violations: Vec<Violation>,
}

impl EdgeUseMonitor {
    pub fn new(limit: u32) -> Self {
        EdgeUseMonitor {
            limit,
            uses: HashMap::new(),
            violations: Vec::new(),
        }
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }

    pub fn max_use(&self) -> u32 {
        self.uses.values().copied().max().unwrap_or(0)
    }
}

impl<A, N> Monitor<A, N> for EdgeUseMonitor {
    fn on_step(&mut self, ctx: &StepContext<'_, A, N>) {
        if let Some(to) = ctx.record.to {
            let count = self.uses.entry((ctx.record.from, to)).or_insert(0);
            *count += 1;
            if *count == self.limit + 1 {
                self.violations.push(Violation {
                    step: ctx.record.step,
                    property: "edge-use".into(),
                    detail: format!("edge {} -> {} used {} times", ctx.record.from, to, count),
                });
            }
        }
    }

    fn violations(&self) -> &[Violation] {
        &self.violations
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Unentered,
    Entered { start: u64 },
    Returned { start: u64 },
    Reentered { start: u64 },
    Done,
}

/// Entry/return structure of every non-root subtree under the clean-memory algorithm.
///
/// C.1: the first return to the parent is in `Exploring`; C.2: the next move
/// re-enters in `ReturnFromParent`; C.3: the second return is in `Completed`;
/// C.4: the subtree is fully visited by then, within `ratio_cap * size` moves.
#[derive(Debug)]
pub struct SubtreeReturnMonitor {
    ratio_cap: u64,
    phase: Vec<Phase>,
    pending: Option<usize>,
    seen: Vec<bool>,
    violations: Vec<Violation>,
    /// Largest observed (moves in interval) / (subtree size).
    pub max_ratio: f64,
}

impl SubtreeReturnMonitor {
    pub fn new(ratio_cap: u64) -> Self {
        SubtreeReturnMonitor {
            ratio_cap,
            phase: Vec::new(),
            pending: None,
            seen: Vec::new(),
            violations: Vec::new(),
            max_ratio: 0.0,
        }
    }

    fn flag(&mut self, step: u64, property: &str, detail: String) {
        if self.violations.len() < 64 {
            self.violations.push(Violation {
                step,
                property: property.into(),
                detail,
            });
        }
    }
}

impl Monitor<CleanMemState, CleanMemCell> for SubtreeReturnMonitor {
    fn on_step(&mut self, ctx: &StepContext<'_, CleanMemState, CleanMemCell>) {
        let rooted = ctx.rooted;
        let n = ctx.tree.n();
        if self.phase.is_empty() {
            self.phase = vec![Phase::Unentered; n];
            self.seen = vec![false; n];
            self.seen[rooted.root] = true;
        }
        let Some(to) = ctx.record.to else { return };
        let from = ctx.record.from;
        let step = ctx.record.step;
        let carried = ctx.record.action.agent_state;

        if let Some(v) = self.pending.take() {
            if from == rooted.parent(v).unwrap_or(usize::MAX) && to == v && carried == CleanMemState::ReturnFromParent {
                if let Phase::Returned { start } = self.phase[v] {
                    self.phase[v] = Phase::Reentered { start };
                }
            } else {
                self.flag(step, "C.2", format!("after first return from {v}, moved {from} -> {to} in {carried:?}"));
            }
        }

        if !self.seen[to] {
            self.seen[to] = true;
            if carried != CleanMemState::Exploring {
                self.flag(step, "C.1", format!("node {to} first entered in {carried:?}"));
            }
            self.phase[to] = Phase::Entered { start: step };
        }

        if rooted.parent(from) == Some(to) {
            match self.phase[from] {
                Phase::Entered { start } => {
                    if carried != CleanMemState::Exploring {
                        self.flag(step, "C.1", format!("first return from {from} in {carried:?}"));
                    }
                    self.phase[from] = Phase::Returned { start };
                    self.pending = Some(from);
                }
                Phase::Reentered { start } => {
                    if carried != CleanMemState::Completed {
                        self.flag(step, "C.3", format!("second return from {from} in {carried:?}"));
                    }
                    let size = rooted.subtree_size(from) as u64;
                    let spent = step - start + 1;
                    self.max_ratio = self.max_ratio.max(spent as f64 / size as f64);
                    if !rooted.subtree(from).all(|w| self.seen[w]) {
                        self.flag(step, "C.4", format!("subtree of {from} left unexplored"));
                    }
                    if spent > self.ratio_cap * size {
                        self.flag(step, "C.4", format!("subtree of {from} took {spent} moves for {size} nodes"));
                    }
                    self.phase[from] = Phase::Done;
                }
                other => self.flag(step, "C.3", format!("unexpected return from {from} in phase {other:?}")),
            }
        }
    }

    fn on_finish(
        &mut self,
        tree: &PortLabeledTree,
        rooted: &Rooted,
        status: &RunStatus,
        _config: &Configuration<CleanMemState, CleanMemCell>,
    ) {
        if *status != RunStatus::Terminated {
            return;
        }
        for v in 0..tree.n() {
            if v != rooted.root && self.phase.get(v) != Some(&Phase::Done) {
                let phase = self.phase.get(v).copied();
                self.flag(u64::MAX, "C.3", format!("subtree of {v} never completed ({phase:?})"));
            }
        }
    }

    fn violations(&self) -> &[Violation] {
        &self.violations
    }
}
