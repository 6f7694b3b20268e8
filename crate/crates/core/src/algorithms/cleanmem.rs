//! Tree exploration with clean node memory: two port pointers and two flags per node.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{Action, AgentModel, Exit, View};
use crate::topology::{MemoryCell, Port};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CleanMemCell {
    pub parent: Option<Port>,
    pub last: Port,
    pub root: bool,
    pub visited: bool,
}

impl CleanMemCell {
    pub const CLEAN: CleanMemCell = CleanMemCell {
        parent: None,
        last: 1,
        root: false,
        visited: false,
    };
}

impl MemoryCell for CleanMemCell {
    const MODEL: &'static str = "cleanmem";

    fn admissible(degree: usize) -> Vec<Self> {
        let d = degree as Port;
        let mut out = Vec::new();
        for parent in std::iter::once(None).chain((1..=d).map(Some)) {
            for last in 1..=d {
                for root in [false, true] {
                    for visited in [false, true] {
                        out.push(CleanMemCell {
                            parent,
                            last,
                            root,
                            visited,
                        });
                    }
                }
            }
        }
        out
    }

    fn is_admissible(&self, degree: usize) -> bool {
        let d = degree as Port;
        (1..=d).contains(&self.last) && self.parent.is_none_or(|p| (1..=d).contains(&p))
    }

    fn random<R: Rng>(degree: usize, rng: &mut R) -> Self {
        let d = degree as Port;
        let p = rng.gen_range(0..=d);
        CleanMemCell {
            parent: (p > 0).then_some(p),
            last: rng.gen_range(1..=d),
            root: rng.gen(),
            visited: rng.gen(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CleanMemState {
    Initial,
    Exploring,
    ReturnFromParent,
    Completed,
    Terminated,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CleanMem;

pub fn cleanmem_model() -> CleanMem {
    CleanMem
}

impl AgentModel for CleanMem {
    type AgentState = CleanMemState;
    type NodeState = CleanMemCell;

    fn start_state(&self) -> CleanMemState {
        CleanMemState::Initial
    }

    fn step(&self, view: &View<CleanMemState, CleanMemCell>) -> Action<CleanMemState, CleanMemCell> {
        use CleanMemState::*;
        let mut v = view.node_state;
        let mut state = view.agent_state;
        let d = view.degree as Port;
        let act = |state, v: CleanMemCell, exit| Action {
            agent_state: state,
            node_state: v,
            tokens_at_agent: view.tokens_at_agent,
            tokens_at_node: view.tokens_at_node,
            exit,
        };

        if state == Terminated {
            return act(state, v, Exit::Halt);
        }
        if state == Initial {
            v.root = true;
            state = Exploring;
            v.visited = true;
            return act(state, v, Exit::Move(v.last));
        }

        let parent_set = if state == ReturnFromParent {
            v.parent = Some(v.last);
            state = Exploring;
            true
        } else {
            false
        };

        if ((state == Exploring && d == 1) || state == Completed || parent_set)
            && !v.root
            && v.last == d
            && v.parent.is_some()
        {
            state = Completed;
            let p = v.parent.expect("checked above");
            act(state, v, Exit::Move(p))
        } else if state == Completed && v.root && v.last == d {
            act(Terminated, v, Exit::Halt)
        } else {
            if state == Exploring && v.visited && !parent_set {
                state = ReturnFromParent;
            } else if state == Completed {
                state = Exploring;
                v.last += 1;
            } else if v.visited {
                v.last += 1;
            } else {
                v.visited = true;
            }
            act(state, v, Exit::Move(v.last))
        }
    }
}
