//! Tree exploration with dirty node memory and a single movable token.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{Action, AgentModel, Exit, View};
use crate::topology::{MemoryCell, Port};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TokenCell {
    pub last: Port,
    pub parent: Option<Port>,
    pub root: bool,
}

impl MemoryCell for TokenCell {
    const MODEL: &'static str = "token";

    fn admissible(degree: usize) -> Vec<Self> {
        let d = degree as Port;
        let mut out = Vec::new();
        for last in 1..=d {
            for parent in std::iter::once(None).chain((1..=d).map(Some)) {
                for root in [false, true] {
                    out.push(TokenCell { last, parent, root });
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
        TokenCell {
            last: rng.gen_range(1..=d),
            parent: (p > 0).then_some(p),
            root: rng.gen(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TokenState {
    Initial,
    Roam,
    Rr,
    Down,
    Up,
    Terminated,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct TokenAlgo;

pub fn token_model() -> TokenAlgo {
    TokenAlgo
}

struct Frame {
    v: TokenCell,
    state: TokenState,
    held: u8,
    here: u8,
    d: Port,
}

impl Frame {
    fn clean(&mut self) {
        self.v.root = false;
        self.v.parent = None;
    }

    fn progress(&mut self) {
        self.v.last = (self.v.last % self.d) + 1;
    }

    fn drop_token(&mut self) {
        self.here += self.held;
        self.held = 0;
    }

    fn take(&mut self) {
        self.held += self.here;
        self.here = 0;
    }

    fn if_up(&mut self) {
        if self.v.parent == Some(self.v.last) {
            self.take();
            self.state = TokenState::Up;
        }
    }
}

impl AgentModel for TokenAlgo {
    type AgentState = TokenState;
    type NodeState = TokenCell;

    fn start_state(&self) -> TokenState {
        TokenState::Initial
    }

    fn uses_token(&self) -> bool {
        true
    }

    fn step(&self, view: &View<TokenState, TokenCell>) -> Action<TokenState, TokenCell> {
        use TokenState::*;
        let mut f = Frame {
            v: view.node_state,
            state: view.agent_state,
            held: view.tokens_at_agent,
            here: view.tokens_at_node,
            d: view.degree as Port,
        };
        match f.state {
            Initial => {
                f.clean();
                f.v.last = 1;
                f.drop_token();
                f.v.root = true;
                f.state = Roam;
            }
            Rr if f.here == 1 => {
                f.take();
                f.state = Down;
            }
            Rr => {
                f.clean();
                f.progress();
            }
            Down => {
                f.drop_token();
                f.v.parent = Some(f.v.last);
                f.progress();
                f.state = Roam;
                f.if_up();
            }
            Up => {
                f.drop_token();
                f.progress();
                f.state = Roam;
                if f.v.last == 1 && f.v.root {
                    f.state = Terminated;
                }
                f.if_up();
            }
            Roam => {
                f.clean();
                f.state = Rr;
            }
            Terminated => {}
        }
        Action {
            agent_state: f.state,
            node_state: f.v,
            tokens_at_agent: f.held,
            tokens_at_node: f.here,
            exit: if f.state != Terminated {
                Exit::Move(f.v.last)
            } else {
                Exit::Halt
            },
        }
    }
}
