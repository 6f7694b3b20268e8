//! Rotor-Router: no agent state, each node sends the agent out through its ports in turn.

use serde::{Deserialize, Serialize};

use crate::engine::{Action, AgentModel, Exit, View};
use crate::topology::{MemoryCell, Port};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RotorCell {
    pub last: Port,
}

impl MemoryCell for RotorCell {
    const MODEL: &'static str = "rotor";

    fn admissible(degree: usize) -> Vec<Self> {
        (1..=degree as Port).map(|last| RotorCell { last }).collect()
    }

    fn is_admissible(&self, degree: usize) -> bool {
        (1..=degree as Port).contains(&self.last)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Rotor;

pub fn rotor_model() -> Rotor {
    Rotor
}

impl AgentModel for Rotor {
    type AgentState = ();
    type NodeState = RotorCell;

    fn start_state(&self) {}

    /// Advances the pointer, then leaves through it.
    fn step(&self, view: &View<(), RotorCell>) -> Action<(), RotorCell> {
        let last = (view.node_state.last % view.degree as Port) + 1;
        Action {
            agent_state: (),
            node_state: RotorCell { last },
            tokens_at_agent: view.tokens_at_agent,
            tokens_at_node: view.tokens_at_node,
            exit: Exit::Move(last),
        }
    }
}
