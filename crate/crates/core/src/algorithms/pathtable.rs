//! A 1-bit agent on a path driven by a transition table.

use serde::{Deserialize, Serialize};

use crate::engine::{Action, AgentModel, Exit, View};
use crate::lowerbound::table::TransitionTable1Bit;
use crate::topology::MemoryCell;

/// Vertex memory of the 1-bit model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Bit(pub bool);

impl MemoryCell for Bit {
    const MODEL: &'static str = "bit";

    fn admissible(_: usize) -> Vec<Self> {
        vec![Bit(false), Bit(true)]
    }

    fn is_admissible(&self, _: usize) -> bool {
        true
    }
}

/// Behavior at degree-1 nodes: `(a, v) -> (A, V)`, always leaving through port 1.
///
/// Encoded as `sum (V + 2A) * 4^k` with `k = 2a + v`, giving 256 behaviors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EndpointBehavior(pub u8);

impl EndpointBehavior {
    pub fn get(self, a: bool, v: bool) -> (bool, bool) {
        let k = 2 * u8::from(a) + u8::from(v);
        let code = (self.0 >> (2 * k)) & 3;
        (code & 2 != 0, code & 1 != 0)
    }

    /// The degree-2 rows with their port dropped.
    pub fn from_table(table: &TransitionTable1Bit) -> Self {
        let mut code = 0u8;
        for a in [false, true] {
            for v in [false, true] {
                let (na, nv) = table.r2(a, v);
                let k = 2 * u8::from(a) + u8::from(v);
                code |= (u8::from(nv) + 2 * u8::from(na)) << (2 * k);
            }
        }
        EndpointBehavior(code)
    }

    pub fn all() -> impl Iterator<Item = EndpointBehavior> {
        (0..=255u8).map(EndpointBehavior)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathTableModel {
    pub table: TransitionTable1Bit,
    pub endpoint: EndpointBehavior,
    pub start: bool,
}

impl PathTableModel {
    pub fn new(table: TransitionTable1Bit, start: bool) -> Self {
        PathTableModel {
            table,
            endpoint: EndpointBehavior::from_table(&table),
            start,
        }
    }

    pub fn with_endpoint(mut self, endpoint: EndpointBehavior) -> Self {
        self.endpoint = endpoint;
        self
    }
}

impl AgentModel for PathTableModel {
    type AgentState = bool;
    type NodeState = Bit;

    fn start_state(&self) -> bool {
        self.start
    }

    /// Nodes of degree above 2 are outside the model and yield an invalid port.
    fn step(&self, view: &View<bool, Bit>) -> Action<bool, Bit> {
        let a = view.agent_state;
        let v = view.node_state.0;
        let (na, nv, port) = match view.degree {
            1 => {
                let (na, nv) = self.endpoint.get(a, v);
                (na, nv, 1)
            }
            2 => {
                let e = self.table.get(a, v);
                (e.a, e.v, 1 + u32::from(e.p))
            }
            _ => (a, v, 0),
        };
        Action {
            agent_state: na,
            node_state: Bit(nv),
            tokens_at_agent: view.tokens_at_agent,
            tokens_at_node: view.tokens_at_node,
            exit: Exit::Move(port),
        }
    }
}
