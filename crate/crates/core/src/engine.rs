//! Step-by-step execution of an agent model on a port-labelled tree.
//!
//! One step is one transition followed by one move. A transition that halts
//! costs nothing. The start node counts as visited before the first step.

use std::collections::HashMap;
use std::fmt::Debug;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::topology::{MemoryInit, Port, PortLabeledTree};

/// What a model sees at its current node. There is deliberately no incoming port.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct View<A, N> {
    pub agent_state: A,
    pub node_state: N,
    pub tokens_at_agent: u8,
    pub tokens_at_node: u8,
    pub degree: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Exit {
    Move(Port),
    Halt,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Action<A, N> {
    pub agent_state: A,
    pub node_state: N,
    pub tokens_at_agent: u8,
    pub tokens_at_node: u8,
    pub exit: Exit,
}

/// A deterministic agent: one transition per visit, no access to node identities.
pub trait AgentModel {
    type AgentState: Clone + Eq + Hash + Debug + Serialize;
    type NodeState: Clone + Eq + Hash + Debug + Serialize;

    fn start_state(&self) -> Self::AgentState;

    fn step(&self, view: &View<Self::AgentState, Self::NodeState>) -> Action<Self::AgentState, Self::NodeState>;

    /// Whether the agent starts holding the single token.
    fn uses_token(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Configuration<A, N> {
    pub position: usize,
    pub agent_state: A,
    pub node_states: Vec<N>,
    pub token_node: Option<usize>,
    pub token_at_agent: bool,
    pub step: u64,
}

impl<A, N> Configuration<A, N> {
    pub fn tokens_at(&self, v: usize) -> u8 {
        u8::from(self.token_node == Some(v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stop {
    SelfTermination,
    AllVisited,
    FirstEndpointVisited,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum RunStatus {
    Terminated,
    CoverReached,
    EndpointReached,
    LoopDetected { period: u64 },
    BudgetExhausted,
    ModelFault(String),
}

impl RunStatus {
    pub fn label(&self) -> &'static str {
        match self {
            RunStatus::Terminated => "terminated",
            RunStatus::CoverReached => "cover-reached",
            RunStatus::EndpointReached => "endpoint-reached",
            RunStatus::LoopDetected { .. } => "loop",
            RunStatus::BudgetExhausted => "budget-exhausted",
            RunStatus::ModelFault(_) => "model-fault",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceRecord {
    pub step: u64,
    pub position: usize,
    pub agent_state: serde_json::Value,
    pub agent_state_after: serde_json::Value,
    pub out_port: Option<Port>,
    pub node_state_before: serde_json::Value,
    pub node_state_after: serde_json::Value,
    pub token_event: Option<&'static str>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome<A, N> {
    pub status: RunStatus,
    pub steps: u64,
    pub visited_count: usize,
    /// Steps at which the last node was first visited, if that happened.
    pub cover_time: Option<u64>,
    pub final_config: Configuration<A, N>,
    /// The repeated configuration when the status is `LoopDetected`.
    pub loop_witness: Option<Configuration<A, N>>,
    pub trace: Option<Vec<TraceRecord>>,
}

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub budget: u64,
    pub stop: Stop,
    pub detect_loops: bool,
    /// Maximum number of stored configurations before loop detection gives up.
    pub loop_memory_cap: usize,
    pub record_trace: bool,
}

impl RunOptions {
    pub fn new(budget: u64, stop: Stop) -> Self {
        RunOptions {
            budget,
            stop,
            detect_loops: false,
            loop_memory_cap: 1 << 20,
            record_trace: false,
        }
    }

    pub fn with_loops(mut self) -> Self {
        self.detect_loops = true;
        self
    }

    pub fn with_trace(mut self) -> Self {
        self.record_trace = true;
        self
    }
}

/// The true tree rooted at the start node, for monitors only.
#[derive(Debug, Clone)]
pub struct Rooted {
    pub root: usize,
    parent: Vec<Option<usize>>,
    depth: Vec<usize>,
    tin: Vec<usize>,
    tout: Vec<usize>,
    size: Vec<usize>,
}

impl Rooted {
    pub fn new(tree: &PortLabeledTree, root: usize) -> Self {
        let n = tree.n();
        let mut parent = vec![None; n];
        let mut depth = vec![0; n];
        let mut tin = vec![0; n];
        let mut tout = vec![0; n];
        let mut size = vec![1; n];
        let mut clock = 0;
        let mut stack = vec![(root, usize::MAX, false)];
        while let Some((v, p, done)) = stack.pop() {
            if done {
                tout[v] = clock;
                if let Some(pp) = parent[v] {
                    size[pp] += size[v];
                }
                continue;
            }
            tin[v] = clock;
            clock += 1;
            stack.push((v, p, true));
            for &w in tree.ports(v) {
                if w != p {
                    parent[w] = Some(v);
                    depth[w] = depth[v] + 1;
                    stack.push((w, v, false));
                }
            }
        }
        Rooted {
            root,
            parent,
            depth,
            tin,
            tout,
            size,
        }
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn depth(&self, v: usize) -> usize {
        self.depth[v]
    }

    pub fn subtree_size(&self, v: usize) -> usize {
        self.size[v]
    }

    /// True iff `w` lies in the subtree rooted at `v` (including `v`).
    pub fn in_subtree(&self, v: usize, w: usize) -> bool {
        self.tin[v] <= self.tin[w] && self.tin[w] < self.tout[v]
    }

    /// Nodes of the subtree rooted at `v`.
    pub fn subtree(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.parent.len()).filter(move |&w| self.in_subtree(v, w))
    }
}

/// One executed transition as seen by monitors.
pub struct StepRecord<'a, A, N> {
    /// Move count after this transition.
    pub step: u64,
    pub from: usize,
    /// `None` when the transition halted.
    pub to: Option<usize>,
    pub view: &'a View<A, N>,
    pub action: &'a Action<A, N>,
    /// True iff `to` had never been visited before this move.
    pub first_visit: bool,
}

pub struct StepContext<'a, A, N> {
    pub tree: &'a PortLabeledTree,
    pub rooted: &'a Rooted,
    pub record: StepRecord<'a, A, N>,
    pub config: &'a Configuration<A, N>,
    pub visited: &'a [bool],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub step: u64,
    pub property: String,
    pub detail: String,
}

/// Observes every transition with oracle access. Must not influence the run.
pub trait Monitor<A, N> {
    fn on_step(&mut self, ctx: &StepContext<'_, A, N>);

    fn on_finish(&mut self, _tree: &PortLabeledTree, _rooted: &Rooted, _status: &RunStatus, _config: &Configuration<A, N>) {}

    fn violations(&self) -> &[Violation];
}

type Snapshot<A, N> = (usize, A, Vec<N>, Option<usize>, bool);

pub fn run<M: AgentModel>(
    model: &M,
    tree: &PortLabeledTree,
    init: &MemoryInit<M::NodeState>,
    start: usize,
    options: RunOptions,
    monitors: &mut [&mut dyn Monitor<M::AgentState, M::NodeState>],
) -> RunOutcome<M::AgentState, M::NodeState> {
    run_cells(model, tree, init.cells.clone(), start, options, None, monitors)
}

/// Like [`run`] but takes ownership of the initial cells and optionally reuses
/// a rooted view of the tree (it must be rooted at `start`).
pub fn run_cells<M: AgentModel>(
    model: &M,
    tree: &PortLabeledTree,
    cells: Vec<M::NodeState>,
    start: usize,
    options: RunOptions,
    rooted: Option<&Rooted>,
    monitors: &mut [&mut dyn Monitor<M::AgentState, M::NodeState>],
) -> RunOutcome<M::AgentState, M::NodeState> {
    let n = tree.n();
    assert_eq!(cells.len(), n, "one memory cell per node");
    assert!(start < n, "start node out of range");
    let owned;
    let rooted = match rooted {
        Some(r) => {
            assert_eq!(r.root, start, "rooted view must be rooted at the start node");
            Some(r)
        }
        None if !monitors.is_empty() => {
            owned = Rooted::new(tree, start);
            Some(&owned)
        }
        None => None,
    };
    let mut config = Configuration {
        position: start,
        agent_state: model.start_state(),
        node_states: cells,
        token_node: None,
        token_at_agent: model.uses_token(),
        step: 0,
    };
    let mut visited = vec![false; n];
    visited[start] = true;
    let mut visited_count = 1;
    let mut cover_time = (n == 1).then_some(0);
    let mut seen: HashMap<Snapshot<M::AgentState, M::NodeState>, u64> = HashMap::new();
    let mut loops_enabled = options.detect_loops;
    let mut trace = options.record_trace.then(Vec::new);

    let status = loop {
        match options.stop {
            Stop::AllVisited if visited_count == n => break RunStatus::CoverReached,
            Stop::FirstEndpointVisited if tree.degree(config.position) == 1 => {
                break RunStatus::EndpointReached
            }
            _ => {}
        }
        if loops_enabled {
            if seen.len() >= options.loop_memory_cap {
                loops_enabled = false;
                seen = HashMap::new();
            } else {
                let key = (
                    config.position,
                    config.agent_state.clone(),
                    config.node_states.clone(),
                    config.token_node,
                    config.token_at_agent,
                );
                if let Some(&first) = seen.get(&key) {
                    break RunStatus::LoopDetected {
                        period: config.step - first,
                    };
                }
                seen.insert(key, config.step);
            }
        }

        let v = config.position;
        let view = View {
            agent_state: config.agent_state.clone(),
            node_state: config.node_states[v].clone(),
            tokens_at_agent: u8::from(config.token_at_agent),
            tokens_at_node: config.tokens_at(v),
            degree: tree.degree(v),
        };
        let action = model.step(&view);
        if action.tokens_at_agent > 1
            || action.tokens_at_node > 1
            || action.tokens_at_agent + action.tokens_at_node != view.tokens_at_agent + view.tokens_at_node
        {
            break RunStatus::ModelFault(format!(
                "token conservation broken at step {}: ({}, {}) -> ({}, {})",
                config.step, view.tokens_at_agent, view.tokens_at_node, action.tokens_at_agent, action.tokens_at_node
            ));
        }
        let target = match action.exit {
            Exit::Halt => None,
            Exit::Move(p) => match tree.neighbor(v, p) {
                Some(w) => Some(w),
                None => {
                    break RunStatus::ModelFault(format!(
                        "port {p} out of range at degree {} (step {})",
                        view.degree, config.step
                    ))
                }
            },
        };
        if target.is_some() && config.step >= options.budget {
            break RunStatus::BudgetExhausted;
        }

        config.agent_state = action.agent_state.clone();
        config.node_states[v] = action.node_state.clone();
        config.token_at_agent = action.tokens_at_agent == 1;
        if action.tokens_at_node == 1 {
            config.token_node = Some(v);
        } else if config.token_node == Some(v) {
            config.token_node = None;
        }
        let mut first_visit = false;
        if let Some(w) = target {
            config.position = w;
            config.step += 1;
            if !visited[w] {
                visited[w] = true;
                visited_count += 1;
                first_visit = true;
                if visited_count == n {
                    cover_time = Some(config.step);
                }
            }
        }
        if let Some(t) = trace.as_mut() {
            let event = match (view.tokens_at_agent, action.tokens_at_agent) {
                (1, 0) => Some("drop"),
                (0, 1) => Some("take"),
                _ => None,
            };
            t.push(TraceRecord {
                step: config.step,
                position: v,
                agent_state: serde_json::to_value(&view.agent_state).unwrap_or_default(),
                agent_state_after: serde_json::to_value(&action.agent_state).unwrap_or_default(),
                out_port: match action.exit {
                    Exit::Move(p) => Some(p),
                    Exit::Halt => None,
                },
                node_state_before: serde_json::to_value(&view.node_state).unwrap_or_default(),
                node_state_after: serde_json::to_value(&action.node_state).unwrap_or_default(),
                token_event: event,
            });
        }
        if let Some(rooted) = rooted {
            for m in monitors.iter_mut() {
                let ctx = StepContext {
                    tree,
                    rooted,
                    record: StepRecord {
                        step: config.step,
                        from: v,
                        to: target,
                        view: &view,
                        action: &action,
                        first_visit,
                    },
                    config: &config,
                    visited: &visited,
                };
                m.on_step(&ctx);
            }
        }
        if target.is_none() {
            break RunStatus::Terminated;
        }
    };

    if let Some(rooted) = rooted {
        for m in monitors.iter_mut() {
            m.on_finish(tree, rooted, &status, &config);
        }
    }
    let loop_witness = matches!(status, RunStatus::LoopDetected { .. }).then(|| config.clone());
    RunOutcome {
        status,
        steps: config.step,
        visited_count,
        cover_time,
        final_config: config,
        loop_witness,
        trace,
    }
}

/// Moves until every node has been visited, or `None` if the budget runs out first.
pub fn cover_time<M: AgentModel>(
    model: &M,
    tree: &PortLabeledTree,
    init: &MemoryInit<M::NodeState>,
    start: usize,
    budget: u64,
) -> Option<u64> {
    let out = run(model, tree, init, start, RunOptions::new(budget, Stop::AllVisited), &mut []);
    match out.status {
        RunStatus::CoverReached => out.cover_time,
        _ => None,
    }
}

/// Replays a loop witness for `period` steps and checks the configuration recurs
/// without the agent ever standing on a degree-1 node.
pub fn replay_loop<M: AgentModel>(
    model: &M,
    tree: &PortLabeledTree,
    witness: &Configuration<M::AgentState, M::NodeState>,
    period: u64,
) -> bool {
    if period == 0 {
        return false;
    }
    let mut config = witness.clone();
    for _ in 0..period {
        if tree.degree(config.position) == 1 {
            return false;
        }
        let v = config.position;
        let view = View {
            agent_state: config.agent_state.clone(),
            node_state: config.node_states[v].clone(),
            tokens_at_agent: u8::from(config.token_at_agent),
            tokens_at_node: config.tokens_at(v),
            degree: tree.degree(v),
        };
        let action = model.step(&view);
        let Exit::Move(p) = action.exit else {
            return false;
        };
        let Some(w) = tree.neighbor(v, p) else {
            return false;
        };
        config.agent_state = action.agent_state;
        config.node_states[v] = action.node_state;
        config.token_at_agent = action.tokens_at_agent == 1;
        if action.tokens_at_node == 1 {
            config.token_node = Some(v);
        } else if config.token_node == Some(v) {
            config.token_node = None;
        }
        config.position = w;
    }
    config.position == witness.position
        && config.agent_state == witness.agent_state
        && config.node_states == witness.node_states
        && config.token_node == witness.token_node
        && config.token_at_agent == witness.token_at_agent
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{build_path, MemoryCell};

    #[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize)]
    struct Unit;

    impl MemoryCell for Unit {
        const MODEL: &'static str = "unit";
        fn admissible(_: usize) -> Vec<Self> {
            vec![Unit]
        }
        fn is_admissible(&self, _: usize) -> bool {
            true
        }
    }

    struct Halter;

    impl AgentModel for Halter {
        type AgentState = ();
        type NodeState = Unit;
        fn start_state(&self) {}
        fn step(&self, _: &View<(), Unit>) -> Action<(), Unit> {
            Action {
                agent_state: (),
                node_state: Unit,
                tokens_at_agent: 0,
                tokens_at_node: 0,
                exit: Exit::Halt,
            }
        }
    }

    struct AlwaysPort(Port);

    impl AgentModel for AlwaysPort {
        type AgentState = ();
        type NodeState = Unit;
        fn start_state(&self) {}
        fn step(&self, _: &View<(), Unit>) -> Action<(), Unit> {
            Action {
                agent_state: (),
                node_state: Unit,
                tokens_at_agent: 0,
                tokens_at_node: 0,
                exit: Exit::Move(self.0),
            }
        }
    }

    #[test]
    fn halting_model_terminates() {
        let p = build_path(3, &[true]).unwrap();
        let init = MemoryInit::uniform(p.tree(), |_| Unit);
        let out = run(&Halter, p.tree(), &init, 1, RunOptions::new(10, Stop::SelfTermination).with_loops(), &mut []);
        assert_eq!(out.status, RunStatus::Terminated);
        assert_eq!(out.steps, 0);
    }

    #[test]
    fn zero_budget() {
        let p = build_path(3, &[true]).unwrap();
        let init = MemoryInit::uniform(p.tree(), |_| Unit);
        let out = run(&AlwaysPort(1), p.tree(), &init, 1, RunOptions::new(0, Stop::SelfTermination), &mut []);
        assert_eq!(out.status, RunStatus::BudgetExhausted);
        assert_eq!(out.steps, 0);
    }

    #[test]
    fn bad_port_faults() {
        let p = build_path(3, &[true]).unwrap();
        let init = MemoryInit::uniform(p.tree(), |_| Unit);
        let out = run(&AlwaysPort(3), p.tree(), &init, 1, RunOptions::new(10, Stop::SelfTermination), &mut []);
        assert!(matches!(out.status, RunStatus::ModelFault(_)));
    }

    #[test]
    fn bouncing_loops() {
        // Port 1 everywhere on a 3-path oriented leftwards: 1 -> 0 -> 1 -> ...
        let p = build_path(3, &[true]).unwrap();
        let init = MemoryInit::uniform(p.tree(), |_| Unit);
        let out = run(&AlwaysPort(1), p.tree(), &init, 1, RunOptions::new(100, Stop::SelfTermination).with_loops(), &mut []);
        assert_eq!(out.status, RunStatus::LoopDetected { period: 2 });
        assert_eq!(out.steps, 2);
    }

    #[test]
    fn endpoint_stop_at_start() {
        let p = build_path(2, &[]).unwrap();
        let init = MemoryInit::uniform(p.tree(), |_| Unit);
        let out = run(&AlwaysPort(1), p.tree(), &init, 0, RunOptions::new(10, Stop::FirstEndpointVisited), &mut []);
        assert_eq!(out.status, RunStatus::EndpointReached);
        assert_eq!(out.steps, 0);
    }

    #[test]
    fn rooted_subtrees() {
        let p = build_path(5, &[true, true, true]).unwrap();
        let r = Rooted::new(p.tree(), 2);
        assert_eq!(r.parent(0), Some(1));
        assert_eq!(r.parent(2), None);
        assert!(r.in_subtree(3, 4));
        assert!(!r.in_subtree(3, 1));
        assert_eq!(r.subtree_size(1), 2);
        assert_eq!(r.subtree(3).collect::<Vec<_>>(), vec![3, 4]);
    }
}
