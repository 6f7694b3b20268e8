//! A single run with an optional step trace.

use rand::Rng;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::algorithms::{
    cleanmem_model, rotor_model, token_model, EdgeUseMonitor, PathTableModel, SubtreeReturnMonitor,
    TokenPropertyMonitor,
};
use crate::engine::{run_cells, AgentModel, Monitor, Rooted, RunOptions, RunStatus, TraceRecord, Violation};
use crate::topology::{build_path, random_memory, random_tree, rng_from_seed, MemoryCell, MemoryInit, PortLabeledTree};

use super::config::{Algo, ExperimentConfig, InitSource, LabelingSource, StartSource, TreeSource};
use super::report;
use super::sweep::{relabel_randomly, CleanMemSubject, RotorSubject, Subject, TableSubject, TokenSubject, CLEANMEM_RATIO_CAP};
use super::HarnessError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FAULT: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;
pub const EXIT_INCOMPLETE: i32 = 4;

#[derive(Debug, Clone, Serialize)]
pub struct SimulationReport {
    pub algo: String,
    pub n: usize,
    pub start: usize,
    pub status: String,
    pub period: Option<u64>,
    pub fault: Option<String>,
    pub steps: u64,
    pub cover_time: Option<u64>,
    pub visited: usize,
    pub final_position: usize,
    /// Move bound the algorithm promises on this instance, if any.
    pub bound: Option<u64>,
    pub bound_ok: bool,
    /// Terminated at the start with everything visited for the self-terminating
    /// algorithms; the stop condition was met for the others.
    pub goal_reached: bool,
    pub max_edge_use: u32,
    pub violations: Vec<Violation>,
    #[serde(skip)]
    pub trace: Option<Vec<TraceRecord>>,
}

impl SimulationReport {
    /// 0 when the goal is reached cleanly, 2 for a model fault, 3 for a violated
    /// property or bound, 4 for a loop or an exhausted budget.
    pub fn exit_code(&self) -> i32 {
        if self.fault.is_some() {
            EXIT_FAULT
        } else if !self.violations.is_empty() || !self.bound_ok {
            EXIT_VIOLATION
        } else if !self.goal_reached {
            EXIT_INCOMPLETE
        } else {
            EXIT_OK
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// One JSON object per step.
    pub fn trace_jsonl(&self) -> String {
        self.trace
            .iter()
            .flatten()
            .map(|r| serde_json::to_string(r).expect("trace serializes") + "\n")
            .collect()
    }
}

fn io_err(path: &std::path::Path, e: std::io::Error) -> HarnessError {
    HarnessError::Io(path.display().to_string(), e.to_string())
}

/// The one labelled tree a simulation runs on.
pub fn single_tree(config: &ExperimentConfig) -> Result<PortLabeledTree, HarnessError> {
    let tree = match &config.tree {
        TreeSource::File(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
            PortLabeledTree::from_json(&text)?
        }
        TreeSource::Path(n) => build_path(*n, &vec![true; n.saturating_sub(2)])?.into_tree(),
        TreeSource::Random { n, seed } => random_tree(*n, *seed)?,
        other => return Err(HarnessError::Unsupported(format!("simulate needs a single tree, got {other}"))),
    };
    match config.labeling {
        LabelingSource::Given => Ok(tree),
        LabelingSource::Seed(s) => Ok(relabel_randomly(&tree, s)),
        LabelingSource::Enumerate => Err(HarnessError::Unsupported("simulate cannot enumerate labelings".into())),
    }
}

fn single_start(config: &ExperimentConfig, n: usize) -> Result<usize, HarnessError> {
    match config.start {
        StartSource::Index(i) if i < n => Ok(i),
        StartSource::Index(i) => Err(HarnessError::Unsupported(format!("start {i} is not a node of an {n}-node tree"))),
        StartSource::Middle => Ok(n / 2),
        StartSource::Random => Ok(rng_from_seed(config.seed).gen_range(0..n)),
        StartSource::All => Err(HarnessError::Unsupported("simulate runs from one start".into())),
    }
}

fn initial_cells<S: Subject>(subject: &S, config: &ExperimentConfig, tree: &PortLabeledTree) -> Result<Vec<S::Cell>, HarnessError>
where
    S::Cell: DeserializeOwned,
{
    match &config.init {
        InitSource::Clean => Ok((0..tree.n()).map(|v| subject.clean(tree.degree(v))).collect()),
        InitSource::Dirty(seed) => Ok(random_memory::<S::Cell>(tree, *seed).cells),
        InitSource::File(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
            Ok(MemoryInit::<S::Cell>::from_json(&text, tree)?.cells)
        }
        InitSource::Enumerate => Err(HarnessError::Unsupported("simulate cannot enumerate memory".into())),
    }
}

fn execute<M, S>(
    model: &M,
    subject: &S,
    config: &ExperimentConfig,
    tree: &PortLabeledTree,
    bound: Option<u64>,
    mut monitors: Vec<&mut dyn Monitor<M::AgentState, M::NodeState>>,
) -> Result<SimulationReport, HarnessError>
where
    M: AgentModel,
    S: Subject<Cell = M::NodeState>,
    M::NodeState: MemoryCell + DeserializeOwned,
{
    let n = tree.n();
    let start = single_start(config, n)?;
    let cells = initial_cells(subject, config, tree)?;
    let budget = config.budget.unwrap_or_else(|| subject.default_budget(n));
    let mut options = RunOptions::new(budget, config.stop).with_loops();
    if config.trace.is_some() {
        options = options.with_trace();
    }
    let rooted = Rooted::new(tree, start);
    let out = run_cells(model, tree, cells, start, options, Some(&rooted), &mut monitors);
    let mut violations = Vec::new();
    for m in &monitors {
        violations.extend_from_slice(m.violations());
    }
    let goal_reached = match out.status {
        RunStatus::Terminated => out.final_config.position == start && out.visited_count == n,
        RunStatus::CoverReached | RunStatus::EndpointReached => true,
        _ => false,
    };
    let (period, fault) = match &out.status {
        RunStatus::LoopDetected { period } => (Some(*period), None),
        RunStatus::ModelFault(f) => (None, Some(f.clone())),
        _ => (None, None),
    };
    Ok(SimulationReport {
        algo: config.algo.to_string(),
        n,
        start,
        status: out.status.label().to_string(),
        period,
        fault,
        steps: out.steps,
        cover_time: out.cover_time,
        visited: out.visited_count,
        final_position: out.final_config.position,
        bound,
        bound_ok: bound.is_none_or(|b| out.steps <= b),
        goal_reached,
        max_edge_use: 0,
        violations,
        trace: out.trace,
    })
}

/// Runs the configured algorithm once.
pub fn simulate(config: &ExperimentConfig) -> Result<SimulationReport, HarnessError> {
    let tree = single_tree(config)?;
    let n = tree.n() as u64;
    let report = match config.algo {
        Algo::Token => {
            let mut props = TokenPropertyMonitor::new();
            let mut edges = EdgeUseMonitor::new(3);
            let list: Vec<&mut dyn Monitor<_, _>> = if config.monitors { vec![&mut props, &mut edges] } else { vec![] };
            let mut r = execute(&token_model(), &TokenSubject, config, &tree, Some(6 * (n - 1)), list)?;
            r.max_edge_use = edges.max_use();
            r
        }
        Algo::CleanMem => {
            let mut claim = SubtreeReturnMonitor::new(CLEANMEM_RATIO_CAP);
            let list: Vec<&mut dyn Monitor<_, _>> = if config.monitors { vec![&mut claim] } else { vec![] };
            execute(&cleanmem_model(), &CleanMemSubject, config, &tree, Some(CLEANMEM_RATIO_CAP * n), list)?
        }
        Algo::Rotor => execute(&rotor_model(), &RotorSubject, config, &tree, None, vec![])?,
        Algo::Table(_) => {
            let model = PathTableModel::new(config.algo.table().expect("validated id"), config.agent_bit);
            execute(&model, &TableSubject(model), config, &tree, None, vec![])?
        }
    };
    Ok(report)
}

/// Runs, then writes the report and the trace where configured.
pub fn simulate_to_files(config: &ExperimentConfig) -> Result<SimulationReport, HarnessError> {
    let report = simulate(config)?;
    report::emit(config.output.as_deref(), config, &report.to_json())?;
    if let Some(path) = &config.trace {
        report::emit(Some(path), config, &report.trace_jsonl())?;
    }
    Ok(report)
}
