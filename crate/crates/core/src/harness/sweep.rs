//! Batch execution of one algorithm over many (tree, labeling, start, init) instances.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::hash::Hash;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::algorithms::{
    cleanmem_model, rotor_model, token_model, Bit, CleanMemCell, EdgeUseMonitor, PathTableModel, RotorCell,
    SubtreeReturnMonitor, TokenCell, TokenPropertyMonitor,
};
use crate::engine::{run_cells, Monitor, Rooted, RunOptions, RunStatus, Stop, Violation};
use crate::topology::{
    build_path, enumerate_port_labelings, enumerate_trees, random_memory, random_tree, rng_from_seed, MemoryCell,
    MemoryInit, MemoryOdometer, PortLabeledTree,
};

use super::config::{Algo, ExperimentConfig, InitSource, LabelingSource, StartSource, TreeSource};
use super::HarnessError;

/// Moves per node allowed to the clean-memory algorithm before a run is flagged.
pub const CLEANMEM_RATIO_CAP: u64 = 10;

/// SplitMix64 of `seed` combined with `index`: independent per-instance seeds.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct InstanceResult {
    pub status: RunStatus,
    pub steps: u64,
    pub cover_time: Option<u64>,
    pub visited: usize,
    pub final_position: usize,
    /// The algorithm did what it promises (explore and stop at the start, or cover).
    pub ok: bool,
    /// The quantitative bound for this algorithm held.
    pub bound_ok: bool,
    pub violations: Vec<Violation>,
    pub max_edge_use: u32,
    pub subtree_ratio: f64,
}

/// How one algorithm is run and judged in a sweep.
pub trait Subject: Sync {
    type Cell: MemoryCell + Copy + Send + Sync + Eq + Hash + Debug + Serialize + DeserializeOwned;

    fn clean(&self, degree: usize) -> Self::Cell;

    /// Whether the start cell is irrelevant (fully overwritten before being read).
    fn pin_start(&self) -> bool {
        false
    }

    fn default_budget(&self, n: usize) -> u64;

    fn evaluate(
        &self,
        tree: &PortLabeledTree,
        rooted: &Rooted,
        cells: Vec<Self::Cell>,
        start: usize,
        budget: u64,
        monitors: bool,
    ) -> InstanceResult;
}

fn finish(out_status: RunStatus, steps: u64, cover: Option<u64>, visited: usize, pos: usize) -> InstanceResult {
    InstanceResult {
        status: out_status,
        steps,
        cover_time: cover,
        visited,
        final_position: pos,
        ok: false,
        bound_ok: false,
        violations: Vec::new(),
        max_edge_use: 0,
        subtree_ratio: 0.0,
    }
}

pub struct TokenSubject;

impl Subject for TokenSubject {
    type Cell = TokenCell;

    fn clean(&self, _: usize) -> TokenCell {
        TokenCell {
            last: 1,
            parent: None,
            root: false,
        }
    }

    fn pin_start(&self) -> bool {
        true
    }

    fn default_budget(&self, n: usize) -> u64 {
        12 * n as u64 + 10
    }

    fn evaluate(
        &self,
        tree: &PortLabeledTree,
        rooted: &Rooted,
        cells: Vec<TokenCell>,
        start: usize,
        budget: u64,
        monitors: bool,
    ) -> InstanceResult {
        let n = tree.n();
        let mut props = TokenPropertyMonitor::new();
        let mut edges = EdgeUseMonitor::new(3);
        let options = RunOptions::new(budget, Stop::SelfTermination);
        let out = if monitors {
            run_cells(&token_model(), tree, cells, start, options, Some(rooted), &mut [&mut props, &mut edges])
        } else {
            run_cells(&token_model(), tree, cells, start, options, Some(rooted), &mut [])
        };
        let mut r = finish(out.status, out.steps, out.cover_time, out.visited_count, out.final_config.position);
        r.ok = r.status == RunStatus::Terminated && r.final_position == start && r.visited == n;
        r.bound_ok = r.steps <= 6 * (n as u64 - 1);
        r.violations.extend_from_slice(Monitor::<_, _>::violations(&props));
        r.violations.extend_from_slice(edges.violations());
        r.max_edge_use = edges.max_use();
        r
    }
}

pub struct CleanMemSubject;

impl Subject for CleanMemSubject {
    type Cell = CleanMemCell;

    fn clean(&self, _: usize) -> CleanMemCell {
        CleanMemCell::CLEAN
    }

    fn default_budget(&self, n: usize) -> u64 {
        20 * n as u64 + 10
    }

    fn evaluate(
        &self,
        tree: &PortLabeledTree,
        rooted: &Rooted,
        cells: Vec<CleanMemCell>,
        start: usize,
        budget: u64,
        monitors: bool,
    ) -> InstanceResult {
        let n = tree.n();
        let mut claim = SubtreeReturnMonitor::new(CLEANMEM_RATIO_CAP);
        let mut edges = EdgeUseMonitor::new(u32::MAX - 1);
        let options = RunOptions::new(budget, Stop::SelfTermination).with_loops();
        let out = if monitors {
            run_cells(&cleanmem_model(), tree, cells, start, options, Some(rooted), &mut [&mut claim, &mut edges])
        } else {
            run_cells(&cleanmem_model(), tree, cells, start, options, Some(rooted), &mut [])
        };
        let mut r = finish(out.status, out.steps, out.cover_time, out.visited_count, out.final_config.position);
        r.ok = r.status == RunStatus::Terminated && r.final_position == start && r.visited == n;
        r.bound_ok = r.steps <= CLEANMEM_RATIO_CAP * n as u64;
        r.violations.extend_from_slice(Monitor::<_, _>::violations(&claim));
        r.max_edge_use = edges.max_use();
        r.subtree_ratio = claim.max_ratio;
        r
    }
}

pub struct RotorSubject;

impl Subject for RotorSubject {
    type Cell = RotorCell;

    fn clean(&self, _: usize) -> RotorCell {
        RotorCell { last: 1 }
    }

    fn default_budget(&self, n: usize) -> u64 {
        4 * (n * n) as u64 + 10
    }

    fn evaluate(
        &self,
        tree: &PortLabeledTree,
        rooted: &Rooted,
        cells: Vec<RotorCell>,
        start: usize,
        budget: u64,
        _monitors: bool,
    ) -> InstanceResult {
        let n = tree.n() as u64;
        let options = RunOptions::new(budget, Stop::AllVisited);
        let out = run_cells(&rotor_model(), tree, cells, start, options, Some(rooted), &mut []);
        let mut r = finish(out.status, out.steps, out.cover_time, out.visited_count, out.final_config.position);
        r.ok = r.status == RunStatus::CoverReached;
        r.bound_ok = r.cover_time.is_some_and(|c| c <= 2 * (n - 1) * n);
        r
    }
}

pub struct TableSubject(pub PathTableModel);

impl Subject for TableSubject {
    type Cell = Bit;

    fn clean(&self, _: usize) -> Bit {
        Bit(false)
    }

    fn default_budget(&self, n: usize) -> u64 {
        10 * (n * n) as u64 + 10
    }

    fn evaluate(
        &self,
        tree: &PortLabeledTree,
        rooted: &Rooted,
        cells: Vec<Bit>,
        start: usize,
        budget: u64,
        _monitors: bool,
    ) -> InstanceResult {
        let options = RunOptions::new(budget, Stop::AllVisited).with_loops();
        let out = run_cells(&self.0, tree, cells, start, options, Some(rooted), &mut []);
        let mut r = finish(out.status, out.steps, out.cover_time, out.visited_count, out.final_config.position);
        r.ok = r.status == RunStatus::CoverReached;
        r.bound_ok = true;
        r
    }
}

#[derive(Debug, Clone, Default, Serialize, PartialEq)]
pub struct PerSize {
    pub instances: u64,
    pub max_steps: u64,
    pub max_cover_time: Option<u64>,
}

#[derive(Debug, Clone, Default, Serialize, PartialEq)]
pub struct SweepSummary {
    pub instances: u64,
    pub failures: u64,
    pub bound_violations: u64,
    pub budget_exhausted: u64,
    pub model_faults: u64,
    pub monitor_violations: BTreeMap<String, u64>,
    pub max_steps_per_node: f64,
    pub max_edge_use: u32,
    pub max_subtree_ratio: f64,
    pub per_size: BTreeMap<usize, PerSize>,
    /// First few failing instances, described.
    pub examples: Vec<String>,
}

const MAX_EXAMPLES: usize = 10;

impl SweepSummary {
    fn absorb(&mut self, n: usize, key: &RowKey, r: &InstanceResult) {
        self.instances += 1;
        let bad = !r.ok || !r.bound_ok || !r.violations.is_empty();
        if !r.ok {
            self.failures += 1;
        }
        if !r.bound_ok {
            self.bound_violations += 1;
        }
        match r.status {
            RunStatus::BudgetExhausted => self.budget_exhausted += 1,
            RunStatus::ModelFault(_) => self.model_faults += 1,
            _ => {}
        }
        for v in &r.violations {
            *self.monitor_violations.entry(v.property.clone()).or_default() += 1;
        }
        self.max_steps_per_node = self.max_steps_per_node.max(r.steps as f64 / n as f64);
        self.max_edge_use = self.max_edge_use.max(r.max_edge_use);
        self.max_subtree_ratio = self.max_subtree_ratio.max(r.subtree_ratio);
        let s = self.per_size.entry(n).or_default();
        s.instances += 1;
        s.max_steps = s.max_steps.max(r.steps);
        if let Some(c) = r.cover_time {
            s.max_cover_time = Some(s.max_cover_time.map_or(c, |m| m.max(c)));
        }
        if bad && self.examples.len() < MAX_EXAMPLES {
            let first = r.violations.first().map(|v| format!(" {}: {}", v.property, v.detail)).unwrap_or_default();
            self.examples.push(format!(
                "n={} shape={} labeling={} start={} init={} status={} steps={}{}",
                n,
                key.shape,
                key.labeling,
                key.start,
                key.init,
                r.status.label(),
                r.steps,
                first
            ));
        }
    }

    fn merge(&mut self, other: SweepSummary) {
        self.instances += other.instances;
        self.failures += other.failures;
        self.bound_violations += other.bound_violations;
        self.budget_exhausted += other.budget_exhausted;
        self.model_faults += other.model_faults;
        for (k, v) in other.monitor_violations {
            *self.monitor_violations.entry(k).or_default() += v;
        }
        self.max_steps_per_node = self.max_steps_per_node.max(other.max_steps_per_node);
        self.max_edge_use = self.max_edge_use.max(other.max_edge_use);
        self.max_subtree_ratio = self.max_subtree_ratio.max(other.max_subtree_ratio);
        for (n, s) in other.per_size {
            let e = self.per_size.entry(n).or_default();
            e.instances += s.instances;
            e.max_steps = e.max_steps.max(s.max_steps);
            e.max_cover_time = match (e.max_cover_time, s.max_cover_time) {
                (Some(a), Some(b)) => Some(a.max(b)),
                (a, b) => a.or(b),
            };
        }
        for ex in other.examples {
            if self.examples.len() < MAX_EXAMPLES {
                self.examples.push(ex);
            }
        }
    }

    pub fn violation_total(&self) -> u64 {
        self.monitor_violations.values().sum()
    }

    /// No failure, no bound violation and no monitor violation.
    pub fn clean(&self) -> bool {
        self.failures == 0 && self.bound_violations == 0 && self.violation_total() == 0
    }
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq, Eq)]
pub struct RowKey {
    pub shape: usize,
    pub labeling: u64,
    pub start: usize,
    pub init: u64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub shape: usize,
    pub labeling: u64,
    pub start: usize,
    pub init: u64,
    pub status: String,
    pub steps: u64,
    pub cover_time: Option<u64>,
    pub visited: usize,
    pub ok: bool,
    pub bound_ok: bool,
    pub violations: usize,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SweepReport {
    pub summary: SweepSummary,
    #[serde(skip)]
    pub rows: Vec<SweepRow>,
}

/// A unit of parallel work: one labelled tree, plus its sampling seed if any.
struct Job {
    n: usize,
    shape: usize,
    labeling: u64,
    tree: PortLabeledTree,
    sample_seed: Option<u64>,
}

pub(crate) fn relabel_randomly(tree: &PortLabeledTree, seed: u64) -> PortLabeledTree {
    let mut rng = rng_from_seed(seed);
    let mut ports = tree.port_lists().to_vec();
    for list in &mut ports {
        list.shuffle(&mut rng);
    }
    PortLabeledTree::new(ports).expect("relabeling keeps a tree")
}

fn jobs_for(config: &ExperimentConfig) -> Result<Vec<Job>, HarnessError> {
    let mut shapes: Vec<(usize, usize, PortLabeledTree)> = Vec::new();
    let mut samples = None;
    match &config.tree {
        TreeSource::File(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io(path.display().to_string(), e.to_string()))?;
            let t = PortLabeledTree::from_json(&text)?;
            shapes.push((t.n(), 0, t));
        }
        TreeSource::Path(n) => {
            let p = build_path(*n, &vec![true; n.saturating_sub(2)])?;
            shapes.push((*n, 0, p.into_tree()));
        }
        TreeSource::Random { n, seed } => shapes.push((*n, 0, random_tree(*n, *seed)?)),
        TreeSource::All { min, max } => {
            for n in *min..=*max {
                for (i, t) in enumerate_trees(n)?.into_iter().enumerate() {
                    shapes.push((n, i, t));
                }
            }
        }
        TreeSource::Paths { min, max } => {
            for n in *min..=*max {
                let p = build_path(n, &vec![true; n.saturating_sub(2)])?;
                shapes.push((n, 0, p.into_tree()));
            }
        }
        TreeSource::Samples { n, count, seed } => samples = Some((*n, *count, *seed)),
    }
    if let Some((n, count, seed)) = samples {
        return (0..count)
            .map(|i| {
                let s = derive_seed(seed, i);
                Ok(Job {
                    n,
                    shape: i as usize,
                    labeling: 0,
                    tree: random_tree(n, s)?,
                    sample_seed: Some(s),
                })
            })
            .collect();
    }
    let mut jobs = Vec::new();
    for (n, shape, tree) in shapes {
        match config.labeling {
            LabelingSource::Given => jobs.push(Job { n, shape, labeling: 0, tree, sample_seed: None }),
            LabelingSource::Seed(s) => {
                let t = relabel_randomly(&tree, derive_seed(s, shape as u64));
                jobs.push(Job { n, shape, labeling: 0, tree: t, sample_seed: None });
            }
            LabelingSource::Enumerate => {
                for (i, t) in enumerate_port_labelings(&tree).enumerate() {
                    jobs.push(Job { n, shape, labeling: i as u64, tree: t, sample_seed: None });
                }
            }
        }
    }
    Ok(jobs)
}

struct JobOutput {
    summary: SweepSummary,
    rows: Vec<SweepRow>,
}

fn run_job<S: Subject>(subject: &S, config: &ExperimentConfig, job: &Job, file_init: Option<&[S::Cell]>) -> JobOutput {
    let n = job.n;
    let tree = &job.tree;
    let budget = config.budget.unwrap_or_else(|| subject.default_budget(n));
    let mut summary = SweepSummary::default();
    let mut rows = Vec::new();
    let mut record = |start: usize, init: u64, r: InstanceResult, summary: &mut SweepSummary| {
        let key = RowKey { shape: job.shape, labeling: job.labeling, start, init };
        summary.absorb(n, &key, &r);
        if config.rows {
            rows.push(SweepRow {
                n,
                shape: job.shape,
                labeling: job.labeling,
                start,
                init,
                status: r.status.label().to_string(),
                steps: r.steps,
                cover_time: r.cover_time,
                visited: r.visited,
                ok: r.ok,
                bound_ok: r.bound_ok,
                violations: r.violations.len(),
            });
        }
    };

    let starts = match (job.sample_seed, config.start) {
        (Some(s), StartSource::Random) => vec![rng_from_seed(s ^ 0x5157_4152_5400_0000).gen_range(0..n)],
        _ => config.start.starts(n),
    };
    for start in starts {
        let rooted = Rooted::new(tree, start);
        let clean: Vec<S::Cell> = (0..n).map(|v| subject.clean(tree.degree(v))).collect();
        match &config.init {
            InitSource::Clean => {
                let r = subject.evaluate(tree, &rooted, clean, start, budget, config.monitors);
                record(start, 0, r, &mut summary);
            }
            InitSource::Dirty(seed) => {
                let s = match job.sample_seed {
                    Some(sample) => derive_seed(sample, *seed),
                    None => derive_seed(*seed, (job.shape as u64) << 32 ^ job.labeling << 8 ^ start as u64),
                };
                let init: MemoryInit<S::Cell> = random_memory(tree, s);
                let r = subject.evaluate(tree, &rooted, init.cells, start, budget, config.monitors);
                record(start, 0, r, &mut summary);
            }
            InitSource::File(_) => {
                let cells = file_init.expect("memory file loaded").to_vec();
                let r = subject.evaluate(tree, &rooted, cells, start, budget, config.monitors);
                record(start, 0, r, &mut summary);
            }
            InitSource::Enumerate => {
                let pinned: Vec<usize> = if subject.pin_start() { vec![start] } else { Vec::new() };
                let mut odo = MemoryOdometer::new(tree, &clean, &pinned);
                let mut index = 0u64;
                while let Some(cells) = odo.current() {
                    let r = subject.evaluate(tree, &rooted, cells.to_vec(), start, budget, config.monitors);
                    record(start, index, r, &mut summary);
                    index += 1;
                    odo.advance();
                }
            }
        }
    }
    JobOutput { summary, rows }
}

fn sweep_subject<S: Subject>(subject: &S, config: &ExperimentConfig) -> Result<SweepReport, HarnessError> {
    let jobs = jobs_for(config)?;
    let file_init: Option<Vec<S::Cell>> = match &config.init {
        InitSource::File(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io(path.display().to_string(), e.to_string()))?;
            let tree = &jobs.first().ok_or(HarnessError::NoInstances)?.tree;
            Some(MemoryInit::<S::Cell>::from_json(&text, tree)?.cells)
        }
        _ => None,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.max(1))
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))?;
    let outputs: Vec<JobOutput> =
        pool.install(|| jobs.par_iter().map(|job| run_job(subject, config, job, file_init.as_deref())).collect());
    let mut report = SweepReport::default();
    for out in outputs {
        report.summary.merge(out.summary);
        report.rows.extend(out.rows);
    }
    Ok(report)
}

/// Runs the configured algorithm over every configured instance.
pub fn sweep(config: &ExperimentConfig) -> Result<SweepReport, HarnessError> {
    match config.algo {
        Algo::Token => sweep_subject(&TokenSubject, config),
        Algo::CleanMem => sweep_subject(&CleanMemSubject, config),
        Algo::Rotor => sweep_subject(&RotorSubject, config),
        Algo::Table(_) => {
            let table = config.algo.table().expect("validated id");
            sweep_subject(&TableSubject(PathTableModel::new(table, config.agent_bit)), config)
        }
    }
}

pub const SWEEP_COLUMNS: [&str; 12] = [
    "n", "shape", "labeling", "start", "init", "status", "steps", "cover_time", "visited", "ok", "bound_ok", "violations",
];

impl SweepReport {
    /// Per-instance CSV rows (empty unless rows were requested), then the summary line.
    pub fn body(&self) -> Result<String, HarnessError> {
        Ok(super::report::csv_body(&self.rows, &SWEEP_COLUMNS)? + &super::report::summary_line(&self.summary))
    }
}

pub fn sweep_to_file(config: &ExperimentConfig) -> Result<SweepReport, HarnessError> {
    let r = sweep(config)?;
    super::report::emit(config.output.as_deref(), config, &r.body()?)?;
    Ok(r)
}
