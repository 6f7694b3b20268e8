//! Classification of every 1-bit path table, and the gadget report.

use serde::Serialize;

use crate::lowerbound::classify::{all_ids, orbit_count, EXPONENT_THRESHOLD, GROWTH_SIZES};
use crate::lowerbound::table::TransitionTable1Bit;
use crate::lowerbound::walk::verify_loop;
use crate::lowerbound::{classify_all, gadget_report, Classification, GadgetReport, Verdict};

use super::config::ExperimentConfig;
use super::report;
use super::HarnessError;

pub const COLUMNS: [&str; 5] = ["id", "canonical_id", "verdict", "detail", "witness"];

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct ClassificationRow {
    pub id: u16,
    pub canonical_id: u16,
    pub verdict: &'static str,
    pub detail: String,
    pub witness: String,
}

impl From<&Classification> for ClassificationRow {
    fn from(c: &Classification) -> Self {
        ClassificationRow {
            id: c.id,
            canonical_id: c.canonical_id,
            verdict: c.verdict.label(),
            detail: c.detail(),
            witness: c.witness(),
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ClassificationSummary {
    pub total: usize,
    pub orbits: usize,
    pub loop_count: usize,
    pub superlinear: usize,
    pub unclassified: usize,
    pub zero_unclassified: bool,
    /// Superlinear tables with one looping start state.
    pub mixed_starts: usize,
    pub censored_starts: usize,
    pub min_exponent: Option<f64>,
    pub max_exponent: Option<f64>,
    /// Superlinear starts whose fitted exponent is below the threshold.
    pub below_threshold: usize,
    /// Superlinear starts whose samples decrease somewhere.
    pub non_monotone: usize,
    /// Loop witnesses that failed engine replay.
    pub invalid_witnesses: usize,
    /// Tables that never loop from either start, and how many of those flip
    /// the vertex bit on every input, or flip the agent bit on every input.
    pub non_looping: usize,
    pub non_looping_vertex_always_flips: usize,
    pub non_looping_agent_always_flips: usize,
}

fn always_flips(t: &TransitionTable1Bit, agent: bool) -> bool {
    [(false, false), (false, true), (true, false), (true, true)].iter().all(|&(a, v)| {
        if agent {
            t.agent(a, v) != a
        } else {
            t.vertex(a, v) != v
        }
    })
}

pub fn summarize(all: &[Classification]) -> ClassificationSummary {
    let count = |v: Verdict| all.iter().filter(|c| c.verdict == v).count();
    let superlinear: Vec<&Classification> = all.iter().filter(|c| c.verdict == Verdict::Superlinear).collect();
    let starts = || superlinear.iter().flat_map(|c| c.starts.iter()).filter(|s| s.verdict == Verdict::Superlinear);
    let exponents: Vec<f64> = starts().filter_map(|s| s.exponent).collect();
    let non_looping: Vec<TransitionTable1Bit> = superlinear
        .iter()
        .filter(|c| c.starts.iter().all(|s| s.verdict == Verdict::Superlinear))
        .map(|c| TransitionTable1Bit::from_id(c.id).expect("valid id"))
        .collect();
    let mut invalid = 0;
    for c in all {
        let table = TransitionTable1Bit::from_id(c.id).expect("valid id");
        for s in c.starts.iter().filter(|s| s.verdict == Verdict::Loop) {
            let ok = s.witness.as_ref().is_some_and(|w| w.state == s.state && verify_loop(&table, w).is_ok());
            invalid += usize::from(!ok);
        }
    }
    let unclassified = count(Verdict::Unclassified);
    ClassificationSummary {
        total: all.len(),
        orbits: orbit_count(),
        loop_count: count(Verdict::Loop),
        superlinear: superlinear.len(),
        unclassified,
        zero_unclassified: unclassified == 0,
        mixed_starts: superlinear.len() - non_looping.len(),
        censored_starts: starts().filter(|s| s.censored).count(),
        min_exponent: exponents.iter().copied().reduce(f64::min),
        max_exponent: exponents.iter().copied().reduce(f64::max),
        below_threshold: starts().filter(|s| s.exponent.is_none_or(|e| e < EXPONENT_THRESHOLD)).count(),
        non_monotone: starts()
            .filter(|s| s.samples.len() != GROWTH_SIZES.len() || s.samples.windows(2).any(|w| w[1].1 < w[0].1))
            .count(),
        invalid_witnesses: invalid,
        non_looping: non_looping.len(),
        non_looping_vertex_always_flips: non_looping.iter().filter(|t| always_flips(t, false)).count(),
        non_looping_agent_always_flips: non_looping.iter().filter(|t| always_flips(t, true)).count(),
    }
}

pub struct EnumerationReport {
    pub classifications: Vec<Classification>,
    pub summary: ClassificationSummary,
}

impl EnumerationReport {
    pub fn rows(&self) -> Vec<ClassificationRow> {
        self.classifications.iter().map(ClassificationRow::from).collect()
    }

    /// CSV rows, then the summary as a trailing comment line.
    pub fn body(&self) -> Result<String, HarnessError> {
        Ok(report::csv_body(&self.rows(), &COLUMNS)? + &report::summary_line(&self.summary))
    }

    /// Every table classified, none unclassified, every witness valid, every exponent above the threshold.
    pub fn pass(&self) -> bool {
        let s = &self.summary;
        s.total == usize::from(crate::lowerbound::table::TABLE_COUNT)
            && s.zero_unclassified
            && s.invalid_witnesses == 0
            && s.below_threshold == 0
    }
}

fn pool(config: &ExperimentConfig) -> Result<rayon::ThreadPool, HarnessError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.max(1))
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))
}

/// Classifies all 4096 tables with the configured worker count.
pub fn enumerate_1bit(config: &ExperimentConfig) -> Result<EnumerationReport, HarnessError> {
    let classifications = pool(config)?.install(|| classify_all(&all_ids()));
    let summary = summarize(&classifications);
    Ok(EnumerationReport { classifications, summary })
}

pub fn enumerate_1bit_to_file(config: &ExperimentConfig) -> Result<EnumerationReport, HarnessError> {
    let r = enumerate_1bit(config)?;
    report::emit(config.output.as_deref(), config, &r.body()?)?;
    Ok(r)
}

pub fn gadgets(config: &ExperimentConfig) -> Result<GadgetReport, HarnessError> {
    pool(config)?.install(|| Ok(gadget_report()))
}

pub fn gadgets_to_file(config: &ExperimentConfig) -> Result<GadgetReport, HarnessError> {
    let r = gadgets(config)?;
    let body = serde_json::to_string_pretty(&r).expect("report serializes") + "\n";
    report::emit(config.output.as_deref(), config, &body)?;
    Ok(r)
}
