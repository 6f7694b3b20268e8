//! Simulation and verification of single-agent exploration on port-labelled trees.
//!
//! * [`topology`]: trees, paths, port labelings, memory initializations.
//! * [`engine`]: the step executor with loop detection and monitors.
//! * [`algorithms`]: clean-memory DFS, token exploration, Rotor-Router, 1-bit path tables.
//! * [`lowerbound`]: classification of every 1-bit path table.
//! * [`harness`]: experiment configuration, sweeps and report files.

#![forbid(unsafe_code)]

pub mod algorithms;
pub mod engine;
pub mod harness;
pub mod lowerbound;
pub mod topology;
