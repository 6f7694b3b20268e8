//! Classification of 1-bit path automata.

pub mod blocks;
pub mod classify;
pub mod gadgets;
pub mod search;
pub mod table;
pub mod threeports;
pub mod walk;

pub use classify::{classify, classify_all, Classification, StartVerdict, Verdict};
pub use gadgets::{gadget_report, gadget_suite, GadgetReport, GadgetSpec, GadgetTemplate};
pub use search::{worst_time_to_endpoint, Strategy};
pub use table::{enumerate_tables, Symmetry, TransitionTable1Bit};
pub use walk::{PathInit, Walk};
