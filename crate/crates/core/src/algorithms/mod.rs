//! Concrete agent models and the monitors that check them.

pub mod cleanmem;
pub mod monitors;
pub mod pathtable;
pub mod rotor;
pub mod token;

pub use cleanmem::{cleanmem_model, CleanMem, CleanMemCell, CleanMemState};
pub use monitors::{EdgeUseMonitor, SubtreeReturnMonitor, TokenPropertyMonitor};
pub use pathtable::{Bit, EndpointBehavior, PathTableModel};
pub use rotor::{rotor_model, Rotor, RotorCell};
pub use token::{token_model, TokenAlgo, TokenCell, TokenState};

pub use crate::lowerbound::table::named_table;
