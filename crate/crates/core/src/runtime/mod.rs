//! Execution-state machinery and the switch registry.

pub mod builtins;
pub mod distribution;
pub mod state;
pub mod switches;

pub use distribution::{Distribution, StoreKey};
pub use state::{initial_state, store_equivalent, ExecutionState, Frame, HistoryEntry, IdentifiedConstraint};
pub use switches::{Outcome, SwitchDist, SwitchRegistry};
