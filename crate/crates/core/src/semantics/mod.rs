//! Execution and behavioral comparison.

pub mod bisim;
pub mod lts;
pub mod reduce;
pub mod trace;
pub mod values;

pub use bisim::{bounded_weak_sim, SimVerdict, TraceResult};
pub use lts::{Label, TauClass};
pub use reduce::reduce;
pub use trace::run_trace;
