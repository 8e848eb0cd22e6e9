//! Session-typed higher-order processes and their translation into minimal
//! session types (session types without sequencing).
//!
//! The crate provides the process and type syntax, a parser and printer, a
//! typechecker with duality and balancedness, the decomposition of processes
//! and types into minimal form, a reduction engine with a labelled view of
//! internal steps, and a bounded weak-simulation checker comparing a process
//! with its decomposition.

pub mod congruence;
pub mod decomp;
pub mod gen;
pub mod report;
pub mod semantics;
pub mod subst;
pub mod surface;
pub mod syntax;
pub mod types;
pub mod typing;

pub use syntax::{degree, free_names, free_vars, Proc, Value};
pub use types::{ChanType, SessType, ValType};
