//! Decomposition of session types and processes into minimal session types.

pub mod duo;
pub mod monadic;
pub mod proc;
pub mod rec;
pub mod types;

pub use proc::{decompose, Decomposition};
pub use types::{gt_chan, gt_env, gt_sess, gt_val, index_of, rt, rts};
