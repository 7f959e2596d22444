//! Truncated SU(1,1) operator algebra: discrete-series generators, coherent
//! states, the singular-oscillator conformal triple, canonical time operators
//! and cross-sector intertwiners, with windowed residual diagnostics.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conformal;
pub mod error;
pub mod intertwine;
pub mod matcore;
pub mod residual;
pub mod su11;
pub mod timeops;

pub use error::{Result, VlabError};
