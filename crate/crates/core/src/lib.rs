//! Deterministic fixed-capacity 2D rigid-body simulation and the control-task
//! environment built on top of it.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod engine;
pub mod env;
pub mod geometry;
pub mod levelgen;
