#![no_std]
// NaN must fail range checks, hence `!(x >= lo)` style comparisons.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod cable;
pub mod geometry;
pub mod kinematics;
pub mod pose;
pub mod scene;
pub mod tasks;
