//! File formats, the bundled desktop scene and tasks, CSV export and the
//! command-line front end for `cablegrip-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod builtin;
pub mod cli;
pub mod format;
pub mod log;

pub use builtin::{builtin_task, builtin_tasks, z230_scene};
pub use format::{load_scene, load_task, parse_scene, parse_task, save_scene, FormatError};
