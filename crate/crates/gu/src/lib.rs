//! File formats, rendering, parallel sampling and the command line for
//! [`gu_core`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod cli;
pub mod manifest;
pub mod parallel;
pub mod schema;
pub mod svg;

pub use gu_core as core;
