//! File formats, corpus evaluation and the command line for table
//! extraction metrics.
//!
//! Metric kernels live in `tablegrid-core`. This crate reads annotations and
//! predictions from disk, runs per-sample evaluation on a worker pool, and
//! merges results in sample order so reports do not depend on the number
//! of workers.

pub mod cli;
pub mod evaluate;
pub mod io;
