//! Evaluation kernels for table extraction.
//!
//! This crate holds the allocation-only core: the grid model for recognized
//! tables, tolerant parsers for HTML and span-annotated markdown tables, the
//! GriTS family of grid similarity metrics, corpus aggregation and set
//! matching, page-graph and detection metrics, and the dataset construction
//! procedures (multi-part verification and continuation pair sampling).
//!
//! File formats, corpus traversal and the command line live in the
//! `tablegrid-eval` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod aggregate;
pub mod assignment;
pub mod datagen;
pub mod document;
pub mod graph;
pub mod grits;
pub mod matching;
pub mod parse;
pub mod table;
pub mod text;

pub use aggregate::{
    aggregate_mean, aggregate_pseudo_f1, binary_prf, exact_match_accuracy, AggregateError,
    AggregateMode, AggregateScore, BinaryScores,
};
pub use grits::{grits, Alignment2D, Criterion, GritsResult};
pub use matching::{match_table_sets, TableSetMatch};
pub use table::{build_grid, grid_exact_match, CellSpan, GridError, LogicalCell, TableGrid};
