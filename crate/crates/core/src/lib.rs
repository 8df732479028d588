//! Core of the all-or-nothing lineup classifier (ANC).
//!
//! A five-player lineup is described by the order statistics of its players'
//! per-minute statistics. Seven subclassifiers (decision tree, random forest,
//! AdaBoost, RBF support vector machine, k-nearest neighbours, logistic
//! regression and linear discriminant analysis) each vote on whether the
//! lineup is `elite` (positive plus-minus per minute); the ensemble predicts
//! `elite` only when at least `num_votes` of them agree.
//!
//! The crate is `no_std` and only needs `alloc`. Reading CSV files, the
//! synthetic season generator, model files, the CLI and the HTTP service live
//! in the `lineup-anc` companion crate.

#![no_std]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod ensemble;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod ingest;
pub mod linalg;
pub mod rosterlab;
pub mod seed;
pub mod stats;
pub mod subclassifiers;

pub use error::{Error, Result};
pub use stats::{Label, Lineup, PlayerSeasonStats, NUM_FEATURES, NUM_STATS, STAT_NAMES};
