//! File formats, synthetic seasons, CLI and HTTP service around
//! [`anc_core`].

pub mod bundle;
pub mod cli;
pub mod csvio;
pub mod error;
pub mod manifest;
pub mod pipeline;
pub mod service;
pub mod synth;

pub use error::{AncError, Result};
