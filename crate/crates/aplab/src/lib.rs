//! File formats, seeded instance families, sweeps, regression fixtures and
//! JSON-lines traces on top of `aplab-core`.

pub mod error;
pub mod fixtures;
pub mod instances;
pub mod io;
pub mod sweep;
pub mod trace;

pub use error::{Error, Result};
