//! Exact Fourier analysis, Bohr sets and density-increment machinery for
//! locating long arithmetic progressions in sumsets `A + B + C` over Z/NZ.
//!
//! Everything here works with `alloc` only; file formats, the command line
//! and the sweep harness live in the `aplab` crate.

#![no_std]

extern crate alloc;

pub mod almost_period;
pub mod ap;
pub mod bohr;
pub mod cyclic;
pub mod error;
pub mod policy;
pub mod pipelines;
pub mod set;
pub mod setgen;
pub mod transforms;

pub use ap::Ap;
pub use bohr::BohrSet;
pub use cyclic::{GroupFunction, Spectrum};
pub use error::{Error, Result};
pub use policy::Policy;
pub use set::SetOnZN;
