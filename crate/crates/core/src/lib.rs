//! Finite machinery for Bernoulli bond percolation on slabs `Z^2 x {0, ..., k}`:
//! geometry, sampling, cluster events, exact enumeration, Monte Carlo
//! estimators, the path surgeries of the gluing argument and the block
//! renormalization certificate.
//!
//! The crate is `no_std` with `alloc`; parallelism is injected through
//! [`exec::Executor`].

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod connectivity;
pub mod error;
pub mod estimators;
pub mod exec;
pub mod gluing;
pub mod lattice;
pub mod oracle;
pub mod renorm;
pub mod sampler;
pub mod stats;

pub use error::{Error, Result};
