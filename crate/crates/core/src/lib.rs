//! Core algorithms for degeneracy-engineered l0-norm sparse regression.
//!
//! The pipeline implemented here casts regularized linear regression over
//! bit-encoded coefficients as a QUBO problem and solves it with population
//! annealing or path-integral Monte Carlo.  Regression targets come from jet
//! substructure: energy flow polynomials (EFPs) evaluated on synthetic jet
//! events, for which a catalog of exact sparse relations is known.
//!
//! The crate is `no_std`-compatible (with `alloc`); all IO, file formats and
//! the CLI live in the companion `efpqubo` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod anneal;
pub mod efp;
pub mod encoding;
pub mod error;
pub mod events;
pub mod pimc;
pub mod qubo;
pub mod regress;
pub mod rng;

mod linalg;

pub use error::{Error, Result};
