//! Error type shared by all core modules.

use alloc::string::String;
use core::fmt;

/// Errors produced by core operations.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument violates a precondition (bad range, non-positive scale, ...).
    InvalidParameter(String),
    /// Two inputs that must agree in size do not.
    DimensionMismatch { expected: usize, got: usize },
    /// An exhaustive-enumeration operation was asked to exceed its size cap.
    CapacityExceeded { limit: usize, got: usize },
    /// An event does not satisfy the restriction required by a relation.
    RestrictionViolated { event_index: usize, detail: String },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::CapacityExceeded { limit, got } => {
                write!(f, "capacity exceeded: limit {limit}, got {got}")
            }
            Error::RestrictionViolated { event_index, detail } => {
                write!(f, "event {event_index} violates relation restriction: {detail}")
            }
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
