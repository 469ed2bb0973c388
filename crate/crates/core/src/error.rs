use thiserror::Error;

use crate::ext::ExtReal;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A closed form or construction was asked for outside the parameter
    /// region where it is known to be valid.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("bounded support: tail vanishes at x = {0}")]
    BoundedSupport(f64),

    #[error("tail value {value} at x = {x} exceeds 1")]
    TailAboveOne { x: f64, value: f64 },

    #[error("inadmissible risk function: {0}")]
    Inadmissible(String),

    #[error("argument {0} is beyond the construction horizon {1}")]
    BeyondHorizon(ExtReal, ExtReal),

    #[error("horizon too short: component {component} reaches risk {reached}, sampling needs {required:.4}")]
    HorizonTooShort {
        component: usize,
        reached: ExtReal,
        required: f64,
    },

    #[error("sequence is not strictly increasing at index {0}")]
    NonMonotone(usize),

    #[error("{0}")]
    SubsetSize(String),

    #[error("empty input: {0}")]
    Empty(&'static str),
}
