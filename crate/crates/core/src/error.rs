use std::io;

use thiserror::Error;

use crate::solver::SolverReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("argument {value} outside the domain of {what}")]
    Domain { what: &'static str, value: f64 },

    #[error("derivative of {0} is singular at t = 0")]
    Singularity(&'static str),

    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("level {level} out of range 1..={max}")]
    LevelOutOfRange { level: usize, max: usize },

    #[error("mask selects no pixels")]
    EmptyMask,

    #[error("degenerate histogram: {0}")]
    DegenerateHistogram(String),

    #[error("image {width}x{height} is smaller than the {window}x{window} window")]
    ImageTooSmall { width: usize, height: usize, window: usize },

    #[error("inner solve did not converge (relative residual {residual:.3e} after {iterations} iterations)")]
    Convergence {
        iterations: usize,
        residual: f64,
        report: Box<SolverReport>,
    },

    #[error("malformed PGM: {0}")]
    Pgm(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}
