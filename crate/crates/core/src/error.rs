use thiserror::Error;

use crate::hypercube::VertexId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension {0} is outside the supported range 0..={max}", max = crate::hypercube::MAX_DIM)]
    Dimension(usize),

    #[error("vertex {vertex:#x} does not belong to the subcube")]
    Membership { vertex: u64 },

    #[error("coordinate {coord} is not valid here: {reason}")]
    Coordinate { coord: usize, reason: &'static str },

    #[error("vertices {0:?} and {1:?} are not adjacent in the hypercube")]
    NotAdjacent(VertexId, VertexId),

    #[error("sample has no vertex model")]
    NoVertexModel,

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("no gadget plan: {0}")]
    Plan(String),

    #[error("outside the domain of the bound: {0}")]
    Domain(String),

    #[error("{what} needs {requested}, above the configured ceiling {limit}")]
    Capacity { what: &'static str, requested: u64, limit: u64 },

    #[error("vertex {vertex:#x} is not retained in the percolated graph")]
    NotRetained { vertex: u64 },

    #[error("vertex set is not connected in the percolated graph")]
    Disconnected,

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
