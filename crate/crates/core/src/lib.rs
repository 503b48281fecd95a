//! Even cycle lengths in the percolated hypercube `Q^d_p`.
//!
//! The crate builds cycles of prescribed even length in a seed-deterministic
//! percolated hypercube with four constructions (very short, short, medium
//! and long cycles), and checks them against exact formulas, a brute-force
//! cycle oracle and Monte Carlo estimates.

pub mod builder;
pub mod components;
pub mod error;
pub mod hypercube;
pub mod monotone;
pub mod oracle;
pub mod percolation;
pub mod walk;

pub use error::{Error, Result};
pub use hypercube::{EdgeId, OrientedSubcube, Subcube, VertexId};
pub use percolation::{ClassSet, PercolationSample, VertexClass, VertexModel};
pub use walk::{Cycle, Path};
