//! Simulation and analysis of the zealot voter model on trees and its dual
//! coalescing branching random walk (COBRA).
//!
//! The crate is organised around a single graphical representation: a
//! replayable [`EventLog`] from which both the forward zealot process and
//! its dual can be read off. The fast simulators in [`zealot`] and
//! [`cobra`] run the same dynamics without materialising a log, and
//! [`thresholds`] holds the analytic survival / local-survival criteria
//! that the simulators are checked against.

// `!(x >= 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cobra;
pub mod error;
pub mod estimate;
pub mod graphical;
pub mod harness;
pub mod params;
pub mod rng;
pub mod thresholds;
pub mod tree;
pub mod zealot;

pub use error::{Error, Result};
pub use estimate::Estimate;
pub use graphical::{Event, EventLog, OccupiedSet};
pub use params::ModelParams;
pub use rng::replicate_seeds;
pub use tree::{DegreeDist, Tree, TreeSpec, Vertex, VertexSet};
