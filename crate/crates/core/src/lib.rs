//! Event-driven front tracking for 1D hyperbolic conservation laws.
//!
//! The crate evolves pairs of piecewise-constant entropy solutions (scalar
//! laws with general flux, and the genuinely nonlinear p-system), builds the
//! averaged coefficient field of a solution pair, classifies every
//! discontinuity of that field (compressive / undercompressive /
//! rarefaction), constructs dissipative weights along backward generalized
//! characteristics, and verifies weighted-functional decay and L1
//! continuous-dependence estimates by direct computation.

pub mod error;
pub mod field;
pub mod flux;
pub mod harness;
pub mod linalg;
pub mod partition;
pub mod report;
pub mod riemann;
pub mod scenario;
pub mod tracking;
pub mod weight;

pub use error::FtError;
pub use flux::{FluxModel, State};
