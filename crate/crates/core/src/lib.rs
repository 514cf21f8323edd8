//! Route-optimization laboratory: TSP instances encoded as QUBO problems,
//! solved with an exact statevector QAOA engine and with classical
//! heuristics, then benchmarked against exact oracles.
//!
//! All numerical code is generic over a [`Real`] scalar (`f32` or `f64`).
//! The aliases at the crate root pin the common `f64` and `f32` forms.

pub mod bench;
pub mod classical;
pub mod error;
pub mod exact;
pub mod graph;
pub mod qaoa;
pub mod qubo;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
pub use exact::Tour;
pub use scalar::Real;

pub type Graph64 = graph::Graph<f64>;
pub type Graph32 = graph::Graph<f32>;
pub type DistanceMatrix64 = graph::DistanceMatrix<f64>;
pub type DistanceMatrix32 = graph::DistanceMatrix<f32>;
pub type QuboProblem64 = qubo::QuboProblem<f64>;
pub type QuboProblem32 = qubo::QuboProblem<f32>;
pub type Penalties64 = qubo::Penalties<f64>;
pub type Statevector64 = qaoa::Statevector<f64>;
pub type Statevector32 = qaoa::Statevector<f32>;
pub type QaoaParams64 = qaoa::QaoaParams<f64>;
pub type QaoaRunResult64 = qaoa::QaoaRunResult<f64>;
pub type RunRecord64 = classical::RunRecord<f64>;
pub type RunRecord32 = classical::RunRecord<f32>;
