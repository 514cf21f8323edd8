//! Classical baselines: simulated annealing, a genetic algorithm, and the
//! 2-opt refinement used to polish QAOA-seeded tours.

mod ga;
mod sa;

pub use ga::{
    genetic_algorithm, ordered_crossover, swap_mutation, swap_mutation_with, tournament_select,
    tournament_select_with, GaConfig,
};
pub use sa::{accept_move, simulated_annealing, SaConfig};

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exact::{tour_length, two_opt_descent, Tour};
use crate::graph::DistanceMatrix;
use crate::scalar::Real;

/// Outcome of one solver run. `best_length` is always
/// `tour_length(best_tour)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct RunRecord<T> {
    pub solver: String,
    pub best_tour: Tour,
    pub best_length: T,
    pub duration_s: f64,
    pub evals: u64,
    pub seed: u64,
}

impl<T: PartialEq> RunRecord<T> {
    /// Equality ignoring the wall-clock field.
    pub fn same_outcome(&self, other: &Self) -> bool {
        self.solver == other.solver
            && self.best_tour == other.best_tour
            && self.best_length == other.best_length
            && self.evals == other.evals
            && self.seed == other.seed
    }
}

/// 2-opt descent from `seed_tour`. `evals` counts the descent as one
/// objective evaluation of the final tour plus one of the seed.
pub fn hybrid_refine<T: Real>(m: &DistanceMatrix<T>, seed_tour: &Tour) -> Result<RunRecord<T>> {
    let start = Instant::now();
    let refined = two_opt_descent(m, seed_tour)?.canonical();
    let best_length = tour_length(m, &refined)?;
    Ok(RunRecord {
        solver: "hybrid".into(),
        best_tour: refined,
        best_length,
        duration_s: start.elapsed().as_secs_f64(),
        evals: 2,
        seed: 0,
    })
}
