use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::RunRecord;
use crate::error::{Error, Result};
use crate::exact::{cycle_length, Tour};
use crate::graph::DistanceMatrix;
use crate::rng::seeded;
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SaConfig {
    pub t_initial: f64,
    pub t_final: f64,
    pub cooling_rate: f64,
    /// Proposals per temperature level; `None` means `100·n`.
    pub moves_per_temp: Option<usize>,
    pub seed: u64,
}

impl Default for SaConfig {
    fn default() -> Self {
        SaConfig {
            t_initial: 1000.0,
            t_final: 1.0,
            cooling_rate: 0.995,
            moves_per_temp: None,
            seed: 0,
        }
    }
}

impl SaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_final > 0.0 && self.t_initial > self.t_final && self.t_initial.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "need t_initial > t_final > 0, got {} and {}",
                self.t_initial, self.t_final
            )));
        }
        if !(self.cooling_rate > 0.0 && self.cooling_rate < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "cooling_rate must be in (0, 1), got {}",
                self.cooling_rate
            )));
        }
        if self.moves_per_temp == Some(0) {
            return Err(Error::InvalidParameter("moves_per_temp must be positive".into()));
        }
        Ok(())
    }

    /// Number of temperature levels, `ceil(ln(t_final/t_initial) / ln(rate))`.
    pub fn cooling_steps(&self) -> usize {
        ((self.t_final / self.t_initial).ln() / self.cooling_rate.ln()).ceil() as usize
    }
}

/// Metropolis rule: non-worsening moves are always taken; a worsening move
/// of size `delta` is taken with probability `exp(−delta/temp)`. Draws from
/// `rng` only for worsening moves.
pub fn accept_move<R: Rng>(delta: f64, temp: f64, rng: &mut R) -> bool {
    delta <= 0.0 || rng.random::<f64>() < (-delta / temp).exp()
}

/// Simulated annealing over 2-opt segment reversals with a geometric
/// cooling schedule.
///
/// Each proposal picks `1 ≤ i < j ≤ n−1` uniformly and reverses
/// `order[i..=j]`; city `order[0]` therefore never moves.
pub fn simulated_annealing<T: Real>(m: &DistanceMatrix<T>, cfg: &SaConfig) -> Result<RunRecord<T>> {
    cfg.validate()?;
    let start = Instant::now();
    let n = m.n();
    let mut rng = seeded(cfg.seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);

    let moves = cfg.moves_per_temp.unwrap_or(100 * n);
    let mut current = cycle_length(m, &order);
    let mut best_order = order.clone();
    let mut best = current;
    let mut evals = 1u64;
    let mut temp = cfg.t_initial;

    for _ in 0..cfg.cooling_steps() {
        for _ in 0..moves {
            let i = rng.random_range(1..n - 1);
            let j = rng.random_range(i + 1..n);
            let a = order[i - 1];
            let b = order[i];
            let c = order[j];
            let e = order[(j + 1) % n];
            let delta = m.get(a, c) + m.get(b, e) - m.get(a, b) - m.get(c, e);
            evals += 1;
            if accept_move(delta.as_f64(), temp, &mut rng) {
                order[i..=j].reverse();
                current += delta;
                if current < best {
                    // Resynchronize so incremental drift never fakes a record.
                    current = cycle_length(m, &order);
                    if current < best {
                        best = current;
                        best_order.copy_from_slice(&order);
                    }
                }
            }
        }
        temp *= cfg.cooling_rate;
    }

    let best_tour = Tour::from_vec_unchecked(best_order).canonical();
    Ok(RunRecord {
        solver: "sa".into(),
        best_length: cycle_length(m, best_tour.order()),
        best_tour,
        duration_s: start.elapsed().as_secs_f64(),
        evals,
        seed: cfg.seed,
    })
}
