use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::optimize::optimize_with_engine;
use super::{MixerKind, OptimizerConfig, QaoaEngine, QaoaParams, TraceEntry, DEFAULT_QUBIT_CAP};
use crate::error::{Error, Result};
use crate::exact::Tour;
use crate::qubo::{Decoded, QuboProblem};
use crate::rng::derive_seed;
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QaoaConfig {
    pub p: usize,
    pub mixer: MixerKind,
    pub optimizer: OptimizerConfig,
    pub shots: usize,
    /// Seeds the measurement of the final state; the optimizer has its own.
    pub seed: u64,
    pub qubit_cap: usize,
}

impl Default for QaoaConfig {
    fn default() -> Self {
        QaoaConfig {
            p: 3,
            mixer: MixerKind::XyRing,
            optimizer: OptimizerConfig::default(),
            shots: 1024,
            seed: 0,
            qubit_cap: DEFAULT_QUBIT_CAP,
        }
    }
}

impl QaoaConfig {
    /// Derives the optimizer and sampling seeds from one trial seed.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.optimizer.seed = derive_seed(seed, &["qaoa", "optimizer"], 0);
        self.seed = derive_seed(seed, &["qaoa", "sample"], 0);
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct QaoaRunResult<T> {
    pub best_tour: Option<Tour>,
    pub best_length: Option<T>,
    pub expectation: T,
    pub feasible_fraction: f64,
    pub evals: usize,
    pub duration_s: f64,
    pub params: QaoaParams<T>,
    #[serde(skip)]
    pub trace: Vec<TraceEntry<T>>,
}

/// Optimizes the angles, prepares the final state, measures it `shots`
/// times and decodes every outcome. The best tour is the shortest feasible
/// sample (ties go to the smaller canonical order); when no sample is
/// feasible `best_tour` is `None`.
pub fn run_qaoa<T: Real>(q: &QuboProblem<T>, cfg: &QaoaConfig) -> Result<QaoaRunResult<T>> {
    if cfg.shots == 0 {
        return Err(Error::InvalidParameter("shots must be at least 1".into()));
    }
    let start = Instant::now();
    let engine = QaoaEngine::new(q, cfg.mixer, cfg.qubit_cap)?;
    let outcome = optimize_with_engine(&engine, cfg.p, &cfg.optimizer)?;
    let state = engine.evolve(&outcome.best);
    let expectation = engine.expectation(&state);

    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for idx in state.sample(cfg.shots, cfg.seed) {
        *counts.entry(idx).or_default() += 1;
    }
    let mut feasible = 0usize;
    let mut best: Option<(T, Tour)> = None;
    for (&idx, &count) in &counts {
        if let Decoded::Feasible(tour) = q.decode_index(idx) {
            feasible += count;
            let canon = tour.canonical();
            let len = q.tour_length(&canon);
            let better = match &best {
                None => true,
                Some((b, t)) => len < *b || (len == *b && canon < *t),
            };
            if better {
                best = Some((len, canon));
            }
        }
    }

    let evals = outcome.trace.len();
    Ok(QaoaRunResult {
        best_length: best.as_ref().map(|(l, _)| *l),
        best_tour: best.map(|(_, t)| t),
        expectation,
        feasible_fraction: feasible as f64 / cfg.shots as f64,
        evals,
        duration_s: start.elapsed().as_secs_f64(),
        params: outcome.best,
        trace: outcome.trace,
    })
}
