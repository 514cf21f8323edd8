//! Derivative-free search over QAOA angles.
//!
//! The optimizers work in normalized units: the search variable for layer
//! `k` is `γ̃_k = γ_k·E` and the objective is `⟨H⟩ / E`, with
//! `E = C·max d` from [`QuboProblem::energy_scale`]. This keeps step sizes
//! meaningful regardless of the instance's distance units. Everything
//! reported back (trace, best params) is in physical radians and energy.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{MixerKind, QaoaEngine, QaoaParams};
use crate::error::{Error, Result};
use crate::qubo::QuboProblem;
use crate::rng::{derive_seed, seeded};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerMethod {
    Spsa,
    CoordinateSearch,
}

/// Gain sequences `a_k = a/(k+1+A)^alpha`, `c_k = c/(k+1)^gamma_decay`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpsaGains {
    pub a: f64,
    pub c: f64,
    pub alpha: f64,
    pub gamma_decay: f64,
    /// Stability constant `A`; `None` means `max_evals / 10`.
    pub a_stability: Option<f64>,
}

impl Default for SpsaGains {
    fn default() -> Self {
        SpsaGains {
            a: 0.2,
            c: 0.1,
            alpha: 0.602,
            gamma_decay: 0.101,
            a_stability: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoordinateSearchConfig {
    pub step: f64,
    pub shrink: f64,
    pub tolerance: f64,
}

impl Default for CoordinateSearchConfig {
    fn default() -> Self {
        CoordinateSearchConfig {
            step: 0.5,
            shrink: 0.5,
            tolerance: 1e-4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub method: OptimizerMethod,
    pub max_evals: usize,
    pub seed: u64,
    pub spsa: SpsaGains,
    pub coordinate: CoordinateSearchConfig,
    /// Estimate the objective from this many shots instead of the exact
    /// expectation.
    pub objective_shots: Option<usize>,
    /// Starting angles; `None` uses the linear ramp
    /// `γ̃_k = 0.1·k/p`, `β_k = 0.1·(1 − k/p)` for `k = 1..=p`.
    pub initial: Option<QaoaParams<f64>>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            method: OptimizerMethod::Spsa,
            max_evals: 300,
            seed: 0,
            spsa: SpsaGains::default(),
            coordinate: CoordinateSearchConfig::default(),
            objective_shots: None,
            initial: None,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_evals == 0 {
            return Err(Error::InvalidParameter("max_evals must be at least 1".into()));
        }
        let g = &self.spsa;
        let positive = [
            ("spsa.a", g.a),
            ("spsa.c", g.c),
            ("spsa.alpha", g.alpha),
            ("spsa.gamma_decay", g.gamma_decay),
            ("coordinate.step", self.coordinate.step),
            ("coordinate.shrink", self.coordinate.shrink),
            ("coordinate.tolerance", self.coordinate.tolerance),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if let Some(a) = g.a_stability {
            if !(a > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "spsa.a_stability must be positive, got {a}"
                )));
            }
        }
        if self.coordinate.shrink >= 1.0 {
            return Err(Error::InvalidParameter(
                "coordinate.shrink must be below 1".into(),
            ));
        }
        if self.objective_shots == Some(0) {
            return Err(Error::InvalidParameter("objective_shots must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceEntry<T> {
    pub params: QaoaParams<T>,
    pub value: T,
}

#[derive(Clone, Debug)]
pub struct OptimizationOutcome<T> {
    pub best: QaoaParams<T>,
    pub best_value: T,
    pub trace: Vec<TraceEntry<T>>,
}

/// Budgeted objective that records every evaluation and the best one seen.
struct Recorder<'e, 'p, T: Real> {
    engine: &'e QaoaEngine<'p, T>,
    p: usize,
    scale: f64,
    max_evals: usize,
    shots: Option<usize>,
    shot_seed: u64,
    trace: Vec<TraceEntry<T>>,
    best: Option<(usize, f64)>,
}

impl<T: Real> Recorder<'_, '_, T> {
    fn exhausted(&self) -> bool {
        self.trace.len() >= self.max_evals
    }

    fn physical(&self, x: &[f64]) -> QaoaParams<T> {
        QaoaParams {
            gammas: x[..self.p].iter().map(|&g| T::lit(g / self.scale)).collect(),
            betas: x[self.p..].iter().map(|&b| T::lit(b)).collect(),
        }
    }

    /// Normalized objective at `x`, or `None` once the budget is spent.
    fn eval(&mut self, x: &[f64]) -> Option<f64> {
        if self.exhausted() {
            return None;
        }
        let params = self.physical(x);
        let state = self.engine.evolve(&params);
        let value = match self.shots {
            None => self.engine.expectation(&state),
            Some(shots) => {
                let seed = derive_seed(self.shot_seed, &["objective"], self.trace.len() as u64);
                let energies = self.engine.energies();
                let total: T = state.sample(shots, seed).into_iter().map(|i| energies[i]).sum();
                total / T::lit(shots as f64)
            }
        };
        let normalized = value.as_f64() / self.scale;
        if self.best.is_none_or(|(_, b)| normalized < b) {
            self.best = Some((self.trace.len(), normalized));
        }
        self.trace.push(TraceEntry { params, value });
        Some(normalized)
    }
}

/// Minimizes `⟨H⟩` over `p`-layer angles and returns the best evaluated
/// point together with the full evaluation trace.
pub fn optimize_params<T: Real>(
    q: &QuboProblem<T>,
    p: usize,
    mixer: MixerKind,
    cfg: &OptimizerConfig,
    qubit_cap: usize,
) -> Result<OptimizationOutcome<T>> {
    let engine = QaoaEngine::new(q, mixer, qubit_cap)?;
    optimize_with_engine(&engine, p, cfg)
}

pub(crate) fn optimize_with_engine<T: Real>(
    engine: &QaoaEngine<'_, T>,
    p: usize,
    cfg: &OptimizerConfig,
) -> Result<OptimizationOutcome<T>> {
    cfg.validate()?;
    if p == 0 {
        return Err(Error::InvalidParameter("depth p must be at least 1".into()));
    }
    let scale = engine.problem().energy_scale().as_f64();
    let x0 = match &cfg.initial {
        Some(init) => {
            if init.depth() != p || init.betas.len() != p {
                return Err(Error::InvalidParameter(format!(
                    "initial angles have depth {}, expected {p}",
                    init.depth()
                )));
            }
            init.gammas
                .iter()
                .map(|g| g * scale)
                .chain(init.betas.iter().copied())
                .collect()
        }
        None => ramp(p),
    };

    let mut rec = Recorder {
        engine,
        p,
        scale,
        max_evals: cfg.max_evals,
        shots: cfg.objective_shots,
        shot_seed: cfg.seed,
        trace: Vec::new(),
        best: None,
    };
    match cfg.method {
        OptimizerMethod::Spsa => spsa(&mut rec, x0, &cfg.spsa, cfg.max_evals, cfg.seed),
        OptimizerMethod::CoordinateSearch => coordinate_search(&mut rec, x0, &cfg.coordinate),
    }

    let (idx, _) = rec.best.expect("budget >= 1 guarantees one evaluation");
    let entry = rec.trace[idx].clone();
    Ok(OptimizationOutcome {
        best: entry.params,
        best_value: entry.value,
        trace: rec.trace,
    })
}

fn ramp(p: usize) -> Vec<f64> {
    let pf = p as f64;
    let gammas = (1..=p).map(|k| 0.1 * k as f64 / pf);
    let betas = (1..=p).map(|k| 0.1 * (1.0 - k as f64 / pf));
    gammas.chain(betas).collect()
}

/// Simultaneous-perturbation stochastic approximation with Bernoulli ±1
/// perturbations, two evaluations per iteration.
fn spsa<T: Real>(
    rec: &mut Recorder<'_, '_, T>,
    mut x: Vec<f64>,
    gains: &SpsaGains,
    max_evals: usize,
    seed: u64,
) {
    let mut rng = seeded(seed);
    let stability = gains.a_stability.unwrap_or(max_evals as f64 / 10.0);
    if rec.eval(&x).is_none() {
        return;
    }
    let mut k = 0usize;
    while rec.trace.len() + 2 <= rec.max_evals {
        let kf = k as f64;
        let ak = gains.a / (kf + 1.0 + stability).powf(gains.alpha);
        let ck = gains.c / (kf + 1.0).powf(gains.gamma_decay);
        let delta: Vec<f64> = (0..x.len())
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect();
        let plus: Vec<f64> = x.iter().zip(&delta).map(|(xi, d)| xi + ck * d).collect();
        let minus: Vec<f64> = x.iter().zip(&delta).map(|(xi, d)| xi - ck * d).collect();
        let (Some(fp), Some(fm)) = (rec.eval(&plus), rec.eval(&minus)) else {
            break;
        };
        let diff = (fp - fm) / (2.0 * ck);
        for (xi, d) in x.iter_mut().zip(&delta) {
            *xi -= ak * diff / d;
        }
        k += 1;
    }
    // Spend a leftover odd evaluation on the final iterate.
    rec.eval(&x);
}

/// Compass search: try `±step` along each coordinate in order, move on the
/// first improvement, shrink the step after a sweep without one.
fn coordinate_search<T: Real>(
    rec: &mut Recorder<'_, '_, T>,
    mut x: Vec<f64>,
    cfg: &CoordinateSearchConfig,
) {
    let Some(mut fx) = rec.eval(&x) else {
        return;
    };
    let mut step = cfg.step;
    while step >= cfg.tolerance {
        let mut improved = false;
        for i in 0..x.len() {
            for sign in [1.0, -1.0] {
                let mut y = x.clone();
                y[i] += sign * step;
                let Some(fy) = rec.eval(&y) else {
                    return;
                };
                if fy < fx {
                    x = y;
                    fx = fy;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= cfg.shrink;
        }
    }
}
