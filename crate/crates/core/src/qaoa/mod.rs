//! Exact dense-statevector QAOA.
//!
//! A [`QaoaEngine`] binds a [`QuboProblem`] to a mixer, precomputes the
//! diagonal of the cost Hamiltonian, and applies alternating layers
//! `exp(−iγ_k H_cost)` then `U_mix(β_k)` to an initial state.
//!
//! Mixers:
//!
//! * [`MixerKind::TransverseX`]: `exp(−iβX)` on every qubit, starting from
//!   the uniform superposition over all bitstrings.
//! * [`MixerKind::XyRing`]: within each step group (the `n−1` qubits of one
//!   time step of a reduced encoding) the pair gates
//!   `exp(−iβ(XX+YY)/2)` are applied sequentially around the ring
//!   `(0,1), (1,2), …, (m−1,0)`; a two-qubit group has the single pair
//!   `(0,1)`. This is a first-order Trotterization of the ring XY mixer. It
//!   conserves the Hamming weight of every step group, so the "one city per
//!   step" constraint is preserved exactly; the "each city once" constraint
//!   is not, and amplitude can leak onto states that repeat a city.
//! * [`MixerKind::PermutationSwap`]: for each ring-adjacent pair of steps
//!   `(s, s')` and each pair of cities `a < b` (ascending), a rotation
//!   between `|a@s, b@s'⟩` and `|a@s', b@s⟩`. It keeps the state inside
//!   the span of valid tours.
//!
//! Both constrained mixers start from the uniform superposition over the
//! `(n−1)!` bitstrings that encode tours and require a reduced encoding.

mod optimize;
mod run;
mod statevector;

pub use optimize::{
    optimize_params, CoordinateSearchConfig, OptimizationOutcome, OptimizerConfig,
    OptimizerMethod, SpsaGains, TraceEntry,
};
pub use run::{run_qaoa, QaoaConfig, QaoaRunResult};
pub use statevector::Statevector;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubo::QuboProblem;
use crate::scalar::Real;

pub const DEFAULT_QUBIT_CAP: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MixerKind {
    #[serde(rename = "x")]
    TransverseX,
    #[serde(rename = "xy")]
    XyRing,
    #[serde(rename = "swap")]
    PermutationSwap,
}

impl MixerKind {
    pub fn label(self) -> &'static str {
        match self {
            MixerKind::TransverseX => "x",
            MixerKind::XyRing => "xy",
            MixerKind::PermutationSwap => "swap",
        }
    }

    fn constrained(self) -> bool {
        !matches!(self, MixerKind::TransverseX)
    }
}

impl std::str::FromStr for MixerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" => Ok(MixerKind::TransverseX),
            "xy" => Ok(MixerKind::XyRing),
            "swap" => Ok(MixerKind::PermutationSwap),
            other => Err(Error::InvalidConfiguration(format!(
                "unknown mixer {other:?} (expected x, xy or swap)"
            ))),
        }
    }
}

/// Layer angles in radians; `gammas[k]` and `betas[k]` drive layer `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct QaoaParams<T> {
    pub gammas: Vec<T>,
    pub betas: Vec<T>,
}

impl<T: Real> QaoaParams<T> {
    pub fn new(gammas: Vec<T>, betas: Vec<T>) -> Result<Self> {
        if gammas.is_empty() || gammas.len() != betas.len() {
            return Err(Error::InvalidParameter(format!(
                "need p >= 1 gammas and betas of equal length, got {} and {}",
                gammas.len(),
                betas.len()
            )));
        }
        Ok(QaoaParams { gammas, betas })
    }

    pub fn zeros(p: usize) -> Self {
        QaoaParams {
            gammas: vec![T::zero(); p],
            betas: vec![T::zero(); p],
        }
    }

    pub fn depth(&self) -> usize {
        self.gammas.len()
    }
}

/// A problem bound to a mixer, with the cost diagonal precomputed.
pub struct QaoaEngine<'a, T: Real> {
    problem: &'a QuboProblem<T>,
    mixer: MixerKind,
    energies: Vec<T>,
    xy_pairs: Vec<(usize, usize)>,
    /// `(on_a, on_b)` bit patterns for the permutation-swap rotations.
    swap_patterns: Vec<(usize, usize)>,
    /// Sorted basis states the constrained mixers never leave: one set bit
    /// per step group for the XY ring, valid tours for the swap mixer.
    support: Option<Vec<usize>>,
}

/// Index pairs around a ring of `m` positions, in application order.
fn ring_pairs(m: usize) -> Vec<(usize, usize)> {
    match m {
        0 | 1 => Vec::new(),
        2 => vec![(0, 1)],
        _ => (0..m).map(|i| (i, (i + 1) % m)).collect(),
    }
}

/// Basis states of a reduced encoding that encode a tour, in lexicographic
/// order of the visiting sequence.
fn permutation_states<T: Real>(problem: &QuboProblem<T>) -> Vec<usize> {
    let n = problem.n_cities();
    let m = problem.group_size();
    (1..n)
        .permutations(m)
        .map(|perm| {
            perm.iter().enumerate().fold(0usize, |acc, (step, &city)| {
                acc | 1 << problem.var_index(city, step + 1).expect("free variable")
            })
        })
        .collect()
}

/// All `m^m` states with exactly one set bit in each of `m` groups of `m`
/// bits, ascending.
fn step_one_hot_states(m: usize) -> Vec<usize> {
    let mut states = vec![0usize];
    for step in 0..m {
        states = states
            .into_iter()
            .flat_map(|s| (0..m).map(move |k| s | 1 << (step * m + k)))
            .collect();
    }
    states.sort_unstable();
    states
}

impl<'a, T: Real> QaoaEngine<'a, T> {
    pub fn new(problem: &'a QuboProblem<T>, mixer: MixerKind, qubit_cap: usize) -> Result<Self> {
        let q = problem.n_vars();
        if q > qubit_cap {
            return Err(Error::InstanceTooLarge {
                what: "qubit count",
                size: q,
                cap: qubit_cap,
            });
        }
        if mixer.constrained() && !problem.reduced() {
            return Err(Error::InvalidConfiguration(format!(
                "the {} mixer needs a reduced encoding (city 0 pinned to step 0)",
                mixer.label()
            )));
        }
        let m = problem.group_size();
        let mut xy_pairs = Vec::new();
        let mut swap_patterns = Vec::new();
        match mixer {
            MixerKind::TransverseX => {}
            MixerKind::XyRing => {
                for step in 0..m {
                    for (a, b) in ring_pairs(m) {
                        xy_pairs.push((step * m + a, step * m + b));
                    }
                }
            }
            MixerKind::PermutationSwap => {
                for (s, s2) in ring_pairs(m) {
                    for a in 0..m {
                        for b in a + 1..m {
                            let bit = |city: usize, step: usize| 1usize << (step * m + city);
                            let on_a = bit(a, s) | bit(b, s2);
                            let on_b = bit(a, s2) | bit(b, s);
                            swap_patterns.push((on_a, on_b));
                        }
                    }
                }
            }
        }
        let support = match mixer {
            MixerKind::TransverseX => None,
            MixerKind::XyRing => Some(step_one_hot_states(m)),
            MixerKind::PermutationSwap => {
                let mut v = permutation_states(problem);
                v.sort_unstable();
                Some(v)
            }
        };
        Ok(QaoaEngine {
            problem,
            mixer,
            energies: problem.energy_table(),
            xy_pairs,
            swap_patterns,
            support,
        })
    }

    pub fn problem(&self) -> &QuboProblem<T> {
        self.problem
    }

    pub fn mixer(&self) -> MixerKind {
        self.mixer
    }

    pub fn n_qubits(&self) -> usize {
        self.problem.n_vars()
    }

    /// Energy of every basis state.
    pub fn energies(&self) -> &[T] {
        &self.energies
    }

    /// Basis indices of all bitstrings encoding a valid tour (reduced
    /// encodings only), in lexicographic order of the visiting sequence.
    pub fn feasible_indices(&self) -> Vec<usize> {
        permutation_states(self.problem)
    }

    pub fn init_state(&self) -> Statevector<T> {
        let q = self.n_qubits();
        match self.mixer {
            MixerKind::TransverseX => {
                let all: Vec<usize> = (0..1usize << q).collect();
                Statevector::uniform_over(q, &all)
            }
            _ => Statevector::uniform_over(q, &permutation_states(self.problem)),
        }
    }

    pub fn apply_phase_separator(&self, s: &mut Statevector<T>, gamma: T) {
        s.apply_diagonal_phase(&self.energies, gamma);
    }

    pub fn apply_mixer(&self, s: &mut Statevector<T>, beta: T) {
        match self.mixer {
            MixerKind::TransverseX => {
                for k in 0..s.n_qubits() {
                    s.apply_rx(k, beta);
                }
            }
            MixerKind::XyRing => {
                for &(a, b) in &self.xy_pairs {
                    s.apply_xy(a, b, beta);
                }
            }
            MixerKind::PermutationSwap => {
                for &(on_a, on_b) in &self.swap_patterns {
                    s.apply_pattern_exchange(on_a, on_b, beta);
                }
            }
        }
    }

    /// Inverse of [`apply_mixer`](Self::apply_mixer): the gates are applied
    /// in reverse order with negated angle.
    pub fn apply_mixer_inverse(&self, s: &mut Statevector<T>, beta: T) {
        match self.mixer {
            MixerKind::TransverseX => self.apply_mixer(s, -beta),
            MixerKind::XyRing => {
                for &(a, b) in self.xy_pairs.iter().rev() {
                    s.apply_xy(a, b, -beta);
                }
            }
            MixerKind::PermutationSwap => {
                for &(on_a, on_b) in self.swap_patterns.iter().rev() {
                    s.apply_pattern_exchange(on_a, on_b, -beta);
                }
            }
        }
    }

    /// Initial state followed by one phase-separator/mixer pair per layer.
    ///
    /// With a constrained mixer only the invariant subspace is touched; the
    /// amplitudes are identical to applying the full gates.
    pub fn evolve(&self, params: &QaoaParams<T>) -> Statevector<T> {
        let mut s = self.init_state();
        let layers = params.gammas.iter().zip(&params.betas);
        match &self.support {
            None => {
                for (&g, &b) in layers {
                    self.apply_phase_separator(&mut s, g);
                    self.apply_mixer(&mut s, b);
                }
            }
            Some(support) => {
                for (&g, &b) in layers {
                    s.apply_diagonal_phase_on(support, &self.energies, g);
                    match self.mixer {
                        MixerKind::XyRing => {
                            for &(x, y) in &self.xy_pairs {
                                s.apply_xy_on(support, x, y, b);
                            }
                        }
                        _ => {
                            for &(on_a, on_b) in &self.swap_patterns {
                                s.apply_pattern_exchange_on(support, on_a, on_b, b);
                            }
                        }
                    }
                }
            }
        }
        s
    }

    pub fn expectation(&self, s: &Statevector<T>) -> T {
        s.expectation(&self.energies)
    }
}
