//! One-hot QUBO encoding of the TSP.
//!
//! Binary variable `x[i][t]` is 1 when city `i` is visited at step `t`.
//! The encoded Hamiltonian is
//!
//! ```text
//! H = A·Σ_i (1 − Σ_t x[i][t])²  +  B·Σ_t (1 − Σ_i x[i][t])²
//!   + C·Σ_{i≠j} Σ_t d[i][j]·x[i][t]·x[j][(t+1) mod n]
//! ```
//!
//! The first two terms enforce "each city once" and "each step one city";
//! the last sums the closed-tour length. It is expanded into
//! `offset + linear·x + xᵀQx` over the free variables.
//!
//! With `reduced = true` city 0 is pinned to step 0 (`x[0][0] = 1`, the rest
//! of row 0 and column 0 are 0), leaving `(n−1)²` variables. Free variable
//! `k` is laid out step-major: `k = (t − s)·m + (i − s)` with `s = 1`,
//! `m = n − 1` when reduced and `s = 0`, `m = n` otherwise, so each step's
//! one-hot group occupies a contiguous run of `m` bits.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{cycle_length, Tour};
use crate::graph::DistanceMatrix;
use crate::scalar::Real;

/// Largest variable count accepted by [`enumerate_ground_states`].
pub const ENUMERATION_MAX_VARS: usize = 20;

/// Weights of the city, step and distance terms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Penalties<T> {
    pub a: T,
    pub b: T,
    pub c: T,
}

impl<T: Real> Penalties<T> {
    pub fn new(a: T, b: T, c: T) -> Result<Self> {
        for (name, v) in [("A", a), ("B", b), ("C", c)] {
            if !v.is_finite() || v < T::zero() {
                return Err(Error::InvalidParameter(format!(
                    "penalty {name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        Ok(Penalties { a, b, c })
    }

    /// `C = 1`, `A = B = 2·C·max d`.
    pub fn default_for(m: &DistanceMatrix<T>) -> Self {
        let c = T::one();
        let ab = T::lit(2.0) * c * m.max_entry();
        Penalties { a: ab, b: ab, c }
    }

    /// Whether `A` and `B` both exceed `C·max d`, which is enough for every
    /// ground state to be a feasible tour.
    pub fn dominates(&self, m: &DistanceMatrix<T>) -> bool {
        let bound = self.c * m.max_entry();
        self.c > T::zero() && self.a > bound && self.b > bound
    }
}

/// Position of a full-grid variable after the reduction is applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Slot {
    Zero,
    One,
    Free(usize),
}

/// The TSP Hamiltonian as a quadratic polynomial over binary variables.
#[derive(Clone, Debug)]
pub struct QuboProblem<T: Real> {
    n_cities: usize,
    n_vars: usize,
    reduced: bool,
    penalties: Penalties<T>,
    penalties_dominate: bool,
    /// Symmetric, zero diagonal, each pair coefficient split in halves.
    q: Vec<T>,
    linear: Vec<T>,
    offset: T,
    distances: DistanceMatrix<T>,
}

struct Builder<T> {
    n_vars: usize,
    q: Vec<T>,
    linear: Vec<T>,
    offset: T,
}

impl<T: Real> Builder<T> {
    fn new(n_vars: usize) -> Self {
        Builder {
            n_vars,
            q: vec![T::zero(); n_vars * n_vars],
            linear: vec![T::zero(); n_vars],
            offset: T::zero(),
        }
    }

    fn linear(&mut self, s: Slot, c: T) {
        match s {
            Slot::Zero => {}
            Slot::One => self.offset += c,
            Slot::Free(k) => self.linear[k] += c,
        }
    }

    fn product(&mut self, u: Slot, v: Slot, c: T) {
        match (u, v) {
            (Slot::Zero, _) | (_, Slot::Zero) => {}
            (Slot::One, other) | (other, Slot::One) => self.linear(other, c),
            (Slot::Free(k), Slot::Free(l)) if k == l => self.linear[k] += c,
            (Slot::Free(k), Slot::Free(l)) => {
                let half = c * T::lit(0.5);
                self.q[k * self.n_vars + l] += half;
                self.q[l * self.n_vars + k] += half;
            }
        }
    }

    /// Adds `weight·(1 − Σ slots)²`.
    fn one_hot_penalty(&mut self, slots: &[Slot], weight: T) {
        self.offset += weight;
        for &s in slots {
            self.linear(s, -T::lit(2.0) * weight);
        }
        for &u in slots {
            for &v in slots {
                self.product(u, v, weight);
            }
        }
    }
}

/// Encodes `m` as a QUBO. Fails on negative or non-finite penalties;
/// penalties too weak to guarantee feasible ground states are accepted and
/// reported by [`QuboProblem::penalties_dominate`].
pub fn encode_tsp<T: Real>(
    m: &DistanceMatrix<T>,
    penalties: Penalties<T>,
    reduced: bool,
) -> Result<QuboProblem<T>> {
    let penalties = Penalties::new(penalties.a, penalties.b, penalties.c)?;
    let n = m.n();
    if n < 3 {
        return Err(Error::InvalidInstance(format!(
            "need at least 3 cities, got {n}"
        )));
    }
    let side = if reduced { n - 1 } else { n };
    let n_vars = side * side;
    let slot = |i: usize, t: usize| -> Slot {
        if reduced {
            match (i, t) {
                (0, 0) => Slot::One,
                (0, _) | (_, 0) => Slot::Zero,
                _ => Slot::Free((t - 1) * side + (i - 1)),
            }
        } else {
            Slot::Free(t * side + i)
        }
    };

    let mut b = Builder::new(n_vars);
    for i in 0..n {
        let row: Vec<Slot> = (0..n).map(|t| slot(i, t)).collect();
        b.one_hot_penalty(&row, penalties.a);
    }
    for t in 0..n {
        let col: Vec<Slot> = (0..n).map(|i| slot(i, t)).collect();
        b.one_hot_penalty(&col, penalties.b);
    }
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let w = penalties.c * m.get(i, j);
            for t in 0..n {
                b.product(slot(i, t), slot(j, (t + 1) % n), w);
            }
        }
    }

    Ok(QuboProblem {
        n_cities: n,
        n_vars,
        reduced,
        penalties_dominate: penalties.dominates(m),
        penalties,
        q: b.q,
        linear: b.linear,
        offset: b.offset,
        distances: m.clone(),
    })
}

/// Result of reading a bitstring back as a tour.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decoded {
    Feasible(Tour),
    /// Number of city rows and step columns whose one-hot constraint fails.
    Infeasible { violations: usize },
}

impl Decoded {
    pub fn tour(&self) -> Option<&Tour> {
        match self {
            Decoded::Feasible(t) => Some(t),
            Decoded::Infeasible { .. } => None,
        }
    }
}

impl<T: Real> QuboProblem<T> {
    pub fn n_cities(&self) -> usize {
        self.n_cities
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn reduced(&self) -> bool {
        self.reduced
    }

    pub fn penalties(&self) -> Penalties<T> {
        self.penalties
    }

    pub fn penalties_dominate(&self) -> bool {
        self.penalties_dominate
    }

    pub fn offset(&self) -> T {
        self.offset
    }

    pub fn linear(&self) -> &[T] {
        &self.linear
    }

    /// Entry `(k, l)` of the symmetric quadratic matrix.
    pub fn quad(&self, k: usize, l: usize) -> T {
        self.q[k * self.n_vars + l]
    }

    pub fn distances(&self) -> &DistanceMatrix<T> {
        &self.distances
    }

    /// Number of cities per one-hot step group.
    pub fn group_size(&self) -> usize {
        if self.reduced {
            self.n_cities - 1
        } else {
            self.n_cities
        }
    }

    /// Variable index of city `i` at step `t`, or `None` when the pair is
    /// fixed by the reduction.
    pub fn var_index(&self, city: usize, step: usize) -> Option<usize> {
        let s = self.group_size();
        if self.reduced {
            (city > 0 && step > 0 && city < self.n_cities && step < self.n_cities)
                .then(|| (step - 1) * s + (city - 1))
        } else {
            (city < s && step < s).then(|| step * s + city)
        }
    }

    /// Inverse of [`var_index`](Self::var_index).
    pub fn var_city_step(&self, k: usize) -> (usize, usize) {
        let s = self.group_size();
        let off = usize::from(self.reduced);
        (k % s + off, k / s + off)
    }

    /// Distance-term scale `C·max d`, used to normalize QAOA angles; 1 when
    /// the distance term vanishes.
    pub fn energy_scale(&self) -> T {
        let s = self.penalties.c * self.distances.max_entry();
        if s > T::zero() {
            s
        } else {
            T::one()
        }
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n_vars {
            return Err(Error::InvalidInput(format!(
                "bitstring has {len} bits, problem has {} variables",
                self.n_vars
            )));
        }
        Ok(())
    }

    /// `offset + linear·x + xᵀQx`.
    pub fn energy(&self, x: &[bool]) -> Result<T> {
        self.check_len(x.len())?;
        let ones: Vec<usize> = (0..x.len()).filter(|&k| x[k]).collect();
        Ok(self.energy_of_ones(&ones))
    }

    /// Energy of the basis state whose bit `k` is variable `k`.
    pub fn energy_of_index(&self, index: usize) -> T {
        debug_assert!(self.n_vars >= usize::BITS as usize || index >> self.n_vars == 0);
        let ones: Vec<usize> = (0..self.n_vars).filter(|&k| index >> k & 1 == 1).collect();
        self.energy_of_ones(&ones)
    }

    fn energy_of_ones(&self, ones: &[usize]) -> T {
        let mut e = self.offset;
        for &k in ones {
            e += self.linear[k];
            let row = &self.q[k * self.n_vars..(k + 1) * self.n_vars];
            for &l in ones {
                e += row[l];
            }
        }
        e
    }

    /// Energies of all `2^n_vars` basis states, indexed by basis index.
    ///
    /// Computed by Gray-code walk: each step flips one bit and updates the
    /// energy by that variable's local field.
    pub fn energy_table(&self) -> Vec<T> {
        let n = self.n_vars;
        let size = 1usize << n;
        let mut table = vec![T::zero(); size];
        let mut bits = vec![false; n];
        // field[k] = Σ_l 2·Q[k][l]·x_l over the current state.
        let mut field = vec![T::zero(); n];
        let mut e = self.offset;
        table[0] = e;
        let mut state = 0usize;
        for step in 1..size {
            let k = step.trailing_zeros() as usize;
            let delta = self.linear[k] + field[k];
            if bits[k] {
                e -= delta;
            } else {
                e += delta;
            }
            bits[k] = !bits[k];
            let sign = if bits[k] { T::one() } else { -T::one() };
            let row = &self.q[k * n..(k + 1) * n];
            for (f, &qkl) in field.iter_mut().zip(row) {
                *f += sign * T::lit(2.0) * qkl;
            }
            state ^= 1 << k;
            table[state] = e;
        }
        table
    }

    /// Full `n×n` city-by-step grid, with the pinned entries restored.
    fn grid(&self, x: &[bool]) -> Vec<bool> {
        let n = self.n_cities;
        let mut g = vec![false; n * n];
        if self.reduced {
            g[0] = true;
        }
        for (k, &bit) in x.iter().enumerate() {
            if bit {
                let (i, t) = self.var_city_step(k);
                g[i * n + t] = true;
            }
        }
        g
    }

    pub fn decode(&self, x: &[bool]) -> Result<Decoded> {
        self.check_len(x.len())?;
        let n = self.n_cities;
        let g = self.grid(x);
        let mut violations = 0;
        for i in 0..n {
            if (0..n).filter(|&t| g[i * n + t]).count() != 1 {
                violations += 1;
            }
        }
        let mut order = vec![0usize; n];
        for (t, slot) in order.iter_mut().enumerate() {
            let cities: Vec<usize> = (0..n).filter(|&i| g[i * n + t]).collect();
            if cities.len() == 1 {
                *slot = cities[0];
            } else {
                violations += 1;
            }
        }
        if violations > 0 {
            return Ok(Decoded::Infeasible { violations });
        }
        Ok(Decoded::Feasible(Tour::from_vec_unchecked(order)))
    }

    pub fn decode_index(&self, index: usize) -> Decoded {
        self.decode(&index_to_bits(index, self.n_vars))
            .expect("length matches by construction")
    }

    /// One-hot bitstring of `tour`. Under the reduction the tour is first
    /// rotated so that city 0 sits at step 0.
    pub fn encode_tour(&self, tour: &Tour) -> Result<Vec<bool>> {
        if tour.len() != self.n_cities {
            return Err(Error::InvalidTour(format!(
                "tour visits {} cities, problem has {}",
                tour.len(),
                self.n_cities
            )));
        }
        let tour = if self.reduced {
            tour.rotated_to_zero()
        } else {
            tour.clone()
        };
        let mut x = vec![false; self.n_vars];
        for (t, &city) in tour.order().iter().enumerate() {
            if let Some(k) = self.var_index(city, t) {
                x[k] = true;
            }
        }
        Ok(x)
    }

    pub fn encode_tour_index(&self, tour: &Tour) -> Result<usize> {
        Ok(bits_to_index(&self.encode_tour(tour)?))
    }

    /// Length of a decoded tour under the problem's distance matrix.
    pub fn tour_length(&self, tour: &Tour) -> T {
        cycle_length(&self.distances, tour.order())
    }

    /// Export in the interchange shape
    /// `{n_vars, offset, linear, quad: [[i, j, coef], ...]}` where
    /// `energy = offset + Σ linear[i]·x_i + Σ_{i<j} coef·x_i·x_j`.
    pub fn to_export(&self) -> QuboExport<T> {
        let n = self.n_vars;
        let mut quad = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let c = self.quad(i, j) + self.quad(j, i);
                if c != T::zero() {
                    quad.push((i, j, c));
                }
            }
        }
        QuboExport {
            n_vars: n,
            offset: self.offset,
            linear: self.linear.clone(),
            quad,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuboExport<T> {
    pub n_vars: usize,
    pub offset: T,
    pub linear: Vec<T>,
    pub quad: Vec<(usize, usize, T)>,
}

pub fn index_to_bits(index: usize, n_vars: usize) -> Vec<bool> {
    (0..n_vars).map(|k| index >> k & 1 == 1).collect()
}

pub fn bits_to_index(bits: &[bool]) -> usize {
    bits.iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .fold(0, |acc, (k, _)| acc | 1 << k)
}

/// Minimum energy and every basis state within `1e-9·max(1, |E_min|)` of it.
pub fn enumerate_ground_states<T: Real>(q: &QuboProblem<T>) -> Result<(T, Vec<Vec<bool>>)> {
    if q.n_vars > ENUMERATION_MAX_VARS {
        return Err(Error::InstanceTooLarge {
            what: "variable count",
            size: q.n_vars,
            cap: ENUMERATION_MAX_VARS,
        });
    }
    let table = q.energy_table();
    let min = table.iter().copied().fold(T::infinity(), T::min);
    let tol = T::lit(1e-9) * min.abs().max(T::one());
    let states = table
        .iter()
        .enumerate()
        .filter(|(_, &e)| e - min <= tol)
        .map(|(idx, _)| index_to_bits(idx, q.n_vars))
        .collect();
    Ok((min, states))
}
