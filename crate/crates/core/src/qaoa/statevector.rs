use num_complex::Complex;
use rand::Rng;

use crate::rng::seeded;
use crate::scalar::Real;

/// Dense state over `2^n_qubits` basis states. Basis index bit `k` holds
/// qubit (QUBO variable) `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Statevector<T: Real> {
    n_qubits: usize,
    amps: Vec<Complex<T>>,
}

/// `(cos θ, −i·sin θ)` applied as `u' = c·u + s·v`, `v' = c·v + s·u`.
#[inline]
fn rotate<T: Real>(amps: &mut [Complex<T>], i: usize, j: usize, cos: T, msin: Complex<T>) {
    let u = amps[i];
    let v = amps[j];
    amps[i] = u.scale(cos) + msin * v;
    amps[j] = v.scale(cos) + msin * u;
}

impl<T: Real> Statevector<T> {
    pub fn zero_state(n_qubits: usize) -> Self {
        let mut amps = vec![Complex::new(T::zero(), T::zero()); 1 << n_qubits];
        amps[0] = Complex::new(T::one(), T::zero());
        Statevector { n_qubits, amps }
    }

    pub fn basis_state(n_qubits: usize, index: usize) -> Self {
        let mut s = Self::zero_state(n_qubits);
        s.amps[0] = Complex::new(T::zero(), T::zero());
        s.amps[index] = Complex::new(T::one(), T::zero());
        s
    }

    /// Equal-weight real superposition over `support`.
    pub fn uniform_over(n_qubits: usize, support: &[usize]) -> Self {
        let mut amps = vec![Complex::new(T::zero(), T::zero()); 1 << n_qubits];
        let a = T::one() / T::lit(support.len() as f64).sqrt();
        for &idx in support {
            amps[idx] = Complex::new(a, T::zero());
        }
        Statevector { n_qubits, amps }
    }

    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex<T>>) -> Self {
        assert_eq!(amps.len(), 1 << n_qubits, "amplitude count must be 2^n_qubits");
        Statevector { n_qubits, amps }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<T> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Multiplies amplitude `x` by `exp(−i·gamma·energies[x])`.
    pub fn apply_diagonal_phase(&mut self, energies: &[T], gamma: T) {
        debug_assert_eq!(energies.len(), self.amps.len());
        for (a, &e) in self.amps.iter_mut().zip(energies) {
            *a = *a * Complex::from_polar(T::one(), -gamma * e);
        }
    }

    /// `exp(−i·beta·X)` on one qubit.
    pub fn apply_rx(&mut self, qubit: usize, beta: T) {
        let (s, c) = beta.sin_cos();
        let msin = Complex::new(T::zero(), -s);
        let bit = 1usize << qubit;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                rotate(&mut self.amps, i, i | bit, c, msin);
            }
        }
    }

    /// `exp(−i·beta·(X_a X_b + Y_a Y_b)/2)`.
    ///
    /// The generator is `|01⟩⟨10| + |10⟩⟨01|`, so the gate rotates within
    /// `{|01⟩, |10⟩}` and leaves `|00⟩` and `|11⟩` untouched. At
    /// `beta = π/2` it maps `|10⟩` to `−i|01⟩`.
    pub fn apply_xy(&mut self, a: usize, b: usize, beta: T) {
        debug_assert_ne!(a, b);
        let (s, c) = beta.sin_cos();
        let msin = Complex::new(T::zero(), -s);
        let (ba, bb) = (1usize << a, 1usize << b);
        for i in 0..self.amps.len() {
            if i & ba != 0 && i & bb == 0 {
                rotate(&mut self.amps, i, i ^ ba ^ bb, c, msin);
            }
        }
    }

    /// Rotation by `beta` between the two basis patterns `on_a` and `on_b`
    /// of a fixed set of qubits (`on_a | on_b` is the full qubit mask and
    /// the patterns are disjoint). All other basis states are untouched.
    pub fn apply_pattern_exchange(&mut self, on_a: usize, on_b: usize, beta: T) {
        debug_assert_eq!(on_a & on_b, 0);
        let mask = on_a | on_b;
        let (s, c) = beta.sin_cos();
        let msin = Complex::new(T::zero(), -s);
        for i in 0..self.amps.len() {
            if i & mask == on_a {
                rotate(&mut self.amps, i, i ^ mask, c, msin);
            }
        }
    }

    /// [`apply_diagonal_phase`](Self::apply_diagonal_phase) restricted to
    /// the listed basis states. Callers guarantee every other amplitude is
    /// zero.
    pub(crate) fn apply_diagonal_phase_on(&mut self, support: &[usize], energies: &[T], gamma: T) {
        for &i in support {
            self.amps[i] = self.amps[i] * Complex::from_polar(T::one(), -gamma * energies[i]);
        }
    }

    /// [`apply_xy`](Self::apply_xy) over a support closed under the gate.
    pub(crate) fn apply_xy_on(&mut self, support: &[usize], a: usize, b: usize, beta: T) {
        let (s, c) = beta.sin_cos();
        let msin = Complex::new(T::zero(), -s);
        let (ba, bb) = (1usize << a, 1usize << b);
        for &i in support {
            if i & ba != 0 && i & bb == 0 {
                rotate(&mut self.amps, i, i ^ ba ^ bb, c, msin);
            }
        }
    }

    /// [`apply_pattern_exchange`](Self::apply_pattern_exchange) over a
    /// support closed under the exchange.
    pub(crate) fn apply_pattern_exchange_on(&mut self, support: &[usize], on_a: usize, on_b: usize, beta: T) {
        let mask = on_a | on_b;
        let (s, c) = beta.sin_cos();
        let msin = Complex::new(T::zero(), -s);
        for &i in support {
            if i & mask == on_a {
                rotate(&mut self.amps, i, i ^ mask, c, msin);
            }
        }
    }

    /// `Σ_x |amp_x|²·energies[x]`.
    pub fn expectation(&self, energies: &[T]) -> T {
        self.amps
            .iter()
            .zip(energies)
            .map(|(a, &e)| a.norm_sqr() * e)
            .sum()
    }

    /// Independent measurements in the computational basis, as basis indices.
    pub fn sample(&self, shots: usize, seed: u64) -> Vec<usize> {
        let mut cumulative = Vec::with_capacity(self.amps.len());
        let mut acc = 0.0f64;
        for a in &self.amps {
            acc += a.norm_sqr().as_f64();
            cumulative.push(acc);
        }
        let total = acc;
        let last_nonzero = self
            .amps
            .iter()
            .rposition(|a| a.norm_sqr() > T::zero())
            .unwrap_or(0);
        let mut rng = seeded(seed);
        (0..shots)
            .map(|_| {
                let u = rng.random::<f64>() * total;
                cumulative
                    .partition_point(|&c| c <= u)
                    .min(last_nonzero)
            })
            .collect()
    }
}
