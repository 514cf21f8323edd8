//! Problem instances: node layouts, synthetic generators and distance matrices.

mod tsplib;

pub use tsplib::parse_tsplib;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::seeded;
use crate::scalar::Real;

/// Smallest multiplicative factor applied by [`perturb_weights`].
pub const PERTURB_FLOOR: f64 = 1e-6;

/// A set of cities in the plane.
///
/// Serialized as `{"name": ..., "nodes": [[x, y], ...]}`, with an optional
/// `demands` array that the TSP solvers ignore.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct Graph<T> {
    pub name: String,
    pub nodes: Vec<[T; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub demands: Option<Vec<T>>,
}

impl<T: Real> Graph<T> {
    pub fn new(name: impl Into<String>, nodes: Vec<[T; 2]>) -> Result<Self> {
        let g = Graph {
            name: name.into(),
            nodes,
            demands: None,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Checks the solver-facing invariants: at least three nodes, finite
    /// coordinates and, when present, one nonnegative demand per node.
    pub fn validate(&self) -> Result<()> {
        if self.nodes.len() < 3 {
            return Err(Error::InvalidInstance(format!(
                "need at least 3 nodes, got {}",
                self.nodes.len()
            )));
        }
        if let Some(i) = self
            .nodes
            .iter()
            .position(|p| !p[0].is_finite() || !p[1].is_finite())
        {
            return Err(Error::InvalidInstance(format!(
                "node {i} has a non-finite coordinate"
            )));
        }
        if let Some(d) = &self.demands {
            if d.len() != self.nodes.len() {
                return Err(Error::InvalidInstance(format!(
                    "{} demands for {} nodes",
                    d.len(),
                    self.nodes.len()
                )));
            }
            if d.iter().any(|v| !v.is_finite() || *v < T::zero()) {
                return Err(Error::InvalidInstance(
                    "demands must be finite and nonnegative".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn distance_matrix(&self) -> DistanceMatrix<T> {
        distance_matrix(self)
    }
}

/// Places `n` nodes independently and uniformly in `[0, bbox)²`.
pub fn gen_uniform<T: Real>(n: usize, bbox: T, seed: u64) -> Result<Graph<T>> {
    check_count(n)?;
    check_bbox(bbox)?;
    let side = bbox.as_f64();
    let mut rng = seeded(seed);
    let nodes = (0..n)
        .map(|_| {
            let x: f64 = rng.random::<f64>() * side;
            let y: f64 = rng.random::<f64>() * side;
            [T::lit(x), T::lit(y)]
        })
        .collect();
    Graph::new(format!("uniform-n{n}-s{seed}"), nodes)
}

/// Draws `k` cluster centres uniformly in the box and assigns node `i` to
/// centre `i % k` with an isotropic Gaussian offset of std dev `spread`.
pub fn gen_clustered<T: Real>(
    n: usize,
    k: usize,
    spread: T,
    bbox: T,
    seed: u64,
) -> Result<Graph<T>> {
    check_count(n)?;
    check_bbox(bbox)?;
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!(
            "cluster count must be in 1..={n}, got {k}"
        )));
    }
    if !(spread > T::zero()) || !spread.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "spread must be positive, got {spread}"
        )));
    }
    let side = bbox.as_f64();
    let sd = spread.as_f64();
    let mut rng = seeded(seed);
    let centres: Vec<[f64; 2]> = (0..k)
        .map(|_| [rng.random::<f64>() * side, rng.random::<f64>() * side])
        .collect();
    let nodes = (0..n)
        .map(|i| {
            let c = centres[i % k];
            let dx: f64 = rng.sample(StandardNormal);
            let dy: f64 = rng.sample(StandardNormal);
            [T::lit(c[0] + sd * dx), T::lit(c[1] + sd * dy)]
        })
        .collect();
    Graph::new(format!("clustered-n{n}-k{k}-s{seed}"), nodes)
}

fn check_count(n: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::InvalidInstance(format!(
            "need at least 3 cities, got {n}"
        )));
    }
    Ok(())
}

fn check_bbox<T: Real>(bbox: T) -> Result<()> {
    if !(bbox > T::zero()) || !bbox.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "bounding box side must be positive, got {bbox}"
        )));
    }
    Ok(())
}

/// Dense symmetric matrix of inter-city distances with a zero diagonal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"), try_from = "Vec<Vec<T>>", into = "Vec<Vec<T>>")]
pub struct DistanceMatrix<T: Real> {
    n: usize,
    d: Vec<T>,
}

impl<T: Real> DistanceMatrix<T> {
    /// Builds a matrix from rows, checking symmetry, zero diagonal and
    /// finite nonnegative entries.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let n = rows.len();
        if n < 3 {
            return Err(Error::InvalidInstance(format!(
                "need at least 3 cities, got {n}"
            )));
        }
        let mut d = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidInput(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            d.extend(row);
        }
        let m = DistanceMatrix { n, d };
        for i in 0..n {
            if m.get(i, i) != T::zero() {
                return Err(Error::InvalidInput(format!("nonzero diagonal at {i}")));
            }
            for j in 0..n {
                let v = m.get(i, j);
                if !v.is_finite() || v < T::zero() {
                    return Err(Error::InvalidInput(format!(
                        "entry ({i}, {j}) = {v} is not a finite nonnegative distance"
                    )));
                }
                if v != m.get(j, i) {
                    return Err(Error::InvalidInput(format!(
                        "asymmetric entries at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.d[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.d[i * self.n..(i + 1) * self.n]
    }

    pub fn max_entry(&self) -> T {
        self.d.iter().copied().fold(T::zero(), T::max)
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        self.d.chunks(self.n).map(<[T]>::to_vec).collect()
    }

    /// Copy with every entry multiplied by `factor`.
    pub fn scaled(&self, factor: T) -> Self {
        DistanceMatrix {
            n: self.n,
            d: self.d.iter().map(|&v| v * factor).collect(),
        }
    }
}

impl<T: Real> TryFrom<Vec<Vec<T>>> for DistanceMatrix<T> {
    type Error = Error;

    fn try_from(rows: Vec<Vec<T>>) -> Result<Self> {
        Self::from_rows(rows)
    }
}

impl<T: Real> From<DistanceMatrix<T>> for Vec<Vec<T>> {
    fn from(m: DistanceMatrix<T>) -> Self {
        m.to_rows()
    }
}

/// Euclidean distances between all node pairs.
///
/// Only the upper triangle is computed; the lower triangle is a copy so the
/// matrix is symmetric bit for bit.
pub fn distance_matrix<T: Real>(g: &Graph<T>) -> DistanceMatrix<T> {
    let n = g.nodes.len();
    let mut d = vec![T::zero(); n * n];
    for i in 0..n {
        for j in i + 1..n {
            let [xi, yi] = g.nodes[i];
            let [xj, yj] = g.nodes[j];
            let v = (xi - xj).hypot(yi - yj);
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    DistanceMatrix { n, d }
}

/// Multiplies each off-diagonal pair by `max(1e-6, 1 + sigma·z)` where `z`
/// is a standard normal draw, one draw per unordered pair in row-major
/// upper-triangle order `(0,1), (0,2), …, (1,2), …`.
///
/// Zero entries (coincident cities) stay zero. The result need not satisfy
/// the triangle inequality.
pub fn perturb_weights<T: Real>(
    m: &DistanceMatrix<T>,
    sigma: T,
    seed: u64,
) -> Result<DistanceMatrix<T>> {
    if !(sigma >= T::zero()) || !sigma.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "sigma must be finite and nonnegative, got {sigma}"
        )));
    }
    let n = m.n;
    let sd = sigma.as_f64();
    let mut rng = seeded(seed);
    let mut out = m.clone();
    for i in 0..n {
        for j in i + 1..n {
            let z: f64 = rng.sample(StandardNormal);
            let factor = T::lit((1.0 + sd * z).max(PERTURB_FLOOR));
            let v = m.get(i, j) * factor;
            out.d[i * n + j] = v;
            out.d[j * n + i] = v;
        }
    }
    Ok(out)
}
