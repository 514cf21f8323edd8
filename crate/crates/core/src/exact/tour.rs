use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::DistanceMatrix;
use crate::scalar::Real;

/// A closed tour: a permutation of `0..n` read as a cycle back to `order[0]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Tour(Vec<usize>);

impl Tour {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        let mut seen = vec![false; n];
        for &c in &order {
            if c >= n || seen[c] {
                return Err(Error::InvalidTour(format!(
                    "{order:?} is not a permutation of 0..{n}"
                )));
            }
            seen[c] = true;
        }
        Ok(Tour(order))
    }

    /// The tour `0, 1, …, n-1`.
    pub fn identity(n: usize) -> Self {
        Tour((0..n).collect())
    }

    pub(crate) fn from_vec_unchecked(order: Vec<usize>) -> Self {
        debug_assert!(Tour::new(order.clone()).is_ok());
        Tour(order)
    }

    pub fn order(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }

    /// Rotates so that city 0 comes first.
    pub fn rotated_to_zero(&self) -> Tour {
        let pos = self.0.iter().position(|&c| c == 0).unwrap_or(0);
        let mut v = self.0.clone();
        v.rotate_left(pos);
        Tour(v)
    }

    /// Rotation to city 0 followed by direction normalization so that
    /// `order[1] < order[n-1]`. Two tours describe the same cycle iff their
    /// canonical forms are equal.
    pub fn canonical(&self) -> Tour {
        let mut t = self.rotated_to_zero();
        let n = t.0.len();
        if n > 2 && t.0[1] > t.0[n - 1] {
            t.0[1..].reverse();
        }
        t
    }

    pub fn reversed(&self) -> Tour {
        let mut v = self.0.clone();
        v.reverse();
        Tour(v)
    }
}

impl TryFrom<Vec<usize>> for Tour {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        Tour::new(v)
    }
}

impl From<Tour> for Vec<usize> {
    fn from(t: Tour) -> Self {
        t.0
    }
}

/// Sum of consecutive edge lengths, including the closing edge, summed
/// left to right from `order[0]`.
pub fn tour_length<T: Real>(m: &DistanceMatrix<T>, t: &Tour) -> Result<T> {
    if t.len() != m.n() {
        return Err(Error::InvalidTour(format!(
            "tour visits {} cities, matrix has {}",
            t.len(),
            m.n()
        )));
    }
    Ok(cycle_length(m, t.order()))
}

pub(crate) fn cycle_length<T: Real>(m: &DistanceMatrix<T>, order: &[usize]) -> T {
    let n = order.len();
    let mut total = T::zero();
    for k in 0..n {
        total += m.get(order[k], order[(k + 1) % n]);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_uniform, Graph};
    use proptest::prelude::*;

    fn square() -> DistanceMatrix<f64> {
        Graph::new(
            "sq",
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        )
        .unwrap()
        .distance_matrix()
    }

    #[test]
    fn square_lengths() {
        let m = square();
        let t = Tour::new(vec![0, 1, 2, 3]).unwrap();
        assert_eq!(tour_length(&m, &t).unwrap(), 4.0);
        let t = Tour::new(vec![0, 1, 3, 2]).unwrap();
        assert_eq!(tour_length(&m, &t).unwrap(), 2.0 + 2.0 * 2f64.sqrt());
    }

    #[test]
    fn rejects_bad_tours() {
        assert!(Tour::new(vec![0, 1, 1]).is_err());
        assert!(Tour::new(vec![0, 3, 1]).is_err());
        let t = Tour::new(vec![0, 1, 2]).unwrap();
        assert!(matches!(tour_length(&square(), &t), Err(Error::InvalidTour(_))));
        assert!(serde_json::from_str::<Tour>("[0,0,1]").is_err());
    }

    #[test]
    fn canonical_form() {
        let t = Tour::new(vec![2, 0, 3, 1]).unwrap();
        assert_eq!(t.canonical().order(), &[0, 2, 1, 3]);
        let t = Tour::new(vec![3, 1, 0, 2]).unwrap();
        assert_eq!(t.canonical().order(), &[0, 1, 3, 2]);
        assert_eq!(t.reversed().canonical(), t.canonical());
    }

    proptest! {
        #[test]
        fn length_invariant_under_rotation_and_reversal(
            seed in any::<u64>(),
            perm in Just((0..8usize).collect::<Vec<_>>()).prop_shuffle(),
            shift in 0usize..8,
        ) {
            let m = gen_uniform(8, 10.0f64, seed).unwrap().distance_matrix();
            let t = Tour::new(perm).unwrap();
            let base = tour_length(&m, &t).unwrap();
            let mut rot = t.order().to_vec();
            rot.rotate_left(shift);
            let rot = Tour::new(rot).unwrap();
            prop_assert!((tour_length(&m, &rot).unwrap() - base).abs() < 1e-9);
            prop_assert!((tour_length(&m, &t.reversed()).unwrap() - base).abs() < 1e-9);
            prop_assert_eq!(t.canonical(), t.reversed().canonical());
        }
    }
}
