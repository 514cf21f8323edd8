//! Exact TSP oracles and tour utilities.
//!
//! [`brute_force_tsp`] and [`held_karp`] are the ground truth for every
//! approximation ratio in the crate. Both report the optimum as the
//! [`tour_length`] of a canonical tour, so they agree bit for bit.

mod tour;

pub use tour::{tour_length, Tour};

pub(crate) use tour::cycle_length;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::graph::DistanceMatrix;
use crate::scalar::Real;

pub const BRUTE_FORCE_MAX_CITIES: usize = 10;
pub const HELD_KARP_MAX_CITIES: usize = 16;

fn check_size(n: usize, cap: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::InvalidInstance(format!(
            "need at least 3 cities, got {n}"
        )));
    }
    if n > cap {
        return Err(Error::InstanceTooLarge {
            what: "city count",
            size: n,
            cap,
        });
    }
    Ok(())
}

/// Enumerates every direction-normalized tour with city 0 first.
///
/// Candidates are visited in lexicographic order and replaced only on a
/// strict improvement, so ties resolve to the lexicographically smallest
/// canonical tour.
pub fn brute_force_tsp<T: Real>(m: &DistanceMatrix<T>) -> Result<(Tour, T)> {
    let n = m.n();
    check_size(n, BRUTE_FORCE_MAX_CITIES)?;
    let mut best: Option<(Vec<usize>, T)> = None;
    let mut order = vec![0usize; n];
    for rest in (1..n).permutations(n - 1) {
        if rest[0] > rest[n - 2] {
            continue;
        }
        order[1..].copy_from_slice(&rest);
        let len = cycle_length(m, &order);
        if best.as_ref().is_none_or(|(_, b)| len < *b) {
            best = Some((order.clone(), len));
        }
    }
    let (order, len) = best.expect("at least one tour for n >= 3");
    Ok((Tour::from_vec_unchecked(order), len))
}

/// Dynamic programming over subsets of cities `1..n`, O(n²·2ⁿ).
///
/// Subproblem `(S, j)` is the cheapest path from city 0 through every city
/// of `S` ending at `j`. Predecessors and the closing city are the lowest
/// index attaining a strict minimum. The returned length is recomputed with
/// [`tour_length`] on the canonical form of the reconstructed tour.
pub fn held_karp<T: Real>(m: &DistanceMatrix<T>) -> Result<(Tour, T)> {
    let n = m.n();
    check_size(n, HELD_KARP_MAX_CITIES)?;
    let k = n - 1; // cities 1..n map to bits 0..k
    let full = (1usize << k) - 1;
    let mut cost = vec![T::infinity(); (1 << k) * k];
    let mut parent = vec![u8::MAX; (1 << k) * k];
    for j in 0..k {
        cost[(1 << j) * k + j] = m.get(0, j + 1);
    }
    for set in 1..=full {
        for j in 0..k {
            if set & (1 << j) == 0 {
                continue;
            }
            let prev = set ^ (1 << j);
            if prev == 0 {
                continue;
            }
            let mut best = T::infinity();
            let mut arg = u8::MAX;
            for i in 0..k {
                if prev & (1 << i) == 0 {
                    continue;
                }
                let c = cost[prev * k + i] + m.get(i + 1, j + 1);
                if c < best {
                    best = c;
                    arg = i as u8;
                }
            }
            cost[set * k + j] = best;
            parent[set * k + j] = arg;
        }
    }

    let mut last = 0;
    let mut best = T::infinity();
    for j in 0..k {
        let c = cost[full * k + j] + m.get(j + 1, 0);
        if c < best {
            best = c;
            last = j;
        }
    }

    let mut rev = Vec::with_capacity(n);
    let mut set = full;
    let mut j = last;
    loop {
        rev.push(j + 1);
        let p = parent[set * k + j];
        set ^= 1 << j;
        if set == 0 {
            break;
        }
        j = p as usize;
    }
    rev.push(0);
    rev.reverse();
    let tour = Tour::from_vec_unchecked(rev).canonical();
    let len = tour_length(m, &tour)?;
    Ok((tour, len))
}

/// First-improvement 2-opt descent.
///
/// Scans position pairs `(i, j)` with `i` ascending then `j` ascending and
/// applies the first exchange that shortens the tour (reversing
/// `order[i+1..=j]`), restarting the scan after each move, until no
/// improving exchange remains.
pub fn two_opt_descent<T: Real>(m: &DistanceMatrix<T>, start: &Tour) -> Result<Tour> {
    let n = m.n();
    if start.len() != n {
        return Err(Error::InvalidTour(format!(
            "tour visits {} cities, matrix has {n}",
            start.len()
        )));
    }
    let mut order = start.order().to_vec();
    // Exchanges must beat this margin so rounding noise cannot cycle.
    let margin = T::epsilon() * T::lit(16.0) * m.max_entry();
    'scan: loop {
        for i in 0..n.saturating_sub(2) {
            let a = order[i];
            let b = order[i + 1];
            let j_end = if i == 0 { n - 1 } else { n };
            for j in i + 2..j_end {
                let c = order[j];
                let e = order[(j + 1) % n];
                let delta = m.get(a, c) + m.get(b, e) - m.get(a, b) - m.get(c, e);
                if delta < -margin {
                    order[i + 1..=j].reverse();
                    continue 'scan;
                }
            }
        }
        break;
    }
    Ok(Tour::from_vec_unchecked(order))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_uniform, Graph};
    use crate::rng::seeded;
    use rand::seq::SliceRandom;

    fn square() -> DistanceMatrix<f64> {
        Graph::new(
            "sq",
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        )
        .unwrap()
        .distance_matrix()
    }

    #[test]
    fn square_optimum() {
        let (t, len) = brute_force_tsp(&square()).unwrap();
        assert_eq!(len, 4.0);
        assert_eq!(t.order(), &[0, 1, 2, 3]);
        let (t, len) = held_karp(&square()).unwrap();
        assert_eq!(len, 4.0);
        assert_eq!(t.order(), &[0, 1, 2, 3]);
    }

    #[test]
    fn triangle_has_one_tour() {
        let g = Graph::new("tri", vec![[0.0, 0.0], [3.0, 4.0], [0.0, 8.0]]).unwrap();
        let m = g.distance_matrix();
        let (t, len) = brute_force_tsp(&m).unwrap();
        assert_eq!(t.order(), &[0, 1, 2]);
        assert_eq!(len, 18.0);
        assert_eq!(held_karp(&m).unwrap().1, 18.0);
    }

    #[test]
    fn size_caps() {
        let m = gen_uniform(11, 1.0f64, 0).unwrap().distance_matrix();
        assert!(matches!(
            brute_force_tsp(&m),
            Err(Error::InstanceTooLarge { cap: 10, .. })
        ));
        let m = gen_uniform(17, 1.0f64, 0).unwrap().distance_matrix();
        assert!(matches!(
            held_karp(&m),
            Err(Error::InstanceTooLarge { cap: 16, .. })
        ));
    }

    #[test]
    fn n8_seed11_oracles_agree() {
        let m = gen_uniform(8, 100.0f64, 11).unwrap().distance_matrix();
        let (bt, bl) = brute_force_tsp(&m).unwrap();
        let (ht, hl) = held_karp(&m).unwrap();
        assert_eq!(bl, hl);
        assert_eq!(bt, ht);
    }

    #[test]
    fn oracle_equivalence_suite() {
        for n in 3..=10 {
            for seed in 0..4u64 {
                let m = gen_uniform(n, 100.0f64, seed * 31 + n as u64)
                    .unwrap()
                    .distance_matrix();
                let (_, bl) = brute_force_tsp(&m).unwrap();
                let (ht, hl) = held_karp(&m).unwrap();
                assert_eq!(bl, hl, "n={n} seed={seed}");
                assert_eq!(tour_length(&m, &ht).unwrap(), hl);
            }
        }
    }

    #[test]
    fn held_karp_n12_returns_permutation() {
        let m = gen_uniform(12, 100.0f64, 5).unwrap().distance_matrix();
        let (t, len) = held_karp(&m).unwrap();
        assert!(Tour::new(t.order().to_vec()).is_ok());
        assert_eq!(tour_length(&m, &t).unwrap(), len);
    }

    #[test]
    fn two_opt_fixes_crossed_square() {
        let m = square();
        let t = two_opt_descent(&m, &Tour::new(vec![0, 1, 3, 2]).unwrap()).unwrap();
        assert_eq!(tour_length(&m, &t).unwrap(), 4.0);
        let opt = Tour::new(vec![0, 1, 2, 3]).unwrap();
        assert_eq!(two_opt_descent(&m, &opt).unwrap(), opt);
    }

    #[test]
    fn two_opt_never_beats_the_optimum() {
        let mut rng = seeded(99);
        for seed in 0..20u64 {
            let m = gen_uniform(8, 100.0f64, seed).unwrap().distance_matrix();
            let (_, opt) = brute_force_tsp(&m).unwrap();
            let mut order: Vec<usize> = (0..8).collect();
            order.shuffle(&mut rng);
            let start = Tour::new(order).unwrap();
            let out = two_opt_descent(&m, &start).unwrap();
            let len = tour_length(&m, &out).unwrap();
            assert!(len >= opt - 1e-9);
            assert!(len <= tour_length(&m, &start).unwrap());
            // A 2-opt local optimum is a fixed point.
            assert_eq!(two_opt_descent(&m, &out).unwrap(), out);
        }
    }
}
