use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::RunRecord;
use crate::error::{Error, Result};
use crate::exact::{cycle_length, Tour};
use crate::graph::DistanceMatrix;
use crate::rng::{seeded, SeededRng};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    pub population: usize,
    pub mutation_rate: f64,
    pub tournament_size: usize,
    pub elitism_fraction: f64,
    pub generations: usize,
    /// Stop after this many generations without a new best; `None` never stops early.
    pub stall_generations: Option<usize>,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population: 100,
            mutation_rate: 0.05,
            tournament_size: 3,
            elitism_fraction: 0.10,
            generations: 500,
            stall_generations: Some(100),
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::InvalidParameter("population must be at least 2".into()));
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return Err(Error::InvalidParameter(format!(
                "mutation_rate must be in [0, 1], got {}",
                self.mutation_rate
            )));
        }
        if self.tournament_size < 1 || self.tournament_size > self.population {
            return Err(Error::InvalidParameter(format!(
                "tournament_size must be in 1..={}, got {}",
                self.population, self.tournament_size
            )));
        }
        if !(0.0..1.0).contains(&self.elitism_fraction) {
            return Err(Error::InvalidParameter(format!(
                "elitism_fraction must be in [0, 1), got {}",
                self.elitism_fraction
            )));
        }
        Ok(())
    }

    /// `round(elitism_fraction·population)`, at least 1.
    pub fn elite_count(&self) -> usize {
        ((self.elitism_fraction * self.population as f64).round() as usize).max(1)
    }
}

/// OX crossover: the child keeps `p1[cut_lo..cut_hi]` in place and fills
/// the remaining positions, starting at `cut_hi` and wrapping, with the
/// cities of `p2` read cyclically from `cut_hi`, skipping cities already
/// present.
pub fn ordered_crossover(p1: &Tour, p2: &Tour, cut_lo: usize, cut_hi: usize) -> Result<Tour> {
    let n = p1.len();
    if p2.len() != n {
        return Err(Error::InvalidInput(format!(
            "parents cover {n} and {} cities",
            p2.len()
        )));
    }
    if cut_lo >= cut_hi || cut_hi > n {
        return Err(Error::InvalidInput(format!(
            "cut points must satisfy 0 <= lo < hi <= {n}, got [{cut_lo}, {cut_hi})"
        )));
    }
    let (a, b) = (p1.order(), p2.order());
    let mut child = vec![usize::MAX; n];
    let mut present = vec![false; n];
    for k in cut_lo..cut_hi {
        child[k] = a[k];
        present[a[k]] = true;
    }
    let mut pos = cut_hi % n;
    for k in 0..n {
        let city = b[(cut_hi + k) % n];
        if present[city] {
            continue;
        }
        child[pos] = city;
        present[city] = true;
        pos = (pos + 1) % n;
    }
    Ok(Tour::from_vec_unchecked(child))
}

/// Visits each position once; with probability `rate` swaps it with a
/// different position chosen uniformly.
pub fn swap_mutation_with<R: Rng>(t: &Tour, rate: f64, rng: &mut R) -> Tour {
    mutate_counted(t, rate, rng).0
}

fn mutate_counted<R: Rng>(t: &Tour, rate: f64, rng: &mut R) -> (Tour, usize) {
    let mut v = t.order().to_vec();
    let n = v.len();
    if n < 2 || rate <= 0.0 {
        return (t.clone(), 0);
    }
    let mut events = 0;
    for i in 0..n {
        if rng.random::<f64>() < rate {
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            v.swap(i, j);
            events += 1;
        }
    }
    (Tour::from_vec_unchecked(v), events)
}

pub fn swap_mutation(t: &Tour, rate: f64, seed: u64) -> Tour {
    swap_mutation_with(t, rate, &mut seeded(seed))
}

/// Draws `k` indices uniformly with replacement and returns the one with the
/// shortest length, lowest index on ties.
pub fn tournament_select_with<T: Real, R: Rng>(lengths: &[T], k: usize, rng: &mut R) -> usize {
    let mut best = rng.random_range(0..lengths.len());
    for _ in 1..k {
        let c = rng.random_range(0..lengths.len());
        if lengths[c] < lengths[best] || (lengths[c] == lengths[best] && c < best) {
            best = c;
        }
    }
    best
}

pub fn tournament_select<T: Real>(
    population: &[Tour],
    lengths: &[T],
    k: usize,
    seed: u64,
) -> Result<Tour> {
    if population.is_empty() || population.len() != lengths.len() {
        return Err(Error::InvalidInput(format!(
            "{} tours with {} lengths",
            population.len(),
            lengths.len()
        )));
    }
    if k == 0 || k > population.len() {
        return Err(Error::InvalidParameter(format!(
            "tournament size must be in 1..={}, got {k}",
            population.len()
        )));
    }
    let idx = tournament_select_with(lengths, k, &mut seeded(seed));
    Ok(population[idx].clone())
}

fn random_cut(n: usize, rng: &mut SeededRng) -> (usize, usize) {
    let a = rng.random_range(0..=n);
    let mut b = rng.random_range(0..n);
    if b >= a {
        b += 1;
    }
    (a.min(b), a.max(b))
}

/// Generational GA with elitism; see [`genetic_algorithm`].
fn evolve_population<T: Real>(
    m: &DistanceMatrix<T>,
    cfg: &GaConfig,
) -> Result<(RunRecord<T>, Vec<T>)> {
    cfg.validate()?;
    let start = Instant::now();
    let n = m.n();
    let mut rng = seeded(cfg.seed);
    let mut pop: Vec<Tour> = (0..cfg.population)
        .map(|_| {
            let mut v: Vec<usize> = (0..n).collect();
            v.shuffle(&mut rng);
            Tour::from_vec_unchecked(v)
        })
        .collect();
    let mut lengths: Vec<T> = pop.iter().map(|t| cycle_length(m, t.order())).collect();
    let mut evals = pop.len() as u64;

    let best_of = |lengths: &[T]| -> usize {
        (0..lengths.len())
            .min_by(|&a, &b| lengths[a].partial_cmp(&lengths[b]).expect("finite lengths"))
            .expect("nonempty population")
    };
    let first = best_of(&lengths);
    let mut best = (lengths[first], pop[first].clone());
    let mut history = vec![best.0];
    let mut stall = 0usize;
    let elites = cfg.elite_count().min(cfg.population);

    for _ in 0..cfg.generations {
        if cfg.stall_generations.is_some_and(|s| stall >= s) {
            break;
        }
        let mut ranked: Vec<usize> = (0..pop.len()).collect();
        ranked.sort_by(|&a, &b| lengths[a].partial_cmp(&lengths[b]).expect("finite lengths"));

        let mut next: Vec<Tour> = ranked[..elites].iter().map(|&i| pop[i].clone()).collect();
        let mut next_len: Vec<T> = ranked[..elites].iter().map(|&i| lengths[i]).collect();
        while next.len() < cfg.population {
            let a = tournament_select_with(&lengths, cfg.tournament_size, &mut rng);
            let b = tournament_select_with(&lengths, cfg.tournament_size, &mut rng);
            let (lo, hi) = random_cut(n, &mut rng);
            let child = ordered_crossover(&pop[a], &pop[b], lo, hi)?;
            let child = swap_mutation_with(&child, cfg.mutation_rate, &mut rng);
            next_len.push(cycle_length(m, child.order()));
            next.push(child);
            evals += 1;
        }
        pop = next;
        lengths = next_len;

        let g = best_of(&lengths);
        if lengths[g] < best.0 {
            best = (lengths[g], pop[g].clone());
            stall = 0;
        } else {
            stall += 1;
        }
        history.push(best.0);
    }

    let best_tour = best.1.canonical();
    Ok((
        RunRecord {
            solver: "ga".into(),
            best_length: cycle_length(m, best_tour.order()),
            best_tour,
            duration_s: start.elapsed().as_secs_f64(),
            evals,
            seed: cfg.seed,
        },
        history,
    ))
}

/// Genetic algorithm with elitism, tournament selection, OX crossover on a
/// uniformly random cut pair, and swap mutation.
///
/// Each generation copies the `elite_count` shortest tours unchanged (stable
/// order), then breeds the rest of the population.
pub fn genetic_algorithm<T: Real>(m: &DistanceMatrix<T>, cfg: &GaConfig) -> Result<RunRecord<T>> {
    evolve_population(m, cfg).map(|(r, _)| r)
}
