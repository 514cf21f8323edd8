//! Wilcoxon signed-rank test for paired samples.
//!
//! Zero differences are dropped, absolute differences are ranked with
//! midranks for ties, and `W = min(W⁺, W⁻)`. Up to [`EXACT_MAX_N`]
//! nonzero pairs the two-sided p value comes from the exact null
//! distribution of `W⁺` (every sign pattern equally likely), obtained by a
//! subset-sum recursion over doubled ranks. Above that a normal
//! approximation with tie and continuity corrections is used.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

pub const EXACT_MAX_N: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WilcoxonMethod {
    Exact,
    NormalApprox,
    /// Every difference was zero; `p = 1`.
    Degenerate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodChoice {
    Auto,
    Exact,
    Normal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    pub w: f64,
    pub w_plus: f64,
    pub w_minus: f64,
    pub p_value: f64,
    pub method: WilcoxonMethod,
    pub n_effective: usize,
}

pub fn wilcoxon_signed_rank(x: &[f64], y: &[f64]) -> Result<WilcoxonResult> {
    wilcoxon_signed_rank_with(x, y, MethodChoice::Auto)
}

pub fn wilcoxon_signed_rank_with(
    x: &[f64],
    y: &[f64],
    choice: MethodChoice,
) -> Result<WilcoxonResult> {
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::InvalidInput(format!(
            "paired samples need equal nonzero lengths, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let diffs: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(a, b)| a - b)
        .filter(|d| *d != 0.0)
        .collect();
    if diffs.iter().any(|d| !d.is_finite()) {
        return Err(Error::InvalidInput("differences must be finite".into()));
    }
    let n = diffs.len();
    if n == 0 {
        return Ok(WilcoxonResult {
            w: 0.0,
            w_plus: 0.0,
            w_minus: 0.0,
            p_value: 1.0,
            method: WilcoxonMethod::Degenerate,
            n_effective: 0,
        });
    }

    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let (ranks, tie_sizes) = midranks(&abs);
    let w_plus: f64 = diffs
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| r)
        .sum();
    let total = (n * (n + 1)) as f64 / 2.0;
    let w_minus = total - w_plus;
    let w = w_plus.min(w_minus);

    let exact = match choice {
        MethodChoice::Auto => n <= EXACT_MAX_N,
        MethodChoice::Exact => true,
        MethodChoice::Normal => false,
    };
    let (p_value, method) = if exact {
        (exact_p(&ranks, w), WilcoxonMethod::Exact)
    } else {
        (normal_p(n, &tie_sizes, w), WilcoxonMethod::NormalApprox)
    };
    Ok(WilcoxonResult {
        w,
        w_plus,
        w_minus,
        p_value,
        method,
        n_effective: n,
    })
}

/// 1-based midranks of `values` and the sizes of each tie group.
pub fn midranks(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let n = values.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && values[idx[j]] == values[idx[i]] {
            j += 1;
        }
        let rank = (i + 1 + j) as f64 / 2.0;
        for &k in &idx[i..j] {
            ranks[k] = rank;
        }
        ties.push(j - i);
        i = j;
    }
    (ranks, ties)
}

/// Null distribution of `W⁺` for the given ranks: `(value, probability)`
/// pairs in increasing order of value, zero-probability values omitted.
///
/// Ranks must be multiples of 1/2 (midranks are).
pub fn signed_rank_null_distribution(ranks: &[f64]) -> Vec<(f64, f64)> {
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let max: usize = doubled.iter().sum();
    let mut prob = vec![0.0f64; max + 1];
    prob[0] = 1.0;
    let mut reach = 0;
    for &r in &doubled {
        reach += r;
        for s in (0..=reach).rev() {
            let carry = if s >= r { prob[s - r] } else { 0.0 };
            prob[s] = 0.5 * prob[s] + 0.5 * carry;
        }
    }
    prob.into_iter()
        .enumerate()
        .filter(|(_, p)| *p > 0.0)
        .map(|(s, p)| (s as f64 / 2.0, p))
        .collect()
}

fn exact_p(ranks: &[f64], w: f64) -> f64 {
    let lower: f64 = signed_rank_null_distribution(ranks)
        .into_iter()
        .take_while(|(v, _)| *v <= w + 1e-9)
        .map(|(_, p)| p)
        .sum();
    (2.0 * lower).min(1.0)
}

fn normal_p(n: usize, tie_sizes: &[usize], w: f64) -> f64 {
    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let tie_term: f64 = tie_sizes
        .iter()
        .map(|&t| {
            let t = t as f64;
            t * t * t - t
        })
        .sum::<f64>()
        / 48.0;
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term;
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((w - mean) + 0.5).min(0.0) / var.sqrt();
    let phi = Normal::standard().cdf(z);
    (2.0 * phi).min(1.0)
}
