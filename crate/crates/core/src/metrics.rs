//! Spike matching and the `(‖x − x̃‖₂, ‖w − w̃‖₂)` error pair.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
// Shadowed by inherent methods whenever std is in the crate graph.
#[allow(unused_imports)]
use num_traits::Float;

use crate::eigenmatrix::RecoveryResult;
use crate::kernels::SpikeSignal;
use crate::{Error, Result};

/// Largest spike count matched by exhaustive enumeration.
pub const EXHAUSTIVE_LIMIT: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorPair {
    pub location_error: f64,
    pub weight_error: f64,
    /// `matching[k]` is the recovered spike assigned to truth spike `k`.
    pub matching: Vec<usize>,
}

pub fn match_and_error(truth: &SpikeSignal, recovered: &RecoveryResult) -> Result<ErrorPair> {
    error_pair(
        truth.locations(),
        truth.weights(),
        &recovered.locations,
        &recovered.weights,
    )
}

pub fn error_pair(
    truth_locations: &[Complex64],
    truth_weights: &[Complex64],
    locations: &[Complex64],
    weights: &[Complex64],
) -> Result<ErrorPair> {
    for len in [truth_weights.len(), locations.len(), weights.len()] {
        if len != truth_locations.len() {
            return Err(Error::SizeMismatch {
                expected: truth_locations.len(),
                found: len,
            });
        }
    }
    let matching = match_spikes(truth_locations, locations);
    let location_error = matching
        .iter()
        .enumerate()
        .map(|(k, &p)| (truth_locations[k] - locations[p]).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let weight_error = matching
        .iter()
        .enumerate()
        .map(|(k, &p)| (truth_weights[k] - weights[p]).norm_sqr())
        .sum::<f64>()
        .sqrt();
    Ok(ErrorPair {
        location_error,
        weight_error,
        matching,
    })
}

/// Assignment minimizing `Σ_k |x_k − x̃_{π(k)}|²`. Ties keep the first
/// permutation found, starting from the identity.
pub fn match_spikes(truth: &[Complex64], recovered: &[Complex64]) -> Vec<usize> {
    let n = truth.len();
    debug_assert_eq!(n, recovered.len());
    let cost: Vec<Vec<f64>> = truth
        .iter()
        .map(|t| recovered.iter().map(|r| (t - r).norm_sqr()).collect())
        .collect();
    if n <= EXHAUSTIVE_LIMIT {
        exhaustive_assignment(&cost)
    } else {
        hungarian(&cost)
    }
}

fn assignment_cost(cost: &[Vec<f64>], perm: &[usize]) -> f64 {
    perm.iter().enumerate().map(|(k, &p)| cost[k][p]).sum()
}

/// Heap's algorithm over all `n!` assignments.
fn exhaustive_assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = perm.clone();
    let mut best_cost = assignment_cost(cost, &perm);
    let mut counters = vec![0usize; n];
    let mut i = 1;
    while i < n {
        if counters[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(counters[i], i);
            }
            let c = assignment_cost(cost, &perm);
            if c < best_cost || (best_cost.is_nan() && !c.is_nan()) {
                best_cost = c;
                best.copy_from_slice(&perm);
            }
            counters[i] += 1;
            i = 1;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
    best
}

/// O(n³) Kuhn–Munkres with row/column potentials.
fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let big = |c: f64| if c.is_finite() { c } else { f64::MAX / 4.0 };
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    // way/owner use 1-based column indices, 0 is the virtual start column.
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        owner[0] = row;
        let mut col0 = 0;
        let mut min_v = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[col0] = true;
            let r = owner[col0];
            let mut delta = f64::INFINITY;
            let mut col1 = 0;
            for col in 1..=n {
                if used[col] {
                    continue;
                }
                let reduced = big(cost[r - 1][col - 1]) - u[r] - v[col];
                if reduced < min_v[col] {
                    min_v[col] = reduced;
                    way[col] = col0;
                }
                if min_v[col] < delta {
                    delta = min_v[col];
                    col1 = col;
                }
            }
            for col in 0..=n {
                if used[col] {
                    u[owner[col]] += delta;
                    v[col] -= delta;
                } else {
                    min_v[col] -= delta;
                }
            }
            col0 = col1;
            if owner[col0] == 0 {
                break;
            }
        }
        loop {
            let prev = way[col0];
            owner[col0] = owner[prev];
            col0 = prev;
            if col0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0usize; n];
    for col in 1..=n {
        assignment[owner[col] - 1] = col - 1;
    }
    assignment
}
