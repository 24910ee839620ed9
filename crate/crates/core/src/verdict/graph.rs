//! Bipartite-graph combinatorics behind the robustness argument: two-step
//! edge reachability after edge removal, and extraction of well-behaved
//! rounds from a budgeted mismatch sequence.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::VerdictError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeReachReport {
    pub best_left_vertex: u32,
    /// Edges reachable within two steps from the best left vertex: all
    /// surviving edges incident to its surviving neighborhood.
    pub reachable_edges: u64,
    /// Removed-edge fraction `c̃ = |removed| / 2^{2n}`.
    pub c_tilde: f64,
    /// The guaranteed floor `(1 − 2c̃)·2^{2n}` (meaningful for `c̃ ≤ 1/2`).
    pub lower_bound: f64,
}

/// On the complete bipartite graph `K_{2^n,2^n}` minus the removed edges,
/// finds the left vertex from which the most edges are reachable in two
/// steps (an edge `(l', r)` is reachable from `l` when `r` neighbors `l`).
pub fn edge_removal_reach(n: u32, removed: &HashSet<(u32, u32)>) -> EdgeReachReport {
    assert!(n <= 8, "exhaustive bipartite sweep is sized for n ≤ 8");
    let size = 1u32 << n;
    let present = |l: u32, r: u32| !removed.contains(&(l, r));

    let mut right_degree = vec![0u64; size as usize];
    for r in 0..size {
        right_degree[r as usize] = (0..size).filter(|&l| present(l, r)).count() as u64;
    }

    let mut best_left_vertex = 0;
    let mut reachable_edges = 0u64;
    for l in 0..size {
        let reach: u64 = (0..size)
            .filter(|&r| present(l, r))
            .map(|r| right_degree[r as usize])
            .sum();
        if reach > reachable_edges {
            reachable_edges = reach;
            best_left_vertex = l;
        }
    }

    let total_edges = f64::from(size) * f64::from(size);
    let c_tilde = removed.len() as f64 / total_edges;
    EdgeReachReport {
        best_left_vertex,
        reachable_edges,
        c_tilde,
        lower_bound: (1.0 - 2.0 * c_tilde) * total_edges,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoodRounds {
    /// Indices of the selected rounds, in ascending mismatch order.
    pub indices: Vec<usize>,
    /// Per-round bound satisfied by every selected round:
    /// `Σεⱼ / ((1−q)·r)`.
    pub threshold: f64,
    /// Set when `q·r` was not integral and the size was rounded down.
    pub rounded: bool,
}

/// Picks the `⌊q·r⌋` rounds with the smallest mismatch probabilities; the
/// budget `Σεⱼ` guarantees each selected value is at most
/// `Σεⱼ/((1−q)·r)`.
pub fn good_rounds_subset(epsilons: &[f64], q: f64) -> Result<GoodRounds, VerdictError> {
    if !(q > 0.0 && q < 1.0) {
        return Err(VerdictError::BadSubsetFraction { q });
    }
    let r = epsilons.len();
    if r == 0 {
        return Err(VerdictError::NoScoredRounds);
    }
    let target = q * r as f64;
    let size = target.floor() as usize;
    let rounded = (target - target.round()).abs() > 1e-9;
    let budget: f64 = epsilons.iter().sum();
    let threshold = budget / ((1.0 - q) * r as f64);

    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| epsilons[a].total_cmp(&epsilons[b]));
    order.truncate(size);
    debug_assert!(order.iter().all(|&i| epsilons[i] <= threshold + 1e-12));
    Ok(GoodRounds {
        indices: order,
        threshold,
        rounded,
    })
}
