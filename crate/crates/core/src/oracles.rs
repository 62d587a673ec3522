//! Exact solvers and classical heuristics used as ground truth and as
//! comparison baselines, plus the optimality-ratio metric.
//!
//! Exhaustive enumeration and Held-Karp dynamic programming replace an
//! external MILP solver at desk scale; both break ties lexicographically so
//! results are deterministic.

use std::time::{Duration, Instant};

use itertools::Itertools;
use thiserror::Error;

use crate::instance::{Tour, TspInstance};

/// Enumeration is (n-1)! — keep it to desk scale.
pub const BRUTE_FORCE_MAX_N: usize = 10;

/// Held-Karp memory is O(2^n * n); 18 cities stay under ~80 MB.
pub const HELD_KARP_MAX_N: usize = 18;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("instance too large for {method}: n={n} exceeds {max}")]
    SizeLimit {
        method: &'static str,
        n: usize,
        max: usize,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Outcome of one solver run.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub tour: Tour,
    pub length: f64,
    pub method: &'static str,
    pub elapsed: Duration,
}

impl SolveResult {
    fn new(inst: &TspInstance, tour: Tour, method: &'static str, started: Instant) -> Self {
        let length = inst.tour_length(&tour);
        Self {
            tour,
            length,
            method,
            elapsed: started.elapsed(),
        }
    }
}

/// Globally optimal tour by enumerating all orders with city 0 fixed first.
///
/// Ties are broken by the lexicographically smallest order.
pub fn brute_force_opt(inst: &TspInstance) -> Result<SolveResult, OracleError> {
    let n = inst.n();
    if n > BRUTE_FORCE_MAX_N {
        return Err(OracleError::SizeLimit {
            method: "brute_force",
            n,
            max: BRUTE_FORCE_MAX_N,
        });
    }
    let started = Instant::now();
    let mut best_order: Option<Vec<usize>> = None;
    let mut best_len = f64::INFINITY;
    // `permutations` yields in lexicographic order over the (sorted) input,
    // so keeping only strict improvements realizes the tie-break rule.
    for perm in (1..n).permutations(n - 1) {
        let mut len = inst.edge_weight(0, perm[0]);
        for w in perm.windows(2) {
            len += inst.edge_weight(w[0], w[1]);
        }
        len += inst.edge_weight(perm[n - 2], 0);
        if len < best_len {
            best_len = len;
            best_order = Some(perm);
        }
    }
    let mut order = vec![0];
    order.extend(best_order.expect("n >= 2"));
    let tour = Tour::new(order, n).expect("permutation by construction");
    Ok(SolveResult::new(inst, tour, "brute_force", started))
}

/// Globally optimal tour by Held-Karp dynamic programming over subsets,
/// O(2^n * n^2) time and O(2^n * n) memory. City 0 is the fixed start.
pub fn held_karp(inst: &TspInstance) -> Result<SolveResult, OracleError> {
    let n = inst.n();
    if n > HELD_KARP_MAX_N {
        return Err(OracleError::SizeLimit {
            method: "held_karp",
            n,
            max: HELD_KARP_MAX_N,
        });
    }
    let started = Instant::now();
    // Masks range over cities 1..n (bit i-1 = city i present).
    let m = n - 1;
    let full = (1usize << m) - 1;
    let mut dp = vec![f64::INFINITY; (full + 1) * m];
    let mut parent = vec![0u8; (full + 1) * m];
    for j in 0..m {
        dp[(1 << j) * m + j] = inst.edge_weight(0, j + 1);
    }
    for mask in 1..=full {
        if mask.count_ones() < 2 {
            continue;
        }
        for j in 0..m {
            if mask & (1 << j) == 0 {
                continue;
            }
            let prev_mask = mask & !(1 << j);
            let mut best = f64::INFINITY;
            let mut best_k = 0u8;
            for k in 0..m {
                if prev_mask & (1 << k) == 0 {
                    continue;
                }
                let cand = dp[prev_mask * m + k] + inst.edge_weight(k + 1, j + 1);
                if cand < best {
                    best = cand;
                    best_k = k as u8;
                }
            }
            dp[mask * m + j] = best;
            parent[mask * m + j] = best_k;
        }
    }
    let mut best = f64::INFINITY;
    let mut last = 0usize;
    for j in 0..m {
        let cand = dp[full * m + j] + inst.edge_weight(j + 1, 0);
        if cand < best {
            best = cand;
            last = j;
        }
    }
    let mut order = vec![0usize; n];
    let mut mask = full;
    let mut j = last;
    for slot in (1..n).rev() {
        order[slot] = j + 1;
        let p = parent[mask * m + j] as usize;
        mask &= !(1 << j);
        j = p;
    }
    let tour = Tour::new(order, n).expect("permutation by construction");
    Ok(SolveResult::new(inst, tour, "held_karp", started))
}

/// Greedy nearest-neighbor tour from `start`; distance ties go to the
/// lowest city index.
pub fn nearest_neighbor(inst: &TspInstance, start: usize) -> Result<SolveResult, OracleError> {
    let n = inst.n();
    if start >= n {
        return Err(OracleError::InvalidArgument(format!(
            "start city {start} out of range (n={n})"
        )));
    }
    let started = Instant::now();
    let mut order = Vec::with_capacity(n);
    let mut used = vec![false; n];
    order.push(start);
    used[start] = true;
    for _ in 1..n {
        let here = *order.last().unwrap();
        let mut best = f64::INFINITY;
        let mut pick = usize::MAX;
        for v in 0..n {
            if !used[v] && inst.edge_weight(here, v) < best {
                best = inst.edge_weight(here, v);
                pick = v;
            }
        }
        order.push(pick);
        used[pick] = true;
    }
    let tour = Tour::new(order, n).expect("permutation by construction");
    Ok(SolveResult::new(inst, tour, "nearest_neighbor", started))
}

/// First-improvement 2-opt until no move shortens the tour. The output is
/// never longer than the input.
pub fn two_opt(inst: &TspInstance, tour: &Tour) -> Result<SolveResult, OracleError> {
    let n = inst.n();
    if tour.order.len() != n {
        return Err(OracleError::InvalidArgument(format!(
            "tour has {} entries, expected {n}",
            tour.order.len()
        )));
    }
    let started = Instant::now();
    let eps = 1e-12 * inst.coord_scale();
    let mut order = tour.order.clone();
    let mut improved = true;
    while improved {
        improved = false;
        for i in 0..n - 1 {
            for j in (i + 2)..n {
                if i == 0 && j == n - 1 {
                    continue; // reversing the whole interior flips direction only
                }
                let (a, b) = (order[i], order[i + 1]);
                let (c, d) = (order[j], order[(j + 1) % n]);
                let delta = inst.edge_weight(a, c) + inst.edge_weight(b, d)
                    - inst.edge_weight(a, b)
                    - inst.edge_weight(c, d);
                if delta < -eps {
                    order[i + 1..=j].reverse();
                    improved = true;
                }
            }
        }
    }
    let tour = Tour::new(order, n).expect("still a permutation");
    Ok(SolveResult::new(inst, tour, "two_opt", started))
}

/// Optimality ratio `c / c*` (the form reported in result tables; the
/// subtracted gap form is `ratio - 1`).
pub fn optimality_gap(c: f64, c_star: f64) -> Result<f64, OracleError> {
    if !(c_star > 0.0) {
        return Err(OracleError::InvalidArgument(format!(
            "reference length must be positive, got {c_star}"
        )));
    }
    Ok(c / c_star)
}
