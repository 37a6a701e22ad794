//! Classical TSP baselines: Held–Karp exact solver and a nearest-neighbor
//! plus 2-opt heuristic.

use super::{closed_length, Tour, TspInstance};
use crate::error::{Error, Result};

/// Hard node cap for the exact dynamic program. Larger requests are an
/// error, never a silent fallback to a heuristic.
pub const HELD_KARP_NODE_CAP: usize = 14;

/// Solves the TSP exactly with the Held–Karp dynamic program.
///
/// Returns a provably optimal closed tour anchored at the instance's start
/// node, together with its length. Requires at most
/// [`HELD_KARP_NODE_CAP`] nodes.
pub fn solve_tsp_exact(t: &TspInstance) -> Result<(Tour, f64)> {
    let m = t.len();
    if m > HELD_KARP_NODE_CAP {
        return Err(Error::SizeCap {
            what: "exact TSP solve",
            limit: HELD_KARP_NODE_CAP,
            requested: m,
        });
    }
    if m == 1 {
        return Ok((Tour::new(vec![t.start]), 0.0));
    }
    let others: Vec<usize> = (0..m).filter(|&v| v != t.start).collect();
    let k = others.len();
    let full = (1usize << k) - 1;
    let d = &t.distances;

    // cost[mask][last]: cheapest path start -> ... -> others[last] visiting
    // exactly the nodes of `mask`.
    let mut cost = vec![vec![f64::INFINITY; k]; 1 << k];
    let mut parent = vec![vec![usize::MAX; k]; 1 << k];
    for i in 0..k {
        cost[1 << i][i] = d[t.start][others[i]];
    }
    for mask in 1..=full {
        for last in 0..k {
            if mask & (1 << last) == 0 {
                continue;
            }
            let base = cost[mask][last];
            if !base.is_finite() {
                continue;
            }
            for next in 0..k {
                if mask & (1 << next) != 0 {
                    continue;
                }
                let nmask = mask | (1 << next);
                let cand = base + d[others[last]][others[next]];
                if cand < cost[nmask][next] {
                    cost[nmask][next] = cand;
                    parent[nmask][next] = last;
                }
            }
        }
    }
    let mut best_last = 0;
    let mut best = f64::INFINITY;
    for last in 0..k {
        let total = cost[full][last] + d[others[last]][t.start];
        if total < best {
            best = total;
            best_last = last;
        }
    }
    let mut order = Vec::with_capacity(m);
    let mut mask = full;
    let mut last = best_last;
    while last != usize::MAX {
        order.push(others[last]);
        let prev = parent[mask][last];
        mask &= !(1 << last);
        last = prev;
    }
    order.push(t.start);
    order.reverse();
    Ok((Tour::new(order), best))
}

/// Nearest-neighbor construction from the start node followed by 2-opt to
/// local optimality. Deterministic: nearest-neighbor ties go to the lowest
/// node index, and each 2-opt pass applies the best improving exchange.
pub fn solve_tsp_heuristic(t: &TspInstance) -> Result<(Tour, f64)> {
    let m = t.len();
    if m == 0 {
        return Err(Error::Invalid("TSP instance has no nodes".into()));
    }
    let d = &t.distances;
    let mut order = Vec::with_capacity(m);
    let mut visited = vec![false; m];
    order.push(t.start);
    visited[t.start] = true;
    while order.len() < m {
        let here = *order.last().unwrap();
        let mut next = usize::MAX;
        let mut best = f64::INFINITY;
        for v in 0..m {
            if !visited[v] && d[here][v] < best {
                best = d[here][v];
                next = v;
            }
        }
        order.push(next);
        visited[next] = true;
    }
    two_opt(d, &mut order);
    let len = closed_length(d, &order);
    Ok((Tour::new(order), len))
}

/// Best-improvement 2-opt keeping position 0 fixed.
fn two_opt(d: &[Vec<f64>], order: &mut [usize]) {
    let m = order.len();
    if m < 4 {
        return;
    }
    loop {
        let mut best_delta = -1e-12;
        let mut best_pair = None;
        for i in 1..m - 1 {
            for j in (i + 1)..m {
                let a = order[i - 1];
                let b = order[i];
                let c = order[j];
                let e = order[(j + 1) % m];
                let delta = d[a][c] + d[b][e] - d[a][b] - d[c][e];
                if delta < best_delta {
                    best_delta = delta;
                    best_pair = Some((i, j));
                }
            }
        }
        match best_pair {
            Some((i, j)) => order[i..=j].reverse(),
            None => break,
        }
    }
}
