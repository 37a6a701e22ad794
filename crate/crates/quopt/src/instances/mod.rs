//! Problem data model: CVRP and TSP instances, tours, classical baselines.
//!
//! Distances are stored as full dense symmetric matrices and are frozen at
//! construction time; Euclidean values are never re-derived afterwards.

mod format;
mod tsp;

pub use format::{load_euc2d, load_instance, load_native, write_native, InstanceFormat};
pub use tsp::{solve_tsp_exact, solve_tsp_heuristic, HELD_KARP_NODE_CAP};

use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Tolerance for checking stored distances against coordinate-derived ones.
const COORD_DISTANCE_TOL: f64 = 1e-9;

/// A capacitated vehicle routing instance on a complete graph.
///
/// One node is the depot; every other node carries a positive demand that a
/// vehicle of capacity `capacity` must collect on depot-anchored tours.
#[derive(Debug, Clone, PartialEq)]
pub struct CvrpInstance {
    pub name: String,
    pub coords: Option<Vec<(f64, f64)>>,
    pub depot: usize,
    pub demands: Vec<u32>,
    pub capacity: u32,
    pub distances: Vec<Vec<f64>>,
}

impl CvrpInstance {
    /// Builds and validates an instance, computing the Euclidean distance
    /// matrix from coordinates.
    pub fn from_coords(
        name: impl Into<String>,
        coords: Vec<(f64, f64)>,
        depot: usize,
        demands: Vec<u32>,
        capacity: u32,
    ) -> Result<Self> {
        let distances = euclidean_matrix(&coords);
        Self::new(name, Some(coords), depot, demands, capacity, distances)
    }

    /// Builds and validates an instance from an explicit distance matrix.
    pub fn new(
        name: impl Into<String>,
        coords: Option<Vec<(f64, f64)>>,
        depot: usize,
        demands: Vec<u32>,
        capacity: u32,
        distances: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let inst = CvrpInstance {
            name: name.into(),
            coords,
            depot,
            demands,
            capacity,
            distances,
        };
        inst.validate()?;
        Ok(inst)
    }

    fn validate(&self) -> Result<()> {
        let n = self.distances.len();
        if n == 0 {
            return Err(Error::Invalid("instance has no nodes".into()));
        }
        if self.depot >= n {
            return Err(Error::Invalid(format!(
                "depot index {} out of range for {n} nodes",
                self.depot
            )));
        }
        if self.demands.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: self.demands.len(),
            });
        }
        if self.capacity == 0 {
            return Err(Error::Invalid("capacity must be positive".into()));
        }
        validate_distance_matrix(&self.distances)?;
        if self.demands[self.depot] != 0 {
            return Err(Error::Invalid(format!(
                "depot node {} must have demand 0, found {}",
                self.depot, self.demands[self.depot]
            )));
        }
        for (v, &d) in self.demands.iter().enumerate() {
            if v == self.depot {
                continue;
            }
            if d == 0 {
                return Err(Error::Invalid(format!("node {v} has zero demand")));
            }
            if d > self.capacity {
                return Err(Error::Invalid(format!(
                    "node {v} has demand {d} exceeding capacity {}",
                    self.capacity
                )));
            }
        }
        if let Some(coords) = &self.coords {
            if coords.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: coords.len(),
                });
            }
            for (i, &(x, y)) in coords.iter().enumerate() {
                if !x.is_finite() || !y.is_finite() {
                    return Err(Error::Invalid(format!(
                        "node {i} has non-finite coordinates"
                    )));
                }
            }
            for i in 0..n {
                for j in 0..n {
                    let d = euclidean(coords[i], coords[j]);
                    if (self.distances[i][j] - d).abs() > COORD_DISTANCE_TOL {
                        return Err(Error::Invalid(format!(
                            "distance[{i}][{j}] = {} disagrees with coordinates ({d})",
                            self.distances[i][j]
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Total node count including the depot.
    pub fn len(&self) -> usize {
        self.distances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.distances.is_empty()
    }

    /// Number of non-depot nodes.
    pub fn non_depot_count(&self) -> usize {
        self.len() - 1
    }

    /// Non-depot node indices in ascending order.
    pub fn non_depot_nodes(&self) -> Vec<usize> {
        (0..self.len()).filter(|&v| v != self.depot).collect()
    }
}

/// A symmetric TSP over a subset of a CVRP instance's nodes.
///
/// `origin_labels[local]` maps a local node index back to the parent
/// instance's index; `start` is the local index of the fixed start node.
#[derive(Debug, Clone, PartialEq)]
pub struct TspInstance {
    pub distances: Vec<Vec<f64>>,
    pub origin_labels: Vec<usize>,
    pub start: usize,
    pub coords: Option<Vec<(f64, f64)>>,
}

impl TspInstance {
    pub fn new(
        distances: Vec<Vec<f64>>,
        origin_labels: Vec<usize>,
        start: usize,
        coords: Option<Vec<(f64, f64)>>,
    ) -> Result<Self> {
        let m = distances.len();
        if m == 0 {
            return Err(Error::Invalid("TSP instance has no nodes".into()));
        }
        validate_distance_matrix(&distances)?;
        if origin_labels.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: origin_labels.len(),
            });
        }
        let mut seen = std::collections::HashSet::new();
        for &l in &origin_labels {
            if !seen.insert(l) {
                return Err(Error::Invalid(format!("origin label {l} duplicated")));
            }
        }
        if start >= m {
            return Err(Error::Invalid(format!("start index {start} out of range")));
        }
        if let Some(c) = &coords {
            if c.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    got: c.len(),
                });
            }
        }
        Ok(TspInstance {
            distances,
            origin_labels,
            start,
            coords,
        })
    }

    /// Convenience constructor with identity labels and start 0.
    pub fn from_matrix(distances: Vec<Vec<f64>>) -> Result<Self> {
        let m = distances.len();
        Self::new(distances, (0..m).collect(), 0, None)
    }

    pub fn len(&self) -> usize {
        self.distances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.distances.is_empty()
    }
}

/// A closed tour over all nodes of a [`TspInstance`], anchored at its start.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Tour {
    pub order: Vec<usize>,
}

impl Tour {
    pub fn new(order: Vec<usize>) -> Self {
        Tour { order }
    }

    /// Checks that the tour is a permutation of the instance's nodes
    /// beginning at its start node.
    pub fn validate_for(&self, t: &TspInstance) -> Result<()> {
        let m = t.len();
        if self.order.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: self.order.len(),
            });
        }
        if self.order[0] != t.start {
            return Err(Error::Invalid(format!(
                "tour must begin at start node {}, found {}",
                t.start, self.order[0]
            )));
        }
        let mut seen = vec![false; m];
        for &v in &self.order {
            if v >= m || seen[v] {
                return Err(Error::Invalid(format!(
                    "tour is not a permutation: node {v}"
                )));
            }
            seen[v] = true;
        }
        Ok(())
    }
}

/// A complete CVRP solution: depot-anchored tours in instance indices.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CvrpSolution {
    pub tours: Vec<Tour>,
    pub total_length: f64,
}

/// Closed length of a tour: consecutive hops plus the edge back to start.
pub fn tour_length(t: &TspInstance, tour: &Tour) -> Result<f64> {
    tour.validate_for(t)?;
    Ok(closed_length(&t.distances, &tour.order))
}

/// Closed length of a node sequence under a distance matrix (no validation).
pub(crate) fn closed_length(distances: &[Vec<f64>], order: &[usize]) -> f64 {
    if order.len() < 2 {
        return 0.0;
    }
    let mut total = 0.0;
    for w in order.windows(2) {
        total += distances[w[0]][w[1]];
    }
    total + distances[order[order.len() - 1]][order[0]]
}

/// Generates a uniform random instance: `n` non-depot nodes in `[0, bbox]²`,
/// integer demands in `demand_range`, depot at the box center.
///
/// Deterministic for a fixed seed.
pub fn generate_random(
    n: usize,
    capacity: u32,
    demand_range: (u32, u32),
    bbox: f64,
    seed: u64,
) -> Result<CvrpInstance> {
    let (lo, hi) = demand_range;
    if lo < 1 {
        return Err(Error::Config(
            "demand lower bound must be at least 1".into(),
        ));
    }
    if hi > capacity {
        return Err(Error::Config(format!(
            "demand upper bound {hi} exceeds capacity {capacity}"
        )));
    }
    if lo > hi {
        return Err(Error::Config(format!("empty demand range [{lo}, {hi}]")));
    }
    if !(bbox > 0.0) || !bbox.is_finite() {
        return Err(Error::Config("bounding-box side must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords = Vec::with_capacity(n + 1);
    coords.push((bbox / 2.0, bbox / 2.0));
    for _ in 0..n {
        let x = rng.gen_range(0.0..bbox);
        let y = rng.gen_range(0.0..bbox);
        coords.push((x, y));
    }
    let mut demands = Vec::with_capacity(n + 1);
    demands.push(0);
    for _ in 0..n {
        demands.push(rng.gen_range(lo..=hi));
    }
    let name = format!("random-n{n}-c{capacity}-s{seed}");
    CvrpInstance::from_coords(name, coords, 0, demands, capacity)
}

pub(crate) fn euclidean(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

pub(crate) fn euclidean_matrix(coords: &[(f64, f64)]) -> Vec<Vec<f64>> {
    let n = coords.len();
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = euclidean(coords[i], coords[j]);
            m[i][j] = d;
            m[j][i] = d;
        }
    }
    m
}

fn validate_distance_matrix(distances: &[Vec<f64>]) -> Result<()> {
    let n = distances.len();
    for (i, row) in distances.iter().enumerate() {
        if row.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: row.len(),
            });
        }
        if distances[i][i] != 0.0 {
            return Err(Error::Invalid(format!("distance[{i}][{i}] must be 0")));
        }
        for (j, &d) in row.iter().enumerate() {
            if !d.is_finite() || d < 0.0 {
                return Err(Error::Invalid(format!(
                    "distance[{i}][{j}] = {d} is not a nonnegative real"
                )));
            }
            if (d - distances[j][i]).abs() > 0.0 {
                return Err(Error::Invalid(format!(
                    "distance matrix asymmetric at [{i}][{j}]"
                )));
            }
        }
    }
    Ok(())
}
