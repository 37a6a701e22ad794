//! Capacity-constrained bottom-up clustering and tour reassembly.
//!
//! The two-phase route construction first groups non-depot nodes into
//! clusters whose demand fits the vehicle, then each cluster becomes an
//! independent TSP anchored at the depot.

use crate::error::{Error, Result};
use crate::instances::{closed_length, CvrpInstance, CvrpSolution, Tour, TspInstance};
use serde::Serialize;

/// A partition of the non-depot nodes into capacity-feasible clusters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Clustering {
    /// Disjoint node-index sets, each sorted ascending, ordered by their
    /// lowest member.
    pub clusters: Vec<Vec<usize>>,
    /// Demand sum per cluster, aligned with `clusters`.
    pub demands: Vec<u32>,
}

impl Clustering {
    /// Checks that the clustering partitions the non-depot nodes of `inst`
    /// and respects its capacity.
    pub fn validate_for(&self, inst: &CvrpInstance) -> Result<()> {
        if self.clusters.len() != self.demands.len() {
            return Err(Error::DimensionMismatch {
                expected: self.clusters.len(),
                got: self.demands.len(),
            });
        }
        let mut seen = vec![false; inst.len()];
        for (c, members) in self.clusters.iter().enumerate() {
            let mut demand = 0u32;
            for &v in members {
                if v >= inst.len() || v == inst.depot {
                    return Err(Error::Invalid(format!(
                        "cluster {c} contains invalid node {v}"
                    )));
                }
                if seen[v] {
                    return Err(Error::Coverage(format!("node {v} appears in two clusters")));
                }
                seen[v] = true;
                demand += inst.demands[v];
            }
            if demand > inst.capacity {
                return Err(Error::Invalid(format!(
                    "cluster {c} demand {demand} exceeds capacity {}",
                    inst.capacity
                )));
            }
            if demand != self.demands[c] {
                return Err(Error::Invalid(format!(
                    "cluster {c} demand field {} disagrees with members ({demand})",
                    self.demands[c]
                )));
            }
        }
        for v in 0..inst.len() {
            if v != inst.depot && !seen[v] {
                return Err(Error::Coverage(format!("node {v} missing from clustering")));
            }
        }
        Ok(())
    }
}

struct MergeState {
    members: Vec<usize>,
    demand: u32,
    centroid: (f64, f64),
}

/// Bottom-up clustering under the capacity constraint.
///
/// Starts from singletons and repeatedly merges the pair of clusters with
/// minimum centroid distance whose combined demand still fits the vehicle,
/// until no feasible merge remains. Centroids are demand-unweighted
/// coordinate means over member nodes; the depot takes no part. Ties on the
/// centroid distance go to the pair with the smallest lowest member indices.
pub fn cluster_capacitated(inst: &CvrpInstance) -> Result<Clustering> {
    let coords = inst
        .coords
        .as_ref()
        .ok_or_else(|| Error::Invalid("clustering requires node coordinates".into()))?;
    let mut clusters: Vec<MergeState> = inst
        .non_depot_nodes()
        .into_iter()
        .map(|v| MergeState {
            members: vec![v],
            demand: inst.demands[v],
            centroid: coords[v],
        })
        .collect();

    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..clusters.len() {
            for b in (a + 1)..clusters.len() {
                if clusters[a].demand + clusters[b].demand > inst.capacity {
                    continue;
                }
                let d = crate::instances::euclidean(clusters[a].centroid, clusters[b].centroid);
                let better = match best {
                    None => true,
                    Some((bd, ba, bb)) => {
                        // Clusters are kept ordered by lowest member, so the
                        // (a, b) index pair is the member-index tiebreak.
                        d < bd || (d == bd && (a, b) < (ba, bb))
                    }
                };
                if better {
                    best = Some((d, a, b));
                }
            }
        }
        let Some((_, a, b)) = best else { break };
        let removed = clusters.remove(b);
        let target = &mut clusters[a];
        target.members.extend(removed.members);
        target.members.sort_unstable();
        target.demand += removed.demand;
        let k = target.members.len() as f64;
        let (sx, sy) = target.members.iter().fold((0.0, 0.0), |(sx, sy), &v| {
            (sx + coords[v].0, sy + coords[v].1)
        });
        target.centroid = (sx / k, sy / k);
        clusters.sort_by_key(|c| c.members[0]);
    }

    clusters.sort_by_key(|c| c.members[0]);
    Ok(Clustering {
        demands: clusters.iter().map(|c| c.demand).collect(),
        clusters: clusters.into_iter().map(|c| c.members).collect(),
    })
}

/// One TSP per cluster: the cluster's nodes plus the depot, anchored there.
pub fn subproblems(inst: &CvrpInstance, cl: &Clustering) -> Result<Vec<TspInstance>> {
    cl.validate_for(inst)?;
    cl.clusters
        .iter()
        .map(|members| {
            let mut labels = Vec::with_capacity(members.len() + 1);
            labels.push(inst.depot);
            labels.extend_from_slice(members);
            let m = labels.len();
            let mut distances = vec![vec![0.0; m]; m];
            for i in 0..m {
                for j in 0..m {
                    distances[i][j] = inst.distances[labels[i]][labels[j]];
                }
            }
            let coords = inst
                .coords
                .as_ref()
                .map(|c| labels.iter().map(|&v| c[v]).collect());
            TspInstance::new(distances, labels, 0, coords)
        })
        .collect()
}

/// Relabels per-cluster tours back to instance indices and totals their
/// closed lengths.
pub fn assemble(inst: &CvrpInstance, parts: &[(TspInstance, Tour)]) -> Result<CvrpSolution> {
    let mut covered = vec![false; inst.len()];
    let mut tours = Vec::with_capacity(parts.len());
    let mut total = 0.0;
    for (sub, tour) in parts {
        tour.validate_for(sub)?;
        let mapped: Vec<usize> = tour.order.iter().map(|&v| sub.origin_labels[v]).collect();
        if mapped[0] != inst.depot {
            return Err(Error::Coverage(format!(
                "tour starts at node {} instead of the depot",
                mapped[0]
            )));
        }
        let mut demand = 0u32;
        for &v in &mapped[1..] {
            if v >= inst.len() || v == inst.depot {
                return Err(Error::Coverage(format!("tour visits invalid node {v}")));
            }
            if covered[v] {
                return Err(Error::Coverage(format!("node {v} covered by two tours")));
            }
            covered[v] = true;
            demand += inst.demands[v];
        }
        if demand > inst.capacity {
            return Err(Error::Invalid(format!(
                "tour demand {demand} exceeds capacity {}",
                inst.capacity
            )));
        }
        total += closed_length(&inst.distances, &mapped);
        tours.push(Tour::new(mapped));
    }
    for v in 0..inst.len() {
        if v != inst.depot && !covered[v] {
            return Err(Error::Coverage(format!("node {v} not covered by any tour")));
        }
    }
    Ok(CvrpSolution {
        tours,
        total_length: total,
    })
}
