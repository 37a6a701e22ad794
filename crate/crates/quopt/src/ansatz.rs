//! Interaction-graph construction and QAOA depth recommendation.
//!
//! Depth is chosen so that every qubit pair lies inside each other's
//! alternating-layer light cone: the minimum is the interaction-graph
//! diameter, and the recommended depth adds a margin on top.

use crate::encode::IsingModel;
use crate::error::{Error, Result};

/// Undirected graph over qubits with an edge wherever a coupling is nonzero.
#[derive(Debug, Clone)]
pub struct InteractionGraph {
    pub n: usize,
    adjacency: Vec<Vec<usize>>,
}

impl InteractionGraph {
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut adjacency = vec![Vec::new(); n];
        for &(i, j) in edges {
            debug_assert!(i != j && i < n && j < n);
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        InteractionGraph { n, adjacency }
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i].binary_search(&j).is_ok()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut edges = Vec::new();
        for (i, neighbors) in self.adjacency.iter().enumerate() {
            for &j in neighbors {
                if i < j {
                    edges.push((i, j));
                }
            }
        }
        edges
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }
}

/// QAOA circuit description: a diagonal cost model, a layer count and the
/// standard X mixer.
#[derive(Debug, Clone)]
pub struct QaoaAnsatz {
    pub ising: IsingModel,
    pub p: usize,
}

impl QaoaAnsatz {
    pub fn new(ising: IsingModel, p: usize) -> Self {
        QaoaAnsatz { ising, p }
    }

    pub fn num_parameters(&self) -> usize {
        2 * self.p
    }
}

/// Builds the interaction graph of a model: edges exactly where J is nonzero.
pub fn interaction_graph(im: &IsingModel) -> InteractionGraph {
    let edges: Vec<(usize, usize)> = im
        .couplings
        .iter()
        .filter(|(_, &v)| v != 0.0)
        .map(|(&(i, j), _)| (i, j))
        .collect();
    InteractionGraph::from_edges(im.n, &edges)
}

/// Minimum layer count that lets every qubit pair interact: the graph
/// diameter, computed by breadth-first search from every vertex.
pub fn min_entangling_depth(g: &InteractionGraph) -> Result<usize> {
    if g.n == 0 {
        return Err(Error::Degenerate("empty interaction graph".into()));
    }
    let mut diameter = 0usize;
    let mut dist = vec![usize::MAX; g.n];
    let mut queue = std::collections::VecDeque::new();
    for source in 0..g.n {
        dist.iter_mut().for_each(|d| *d = usize::MAX);
        dist[source] = 0;
        queue.clear();
        queue.push_back(source);
        while let Some(v) = queue.pop_front() {
            for &w in &g.adjacency[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        for &d in &dist {
            if d == usize::MAX {
                return Err(Error::DisconnectedGraph);
            }
            diameter = diameter.max(d);
        }
    }
    Ok(diameter)
}

/// Recommended layer count: `2 * diameter + 1`, an expressibility margin
/// over the bare minimum.
pub fn recommend_depth(g: &InteractionGraph) -> Result<usize> {
    Ok(2 * min_entangling_depth(g)? + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encode::{qubo_to_ising, tsp_to_qubo};
    use crate::instances::{generate_random, TspInstance};
    use std::collections::BTreeMap;

    fn tsp_graph(m: usize, seed: u64) -> InteractionGraph {
        let inst = generate_random(m - 1, 100, (1, 10), 10.0, seed).unwrap();
        let t = TspInstance::new(inst.distances.clone(), (0..m).collect(), 0, None).unwrap();
        let q = tsp_to_qubo(&t, 10.0).unwrap();
        interaction_graph(&qubo_to_ising(&q))
    }

    /// All-pairs shortest paths by Floyd-Warshall, as an independent check
    /// on the BFS diameter.
    fn floyd_warshall_diameter(g: &InteractionGraph) -> Option<usize> {
        let n = g.n;
        let inf = usize::MAX / 2;
        let mut d = vec![vec![inf; n]; n];
        for i in 0..n {
            d[i][i] = 0;
        }
        for (i, j) in g.edges() {
            d[i][j] = 1;
            d[j][i] = 1;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let via = d[i][k] + d[k][j];
                    if via < d[i][j] {
                        d[i][j] = via;
                    }
                }
            }
        }
        let mut diameter = 0;
        for i in 0..n {
            for j in 0..n {
                if d[i][j] >= inf {
                    return None;
                }
                diameter = diameter.max(d[i][j]);
            }
        }
        Some(diameter)
    }

    #[test]
    fn tsp_graph_edges_follow_the_layout_rule() {
        // Variables (v, t) interact when they share the node, share the
        // position, or sit on adjacent positions (with distinct nodes).
        let g = tsp_graph(4, 5);
        let k = 3usize;
        let idx = |v: usize, t: usize| v * k + t;
        for v in 0..k {
            for t in 0..k {
                for w in 0..k {
                    for u in 0..k {
                        if (v, t) >= (w, u) {
                            continue;
                        }
                        let expect = v == w || t == u || (t.abs_diff(u) == 1 && v != w);
                        assert_eq!(
                            g.has_edge(idx(v, t), idx(w, u)),
                            expect,
                            "pair ({v},{t})-({w},{u})"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn no_couplings_means_no_edges() {
        let im = IsingModel::new(vec![1.0, -1.0], BTreeMap::new(), 0.0);
        let g = interaction_graph(&im);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn single_coupling_single_edge() {
        let mut couplings = BTreeMap::new();
        couplings.insert((0, 1), 0.5);
        let im = IsingModel::new(vec![0.0, 0.0], couplings, 0.0);
        let g = interaction_graph(&im);
        assert_eq!(g.edges(), vec![(0, 1)]);
    }

    #[test]
    fn four_node_tsp_depths() {
        let g = tsp_graph(4, 5);
        assert_eq!(min_entangling_depth(&g).unwrap(), 2);
        assert_eq!(recommend_depth(&g).unwrap(), 5);
    }

    #[test]
    fn single_vertex_depths() {
        let g = InteractionGraph::from_edges(1, &[]);
        assert_eq!(min_entangling_depth(&g).unwrap(), 0);
        assert_eq!(recommend_depth(&g).unwrap(), 1);
    }

    #[test]
    fn path_graph_depths() {
        let g = InteractionGraph::from_edges(3, &[(0, 1), (1, 2)]);
        assert_eq!(min_entangling_depth(&g).unwrap(), 2);
        assert_eq!(recommend_depth(&g).unwrap(), 5);
    }

    #[test]
    fn disconnected_graph_is_an_error() {
        let g = InteractionGraph::from_edges(3, &[(0, 1)]);
        assert!(matches!(
            min_entangling_depth(&g),
            Err(Error::DisconnectedGraph)
        ));
    }

    #[test]
    fn bfs_diameter_matches_floyd_warshall() {
        use rand::{Rng, SeedableRng};
        for seed in 0..40u64 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(2usize..=24);
            // Random spanning tree plus extra random edges keeps it connected.
            let mut edges = Vec::new();
            for v in 1..n {
                edges.push((rng.gen_range(0..v), v));
            }
            for _ in 0..n {
                let i = rng.gen_range(0..n);
                let j = rng.gen_range(0..n);
                if i != j {
                    edges.push((i.min(j), i.max(j)));
                }
            }
            let g = InteractionGraph::from_edges(n, &edges);
            let diameter = min_entangling_depth(&g).unwrap();
            assert_eq!(Some(diameter), floyd_warshall_diameter(&g), "seed {seed}");
            assert!(recommend_depth(&g).unwrap() >= diameter);
        }
    }

    #[test]
    fn larger_tsp_graphs_also_have_diameter_two() {
        for (m, seed) in [(5usize, 2u64), (4, 11)] {
            let g = tsp_graph(m, seed);
            assert_eq!(min_entangling_depth(&g).unwrap(), 2, "m={m}");
        }
    }
}
