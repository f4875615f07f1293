use super::Mesh;
use crate::Real;

/// Undirected vertex adjacency in compressed (CSR) form.
///
/// Neighbor lists are symmetric, free of self-loops and duplicates, and
/// sorted ascending so every traversal happens in a fixed order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyGraph {
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
}

/// Vertex valence summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValenceStats {
    pub min: usize,
    pub max: usize,
    pub mean: f64,
}

impl AdjacencyGraph {
    pub fn from_mesh<T: Real>(mesh: &Mesh<T>) -> Self {
        let edges = mesh.triangles().iter().flat_map(|t| {
            [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])]
        });
        Self::from_edges(mesh.vertex_count(), edges)
    }

    /// Builds the graph from an arbitrary edge list. Direction, duplicates and
    /// self-loops in the input are ignored.
    ///
    /// Panics if an endpoint is `>= vertex_count`.
    pub fn from_edges(vertex_count: usize, edges: impl IntoIterator<Item = (u32, u32)>) -> Self {
        let mut lists: Vec<Vec<u32>> = vec![Vec::new(); vertex_count];
        for (a, b) in edges {
            assert!(
                (a as usize) < vertex_count && (b as usize) < vertex_count,
                "edge ({a}, {b}) out of range for {vertex_count} vertices"
            );
            if a == b {
                continue;
            }
            lists[a as usize].push(b);
            lists[b as usize].push(a);
        }
        let mut offsets = Vec::with_capacity(vertex_count + 1);
        let mut neighbors = Vec::new();
        offsets.push(0);
        for mut l in lists {
            l.sort_unstable();
            l.dedup();
            neighbors.extend_from_slice(&l);
            offsets.push(neighbors.len());
        }
        AdjacencyGraph { offsets, neighbors }
    }

    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    #[inline]
    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.neighbors[self.offsets[i]..self.offsets[i + 1]]
    }

    #[inline]
    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn neighbor_indices(&self) -> &[u32] {
        &self.neighbors
    }
}

/// Exact min / max / mean valence. Panics on an empty graph.
pub fn valence_stats(graph: &AdjacencyGraph) -> ValenceStats {
    let n = graph.vertex_count();
    assert!(n > 0, "valence statistics of an empty graph");
    let degrees = (0..n).map(|i| graph.degree(i));
    let min = degrees.clone().min().unwrap();
    let max = degrees.max().unwrap();
    ValenceStats {
        min,
        max,
        mean: graph.neighbor_indices().len() as f64 / n as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tetrahedron() -> Mesh<f64> {
        Mesh::new(
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            vec![[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn tetrahedron_is_k4() {
        let g = AdjacencyGraph::from_mesh(&tetrahedron());
        for i in 0..4 {
            assert_eq!(g.degree(i), 3);
        }
        let s = valence_stats(&g);
        assert_eq!((s.min, s.max, s.mean), (3, 3, 3.0));
    }

    #[test]
    fn single_triangle_and_single_edge() {
        let m = Mesh::<f32>::new(
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let g = AdjacencyGraph::from_mesh(&m);
        assert!((0..3).all(|i| g.degree(i) == 2));

        let e = AdjacencyGraph::from_edges(2, [(0, 1)]);
        let s = valence_stats(&e);
        assert_eq!((s.min, s.max, s.mean), (1, 1, 1.0));
    }

    #[test]
    fn building_twice_is_identical() {
        let m = tetrahedron();
        assert_eq!(AdjacencyGraph::from_mesh(&m), AdjacencyGraph::from_mesh(&m));
    }

    proptest! {
        #[test]
        fn symmetric_sorted_loop_free(
            n in 1usize..30,
            raw in proptest::collection::vec((0u32..30, 0u32..30), 0..80),
        ) {
            let edges: Vec<(u32, u32)> = raw
                .into_iter()
                .map(|(a, b)| (a % n as u32, b % n as u32))
                .collect();
            let g = AdjacencyGraph::from_edges(n, edges.clone());
            for i in 0..n {
                let nb = g.neighbors(i);
                prop_assert!(nb.windows(2).all(|w| w[0] < w[1]));
                prop_assert!(!nb.contains(&(i as u32)));
                for &j in nb {
                    prop_assert!(g.neighbors(j as usize).binary_search(&(i as u32)).is_ok());
                }
            }
            for (a, b) in edges {
                if a != b {
                    prop_assert!(g.neighbors(a as usize).binary_search(&b).is_ok());
                }
            }
            let s = valence_stats(&g);
            prop_assert!(s.min as f64 <= s.mean && s.mean <= s.max as f64);
        }
    }
}
