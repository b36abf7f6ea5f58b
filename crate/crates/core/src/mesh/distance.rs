use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{norm, sub, TriangleMesh};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize)]
pub enum DistanceMetric {
    /// Straight-line distance between vertex positions.
    #[default]
    Euclidean,
    /// Shortest path along mesh edges weighted by edge length.
    GraphGeodesic,
}

impl std::str::FromStr for DistanceMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(Self::Euclidean),
            "geodesic" | "graph_geodesic" => Ok(Self::GraphGeodesic),
            other => Err(Error::InvalidArgument(format!("unknown distance metric {other:?}"))),
        }
    }
}

/// Distances from one source vertex. Vertices unreachable along mesh edges
/// keep an infinite distance and are listed in `unreachable`.
#[derive(Debug, Clone)]
pub struct DistanceField {
    pub values: Vec<f64>,
    pub unreachable: Vec<usize>,
}

impl DistanceField {
    pub fn is_disconnected(&self) -> bool {
        !self.unreachable.is_empty()
    }
}

pub fn vertex_distances(
    mesh: &TriangleMesh,
    source: usize,
    metric: DistanceMetric,
) -> Result<DistanceField> {
    if source >= mesh.num_vertices() {
        return Err(Error::InvalidArgument(format!(
            "source {source} out of range for {} vertices",
            mesh.num_vertices()
        )));
    }
    let values = match metric {
        DistanceMetric::Euclidean => {
            let p = mesh.vertex(source);
            mesh.vertices().iter().map(|q| norm(&sub(q, &p))).collect()
        }
        DistanceMetric::GraphGeodesic => dijkstra(mesh, &[source]),
    };
    let unreachable = values
        .iter()
        .enumerate()
        .filter(|(_, d)| d.is_infinite())
        .map(|(i, _)| i)
        .collect::<Vec<_>>();
    if !unreachable.is_empty() {
        log::warn!(
            "mesh is disconnected: {} vertices unreachable from {source}",
            unreachable.len()
        );
    }
    Ok(DistanceField {
        values,
        unreachable,
    })
}

#[derive(PartialEq)]
struct Entry {
    dist: f64,
    vertex: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance, then on vertex index
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Multi-source shortest paths over edge lengths.
pub(crate) fn dijkstra(mesh: &TriangleMesh, sources: &[usize]) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; mesh.num_vertices()];
    let mut heap = BinaryHeap::new();
    for &s in sources {
        dist[s] = 0.0;
        heap.push(Entry { dist: 0.0, vertex: s });
    }
    while let Some(Entry { dist: d, vertex: v }) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for &w in mesh.neighbors(v) {
            let nd = d + mesh.edge_length(v, w);
            if nd < dist[w] {
                dist[w] = nd;
                heap.push(Entry { dist: nd, vertex: w });
            }
        }
    }
    dist
}

/// Hop counts from the sources (unweighted BFS).
pub fn hop_distances(mesh: &TriangleMesh, sources: &[usize]) -> Vec<usize> {
    let mut hops = vec![usize::MAX; mesh.num_vertices()];
    let mut queue = std::collections::VecDeque::new();
    for &s in sources {
        hops[s] = 0;
        queue.push_back(s);
    }
    while let Some(v) = queue.pop_front() {
        for &w in mesh.neighbors(v) {
            if hops[w] == usize::MAX {
                hops[w] = hops[v] + 1;
                queue.push_back(w);
            }
        }
    }
    hops
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::shapes;

    fn unit_square() -> TriangleMesh {
        TriangleMesh::new(
            vec![[0., 0., 0.], [1., 0., 0.], [1., 1., 0.], [0., 1., 0.]],
            vec![[0, 1, 2], [0, 2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn square_euclidean_and_geodesic_to_opposite_corner() {
        let m = unit_square();
        let e = vertex_distances(&m, 0, DistanceMetric::Euclidean).unwrap();
        assert!((e.values[2] - 2f64.sqrt()).abs() < 1e-15);
        let g = vertex_distances(&m, 0, DistanceMetric::GraphGeodesic).unwrap();
        // the diagonal edge 0-2 is present
        assert!((g.values[2] - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(g.values[1], 1.0);
        assert_eq!(e.values[0], 0.0);
        assert_eq!(g.values[0], 0.0);
    }

    #[test]
    fn disconnected_vertices_stay_infinite() {
        let m = TriangleMesh::new(
            vec![
                [0., 0., 0.],
                [1., 0., 0.],
                [0., 1., 0.],
                [5., 0., 0.],
                [6., 0., 0.],
                [5., 1., 0.],
            ],
            vec![[0, 1, 2], [3, 4, 5]],
        )
        .unwrap();
        let g = vertex_distances(&m, 0, DistanceMetric::GraphGeodesic).unwrap();
        assert!(g.is_disconnected());
        assert_eq!(g.unreachable, vec![3, 4, 5]);
        assert!(g.values[4].is_infinite());
    }

    #[test]
    fn geodesic_dominates_euclidean() {
        let m = shapes::torus(1.0, 0.4, 24, 12);
        for s in [0, 17, 101] {
            let e = vertex_distances(&m, s, DistanceMetric::Euclidean).unwrap();
            let g = vertex_distances(&m, s, DistanceMetric::GraphGeodesic).unwrap();
            for (a, b) in e.values.iter().zip(&g.values) {
                assert!(*b >= *a - 1e-12);
            }
        }
    }

    #[test]
    fn out_of_range_source() {
        assert!(vertex_distances(&unit_square(), 9, DistanceMetric::Euclidean).is_err());
    }
}
