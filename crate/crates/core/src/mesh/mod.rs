//! Triangle meshes: construction, validation, file formats and distances.

mod distance;
mod io;
pub mod shapes;

use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};

pub use distance::{hop_distances, vertex_distances, DistanceField, DistanceMetric};
pub(crate) use distance::dijkstra;
pub use io::{load_mesh, read_mesh, write_off, write_ply, MeshFormat, MeshImport};

pub type Point = [f64; 3];

/// Relative area threshold below which a triangle counts as degenerate,
/// measured against the squared bounding-box diagonal.
pub const DEGENERATE_AREA_RATIO: f64 = 1e-12;

/// An immutable triangle mesh with derived vertex adjacency.
#[derive(Debug, Clone)]
pub struct TriangleMesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    vertex_triangles: Vec<Vec<usize>>,
    neighbors: Vec<Vec<usize>>,
}

impl TriangleMesh {
    pub fn new(vertices: Vec<Point>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::InvalidMesh(format!("{n} vertices, need at least 3")));
        }
        if triangles.is_empty() {
            return Err(Error::EmptyMesh);
        }
        if let Some(v) = vertices.iter().position(|p| p.iter().any(|c| !c.is_finite())) {
            return Err(Error::InvalidMesh(format!("vertex {v} has a non-finite coordinate")));
        }
        let mut vertex_triangles = vec![Vec::new(); n];
        let mut neighbors = vec![Vec::new(); n];
        for (t, tri) in triangles.iter().enumerate() {
            if let Some(&bad) = tri.iter().find(|&&v| v >= n) {
                return Err(Error::InvalidMesh(format!(
                    "triangle {t} references vertex {bad} but there are {n} vertices"
                )));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::InvalidMesh(format!("triangle {t} repeats a vertex: {tri:?}")));
            }
            for c in 0..3 {
                let (a, b) = (tri[c], tri[(c + 1) % 3]);
                vertex_triangles[a].push(t);
                neighbors[a].push(b);
                neighbors[b].push(a);
            }
        }
        for ring in &mut neighbors {
            ring.sort_unstable();
            ring.dedup();
        }
        Ok(Self {
            vertices,
            triangles,
            vertex_triangles,
            neighbors,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn vertex(&self, i: usize) -> Point {
        self.vertices[i]
    }

    /// Sorted 1-ring neighbours of vertex `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    /// Triangles incident to vertex `i`.
    pub fn incident_triangles(&self, i: usize) -> &[usize] {
        &self.vertex_triangles[i]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        triangle_area(&self.vertices[a], &self.vertices[b], &self.vertices[c])
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.num_triangles()).map(|t| self.triangle_area(t)).sum()
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in &self.vertices {
            for c in 0..3 {
                lo[c] = lo[c].min(p[c]);
                hi[c] = hi[c].max(p[c]);
            }
        }
        (lo, hi)
    }

    pub fn bounding_box_diagonal(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        norm(&sub(&hi, &lo))
    }

    /// Area below which a triangle is treated as degenerate.
    pub fn degenerate_area_threshold(&self) -> f64 {
        DEGENERATE_AREA_RATIO * self.bounding_box_diagonal().powi(2)
    }

    pub fn is_degenerate(&self, t: usize) -> bool {
        self.triangle_area(t) < self.degenerate_area_threshold()
    }

    /// Undirected edges `(min, max)` with their incident triangle counts.
    pub fn edge_counts(&self) -> BTreeMap<(usize, usize), usize> {
        let mut edges = BTreeMap::new();
        for tri in &self.triangles {
            for c in 0..3 {
                let (a, b) = (tri[c], tri[(c + 1) % 3]);
                *edges.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        edges
    }

    pub fn edge_length(&self, i: usize, j: usize) -> f64 {
        norm(&sub(&self.vertices[i], &self.vertices[j]))
    }

    pub fn mean_edge_length(&self) -> f64 {
        let edges = self.edge_counts();
        let total: f64 = edges.keys().map(|&(a, b)| self.edge_length(a, b)).sum();
        total / edges.len() as f64
    }

    /// Connected-component label of every vertex (components ordered by their
    /// lowest vertex index) and the component count.
    pub fn components(&self) -> (Vec<usize>, usize) {
        let n = self.num_vertices();
        let mut label = vec![usize::MAX; n];
        let mut count = 0;
        let mut queue = VecDeque::new();
        for s in 0..n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = count;
            queue.push_back(s);
            while let Some(v) = queue.pop_front() {
                for &w in &self.neighbors[v] {
                    if label[w] == usize::MAX {
                        label[w] = count;
                        queue.push_back(w);
                    }
                }
            }
            count += 1;
        }
        (label, count)
    }

    pub fn is_connected(&self) -> bool {
        self.components().1 == 1
    }

    /// Returns a copy without the listed triangles; vertices left without any
    /// triangle are dropped and the rest renumbered in order. The second value
    /// maps new vertex indices to old ones.
    pub fn without_triangles(&self, removed: &[usize]) -> Result<(TriangleMesh, Vec<usize>)> {
        let mut keep = vec![true; self.num_triangles()];
        for &t in removed {
            if t < keep.len() {
                keep[t] = false;
            }
        }
        let tris: Vec<[usize; 3]> = self
            .triangles
            .iter()
            .zip(&keep)
            .filter(|(_, &k)| k)
            .map(|(t, _)| *t)
            .collect();
        let mut used = vec![false; self.num_vertices()];
        for t in &tris {
            for &v in t {
                used[v] = true;
            }
        }
        let mut new_index = vec![usize::MAX; self.num_vertices()];
        let mut old_of_new = Vec::new();
        for (v, &u) in used.iter().enumerate() {
            if u {
                new_index[v] = old_of_new.len();
                old_of_new.push(v);
            }
        }
        let vertices = old_of_new.iter().map(|&v| self.vertices[v]).collect();
        let tris = tris
            .into_iter()
            .map(|t| [new_index[t[0]], new_index[t[1]], new_index[t[2]]])
            .collect();
        Ok((TriangleMesh::new(vertices, tris)?, old_of_new))
    }
}

/// Summary of structural problems found by [`validate`].
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct MeshReport {
    pub vertices: usize,
    pub triangles: usize,
    pub boundary_edges: usize,
    pub components: usize,
    pub degenerate_triangles: Vec<usize>,
    pub non_manifold_edges: Vec<(usize, usize)>,
}

impl MeshReport {
    pub fn is_closed(&self) -> bool {
        self.boundary_edges == 0
    }
}

pub fn validate(mesh: &TriangleMesh) -> MeshReport {
    let edges = mesh.edge_counts();
    let boundary_edges = edges.values().filter(|&&c| c == 1).count();
    let non_manifold_edges = edges
        .iter()
        .filter(|(_, &c)| c > 2)
        .map(|(&e, _)| e)
        .collect();
    let degenerate_triangles = (0..mesh.num_triangles())
        .filter(|&t| mesh.is_degenerate(t))
        .collect();
    MeshReport {
        vertices: mesh.num_vertices(),
        triangles: mesh.num_triangles(),
        boundary_edges,
        components: mesh.components().1,
        degenerate_triangles,
        non_manifold_edges,
    }
}

pub(crate) fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: &Point, b: &Point) -> Point {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm(a: &Point) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn triangle_area(a: &Point, b: &Point, c: &Point) -> f64 {
    0.5 * norm(&cross(&sub(b, a), &sub(c, a)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> TriangleMesh {
        TriangleMesh::new(
            vec![[0., 0., 0.], [1., 0., 0.], [1., 1., 0.], [0., 1., 0.]],
            vec![[0, 1, 2], [0, 2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn rejects_out_of_range_and_repeated_indices() {
        let v = vec![[0., 0., 0.], [1., 0., 0.], [0., 1., 0.]];
        assert!(matches!(
            TriangleMesh::new(v.clone(), vec![[0, 1, 3]]),
            Err(Error::InvalidMesh(_))
        ));
        assert!(matches!(
            TriangleMesh::new(v.clone(), vec![[0, 1, 1]]),
            Err(Error::InvalidMesh(_))
        ));
        assert!(matches!(TriangleMesh::new(v, vec![]), Err(Error::EmptyMesh)));
    }

    #[test]
    fn adjacency_is_symmetric() {
        let m = shapes::icosphere(2, 1.0);
        for i in 0..m.num_vertices() {
            for &j in m.neighbors(i) {
                assert!(m.neighbors(j).binary_search(&i).is_ok());
            }
        }
    }

    #[test]
    fn square_report() {
        let r = validate(&unit_square());
        assert_eq!(r.boundary_edges, 4);
        assert_eq!(r.components, 1);
        assert!(r.degenerate_triangles.is_empty());
        assert!(r.non_manifold_edges.is_empty());
    }

    #[test]
    fn closed_icosphere_report() {
        let r = validate(&shapes::icosphere(3, 1.0));
        assert_eq!(r.boundary_edges, 0);
        assert_eq!(r.components, 1);
        assert!(r.is_closed());
    }

    #[test]
    fn zero_area_triangle_is_listed() {
        let m = TriangleMesh::new(
            vec![[0., 0., 0.], [1., 0., 0.], [0., 1., 0.], [2., 0., 0.]],
            vec![[0, 1, 2], [0, 1, 3]],
        )
        .unwrap();
        assert_eq!(validate(&m).degenerate_triangles, vec![1]);
    }

    #[test]
    fn non_manifold_edge_is_listed() {
        let m = TriangleMesh::new(
            vec![[0., 0., 0.], [1., 0., 0.], [0., 1., 0.], [0., -1., 0.], [0., 0., 1.]],
            vec![[0, 1, 2], [1, 0, 3], [0, 1, 4]],
        )
        .unwrap();
        assert_eq!(validate(&m).non_manifold_edges, vec![(0, 1)]);
    }

    #[test]
    fn removing_triangles_renumbers() {
        let m = unit_square();
        let (cut, map) = m.without_triangles(&[1]).unwrap();
        assert_eq!(cut.num_triangles(), 1);
        assert_eq!(map, vec![0, 1, 2]);
    }
}
