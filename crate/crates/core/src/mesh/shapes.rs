//! Procedural test and benchmark meshes.

use std::collections::HashMap;

use super::{Point, TriangleMesh};

/// Subdivided icosahedron projected onto a sphere: `10 * 4^level + 2` vertices.
pub fn icosphere(level: usize, radius: f64) -> TriangleMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Point> = vec![
        [-1., t, 0.],
        [1., t, 0.],
        [-1., -t, 0.],
        [1., -t, 0.],
        [0., -1., t],
        [0., 1., t],
        [0., -1., -t],
        [0., 1., -t],
        [t, 0., -1.],
        [t, 0., 1.],
        [-t, 0., -1.],
        [-t, 0., 1.],
    ];
    let mut tris: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for p in &mut verts {
        normalize(p);
    }
    for _ in 0..level {
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(tris.len() * 4);
        let mut mid = |a: usize, b: usize, verts: &mut Vec<Point>| -> usize {
            let key = (a.min(b), a.max(b));
            *midpoint.entry(key).or_insert_with(|| {
                let mut m = [
                    (verts[a][0] + verts[b][0]) / 2.0,
                    (verts[a][1] + verts[b][1]) / 2.0,
                    (verts[a][2] + verts[b][2]) / 2.0,
                ];
                normalize(&mut m);
                verts.push(m);
                verts.len() - 1
            })
        };
        for &[a, b, c] in &tris {
            let ab = mid(a, b, &mut verts);
            let bc = mid(b, c, &mut verts);
            let ca = mid(c, a, &mut verts);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        tris = next;
    }
    for p in &mut verts {
        for c in p.iter_mut() {
            *c *= radius;
        }
    }
    TriangleMesh::new(verts, tris).expect("icosphere is valid")
}

/// Torus with major radius `major`, tube radius `minor`, `nu x nv` vertices.
pub fn torus(major: f64, minor: f64, nu: usize, nv: usize) -> TriangleMesh {
    let mut verts = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        let u = 2.0 * std::f64::consts::PI * i as f64 / nu as f64;
        for j in 0..nv {
            let v = 2.0 * std::f64::consts::PI * j as f64 / nv as f64;
            let r = major + minor * v.cos();
            verts.push([r * u.cos(), r * u.sin(), minor * v.sin()]);
        }
    }
    let id = |i: usize, j: usize| (i % nu) * nv + (j % nv);
    let mut tris = Vec::with_capacity(2 * nu * nv);
    for i in 0..nu {
        for j in 0..nv {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            tris.push([a, b, c]);
            tris.push([a, c, d]);
        }
    }
    TriangleMesh::new(verts, tris).expect("torus is valid")
}

/// Planar `size x size` square sampled by an `nx x ny` vertex grid, each cell
/// split along its (0,0)-(1,1) diagonal.
pub fn grid_square(nx: usize, ny: usize, size: f64) -> TriangleMesh {
    assert!(nx >= 2 && ny >= 2);
    let mut verts = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            verts.push([
                size * i as f64 / (nx - 1) as f64,
                size * j as f64 / (ny - 1) as f64,
                0.0,
            ]);
        }
    }
    let id = |i: usize, j: usize| j * nx + i;
    let mut tris = Vec::new();
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            tris.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            tris.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    TriangleMesh::new(verts, tris).expect("grid is valid")
}

/// Icosphere with a smooth radial bump pattern; a closed genus-0 shape without
/// the symmetries of the round sphere.
pub fn bumpy_sphere(level: usize, amplitude: f64) -> TriangleMesh {
    let base = icosphere(level, 1.0);
    let verts = base
        .vertices()
        .iter()
        .map(|p| {
            let s = 1.0
                + amplitude * (3.0 * p[0]).sin() * (2.0 * p[1]).cos()
                + 0.5 * amplitude * (4.0 * p[2] + 0.3).sin();
            [1.2 * p[0] * s, p[1] * s, 0.8 * p[2] * s]
        })
        .collect();
    TriangleMesh::new(verts, base.triangles().to_vec()).expect("bumpy sphere is valid")
}

fn normalize(p: &mut Point) {
    let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    for c in p.iter_mut() {
        *c /= n;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::validate;

    #[test]
    fn icosphere_counts() {
        for (level, n) in [(0, 12), (1, 42), (2, 162), (3, 642), (4, 2562)] {
            let m = icosphere(level, 1.0);
            assert_eq!(m.num_vertices(), n);
            assert_eq!(m.num_triangles(), 2 * n - 4);
        }
    }

    #[test]
    fn torus_is_closed_genus_one() {
        let m = torus(1.0, 0.3, 20, 10);
        let r = validate(&m);
        assert_eq!(r.boundary_edges, 0);
        let e = m.edge_counts().len() as i64;
        let chi = m.num_vertices() as i64 - e + m.num_triangles() as i64;
        assert_eq!(chi, 0);
    }

    #[test]
    fn grid_has_boundary() {
        let m = grid_square(5, 4, 1.0);
        assert_eq!(validate(&m).boundary_edges, 2 * (4 + 3));
        assert!((m.surface_area() - 1.0).abs() < 1e-14);
    }
}
