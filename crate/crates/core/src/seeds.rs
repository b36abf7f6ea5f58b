//! Seed selection and the coverage loop that grows a basis until every vertex
//! lies in the support of some basis function.

use std::collections::VecDeque;
use std::io::{BufRead, Write};
use std::ops::Deref;

use log::info;
use serde::Serialize;

use crate::basis::{BasisFamily, BasisSet, ScalarField};
use crate::error::{Error, Result};
use crate::laplacian::LaplacianOperator;
use crate::mesh::{dijkstra, norm, sub, vertex_distances, DistanceMetric, TriangleMesh};
use crate::par;

/// Default relative support threshold.
pub const DEFAULT_TAU: f64 = 1e-3;

/// Default number of initial seeds in the coverage loop.
pub const DEFAULT_K0: usize = 10;

/// Ordered, distinct seed vertices with selection metadata.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedSet {
    indices: Vec<usize>,
    pub method: String,
    pub start: Option<usize>,
    pub metric: Option<DistanceMetric>,
}

impl SeedSet {
    pub fn new(indices: Vec<usize>, num_vertices: usize, method: impl Into<String>) -> Result<Self> {
        let mut seen = vec![false; num_vertices];
        for &i in &indices {
            if i >= num_vertices {
                return Err(Error::InvalidArgument(format!("seed {i} out of range for {num_vertices} vertices")));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::DuplicateSeeds(i));
            }
        }
        Ok(Self {
            start: indices.first().copied(),
            indices,
            method: method.into(),
            metric: None,
        })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// One index per line.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        for i in &self.indices {
            writeln!(w, "{i}")?;
        }
        Ok(())
    }

    /// Reads one index per line; blank lines and `#` comments are skipped.
    pub fn read_text<R: BufRead>(r: R, num_vertices: usize) -> Result<Self> {
        let mut indices = Vec::new();
        for (k, line) in r.lines().enumerate() {
            let line = line?;
            let t = line.split('#').next().unwrap_or("").trim();
            if t.is_empty() {
                continue;
            }
            indices.push(t.parse().map_err(|_| Error::Parse {
                line: k + 1,
                message: format!("'{t}' is not a vertex index"),
            })?);
        }
        Self::new(indices, num_vertices, "file")
    }
}

impl Deref for SeedSet {
    type Target = [usize];

    fn deref(&self) -> &[usize] {
        &self.indices
    }
}

/// Mean-curvature magnitude `|B^{-1} L p| / 2` from the coordinate functions.
pub fn curvature_field(mesh: &TriangleMesh, op: &LaplacianOperator) -> Result<ScalarField> {
    let coords: Vec<Vec<f64>> = (0..3).map(|c| mesh.vertices().iter().map(|p| p[c]).collect()).collect();
    let lap = par::try_map_range(3, |c| op.apply(&coords[c]))?;
    let values = (0..mesh.num_vertices())
        .map(|i| 0.5 * (lap[0][i].powi(2) + lap[1][i].powi(2) + lap[2][i].powi(2)).sqrt())
        .collect();
    ScalarField::new(values, "mean curvature magnitude")
}

/// Vertex of maximum curvature, lowest index on ties.
pub fn max_curvature_vertex(mesh: &TriangleMesh, op: &LaplacianOperator) -> Result<usize> {
    let c = curvature_field(mesh, op)?;
    Ok(argmax(c.values(), |_| true).expect("mesh has vertices"))
}

/// Index of the largest value among admissible entries; lowest index wins ties.
fn argmax(v: &[f64], admissible: impl Fn(usize) -> bool) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &x) in v.iter().enumerate() {
        if admissible(i) && best.is_none_or(|b| x > v[b]) {
            best = Some(i);
        }
    }
    best
}

/// Greedy farthest-point sampling from `start`.
pub fn farthest_point_sampling(mesh: &TriangleMesh, k: usize, start: usize, metric: DistanceMetric) -> Result<SeedSet> {
    let n = mesh.num_vertices();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("cannot pick {k} seeds from {n} vertices")));
    }
    if start >= n {
        return Err(Error::InvalidArgument(format!("start vertex {start} out of range")));
    }
    let mut selected = vec![false; n];
    let mut order = Vec::with_capacity(k);
    let mut mind = vec![f64::INFINITY; n];
    let mut next = start;
    loop {
        selected[next] = true;
        order.push(next);
        if order.len() == k {
            break;
        }
        let d = match metric {
            DistanceMetric::Euclidean => {
                let p = mesh.vertex(next);
                mesh.vertices().iter().map(|q| norm(&sub(q, &p))).collect()
            }
            DistanceMetric::GraphGeodesic => vertex_distances(mesh, next, metric)?.values,
        };
        for (m, x) in mind.iter_mut().zip(d) {
            *m = m.min(x);
        }
        next = argmax(&mind, |i| !selected[i]).expect("fewer than n seeds selected");
    }
    Ok(SeedSet {
        indices: order,
        method: "farthest_point_sampling".into(),
        start: Some(start),
        metric: Some(metric),
    })
}

/// `{ i : |f_i| > tau max |f| }`
pub fn support(field: &[f64], tau: f64) -> Result<Vec<usize>> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::InvalidArgument(format!("support threshold must lie in (0, 1), got {tau}")));
    }
    let peak = field.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return Err(Error::ZeroField);
    }
    Ok((0..field.len()).filter(|&i| field[i].abs() > tau * peak).collect())
}

/// Covered fraction after each prefix of `fields`.
pub fn coverage_curve(fields: &[ScalarField], tau: f64) -> Result<Vec<f64>> {
    let n = fields.first().ok_or_else(|| Error::InvalidArgument("empty basis".into()))?.len();
    let supports = par::try_map_range(fields.len(), |j| support(fields[j].values(), tau))?;
    let mut covered = vec![false; n];
    let mut count = 0;
    Ok(supports
        .into_iter()
        .map(|s| {
            for i in s {
                if !std::mem::replace(&mut covered[i], true) {
                    count += 1;
                }
            }
            count as f64 / n as f64
        })
        .collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct CoverageResult {
    pub seeds: SeedSet,
    #[serde(skip)]
    pub basis: BasisSet,
    /// Covered fraction after each generation round; ends at 1.
    pub history: Vec<f64>,
    pub tau: f64,
}

impl CoverageResult {
    pub fn iterations(&self) -> usize {
        self.history.len()
    }
}

/// Connected components of the vertices with `mask[i] == true`.
fn masked_components(mesh: &TriangleMesh, mask: &[bool]) -> Vec<Vec<usize>> {
    let mut label = vec![usize::MAX; mesh.num_vertices()];
    let mut out = Vec::new();
    for s in 0..mesh.num_vertices() {
        if !mask[s] || label[s] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut comp = vec![s];
        label[s] = id;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &w in mesh.neighbors(v) {
                if mask[w] && label[w] == usize::MAX {
                    label[w] = id;
                    comp.push(w);
                    queue.push_back(w);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Grows a seed set until the supports of the generated fields cover the mesh.
///
/// Starts from `k0` farthest-point seeds rooted at the curvature maximum.
/// Each later round splits the uncovered vertices into connected components
/// and seeds each component at its vertex farthest (along edges) from the
/// covered region.
pub fn coverage_loop<G>(mesh: &TriangleMesh, op: &LaplacianOperator, generator: G, k0: usize, tau: f64) -> Result<CoverageResult>
where
    G: Fn(usize) -> Result<ScalarField> + Sync + Send,
{
    let n = mesh.num_vertices();
    let start = max_curvature_vertex(mesh, op)?;
    let initial = farthest_point_sampling(mesh, k0.clamp(1, n), start, DistanceMetric::Euclidean)?;
    let mut seeds: Vec<usize> = Vec::new();
    let mut visited = vec![false; n];
    let mut fields: Vec<ScalarField> = Vec::new();
    let mut covered = vec![false; n];
    let mut history: Vec<f64> = Vec::new();
    let mut batch = initial.indices().to_vec();

    loop {
        let generated = par::try_map_range(batch.len(), |q| {
            let s = batch[q];
            let f = generator(s)?;
            if f.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: f.len() });
            }
            let sup = support(f.values(), tau)?;
            if sup.binary_search(&s).is_err() {
                return Err(Error::NoProgress { seed: s });
            }
            Ok((f, sup))
        })?;
        for (&s, (f, sup)) in batch.iter().zip(generated) {
            visited[s] = true;
            seeds.push(s);
            fields.push(f);
            for i in sup {
                covered[i] = true;
            }
        }
        let fraction = covered.iter().filter(|&&c| c).count() as f64 / n as f64;
        info!("coverage round {}: {} seeds, {:.4} covered", history.len() + 1, seeds.len(), fraction);
        history.push(fraction);
        if fraction >= 1.0 {
            break;
        }
        let uncovered: Vec<bool> = covered.iter().map(|c| !c).collect();
        let sources: Vec<usize> = (0..n).filter(|&i| covered[i]).collect();
        let dist = dijkstra(mesh, &sources);
        batch = masked_components(mesh, &uncovered)
            .into_iter()
            .filter_map(|comp| {
                let mut best: Option<usize> = None;
                for &v in comp.iter().filter(|&&v| !visited[v]) {
                    if best.is_none_or(|b| dist[v] > dist[b]) {
                        best = Some(v);
                    }
                }
                best
            })
            .collect();
        if batch.is_empty() {
            return Err(Error::SolverFailure("coverage loop found no unvisited uncovered vertex".into()));
        }
    }
    let seed_set = SeedSet {
        indices: seeds.clone(),
        method: "coverage_loop".into(),
        start: Some(start),
        metric: Some(DistanceMetric::Euclidean),
    };
    let basis = BasisSet::new(BasisFamily::Generated, fields)?
        .with_seeds(&seeds)
        .with_parameter("tau", tau)
        .with_parameter("k0", k0);
    Ok(CoverageResult {
        seeds: seed_set,
        basis,
        history,
        tau,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::delta;
    use crate::laplacian::{MassMode, Scheme};
    use crate::mesh::shapes::{grid_square, icosphere};

    fn unit_square() -> TriangleMesh {
        TriangleMesh::new(
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]],
            vec![[0, 1, 2], [0, 2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn fps_on_square() {
        let m = unit_square();
        let s = farthest_point_sampling(&m, 2, 0, DistanceMetric::Euclidean).unwrap();
        assert_eq!(s.indices(), &[0, 2]);
        let all = farthest_point_sampling(&m, 4, 0, DistanceMetric::GraphGeodesic).unwrap();
        let mut v = all.indices().to_vec();
        v.sort_unstable();
        assert_eq!(v, vec![0, 1, 2, 3]);
        assert_eq!(farthest_point_sampling(&m, 1, 3, DistanceMetric::Euclidean).unwrap().indices(), &[3]);
    }

    #[test]
    fn sphere_curvature() {
        for r in [1.0, 2.0] {
            let mesh = icosphere(3, r);
            let op = LaplacianOperator::assemble(&mesh, Scheme::LinearFem, MassMode::Lumped).unwrap();
            let c = curvature_field(&mesh, &op).unwrap();
            let n = c.len() as f64;
            let mean = c.values().iter().sum::<f64>() / n;
            let sd = (c.values().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
            assert!((mean * r - 1.0).abs() < 0.01, "mean {mean}");
            assert!(sd / mean <= 0.1, "relative spread {}", sd / mean);
        }
    }

    #[test]
    fn flat_interior_has_zero_curvature() {
        let mesh = grid_square(8, 8, 1.0);
        let op = LaplacianOperator::assemble(&mesh, Scheme::LinearFem, MassMode::Lumped).unwrap();
        let c = curvature_field(&mesh, &op).unwrap();
        let interior = (0..mesh.num_vertices()).filter(|&i| {
            let p = mesh.vertex(i);
            p[0] > 1e-9 && p[0] < 1.0 - 1e-9 && p[1] > 1e-9 && p[1] < 1.0 - 1e-9
        });
        for i in interior {
            assert!(c.values()[i] < 1e-10);
        }
    }

    #[test]
    fn support_examples() {
        assert_eq!(support(&[0.0, 2.0, 0.0], 0.5).unwrap(), vec![1]);
        assert_eq!(support(&[3.0; 4], 1e-3).unwrap(), vec![0, 1, 2, 3]);
        assert!(matches!(support(&[0.0; 3], 0.1), Err(Error::ZeroField)));
        assert!(support(&[1.0], 1.5).is_err());
    }

    #[test]
    fn delta_generator_covers_every_vertex() {
        let mesh = icosphere(1, 1.0);
        let op = LaplacianOperator::assemble(&mesh, Scheme::LinearFem, MassMode::Lumped).unwrap();
        let n = mesh.num_vertices();
        let res = coverage_loop(&mesh, &op, |s| ScalarField::new(delta(n, s)?, "delta"), 1, 0.5).unwrap();
        assert_eq!(res.seeds.len(), n);
        assert!(res.history.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(*res.history.last().unwrap(), 1.0);
    }

    #[test]
    fn generator_must_cover_its_seed() {
        let mesh = icosphere(1, 1.0);
        let op = LaplacianOperator::assemble(&mesh, Scheme::LinearFem, MassMode::Lumped).unwrap();
        let n = mesh.num_vertices();
        let bad = |s: usize| ScalarField::new(delta(n, (s + 1) % n)?, "shifted");
        assert!(matches!(coverage_loop(&mesh, &op, bad, 3, 0.5), Err(Error::NoProgress { .. })));
    }

    #[test]
    fn seed_text_round_trip() {
        let s = SeedSet::new(vec![4, 0, 2], 5, "manual").unwrap();
        let mut buf = Vec::new();
        s.write_text(&mut buf).unwrap();
        let back = SeedSet::read_text(&buf[..], 5).unwrap();
        assert_eq!(back.indices(), s.indices());
        assert!(matches!(SeedSet::new(vec![1, 1], 3, "x"), Err(Error::DuplicateSeeds(1))));
    }
}
