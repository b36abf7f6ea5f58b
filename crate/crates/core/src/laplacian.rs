//! Stiffness and mass assembly for the discrete Laplace-Beltrami operator.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use log::warn;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mesh::{cross, dot, norm, sub, TriangleMesh};
use crate::numerics::{solve_spd, CsrMatrix, Definiteness, SparseSymMatrix};

/// Weighting scheme for the stiffness matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Scheme {
    /// Linear finite elements (cotangent weights) with the chosen mass mode.
    #[default]
    LinearFem,
    /// Cotangent weights with the lumped (Voronoi-like) mass matrix.
    VoronoiCotangent,
    /// Row-normalised mean-value weights; not symmetric.
    MeanValue,
}

impl Scheme {
    pub fn is_symmetric(self) -> bool {
        !matches!(self, Scheme::MeanValue)
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fem" | "linear_fem" => Ok(Scheme::LinearFem),
            "cot" | "voronoi_cotangent" | "cotangent" => Ok(Scheme::VoronoiCotangent),
            "meanvalue" | "mean_value" | "mvc" => Ok(Scheme::MeanValue),
            other => Err(Error::InvalidArgument(format!("unknown scheme '{other}'"))),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::LinearFem => "fem",
            Scheme::VoronoiCotangent => "cot",
            Scheme::MeanValue => "meanvalue",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum MassMode {
    Consistent,
    #[default]
    Lumped,
}

impl FromStr for MassMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "consistent" => Ok(MassMode::Consistent),
            "lumped" => Ok(MassMode::Lumped),
            other => Err(Error::InvalidArgument(format!("unknown mass mode '{other}'"))),
        }
    }
}

impl fmt::Display for MassMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MassMode::Consistent => "consistent",
            MassMode::Lumped => "lumped",
        })
    }
}

#[derive(Debug, Clone)]
enum Stiffness {
    Symmetric(SparseSymMatrix),
    General(CsrMatrix<f64>),
}

/// The pair `(L, B)` housing `B^{-1} L`.
#[derive(Debug, Clone)]
pub struct LaplacianOperator {
    stiffness: Stiffness,
    mass: SparseSymMatrix,
    scheme: Scheme,
    mass_mode: MassMode,
    obtuse_triangles: usize,
    degenerate_triangles: usize,
}

/// `cot` of the angle at `c` in the triangle `(a, b, c)`.
fn cot_at(a: &[f64; 3], b: &[f64; 3], c: &[f64; 3]) -> f64 {
    let u = sub(a, c);
    let v = sub(b, c);
    dot(&u, &v) / norm(&cross(&u, &v))
}

/// `tan(theta / 2)` of the angle between `u` and `v`.
fn half_angle_tan(u: &[f64; 3], v: &[f64; 3]) -> f64 {
    norm(&cross(u, v)) / (norm(u) * norm(v) + dot(u, v))
}

impl LaplacianOperator {
    /// Assembles the operator. Degenerate triangles contribute nothing.
    ///
    /// `VoronoiCotangent` and `MeanValue` always use the lumped mass matrix,
    /// whatever `mass_mode` says.
    pub fn assemble(mesh: &TriangleMesh, scheme: Scheme, mass_mode: MassMode) -> Result<Self> {
        let n = mesh.num_vertices();
        if mesh.num_triangles() == 0 {
            return Err(Error::EmptyMesh);
        }
        let active: Vec<usize> = (0..mesh.num_triangles()).filter(|&t| !mesh.is_degenerate(t)).collect();
        if active.is_empty() {
            return Err(Error::AllDegenerate);
        }
        let degenerate_triangles = mesh.num_triangles() - active.len();
        let mass_mode = match scheme {
            Scheme::LinearFem => mass_mode,
            _ => MassMode::Lumped,
        };

        let mut mass_trip = Vec::with_capacity(9 * active.len());
        let mut lumped = vec![0.0; n];
        for &t in &active {
            let tri = mesh.triangles()[t];
            let area = mesh.triangle_area(t);
            for a in 0..3 {
                lumped[tri[a]] += area / 3.0;
                if mass_mode == MassMode::Consistent {
                    for b in 0..3 {
                        let w = if a == b { area / 6.0 } else { area / 12.0 };
                        mass_trip.push((tri[a], tri[b], w));
                    }
                }
            }
        }
        if let Some(i) = lumped.iter().position(|&m| !(m > 0.0)) {
            return Err(Error::ZeroMass(i));
        }
        let mass_csr = match mass_mode {
            MassMode::Lumped => CsrMatrix::from_diagonal(&lumped),
            MassMode::Consistent => CsrMatrix::from_triplets(n, n, &mass_trip),
        };
        let mass = SparseSymMatrix::new(mass_csr, Definiteness::PositiveDefinite)?;

        let mut obtuse_triangles = 0;
        let stiffness = match scheme {
            Scheme::LinearFem | Scheme::VoronoiCotangent => {
                let mut trip = Vec::with_capacity(12 * active.len());
                for &t in &active {
                    let tri = mesh.triangles()[t];
                    let p = tri.map(|v| mesh.vertex(v));
                    let mut obtuse = false;
                    for c in 0..3 {
                        let (a, b) = ((c + 1) % 3, (c + 2) % 3);
                        let w = 0.5 * cot_at(&p[a], &p[b], &p[c]);
                        obtuse |= w < 0.0;
                        let (i, j) = (tri[a], tri[b]);
                        trip.extend([(i, j, -w), (j, i, -w), (i, i, w), (j, j, w)]);
                    }
                    obtuse_triangles += usize::from(obtuse);
                }
                let l = CsrMatrix::from_triplets(n, n, &trip);
                Stiffness::Symmetric(SparseSymMatrix::new(l, Definiteness::PositiveSemiDefinite)?)
            }
            Scheme::MeanValue => Stiffness::General(mean_value_matrix(mesh, &active)),
        };
        if obtuse_triangles > 0 {
            warn!("{obtuse_triangles} obtuse triangles produce negative cotangent weights");
        }
        Ok(Self {
            stiffness,
            mass,
            scheme,
            mass_mode,
            obtuse_triangles,
            degenerate_triangles,
        })
    }

    pub fn dim(&self) -> usize {
        self.mass.dim()
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn mass_mode(&self) -> MassMode {
        self.mass_mode
    }

    pub fn is_symmetric(&self) -> bool {
        matches!(self.stiffness, Stiffness::Symmetric(_))
    }

    /// The symmetric stiffness matrix; fails for the mean-value scheme.
    pub fn stiffness(&self) -> Result<&SparseSymMatrix> {
        match &self.stiffness {
            Stiffness::Symmetric(l) => Ok(l),
            Stiffness::General(_) => Err(Error::SchemeNotSymmetric),
        }
    }

    /// The stiffness matrix regardless of symmetry.
    pub fn stiffness_csr(&self) -> &CsrMatrix<f64> {
        match &self.stiffness {
            Stiffness::Symmetric(l) => l.csr(),
            Stiffness::General(l) => l,
        }
    }

    pub fn mass(&self) -> &SparseSymMatrix {
        &self.mass
    }

    /// `B 1`, the per-vertex area weights.
    pub fn mass_ones(&self) -> Vec<f64> {
        self.mass.mul_vec(&vec![1.0; self.dim()])
    }

    /// `1^T B 1`
    pub fn total_mass(&self) -> f64 {
        self.mass_ones().iter().sum()
    }

    /// Triangles with at least one obtuse angle (negative cotangent weight).
    pub fn obtuse_triangles(&self) -> usize {
        self.obtuse_triangles
    }

    pub fn degenerate_triangles(&self) -> usize {
        self.degenerate_triangles
    }

    /// `B^{-1} L f`.
    pub fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        if f.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: f.len(),
            });
        }
        let lf = self.stiffness_csr().mul_vec(f);
        self.solve_mass(&lf)
    }

    /// `B^{-1} g`.
    pub fn solve_mass(&self, g: &[f64]) -> Result<Vec<f64>> {
        if self.mass.is_diagonal() {
            let d = self.mass.diagonal();
            Ok(g.iter().zip(&d).map(|(a, b)| a / b).collect())
        } else {
            solve_spd(&self.mass, g, 1e-13)
        }
    }

    pub fn write_stiffness_matrix_market<W: Write>(&self, w: W) -> Result<()> {
        self.stiffness_csr().write_matrix_market(self.is_symmetric(), w)
    }

    pub fn write_mass_matrix_market<W: Write>(&self, w: W) -> Result<()> {
        self.mass.write_matrix_market(true, w)
    }
}

/// Row-normalised mean-value stiffness: unit diagonal, off-diagonal
/// `-w_ij / sum_k w_ik`.
fn mean_value_matrix(mesh: &TriangleMesh, active: &[usize]) -> CsrMatrix<f64> {
    let n = mesh.num_vertices();
    let mut weights = Vec::with_capacity(6 * active.len());
    for &t in active {
        let tri = mesh.triangles()[t];
        for c in 0..3 {
            let i = tri[c];
            let (j, k) = (tri[(c + 1) % 3], tri[(c + 2) % 3]);
            let pi = mesh.vertex(i);
            let eij = sub(&mesh.vertex(j), &pi);
            let eik = sub(&mesh.vertex(k), &pi);
            let h = half_angle_tan(&eij, &eik);
            // the angle at p_i in this triangle borders both edges ij and ik
            weights.push((i, j, h / norm(&eij)));
            weights.push((i, k, h / norm(&eik)));
        }
    }
    let w = CsrMatrix::from_triplets(n, n, &weights);
    let mut trip = Vec::with_capacity(w.nnz() + n);
    for i in 0..n {
        let (cols, vals) = w.row(i);
        let total: f64 = vals.iter().sum();
        trip.push((i, i, 1.0));
        if total > 0.0 {
            for (&j, &v) in cols.iter().zip(vals) {
                trip.push((i, j, -v / total));
            }
        }
    }
    CsrMatrix::from_triplets(n, n, &trip)
}
