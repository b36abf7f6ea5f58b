//! Same-mesh comparison of scalar functions through area, conformal and
//! kernel-based inner products.

use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::basis::{check_len, FilteredOperator, ScalarField};
use crate::error::{Error, Result};
use crate::laplacian::LaplacianOperator;
use crate::par;

/// Relative defect tolerated by the stochastic adjointness probe.
pub const ADJOINT_TOL: f64 = 1e-8;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `f^T B g`
pub fn area_metric(op: &LaplacianOperator, f: &[f64], g: &[f64]) -> Result<f64> {
    check_len(f, op.dim())?;
    check_len(g, op.dim())?;
    Ok(op.mass().bilinear(f, g))
}

/// `f^T L g`
pub fn conformal_metric(op: &LaplacianOperator, f: &[f64], g: &[f64]) -> Result<f64> {
    check_len(f, op.dim())?;
    check_len(g, op.dim())?;
    Ok(op.stiffness()?.bilinear(f, g))
}

/// Compares `<f, K g>_B` with `<K f, g>_B` on random probes and returns the
/// worst relative defect, or `NotAdjoint` when it exceeds [`ADJOINT_TOL`].
pub fn check_adjoint<K>(op: &LaplacianOperator, kernel: K, probes: usize, seed: u64) -> Result<f64>
where
    K: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = op.dim();
    let b = op.mass();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..probes {
        let f: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        let g: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        let kf = kernel(&f)?;
        let kg = kernel(&g)?;
        let lhs = b.bilinear(&f, &kg);
        let rhs = b.bilinear(&kf, &g);
        let scale = b.bilinear(&f, &f).sqrt() * b.bilinear(&kg, &kg).sqrt().max(b.bilinear(&kf, &kf).sqrt());
        let defect = (lhs - rhs).abs() / scale.max(f64::MIN_POSITIVE);
        worst = worst.max(defect);
    }
    if worst > ADJOINT_TOL {
        Err(Error::NotAdjoint { defect: worst })
    } else {
        Ok(worst)
    }
}

/// `f^T B (K g)` after checking that `K` is `B`-adjoint.
pub fn kernel_metric<K>(op: &LaplacianOperator, kernel: K, f: &[f64], g: &[f64]) -> Result<f64>
where
    K: Fn(&[f64]) -> Result<Vec<f64>>,
{
    check_len(f, op.dim())?;
    check_len(g, op.dim())?;
    check_adjoint(op, &kernel, 2, 0x0ad7)?;
    let kg = kernel(g)?;
    Ok(op.mass().bilinear(f, &kg))
}

#[derive(Debug, Clone)]
pub enum Metric<'a> {
    Area,
    Conformal,
    /// Inner product induced by a filtered operator.
    Kernel(&'a FilteredOperator),
}

impl Metric<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            Metric::Area => "area",
            Metric::Conformal => "conformal",
            Metric::Kernel(_) => "kernel",
        }
    }
}

/// An `m x m` matrix of pairwise metric values.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonMatrix {
    pub size: usize,
    /// Row-major entries.
    pub values: Vec<f64>,
    pub metric: String,
    pub labels: Vec<String>,
    /// Whether fields were rescaled to `[0, 1]` before comparison.
    pub normalized: bool,
}

impl ComparisonMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.size + j]
    }

    /// `max |M_ij - M_ji| / max |M|`
    pub fn symmetry_defect(&self) -> f64 {
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let mut worst: f64 = 0.0;
        for i in 0..self.size {
            for j in 0..i {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst / scale
    }

    pub fn mean_diagonal(&self) -> f64 {
        (0..self.size).map(|i| self.get(i, i)).sum::<f64>() / self.size as f64
    }

    /// Mean of `|M_ij|` over `i != j`; zero for a `1 x 1` matrix.
    pub fn mean_off_diagonal_abs(&self) -> f64 {
        if self.size < 2 {
            return 0.0;
        }
        let mut s = 0.0;
        for i in 0..self.size {
            for j in (0..self.size).filter(|&j| j != i) {
                s += self.get(i, j).abs();
            }
        }
        s / (self.size * (self.size - 1)) as f64
    }

    /// Smallest eigenvalue of the symmetric part.
    pub fn smallest_eigenvalue(&self) -> f64 {
        let m = DMatrix::from_fn(self.size, self.size, |i, j| 0.5 * (self.get(i, j) + self.get(j, i)));
        SymmetricEigen::new(m).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Full-precision CSV, one matrix row per line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for i in 0..self.size {
            let row: Vec<String> = (0..self.size).map(|j| self.get(i, j).to_string()).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// 8-bit grayscale PGM (plain `P2`) with `[min, max]` mapped to `[0, 255]`.
    pub fn write_pgm<W: Write>(&self, mut w: W) -> Result<()> {
        let lo = self.values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let span = hi - lo;
        writeln!(w, "P2")?;
        writeln!(w, "# {} metric, range [{lo}, {hi}]", self.metric)?;
        writeln!(w, "{} {}", self.size, self.size)?;
        writeln!(w, "255")?;
        for i in 0..self.size {
            let row: Vec<String> = (0..self.size)
                .map(|j| {
                    let v = if span > 0.0 { (self.get(i, j) - lo) / span } else { 0.0 };
                    ((v * 255.0).round() as u8).to_string()
                })
                .collect();
            writeln!(w, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

/// Affine rescale to `[0, 1]`; constant fields map to zero.
pub fn normalize_unit_range(f: &[f64]) -> Vec<f64> {
    let lo = f.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    f.iter().map(|v| if span > 0.0 { (v - lo) / span } else { 0.0 }).collect()
}

/// All pairwise metric values, with one operator application per field and
/// `m^2` dot products.
pub fn comparison_matrix(
    op: &LaplacianOperator,
    fields: &[ScalarField],
    metric: &Metric<'_>,
    normalize: bool,
) -> Result<ComparisonMatrix> {
    let m = fields.len();
    if m == 0 {
        return Err(Error::InvalidArgument("comparison needs at least one field".into()));
    }
    for f in fields {
        check_len(f.values(), op.dim())?;
    }
    let data: Vec<Vec<f64>> = if normalize {
        par::map_slice(fields, |f| normalize_unit_range(f.values()))
    } else {
        fields.iter().map(|f| f.values().to_vec()).collect()
    };
    let applied: Vec<Vec<f64>> = match metric {
        Metric::Area => par::map_slice(&data, |f| op.mass().mul_vec(f)),
        Metric::Conformal => {
            let l = op.stiffness()?;
            par::map_slice(&data, |f| l.mul_vec(f))
        }
        Metric::Kernel(k) => {
            check_adjoint(op, |f| k.apply(f), 2, 0x0ad7)?;
            par::try_map_range(m, |j| k.apply(&data[j]).map(|kf| op.mass().mul_vec(&kf)))?
        }
    };
    let rows = par::map_range(m, |i| (0..m).map(|j| dot(&data[i], &applied[j])).collect::<Vec<f64>>());
    Ok(ComparisonMatrix {
        size: m,
        values: rows.concat(),
        metric: metric.name().to_string(),
        labels: fields.iter().map(|f| f.provenance().to_string()).collect(),
        normalized: normalize,
    })
}
