//! Laplacian eigenbasis, spectral coefficients and truncated reconstruction.

use serde::Serialize;

use super::{check_len, ScalarField};
use crate::error::{Error, Result};
use crate::laplacian::LaplacianOperator;
use crate::numerics::{smallest_eigenpairs, EigenOptions, EigenSystem};

/// The `k` smallest generalized eigenpairs of a symmetric operator.
pub fn eigen_basis(op: &LaplacianOperator, k: usize, opts: &EigenOptions) -> Result<EigenSystem> {
    smallest_eigenpairs(op.stiffness()?, op.mass(), k, opts)
}

/// `alpha_i = x_i^T B f`.
pub fn spectral_coefficients(op: &LaplacianOperator, eig: &EigenSystem, f: &[f64]) -> Result<Vec<f64>> {
    check_len(f, op.dim())?;
    check_len(f, eig.dim())?;
    let bf = op.mass().mul_vec(f);
    Ok(eig
        .vectors()
        .iter()
        .map(|x| x.iter().zip(&bf).map(|(a, b)| a * b).sum())
        .collect())
}

/// Measured truncation error against the Dirichlet-energy bound
/// `‖f - f_k‖_B^2 <= f^T L f / lambda_{k+1}`.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub k_used: usize,
    /// `‖f - f_k‖_B^2`
    pub measured: f64,
    /// `None` when `lambda_{k+1}` is not available (all stored pairs used) or
    /// vanishes.
    pub bound: Option<f64>,
    pub bound_satisfied: bool,
}

/// `f_k = sum_{i < k_use} alpha_i x_i`, with the residual report for `f`.
pub fn reconstruct(
    op: &LaplacianOperator,
    eig: &EigenSystem,
    f: &[f64],
    alpha: &[f64],
    k_use: usize,
) -> Result<(ScalarField, ResidualReport)> {
    check_len(f, op.dim())?;
    if k_use > eig.len() || alpha.len() < k_use {
        return Err(Error::InvalidArgument(format!(
            "cannot use {k_use} terms with {} eigenpairs and {} coefficients",
            eig.len(),
            alpha.len()
        )));
    }
    let n = op.dim();
    let mut fk = vec![0.0; n];
    for (x, &a) in eig.vectors()[..k_use].iter().zip(alpha) {
        for (y, &xi) in fk.iter_mut().zip(x) {
            *y += a * xi;
        }
    }
    let r: Vec<f64> = f.iter().zip(&fk).map(|(a, b)| a - b).collect();
    let b = op.mass();
    let measured = b.bilinear(&r, &r);
    let energy = op.stiffness()?.bilinear(f, f);
    let bound = eig
        .values()
        .get(k_use)
        .copied()
        .filter(|&lam| lam > 0.0)
        .map(|lam| energy / lam);
    // roundoff allowance relative to ‖f‖_B^2
    let slack = 1e-12 * b.bilinear(f, f);
    let bound_satisfied = bound.is_none_or(|bd| measured <= bd + slack);
    let field = ScalarField::new(fk, format!("reconstruction k={k_use}"))?;
    Ok((
        field,
        ResidualReport {
            k_used: k_use,
            measured,
            bound,
            bound_satisfied,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laplacian::{MassMode, Scheme};
    use crate::mesh::shapes::icosphere;

    #[test]
    fn eigenvector_coefficients_are_unit_vectors() {
        let mesh = icosphere(1, 1.0);
        let op = LaplacianOperator::assemble(&mesh, Scheme::LinearFem, MassMode::Consistent).unwrap();
        let eig = eigen_basis(&op, 10, &EigenOptions::default()).unwrap();
        let a = spectral_coefficients(&op, &eig, eig.vector(3)).unwrap();
        for (i, v) in a.iter().enumerate() {
            assert!((v - if i == 3 { 1.0 } else { 0.0 }).abs() < 1e-10);
        }
        let (f3, rep) = reconstruct(&op, &eig, eig.vector(3), &a, 5).unwrap();
        assert!(rep.measured < 1e-20);
        assert!(f3.values().iter().zip(eig.vector(3)).all(|(a, b)| (a - b).abs() < 1e-10));
    }

    #[test]
    fn constant_projects_on_first_mode() {
        let mesh = icosphere(2, 1.0);
        let op = LaplacianOperator::assemble(&mesh, Scheme::LinearFem, MassMode::Lumped).unwrap();
        let eig = eigen_basis(&op, 6, &EigenOptions::default()).unwrap();
        let c = 2.5;
        let a = spectral_coefficients(&op, &eig, &vec![c; mesh.num_vertices()]).unwrap();
        assert!((a[0] - c * op.total_mass().sqrt()).abs() < 1e-8);
        assert!(a[1..].iter().all(|x| x.abs() < 1e-8));
    }

    #[test]
    fn parseval_on_full_spectrum() {
        let mesh = icosphere(1, 1.0);
        let op = LaplacianOperator::assemble(&mesh, Scheme::LinearFem, MassMode::Lumped).unwrap();
        let n = mesh.num_vertices();
        let eig = eigen_basis(&op, n, &EigenOptions::default()).unwrap();
        let f: Vec<f64> = (0..n).map(|i| ((i * 13) % 7) as f64 - 3.0).collect();
        let a = spectral_coefficients(&op, &eig, &f).unwrap();
        let energy: f64 = a.iter().map(|x| x * x).sum();
        let norm = op.mass().bilinear(&f, &f);
        assert!((energy - norm).abs() <= 1e-8 * norm);
        let (_, rep) = reconstruct(&op, &eig, &f, &a, n).unwrap();
        assert!(rep.measured <= 1e-8);
        assert!(rep.bound.is_none() && rep.bound_satisfied);
    }

    #[test]
    fn mean_value_has_no_eigenbasis() {
        let mesh = icosphere(1, 1.0);
        let op = LaplacianOperator::assemble(&mesh, Scheme::MeanValue, MassMode::Lumped).unwrap();
        assert!(matches!(eigen_basis(&op, 3, &EigenOptions::default()), Err(Error::SchemeNotSymmetric)));
    }
}
