//! Jacobi-preconditioned conjugate gradients with an envelope-LU fallback.

use log::debug;

use super::profile::ProfileLu;
use super::sparse::{CsrMatrix, Definiteness, SparseSymMatrix};
use crate::error::{Error, Result};

/// Default relative residual target for real symmetric solves.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Outcome of an iterative solve.
#[derive(Debug, Clone)]
pub struct SolveInfo {
    pub iterations: usize,
    pub relative_residual: f64,
    /// `true` when the direct factorisation produced the answer.
    pub direct: bool,
}

/// Projects onto the complement of the constant vector in the `B`-geometry.
///
/// `mass_ones` is `B 1`. Right-hand sides are made orthogonal to `1` and
/// solutions are made `B`-orthogonal to `1`.
#[derive(Debug, Clone)]
pub struct ConstantDeflation {
    mass_ones: Vec<f64>,
    total: f64,
}

impl ConstantDeflation {
    pub fn new(mass_ones: Vec<f64>) -> Self {
        let total = mass_ones.iter().sum();
        Self { mass_ones, total }
    }

    /// `b - B1 (1^T b) / (1^T B 1)`
    pub fn project_rhs(&self, b: &mut [f64]) {
        let s: f64 = b.iter().sum::<f64>() / self.total;
        for (bi, w) in b.iter_mut().zip(&self.mass_ones) {
            *bi -= s * w;
        }
    }

    /// `x - 1 (1^T B x) / (1^T B 1)`
    pub fn project_solution(&self, x: &mut [f64]) {
        let s: f64 = x.iter().zip(&self.mass_ones).map(|(a, w)| a * w).sum::<f64>() / self.total;
        for xi in x.iter_mut() {
            *xi -= s;
        }
    }
}

fn dotf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dotf(a, a).sqrt()
}

/// Preconditioned CG. Fails with `NotConverged` when the iteration cap is hit
/// or the residual stops decreasing.
pub fn conjugate_gradient(
    a: &CsrMatrix<f64>,
    b: &[f64],
    tol: f64,
    max_iter: usize,
    deflation: Option<&ConstantDeflation>,
) -> Result<(Vec<f64>, SolveInfo)> {
    let n = a.nrows();
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: b.len(),
        });
    }
    let mut rhs = b.to_vec();
    if let Some(d) = deflation {
        d.project_rhs(&mut rhs);
    }
    let bnorm = norm(&rhs);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok((
            x,
            SolveInfo {
                iterations: 0,
                relative_residual: 0.0,
                direct: false,
            },
        ));
    }
    let inv_diag: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let mut r = rhs.clone();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, b)| a * b).collect();
    let mut p = z.clone();
    let mut rz = dotf(&r, &z);
    let mut ap = vec![0.0; n];
    let mut best = 1.0;
    let mut since_best = 0usize;
    let patience = 50.max(n / 5);
    for it in 1..=max_iter {
        a.mul_vec_into(&p, &mut ap);
        let pap = dotf(&p, &ap);
        if pap <= 0.0 || !pap.is_finite() {
            return Err(Error::SingularSystem(format!(
                "conjugate gradients met non-positive curvature {pap:e}"
            )));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rel = norm(&r) / bnorm;
        if rel <= tol {
            if let Some(d) = deflation {
                d.project_solution(&mut x);
            }
            return Ok((
                x,
                SolveInfo {
                    iterations: it,
                    relative_residual: rel,
                    direct: false,
                },
            ));
        }
        if rel < 0.5 * best {
            best = rel;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best > patience {
                return Err(Error::NotConverged {
                    method: "conjugate gradients (stagnated)",
                    iterations: it,
                    residual: rel,
                });
            }
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dotf(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let rel = norm(&r) / bnorm;
    Err(Error::NotConverged {
        method: "conjugate gradients",
        iterations: max_iter,
        residual: rel,
    })
}

/// Solves `A x = b` for symmetric positive definite `A` to `‖Ax-b‖ <= tol ‖b‖`.
///
/// Runs Jacobi-preconditioned CG with an iteration cap of `10 n`; if CG
/// stagnates or hits the cap, the system is factorised directly.
pub fn solve_spd(a: &SparseSymMatrix, b: &[f64], tol: f64) -> Result<Vec<f64>> {
    solve_spd_with_info(a, b, tol).map(|(x, _)| x)
}

pub fn solve_spd_with_info(a: &SparseSymMatrix, b: &[f64], tol: f64) -> Result<(Vec<f64>, SolveInfo)> {
    if a.is_diagonal() {
        return diagonal_solve(a, b);
    }
    let cap = 10 * a.dim();
    match conjugate_gradient(a, b, tol, cap, None) {
        Ok(out) => Ok(out),
        Err(Error::NotConverged { iterations, residual, .. }) => {
            debug!("CG stopped at {iterations} iterations (residual {residual:e}); factorising");
            direct_solve(a, b, tol)
        }
        Err(e) => Err(e),
    }
}

fn diagonal_solve(a: &CsrMatrix<f64>, b: &[f64]) -> Result<(Vec<f64>, SolveInfo)> {
    if b.len() != a.nrows() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: b.len(),
        });
    }
    let d = a.diagonal();
    if let Some(i) = d.iter().position(|&v| v == 0.0 || !v.is_finite()) {
        return Err(Error::SingularSystem(format!("zero diagonal entry at {i}")));
    }
    let x = b.iter().zip(&d).map(|(b, d)| b / d).collect();
    Ok((
        x,
        SolveInfo {
            iterations: 0,
            relative_residual: 0.0,
            direct: true,
        },
    ))
}

fn direct_solve(a: &CsrMatrix<f64>, b: &[f64], tol: f64) -> Result<(Vec<f64>, SolveInfo)> {
    let lu = ProfileLu::factor(a).map_err(|e| Error::SingularSystem(e.to_string()))?;
    let (x, rel) = lu.solve_refined(a, b, tol);
    if !(rel <= tol.max(1e-13)) {
        return Err(Error::SingularSystem(format!(
            "direct solve reached relative residual {rel:e} only"
        )));
    }
    Ok((
        x,
        SolveInfo {
            iterations: 0,
            relative_residual: rel,
            direct: true,
        },
    ))
}

/// Solves the singular but consistent system `L x = b` for a PSD matrix whose
/// kernel is the constant vector. The right-hand side is projected first and
/// the result is `B`-orthogonal to constants.
pub fn solve_psd_deflated(
    l: &SparseSymMatrix,
    deflation: &ConstantDeflation,
    b: &[f64],
    tol: f64,
) -> Result<Vec<f64>> {
    if l.definiteness() == Definiteness::Indefinite {
        return Err(Error::InvalidArgument("deflated solve requires a semidefinite matrix".into()));
    }
    let cap = 10 * l.dim();
    match conjugate_gradient(l, b, tol, cap, Some(deflation)) {
        Ok((x, _)) => Ok(x),
        Err(Error::NotConverged { .. }) | Err(Error::SingularSystem(_)) => {
            pinned_solve(l, deflation, b, tol)
        }
        Err(e) => Err(e),
    }
}

/// Direct deflated solve: fixes `x_0 = 0`, drops row and column 0, solves the
/// remaining nonsingular block and re-projects.
pub(crate) fn pinned_solve(
    l: &CsrMatrix<f64>,
    deflation: &ConstantDeflation,
    b: &[f64],
    tol: f64,
) -> Result<Vec<f64>> {
    let n = l.nrows();
    let mut rhs = b.to_vec();
    deflation.project_rhs(&mut rhs);
    let keep: Vec<usize> = (1..n).collect();
    let sub = l.submatrix(&keep);
    let lu = ProfileLu::factor(&sub).map_err(|e| Error::SingularSystem(e.to_string()))?;
    let (y, _) = lu.solve_refined(&sub, &rhs[1..], tol);
    let mut x = Vec::with_capacity(n);
    x.push(0.0);
    x.extend(y);
    deflation.project_solution(&mut x);
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_path(n: usize) -> CsrMatrix<f64> {
        let mut t = vec![];
        for i in 0..n - 1 {
            t.extend([(i, i, 1.0), (i + 1, i + 1, 1.0), (i, i + 1, -1.0), (i + 1, i, -1.0)]);
        }
        CsrMatrix::from_triplets(n, n, &t)
    }

    #[test]
    fn diagonal_example() {
        let a = SparseSymMatrix::new(CsrMatrix::from_diagonal(&[2.0, 3.0]), Definiteness::PositiveDefinite).unwrap();
        assert_eq!(solve_spd(&a, &[2.0, 3.0], 1e-12).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn shifted_path_matches_direct() {
        let n = 80;
        let l = laplacian_path(n);
        let a = CsrMatrix::combine(1.0, &CsrMatrix::identity(n), 1.0, &l);
        let b: Vec<f64> = (0..n).map(|i| ((i * 7) % 5) as f64 - 2.0).collect();
        let (x, info) = conjugate_gradient(&a, &b, 1e-12, 10 * n, None).unwrap();
        assert!(!info.direct);
        let (y, _) = direct_solve(&a, &b, 1e-12).unwrap();
        for (u, v) in x.iter().zip(&y) {
            assert!((u - v).abs() < 1e-9);
        }
    }

    #[test]
    fn deflated_solve_removes_constant() {
        let n = 30;
        let l = SparseSymMatrix::new(laplacian_path(n), Definiteness::PositiveSemiDefinite).unwrap();
        let defl = ConstantDeflation::new(vec![1.0; n]);
        let mut b = vec![0.0; n];
        b[3] = 1.0;
        let x = solve_psd_deflated(&l, &defl, &b, 1e-12).unwrap();
        assert!(x.iter().sum::<f64>().abs() < 1e-9);
        let mut pb = b.clone();
        defl.project_rhs(&mut pb);
        let lx = l.mul_vec(&x);
        for (u, v) in lx.iter().zip(&pb) {
            assert!((u - v).abs() < 1e-9);
        }
        let y = pinned_solve(&l, &defl, &b, 1e-13).unwrap();
        for (u, v) in x.iter().zip(&y) {
            assert!((u - v).abs() < 1e-8);
        }
    }
}
