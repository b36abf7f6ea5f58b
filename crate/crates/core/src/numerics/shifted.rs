//! Shifted solves `(B + beta L) g = rhs` for real or complex `beta`.

use num_complex::Complex64;

use super::cg::{solve_spd, DEFAULT_TOL};
use super::profile::ProfileLu;
use super::scalar::norm2;
use super::sparse::{CsrMatrix, SparseSymMatrix};
use crate::error::{Error, Result};

/// Relative residual required of every shifted solve.
pub const SHIFTED_TOL: f64 = 1e-10;

/// Shifts whose condition estimate exceeds this are rejected.
pub const MAX_SHIFT_CONDITION: f64 = 1e14;

/// Upper bound on the largest eigenvalue of the pencil `(L, B)`.
///
/// Gershgorin on `L` divided by the smallest row sum of `B`; a consistent
/// (non-diagonal) mass matrix can be four times smaller than its lumped
/// counterpart in the Rayleigh-quotient sense, hence the extra factor.
pub fn spectral_radius_bound(l: &CsrMatrix<f64>, b: &CsrMatrix<f64>) -> f64 {
    let n = l.nrows();
    let mut bound: f64 = 0.0;
    for i in 0..n {
        let (_, lv) = l.row(i);
        let (_, bv) = b.row(i);
        let g: f64 = lv.iter().map(|v| v.abs()).sum();
        let m: f64 = bv.iter().sum();
        if m > 0.0 {
            bound = bound.max(g / m);
        }
    }
    if b.is_diagonal() {
        bound
    } else {
        4.0 * bound
    }
}

/// `max |1 + beta s| / min |1 + beta s|` over `s` in `[0, lambda_max]`.
pub fn shift_condition_estimate(beta: Complex64, lambda_max: f64) -> f64 {
    let f = |s: f64| (Complex64::new(1.0, 0.0) + beta * s).norm();
    let (b, c) = (beta.re, beta.im);
    let hi = f(0.0).max(f(lambda_max));
    // |1 + beta s|^2 is a quadratic in s with vertex at -b / |beta|^2.
    let denom = b * b + c * c;
    let mut lo = f(0.0).min(f(lambda_max));
    if denom > 0.0 {
        let s = -b / denom;
        if s > 0.0 && s < lambda_max {
            lo = lo.min(f(s));
        }
    }
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

#[derive(Debug, Clone)]
enum Factor {
    /// `beta == 0`: plain mass solves.
    Mass(SparseSymMatrix),
    Real(CsrMatrix<f64>, ProfileLu<f64>),
    Complex(CsrMatrix<Complex64>, ProfileLu<Complex64>),
}

/// A factorised `B + beta L`, reusable across right-hand sides.
#[derive(Debug, Clone)]
pub struct ShiftedSolver {
    beta: Complex64,
    factor: Factor,
}

impl ShiftedSolver {
    pub fn new(b: &SparseSymMatrix, l: &SparseSymMatrix, beta: Complex64) -> Result<Self> {
        Self::with_bound(b, l, beta, spectral_radius_bound(l, b))
    }

    /// Like [`ShiftedSolver::new`] with a precomputed spectral-radius bound.
    pub fn with_bound(b: &SparseSymMatrix, l: &SparseSymMatrix, beta: Complex64, lambda_max: f64) -> Result<Self> {
        if b.dim() != l.dim() {
            return Err(Error::DimensionMismatch {
                expected: b.dim(),
                got: l.dim(),
            });
        }
        if !(beta.re.is_finite() && beta.im.is_finite()) {
            return Err(Error::InvalidArgument(format!("shift {beta} is not finite")));
        }
        let condition = shift_condition_estimate(beta, lambda_max);
        if !(condition <= MAX_SHIFT_CONDITION) {
            return Err(Error::NearSingularShift { condition });
        }
        let factor = if beta == Complex64::new(0.0, 0.0) {
            Factor::Mass(b.clone())
        } else if beta.im == 0.0 {
            let a = CsrMatrix::combine(1.0, b, beta.re, l);
            let lu = ProfileLu::factor(&a)?;
            Factor::Real(a, lu)
        } else {
            let a = CsrMatrix::combine(Complex64::new(1.0, 0.0), b, beta, l);
            let lu = ProfileLu::factor(&a)?;
            Factor::Complex(a, lu)
        };
        Ok(Self { beta, factor })
    }

    pub fn beta(&self) -> Complex64 {
        self.beta
    }

    pub fn is_real(&self) -> bool {
        self.beta.im == 0.0
    }

    /// Solves with a real right-hand side, returning the real solution.
    /// Only valid for real shifts.
    pub fn solve_real(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        match &self.factor {
            Factor::Mass(b) => solve_spd(b, rhs, SHIFTED_TOL.min(DEFAULT_TOL)),
            Factor::Real(a, lu) => refined(a, lu, rhs),
            Factor::Complex(..) => Err(Error::InvalidArgument(
                "real solve requested for a complex shift".into(),
            )),
        }
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<Complex64>> {
        match &self.factor {
            Factor::Complex(a, lu) => {
                let r: Vec<Complex64> = rhs.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                refined(a, lu, &r)
            }
            _ => Ok(self.solve_real(rhs)?.into_iter().map(|v| Complex64::new(v, 0.0)).collect()),
        }
    }

    pub fn solve_complex(&self, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
        match &self.factor {
            Factor::Complex(a, lu) => refined(a, lu, rhs),
            _ => {
                let re: Vec<f64> = rhs.iter().map(|z| z.re).collect();
                let im: Vec<f64> = rhs.iter().map(|z| z.im).collect();
                let xr = self.solve_real(&re)?;
                let xi = self.solve_real(&im)?;
                Ok(xr.into_iter().zip(xi).map(|(a, b)| Complex64::new(a, b)).collect())
            }
        }
    }
}

fn refined<T: super::scalar::Scalar>(a: &CsrMatrix<T>, lu: &ProfileLu<T>, rhs: &[T]) -> Result<Vec<T>> {
    if rhs.len() != a.nrows() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: rhs.len(),
        });
    }
    if norm2(rhs) == 0.0 {
        return Ok(vec![T::zero(); rhs.len()]);
    }
    let (x, rel) = lu.solve_refined(a, rhs, SHIFTED_TOL);
    if rel > SHIFTED_TOL {
        return Err(Error::NotConverged {
            method: "shifted solve",
            iterations: 5,
            residual: rel,
        });
    }
    Ok(x)
}

/// One-shot solve of `(B + beta L) g = rhs`.
pub fn solve_shifted(b: &SparseSymMatrix, l: &SparseSymMatrix, beta: Complex64, rhs: &[f64]) -> Result<Vec<Complex64>> {
    ShiftedSolver::new(b, l, beta)?.solve(rhs)
}
