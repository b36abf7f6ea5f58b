//! Envelope (profile) LU factorisation without pivoting.
//!
//! Works for any matrix whose leading principal minors stay away from zero in
//! the chosen ordering: SPD matrices, complex-symmetric `B + beta L` shifts and
//! the diagonally dominant M-matrices of the mean-value scheme. The matrix is
//! reordered with reverse Cuthill-McKee to keep the envelope narrow.

use super::ordering::reverse_cuthill_mckee;
use super::scalar::{dot, norm2, Scalar};
use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct ProfileLu<T> {
    n: usize,
    /// `perm[new] = old`
    perm: Vec<usize>,
    first: Vec<usize>,
    offset: Vec<usize>,
    /// row `i` of the unit lower factor, columns `first[i]..i`
    lower: Vec<T>,
    /// column `i` of the upper factor, rows `first[i]..i`
    upper: Vec<T>,
    diag: Vec<T>,
}

impl<T: Scalar> ProfileLu<T> {
    pub fn factor(a: &CsrMatrix<T>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: a.ncols(),
            });
        }
        let perm = reverse_cuthill_mckee(a);
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }

        let mut first: Vec<usize> = (0..n).collect();
        for (i, j, _) in a.triplets() {
            let (r, c) = (inv[i], inv[j]);
            let hi = r.max(c);
            first[hi] = first[hi].min(r.min(c));
        }
        let mut offset = Vec::with_capacity(n + 1);
        offset.push(0);
        for i in 0..n {
            offset.push(offset[i] + (i - first[i]));
        }
        let size = offset[n];
        let mut lower = vec![T::zero(); size];
        let mut upper = vec![T::zero(); size];
        let mut diag = vec![T::zero(); n];
        for (i, j, v) in a.triplets() {
            let (r, c) = (inv[i], inv[j]);
            if r == c {
                diag[r] += v;
            } else if r > c {
                lower[offset[r] + c - first[r]] += v;
            } else {
                upper[offset[c] + r - first[c]] += v;
            }
        }

        let scale = diag.iter().map(|d| d.modulus()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        for i in 0..n {
            let fi = first[i];
            let (lo_before, lo_rest) = lower.split_at_mut(offset[i]);
            let row_i = &mut lo_rest[..i - fi];
            let (up_before, up_rest) = upper.split_at_mut(offset[i]);
            let col_i = &mut up_rest[..i - fi];
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let row_j = &lo_before[offset[j]..offset[j] + (j - fj)];
                let col_j = &up_before[offset[j]..offset[j] + (j - fj)];
                // U[j][i]
                let s = dot(&row_j[k0 - fj..], &col_i[k0 - fi..j - fi]);
                col_i[j - fi] -= s;
                // L[i][j]
                let s = dot(&row_i[k0 - fi..j - fi], &col_j[k0 - fj..]);
                row_i[j - fi] = (row_i[j - fi] - s) / diag[j];
            }
            let d = diag[i] - dot(row_i, col_i);
            if !d.is_finite() || d.modulus() <= 1e-14 * scale {
                return Err(Error::FactorizationFailed(format!(
                    "pivot {i} of {n} vanished (|u_ii| = {:e})",
                    d.modulus()
                )));
            }
            diag[i] = d;
        }
        Ok(Self {
            n,
            perm,
            first,
            offset,
            lower,
            upper,
            diag,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of stored off-diagonal entries per factor.
    pub fn envelope_size(&self) -> usize {
        self.offset[self.n]
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        assert_eq!(b.len(), self.n);
        let mut y: Vec<T> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..self.n {
            let fi = self.first[i];
            let row = &self.lower[self.offset[i]..self.offset[i + 1]];
            let s = dot(row, &y[fi..i]);
            y[i] -= s;
        }
        for i in (0..self.n).rev() {
            let fi = self.first[i];
            let xi = y[i] / self.diag[i];
            y[i] = xi;
            let col = &self.upper[self.offset[i]..self.offset[i + 1]];
            for (yk, &u) in y[fi..i].iter_mut().zip(col) {
                *yk -= u * xi;
            }
        }
        let mut x = vec![T::zero(); self.n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }

    /// Solves `A x = b` with iterative refinement until the relative residual
    /// drops below `tol` (or stops improving). Returns the solution and the
    /// final relative residual.
    pub fn solve_refined(&self, a: &CsrMatrix<T>, b: &[T], tol: f64) -> (Vec<T>, f64) {
        let bnorm = norm2(b).max(f64::MIN_POSITIVE);
        let mut x = self.solve(b);
        let mut res = residual(a, &x, b);
        let mut rel = norm2(&res) / bnorm;
        for _ in 0..4 {
            if rel <= tol {
                break;
            }
            let dx = self.solve(&res);
            let cand: Vec<T> = x.iter().zip(&dx).map(|(&xi, &d)| xi + d).collect();
            let cres = residual(a, &cand, b);
            let crel = norm2(&cres) / bnorm;
            if crel >= rel {
                break;
            }
            x = cand;
            res = cres;
            rel = crel;
        }
        (x, rel)
    }
}

/// `b - A x`
pub fn residual<T: Scalar>(a: &CsrMatrix<T>, x: &[T], b: &[T]) -> Vec<T> {
    let ax = a.mul_vec(x);
    b.iter().zip(&ax).map(|(&bi, &v)| bi - v).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sparse(n: usize, density: f64, seed: u64) -> CsrMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut trip = Vec::new();
        for i in 0..n {
            for j in 0..i {
                if rng.random::<f64>() < density {
                    let v = rng.random::<f64>() - 0.5;
                    trip.push((i, j, v));
                    trip.push((j, i, v));
                }
            }
        }
        // diagonal dominance makes it SPD
        let mut rowsum = vec![0.0; n];
        for &(i, _, v) in &trip {
            rowsum[i] += f64::abs(v);
        }
        for i in 0..n {
            trip.push((i, i, rowsum[i] + 1.0));
        }
        CsrMatrix::from_triplets(n, n, &trip)
    }

    #[test]
    fn solves_random_spd() {
        let a = random_sparse(60, 0.08, 1);
        let x_true: Vec<f64> = (0..60).map(|i| (i as f64).sin()).collect();
        let b = a.mul_vec(&x_true);
        let lu = ProfileLu::factor(&a).unwrap();
        let x = lu.solve(&b);
        for (u, v) in x.iter().zip(&x_true) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn solves_nonsymmetric_values() {
        // symmetric pattern, asymmetric values, diagonally dominant
        let a = CsrMatrix::from_triplets(
            3,
            3,
            &[(0, 0, 4.0), (0, 1, -1.0), (1, 0, -2.0), (1, 1, 5.0), (1, 2, -1.0), (2, 1, -3.0), (2, 2, 6.0)],
        );
        let lu = ProfileLu::factor(&a).unwrap();
        let x = lu.solve(&[1.0, 2.0, 3.0]);
        let r = residual(&a, &x, &[1.0, 2.0, 3.0]);
        assert!(norm2(&r) < 1e-14);
    }

    #[test]
    fn solves_complex_symmetric_shift() {
        let l = random_sparse(40, 0.1, 7);
        let b = CsrMatrix::<f64>::identity(40);
        let a = CsrMatrix::combine(Complex64::new(1.0, 0.0), &b, Complex64::new(0.3, 0.8), &l);
        let rhs: Vec<Complex64> = (0..40).map(|i| Complex64::new(i as f64, 1.0)).collect();
        let lu = ProfileLu::factor(&a).unwrap();
        let (x, rel) = lu.solve_refined(&a, &rhs, 1e-13);
        assert!(rel < 1e-13);
        assert_eq!(x.len(), 40);
    }

    #[test]
    fn zero_pivot_fails() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (1, 0, 1.0)]);
        assert!(matches!(ProfileLu::factor(&a), Err(Error::FactorizationFailed(_))));
    }
}
