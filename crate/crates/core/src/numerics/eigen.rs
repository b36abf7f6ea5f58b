//! Smallest generalized eigenpairs `L x = lambda B x`.
//!
//! Large problems use restarted block shift-invert Lanczos in the
//! `B`-inner product with full reorthogonalisation. Small problems (or
//! requests for a large share of the spectrum) go through a dense symmetric
//! reduction instead.

use std::ops::Range;

use log::debug;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::profile::ProfileLu;
use super::sparse::{CsrMatrix, SparseSymMatrix};
use crate::error::{Error, Result};
use crate::par;

/// Eigenvalues closer than this (relative to `max(1, |lambda|)`) are reported
/// as one cluster.
pub const CLUSTER_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum EigenMethod {
    /// Dense for small `n` or when at least half the spectrum is requested.
    #[default]
    Auto,
    Lanczos,
    Dense,
}

#[derive(Debug, Clone)]
pub struct EigenOptions {
    /// Shift of the shift-invert transform; must lie left of the spectrum.
    pub sigma: f64,
    /// Residual target `‖Lx - λBx‖ <= tol max(‖Lx‖, |λ_k| ‖Bx‖)`, where
    /// `λ_k` is the largest wanted Ritz value; the second term gives the null
    /// mode a scale.
    pub tol: f64,
    pub method: EigenMethod,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            sigma: -1e-8,
            tol: 1e-9,
            method: EigenMethod::Auto,
            max_restarts: 300,
            seed: 0x5eed,
        }
    }
}

/// Problems at most this large are always solved densely under `Auto`.
pub const DENSE_LIMIT: usize = 400;

/// The `k` smallest eigenpairs of a pencil `(L, B)`, ascending, with
/// `B`-orthonormal eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    values: Vec<f64>,
    vectors: Vec<Vec<f64>>,
}

impl EigenSystem {
    pub fn new(values: Vec<f64>, vectors: Vec<Vec<f64>>) -> Result<Self> {
        if values.len() != vectors.len() {
            return Err(Error::DimensionMismatch {
                expected: values.len(),
                got: vectors.len(),
            });
        }
        if let Some(n) = vectors.first().map(Vec::len) {
            if let Some(bad) = vectors.iter().find(|v| v.len() != n) {
                return Err(Error::DimensionMismatch { expected: n, got: bad.len() });
            }
        }
        Ok(Self { values, vectors })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Length of each eigenvector.
    pub fn dim(&self) -> usize {
        self.vectors.first().map_or(0, Vec::len)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        &self.vectors[i]
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    /// The leading `k` pairs.
    pub fn truncated(&self, k: usize) -> Self {
        let k = k.min(self.len());
        Self {
            values: self.values[..k].to_vec(),
            vectors: self.vectors[..k].to_vec(),
        }
    }

    /// `max |x_i^T B x_j - delta_ij|`.
    pub fn orthonormality_defect(&self, b: &CsrMatrix<f64>) -> f64 {
        let bx: Vec<Vec<f64>> = par::map_slice(&self.vectors, |v| b.mul_vec(v));
        let mut worst: f64 = 0.0;
        for i in 0..self.len() {
            for j in 0..=i {
                let g: f64 = self.vectors[i].iter().zip(&bx[j]).map(|(a, b)| a * b).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - want).abs());
            }
        }
        worst
    }

    /// `‖L x_i - λ_i B x_i‖₂` for every pair.
    pub fn residual_norms(&self, l: &CsrMatrix<f64>, b: &CsrMatrix<f64>) -> Vec<f64> {
        par::map_range(self.len(), |i| {
            let x = &self.vectors[i];
            let lx = l.mul_vec(x);
            let bx = b.mul_vec(x);
            lx.iter()
                .zip(&bx)
                .map(|(a, b)| (a - self.values[i] * b).powi(2))
                .sum::<f64>()
                .sqrt()
        })
    }

    /// Index ranges of (numerically) repeated eigenvalues.
    pub fn clusters(&self, tol: f64) -> Vec<Range<usize>> {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..=self.len() {
            let split = i == self.len() || {
                let (a, b) = (self.values[i - 1], self.values[i]);
                (b - a).abs() > tol * b.abs().max(1.0)
            };
            if split {
                out.push(start..i);
                start = i;
            }
        }
        out
    }

    /// Cluster sizes in order, using [`CLUSTER_TOL`].
    pub fn multiplicities(&self) -> Vec<usize> {
        self.clusters(CLUSTER_TOL).into_iter().map(|r| r.len()).collect()
    }
}

/// Computes the `k` algebraically smallest eigenpairs of `L x = λ B x`.
pub fn smallest_eigenpairs(
    l: &SparseSymMatrix,
    b: &SparseSymMatrix,
    k: usize,
    opts: &EigenOptions,
) -> Result<EigenSystem> {
    let n = l.dim();
    if b.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: b.dim() });
    }
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("requested {k} eigenpairs of a {n}-dimensional problem")));
    }
    let dense = match opts.method {
        EigenMethod::Dense => true,
        EigenMethod::Lanczos => k == n,
        EigenMethod::Auto => n <= DENSE_LIMIT || 2 * k >= n,
    };
    let mut sys = if dense {
        dense_eigenpairs(l, b, k)?
    } else {
        block_lanczos(l, b, k, opts)?
    };
    for v in &mut sys.vectors {
        normalize_sign(v);
    }
    Ok(sys)
}

fn normalize_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() * (1.0 + 1e-12) {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn to_dense(a: &CsrMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut m = DMatrix::zeros(n, a.ncols());
    for (i, j, v) in a.triplets() {
        m[(i, j)] += v;
    }
    m
}

type BackTransform = Box<dyn Fn(&DMatrix<f64>) -> DMatrix<f64>>;

/// Dense reduction to a standard symmetric problem.
pub(crate) fn dense_eigenpairs(l: &CsrMatrix<f64>, b: &CsrMatrix<f64>, k: usize) -> Result<EigenSystem> {
    let n = l.nrows();
    let ld = to_dense(l);
    let (c, back): (DMatrix<f64>, BackTransform) = if b.is_diagonal() {
        let d = b.diagonal();
        if let Some(i) = d.iter().position(|&x| !(x > 0.0)) {
            return Err(Error::FactorizationFailed(format!("mass entry {i} is not positive")));
        }
        let s: Vec<f64> = d.iter().map(|x| 1.0 / x.sqrt()).collect();
        let c = DMatrix::from_fn(n, n, |i, j| ld[(i, j)] * s[i] * s[j]);
        let back = move |y: &DMatrix<f64>| DMatrix::from_fn(y.nrows(), y.ncols(), |i, j| y[(i, j)] * s[i]);
        (c, Box::new(back))
    } else {
        let chol = nalgebra::Cholesky::new(to_dense(b))
            .ok_or_else(|| Error::FactorizationFailed("mass matrix is not positive definite".into()))?;
        let g = chol.l();
        let x = g
            .solve_lower_triangular(&ld)
            .ok_or_else(|| Error::FactorizationFailed("singular Cholesky factor".into()))?;
        let c = g
            .solve_lower_triangular(&x.transpose())
            .ok_or_else(|| Error::FactorizationFailed("singular Cholesky factor".into()))?;
        let gt = g.transpose();
        let back = move |y: &DMatrix<f64>| gt.solve_upper_triangular(y).expect("factor checked above");
        (c, Box::new(back))
    };
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let order = &order[..k];
    let y = DMatrix::from_fn(n, k, |i, j| eig.eigenvectors[(i, order[j])]);
    let x = back(&y);
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = (0..k).map(|j| x.column(j).iter().copied().collect()).collect();
    EigenSystem::new(values, vectors)
}

fn columns_to_matrix(cols: &[Vec<f64>], n: usize) -> DMatrix<f64> {
    DMatrix::from_iterator(n, cols.len(), cols.iter().flat_map(|c| c.iter().copied()))
}

fn matrix_to_columns(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.ncols()).map(|j| m.column(j).iter().copied().collect()).collect()
}

/// Columns of `V`, `LV` and `BV` for a `B`-orthonormal basis.
struct Subspace {
    n: usize,
    v: Vec<Vec<f64>>,
    lv: Vec<Vec<f64>>,
    bv: Vec<Vec<f64>>,
}

impl Subspace {
    fn len(&self) -> usize {
        self.v.len()
    }

    /// B-orthogonalises `w` against the basis with classical Gram-Schmidt,
    /// repeating the pass while it removes more than half of the norm (at
    /// most three passes). Returns the `B`-norms before and after, and `B w`.
    fn orthogonalize(&self, w: &mut [f64], b: &CsrMatrix<f64>) -> (f64, f64, Vec<f64>) {
        let b_norm = |w: &[f64], bw: &[f64]| w.iter().zip(bw).map(|(a, c)| a * c).sum::<f64>().max(0.0).sqrt();
        let mut bw = b.mul_vec(w);
        let before = b_norm(w, &bw);
        let mut nrm = before;
        for _ in 0..3 {
            let h: Vec<f64> = par::map_slice(&self.bv, |bv| bv.iter().zip(w.iter()).map(|(a, c)| a * c).sum());
            for ((col, bcol), hj) in self.v.iter().zip(&self.bv).zip(&h) {
                for (wi, vi) in w.iter_mut().zip(col) {
                    *wi -= hj * vi;
                }
                for (bi, vi) in bw.iter_mut().zip(bcol) {
                    *bi -= hj * vi;
                }
            }
            let prev = nrm;
            nrm = b_norm(w, &bw);
            if nrm > 0.5 * prev {
                break;
            }
        }
        let bw = b.mul_vec(w);
        (before, b_norm(w, &bw), bw)
    }

    /// Appends the block, replacing numerically dependent columns with fresh
    /// random directions. Returns the number of columns actually added.
    fn extend(&mut self, block: Vec<Vec<f64>>, l: &CsrMatrix<f64>, b: &CsrMatrix<f64>, rng: &mut ChaCha8Rng) -> usize {
        let start = self.len();
        for mut w in block {
            if self.len() == self.n {
                break;
            }
            let mut attempts = 0;
            loop {
                let (before, nrm, bw) = self.orthogonalize(&mut w, b);
                if nrm > 1e-12 * before && nrm > 0.0 && nrm.is_finite() {
                    let inv = 1.0 / nrm;
                    w.iter_mut().for_each(|x| *x *= inv);
                    self.bv.push(bw.into_iter().map(|x| x * inv).collect());
                    self.v.push(w);
                    break;
                }
                attempts += 1;
                if attempts > 5 {
                    break;
                }
                w = random_vector(self.n, rng);
            }
        }
        let added = self.len() - start;
        let new_lv = par::map_range(added, |j| l.mul_vec(&self.v[start + j]));
        self.lv.extend(new_lv);
        added
    }
}

fn random_vector(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.random::<f64>() - 0.5).collect()
}

fn block_lanczos(l: &SparseSymMatrix, b: &SparseSymMatrix, k: usize, opts: &EigenOptions) -> Result<EigenSystem> {
    let n = l.dim();
    let p = k.clamp(8, 16).min(n);
    let m_max = (2 * k + 2 * p).max(k + 4 * p).min(n);
    if m_max < k + p {
        return dense_eigenpairs(l, b, k);
    }
    let keep = (k + p).min(m_max - p);
    let shifted = CsrMatrix::combine(1.0, l, -opts.sigma, b);
    let lu = ProfileLu::factor(&shifted)?;
    let op = |v: &Vec<f64>| lu.solve(&b.mul_vec(v));
    let norm_l = l.norm_inf();
    let floor = 1e3 * f64::EPSILON * norm_l;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut space = Subspace {
        n,
        v: Vec::new(),
        lv: Vec::new(),
        bv: Vec::new(),
    };
    let init: Vec<Vec<f64>> = (0..p).map(|_| random_vector(n, &mut rng)).collect();
    let mut last = space.len()..space.len() + space.extend(init, l, b, &mut rng);
    let mut worst = f64::INFINITY;

    for restart in 0..=opts.max_restarts {
        while space.len() + p <= m_max && !last.is_empty() {
            let block: Vec<Vec<f64>> = par::map_range(last.len(), |j| op(&space.v[last.start + j]));
            let start = space.len();
            let added = space.extend(block, l, b, &mut rng);
            last = start..start + added;
        }
        let m = space.len();
        let vmat = columns_to_matrix(&space.v, n);
        let lvmat = columns_to_matrix(&space.lv, n);
        let t = vmat.transpose() * &lvmat;
        let t = (&t + t.transpose()) * 0.5;
        let eig = SymmetricEigen::new(t);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &c| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[c]));
        let take = keep.min(m);
        let y = DMatrix::from_fn(m, take, |i, j| eig.eigenvectors[(i, order[j])]);
        let theta: Vec<f64> = order[..take].iter().map(|&i| eig.eigenvalues[i]).collect();
        let x = &vmat * &y;
        let lx = &lvmat * &y;
        let bx = columns_to_matrix(&space.bv, n) * &y;

        let mut nconv = 0;
        worst = 0.0;
        let top = theta[k.min(take) - 1].abs();
        for j in 0..k.min(take) {
            let lxj = lx.column(j);
            let scale = lxj.norm().max(top * bx.column(j).norm());
            let r = (lxj - bx.column(j) * theta[j]).norm();
            let ok = r <= opts.tol * scale || r <= floor * x.column(j).norm();
            let rel = r / scale.max(f64::MIN_POSITIVE);
            if ok && nconv == j {
                nconv += 1;
            } else {
                worst = worst.max(rel);
            }
        }
        debug!("eigensolver restart {restart}: subspace {m}, {nconv}/{k} converged");
        if nconv >= k {
            let vectors = matrix_to_columns(&x.columns(0, k).into_owned());
            return EigenSystem::new(theta[..k].to_vec(), vectors);
        }

        // Thick restart on the leading Ritz vectors, continued from the
        // unconverged wanted ones.
        space.v = matrix_to_columns(&x);
        space.lv = matrix_to_columns(&lx);
        space.bv = matrix_to_columns(&bx);
        let mut seeds: Vec<Vec<f64>> = (nconv..(nconv + p).min(take)).map(|j| op(&space.v[j])).collect();
        while seeds.len() < p {
            seeds.push(random_vector(n, &mut rng));
        }
        let start = space.len();
        let added = space.extend(seeds, l, b, &mut rng);
        last = start..start + added;
    }
    Err(Error::NotConverged {
        method: "block Lanczos",
        iterations: opts.max_restarts,
        residual: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::sparse::Definiteness;

    /// Path-graph Laplacian with unit masses: eigenvalues 2 - 2 cos(pi j / n).
    fn path(n: usize) -> (SparseSymMatrix, SparseSymMatrix) {
        let mut t = vec![];
        for i in 0..n - 1 {
            t.extend([(i, i, 1.0), (i + 1, i + 1, 1.0), (i, i + 1, -1.0), (i + 1, i, -1.0)]);
        }
        let l = SparseSymMatrix::new(CsrMatrix::from_triplets(n, n, &t), Definiteness::PositiveSemiDefinite).unwrap();
        let b = SparseSymMatrix::new(CsrMatrix::identity(n), Definiteness::PositiveDefinite).unwrap();
        (l, b)
    }

    fn exact(n: usize, j: usize) -> f64 {
        2.0 - 2.0 * (std::f64::consts::PI * j as f64 / n as f64).cos()
    }

    #[test]
    fn dense_path_spectrum() {
        let (l, b) = path(30);
        let opts = EigenOptions {
            method: EigenMethod::Dense,
            ..Default::default()
        };
        let sys = smallest_eigenpairs(&l, &b, 30, &opts).unwrap();
        for j in 0..30 {
            assert!((sys.value(j) - exact(30, j)).abs() < 1e-12);
        }
        assert!(sys.orthonormality_defect(&b) < 1e-12);
    }

    #[test]
    fn lanczos_path_spectrum() {
        let n = 600;
        let (l, b) = path(n);
        let opts = EigenOptions {
            method: EigenMethod::Lanczos,
            ..Default::default()
        };
        let sys = smallest_eigenpairs(&l, &b, 12, &opts).unwrap();
        for j in 0..12 {
            assert!((sys.value(j) - exact(n, j)).abs() < 1e-10, "{j}: {}", sys.value(j));
        }
        assert!(sys.orthonormality_defect(&b) < 1e-10);
        // constant null vector, positive after sign normalisation
        let c = 1.0 / (n as f64).sqrt();
        assert!(sys.vector(0).iter().all(|&x| (x - c).abs() < 1e-8));
    }

    #[test]
    fn clusters_group_close_values() {
        let sys = EigenSystem::new(vec![0.0, 2.0, 2.0 + 1e-9, 2.0 + 2e-9, 6.0], vec![vec![0.0]; 5]).unwrap();
        assert_eq!(sys.multiplicities(), vec![1, 3, 1]);
    }

    #[test]
    fn rejects_too_many_pairs() {
        let (l, b) = path(5);
        assert!(smallest_eigenpairs(&l, &b, 6, &EigenOptions::default()).is_err());
    }
}
