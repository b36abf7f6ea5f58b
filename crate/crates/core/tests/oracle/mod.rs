//! Dense reference implementations that share no code with the library
//! solvers: Gaussian elimination with partial pivoting, a dense Cholesky and
//! a cyclic Jacobi eigensolver.

#![allow(clippy::needless_range_loop)]

#![allow(dead_code)]

use num_complex::Complex64;
use spectral_basis::numerics::CsrMatrix;

pub type Dense = Vec<Vec<f64>>;

pub fn dense(a: &CsrMatrix<f64>) -> Dense {
    let mut m = vec![vec![0.0; a.ncols()]; a.nrows()];
    for (i, j, v) in a.triplets() {
        m[i][j] += v;
    }
    m
}

pub fn matvec(a: &Dense, x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn gauss_solve_complex(a: &[Vec<Complex64>], rhs: &[Complex64]) -> Vec<Complex64> {
    let n = a.len();
    let mut m: Vec<Vec<Complex64>> = a.to_vec();
    let mut b = rhs.to_vec();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&p, &q| m[p][col].norm().total_cmp(&m[q][col].norm()))
            .unwrap();
        m.swap(col, piv);
        b.swap(col, piv);
        let d = m[col][col];
        assert!(d.norm() > 0.0, "singular matrix in oracle");
        for r in col + 1..n {
            let f = m[r][col] / d;
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for c in col..n {
                let v = m[col][c];
                m[r][c] -= f * v;
            }
            let v = b[col];
            b[r] -= f * v;
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for r in (0..n).rev() {
        let mut s = b[r];
        for c in r + 1..n {
            s -= m[r][c] * x[c];
        }
        x[r] = s / m[r][r];
    }
    x
}

pub fn gauss_solve(a: &Dense, rhs: &[f64]) -> Vec<f64> {
    let ac: Vec<Vec<Complex64>> = a
        .iter()
        .map(|row| row.iter().map(|&v| Complex64::new(v, 0.0)).collect())
        .collect();
    let bc: Vec<Complex64> = rhs.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    gauss_solve_complex(&ac, &bc).into_iter().map(|z| z.re).collect()
}

/// Lower-triangular `G` with `A = G G^T`.
pub fn cholesky(a: &Dense) -> Dense {
    let n = a.len();
    let mut g = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| g[i][k] * g[j][k]).sum();
            if i == j {
                let d = a[i][i] - s;
                assert!(d > 0.0, "matrix not positive definite");
                g[i][j] = d.sqrt();
            } else {
                g[i][j] = (a[i][j] - s) / g[j][j];
            }
        }
    }
    g
}

/// Cyclic Jacobi rotations until the off-diagonal mass is negligible.
/// Returns ascending eigenvalues and the matching orthonormal eigenvectors
/// as columns `vectors[k]`.
pub fn jacobi_eigen(a: &Dense) -> (Vec<f64>, Dense) {
    let n = a.len();
    let mut m = a.clone();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let scale: f64 = m.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p][q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i][i].total_cmp(&m[j][j]));
    let values = order.iter().map(|&i| m[i][i]).collect();
    let vectors = order.iter().map(|&k| v.iter().map(|row| row[k]).collect()).collect();
    (values, vectors)
}

fn forward_sub(g: &Dense, b: &[f64]) -> Vec<f64> {
    let n = g.len();
    let mut x = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| g[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / g[i][i];
    }
    x
}

fn backward_sub_transpose(g: &Dense, b: &[f64]) -> Vec<f64> {
    let n = g.len();
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| g[k][i] * x[k]).sum();
        x[i] = (b[i] - s) / g[i][i];
    }
    x
}

/// Full generalized eigensystem of `L x = lambda B x`, B-orthonormal.
pub fn generalized_eigen(l: &Dense, b: &Dense) -> (Vec<f64>, Dense) {
    let n = l.len();
    let g = cholesky(b);
    // C = G^{-1} L G^{-T}
    let mut y = vec![vec![0.0; n]; n];
    for j in 0..n {
        let col: Vec<f64> = (0..n).map(|i| l[i][j]).collect();
        let z = forward_sub(&g, &col);
        for i in 0..n {
            y[i][j] = z[i];
        }
    }
    let mut c = vec![vec![0.0; n]; n];
    for i in 0..n {
        let z = forward_sub(&g, &y[i]);
        c[i] = z;
    }
    for i in 0..n {
        for j in 0..i {
            let s = 0.5 * (c[i][j] + c[j][i]);
            c[i][j] = s;
            c[j][i] = s;
        }
    }
    let (values, ys) = jacobi_eigen(&c);
    let vectors = ys.iter().map(|yk| backward_sub_transpose(&g, yk)).collect();
    (values, vectors)
}

/// `X phi(Lambda) X^T B f` over a full generalized eigensystem.
pub fn filtered(values: &[f64], vectors: &Dense, b: &Dense, phi: impl Fn(f64) -> f64, f: &[f64]) -> Vec<f64> {
    let bf = matvec(b, f);
    let mut out = vec![0.0; f.len()];
    for (lam, x) in values.iter().zip(vectors) {
        let w = phi(*lam);
        if w == 0.0 {
            continue;
        }
        let c: f64 = x.iter().zip(&bf).map(|(p, q)| p * q).sum::<f64>() * w;
        for (o, xi) in out.iter_mut().zip(x) {
            *o += c * xi;
        }
    }
    out
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).fold(0.0, f64::max)
}
