mod oracle;

use approx::assert_relative_eq;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spectral_basis::filters::exp_chebyshev_coefficients;
use spectral_basis::mesh::shapes::{icosphere, torus};
use spectral_basis::numerics::{
    shift_condition_estimate, smallest_eigenpairs, solve_shifted, solve_spd, spectral_radius_bound, CsrMatrix,
    Definiteness, EigenMethod, EigenOptions, ShiftedSolver, SparseSymMatrix,
};
use spectral_basis::{LaplacianOperator, MassMode, Scheme, TriangleMesh};

use oracle::{dense, gauss_solve, gauss_solve_complex, generalized_eigen, jacobi_eigen, max_abs_diff};

fn fem(mesh: &TriangleMesh, mass: MassMode) -> LaplacianOperator {
    LaplacianOperator::assemble(mesh, Scheme::LinearFem, mass).unwrap()
}

fn random_spd(n: usize, seed: u64) -> SparseSymMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.random::<f64>() - 0.5).collect()).collect();
    let mut trip = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let mut v: f64 = (0..n).map(|k| g[i][k] * g[j][k]).sum();
            if i == j {
                v += n as f64 * 0.1;
            }
            trip.push((i, j, v));
        }
    }
    SparseSymMatrix::new(CsrMatrix::from_triplets(n, n, &trip), Definiteness::PositiveDefinite).unwrap()
}

#[test]
fn spd_solve_matches_gaussian_elimination() {
    let a = random_spd(20, 11);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let rhs: Vec<f64> = (0..20).map(|_| rng.random::<f64>()).collect();
    let x = solve_spd(&a, &rhs, 1e-12).unwrap();
    let reference = gauss_solve(&dense(&a), &rhs);
    assert!(max_abs_diff(&x, &reference) <= 1e-8);
}

#[test]
fn mass_solve_of_row_sums_is_ones() {
    let op = fem(&icosphere(3, 1.0), MassMode::Consistent);
    let rhs = op.mass().mul_vec(&vec![1.0; op.dim()]);
    let x = solve_spd(op.mass(), &rhs, 1e-12).unwrap();
    assert!(x.iter().all(|v| (v - 1.0).abs() <= 1e-8));
}

#[test]
fn complex_shifted_solve_matches_dense_oracle() {
    let mesh = torus(1.0, 0.4, 25, 20);
    let op = fem(&mesh, MassMode::Lumped);
    assert_eq!(op.dim(), 500);
    let (l, b) = (op.stiffness().unwrap(), op.mass());
    let (ld, bd) = (dense(l), dense(b));
    let pf = exp_chebyshev_coefficients(5).unwrap().scaled(0.1);
    let beta = pf.terms().iter().find(|t| t.node.im > 0.0).unwrap().node;
    let rhs = b.mul_vec(&spectral_basis::basis::delta(op.dim(), 17).unwrap());
    let x = solve_shifted(b, l, beta, &rhs).unwrap();

    let a: Vec<Vec<Complex64>> = (0..op.dim())
        .map(|i| (0..op.dim()).map(|j| Complex64::new(bd[i][j], 0.0) + beta * ld[i][j]).collect())
        .collect();
    let rc: Vec<Complex64> = rhs.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let reference = gauss_solve_complex(&a, &rc);
    let err = x.iter().zip(&reference).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
    assert!(err <= 1e-8, "complex shifted solve differs by {err:e}");
}

#[test]
fn conjugate_shifts_give_conjugate_solutions() {
    let op = fem(&icosphere(3, 1.0), MassMode::Consistent);
    let (l, b) = (op.stiffness().unwrap(), op.mass());
    let beta = Complex64::new(0.03, 0.02);
    let rhs = b.mul_vec(&spectral_basis::basis::delta(op.dim(), 5).unwrap());
    let x = solve_shifted(b, l, beta, &rhs).unwrap();
    let y = solve_shifted(b, l, beta.conj(), &rhs).unwrap();
    let err = x.iter().zip(&y).map(|(p, q)| (p.conj() - q).norm()).fold(0.0, f64::max);
    assert!(err <= 1e-12);
}

#[test]
fn shifted_residual_is_small() {
    let op = fem(&torus(1.0, 0.4, 30, 16), MassMode::Consistent);
    let (l, b) = (op.stiffness().unwrap(), op.mass());
    let beta = Complex64::new(-0.01, 0.05);
    let solver = ShiftedSolver::new(b, l, beta).unwrap();
    let rhs = b.mul_vec(&spectral_basis::basis::delta(op.dim(), 3).unwrap());
    let x = solver.solve(&rhs).unwrap();
    let a = CsrMatrix::combine(Complex64::new(1.0, 0.0), b, beta, l);
    let ax = a.mul_vec(&x);
    let r: f64 = ax.iter().zip(&rhs).map(|(p, &q)| (p - q).norm_sqr()).sum::<f64>().sqrt();
    let bn: f64 = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!(r <= 1e-10 * bn);
}

#[test]
fn full_spectrum_matches_jacobi_oracle() {
    let op = fem(&torus(1.0, 0.4, 20, 10), MassMode::Consistent);
    assert_eq!(op.dim(), 200);
    let (l, b) = (op.stiffness().unwrap(), op.mass());
    let eig = smallest_eigenpairs(l, b, op.dim(), &EigenOptions::default()).unwrap();
    let (values, _) = generalized_eigen(&dense(l), &dense(b));
    for (a, r) in eig.values().iter().zip(&values) {
        assert!((a - r).abs() <= 1e-6 * r.abs().max(1.0), "{a} vs {r}");
    }
}

#[test]
fn lanczos_prefixes_agree() {
    let op = fem(&icosphere(4, 1.0), MassMode::Lumped);
    let (l, b) = (op.stiffness().unwrap(), op.mass());
    let opts = EigenOptions {
        method: EigenMethod::Lanczos,
        ..EigenOptions::default()
    };
    let small = smallest_eigenpairs(l, b, 10, &opts).unwrap();
    let large = smallest_eigenpairs(l, b, 20, &opts).unwrap();
    for (a, c) in small.values().iter().zip(large.values()) {
        assert!((a - c).abs() <= 1e-8 * c.abs().max(1.0), "{a} vs {c}");
    }
}

#[test]
fn lanczos_pairs_are_orthonormal_with_small_residuals() {
    let op = fem(&torus(1.0, 0.4, 40, 24), MassMode::Consistent);
    let (l, b) = (op.stiffness().unwrap(), op.mass());
    let opts = EigenOptions {
        method: EigenMethod::Lanczos,
        ..EigenOptions::default()
    };
    let eig = smallest_eigenpairs(l, b, 12, &opts).unwrap();
    assert!(eig.orthonormality_defect(b) <= 1e-8);
    let top = eig.values().last().unwrap().abs();
    for (x, r) in eig.vectors().iter().zip(eig.residual_norms(l, b)) {
        let lx: f64 = l.mul_vec(x).iter().map(|v| v * v).sum::<f64>().sqrt();
        let bx: f64 = b.mul_vec(x).iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(r <= 1e-7 * lx.max(top * bx), "residual {r:e}");
    }
    assert!(eig.values()[0].abs() <= 1e-8);
}

#[test]
fn dense_and_lanczos_agree() {
    let op = fem(&icosphere(3, 1.0), MassMode::Lumped);
    let (l, b) = (op.stiffness().unwrap(), op.mass());
    let dense_eig = smallest_eigenpairs(
        l,
        b,
        15,
        &EigenOptions {
            method: EigenMethod::Dense,
            ..EigenOptions::default()
        },
    )
    .unwrap();
    let lanczos = smallest_eigenpairs(
        l,
        b,
        15,
        &EigenOptions {
            method: EigenMethod::Lanczos,
            ..EigenOptions::default()
        },
    )
    .unwrap();
    for (a, c) in dense_eig.values().iter().zip(lanczos.values()) {
        assert!((a - c).abs() <= 1e-8 * c.abs().max(1.0));
    }
}

#[test]
fn condition_estimate_matches_dense_oracle() {
    let op = fem(&torus(1.0, 0.4, 20, 10), MassMode::Lumped);
    let (l, b) = (op.stiffness().unwrap(), op.mass());
    // C = B^{-1/2} L B^{-1/2}; with a diagonal B its spectrum is the pencil's.
    let (ld, bd) = (dense(l), dense(b));
    let n = ld.len();
    let c: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| ld[i][j] / (bd[i][i] * bd[j][j]).sqrt()).collect())
        .collect();
    let (values, _) = jacobi_eigen(&c);
    let lambda_max = *values.last().unwrap();
    assert!(spectral_radius_bound(l, b) >= lambda_max);

    let pf = exp_chebyshev_coefficients(5).unwrap().scaled(1.0);
    let mut shifts: Vec<Complex64> = pf.terms().iter().map(|t| t.node).collect();
    shifts.push(Complex64::new(0.5, 0.0));
    for beta in shifts {
        let gains: Vec<f64> = values.iter().map(|&s| (Complex64::new(1.0, 0.0) + beta * s).norm()).collect();
        let hi = gains.iter().copied().fold(0.0, f64::max);
        let lo = gains.iter().copied().fold(f64::INFINITY, f64::min);
        let exact = hi / lo;
        let estimate = shift_condition_estimate(beta, lambda_max);
        assert_relative_eq!(estimate, exact, max_relative = 0.01);
    }
}

#[test]
fn near_singular_shift_is_rejected() {
    let op = fem(&icosphere(2, 1.0), MassMode::Lumped);
    let (l, b) = (op.stiffness().unwrap(), op.mass());
    let lambda_max = spectral_radius_bound(l, b);
    let beta = Complex64::new(-1.0 / (0.5 * lambda_max), 0.0);
    assert!(matches!(
        ShiftedSolver::new(b, l, beta),
        Err(spectral_basis::Error::NearSingularShift { .. })
    ));
}
