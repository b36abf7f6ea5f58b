//! Constrained (Lagrange) bases: `L psi_i = 0` off the seeds, `psi_i(p_j) = delta_ij`.

use log::warn;

use super::{check_len, BasisFamily, BasisSet, ScalarField};
use crate::error::{Error, Result};
use crate::laplacian::LaplacianOperator;
use crate::mesh::TriangleMesh;
use crate::numerics::{CsrMatrix, Definiteness, ProfileLu, SparseSymMatrix};
use crate::par;

fn check_seeds(n: usize, seeds: &[usize]) -> Result<()> {
    if seeds.is_empty() {
        return Err(Error::InvalidArgument("at least one seed is required".into()));
    }
    let mut seen = vec![false; n];
    for &s in seeds {
        if s >= n {
            return Err(Error::InvalidArgument(format!("seed {s} out of range for {n} vertices")));
        }
        if std::mem::replace(&mut seen[s], true) {
            return Err(Error::DuplicateSeeds(s));
        }
    }
    Ok(())
}

/// Solves the system in which every seed row of `a` is replaced by a unit
/// row. Known seed values are moved to the right-hand side, so only the
/// free block is factorised, once for all seeds.
pub(crate) fn constrained_solve(a: &CsrMatrix<f64>, seeds: &[usize]) -> Result<Vec<Vec<f64>>> {
    let n = a.nrows();
    let mut slot = vec![usize::MAX; n];
    for (q, &s) in seeds.iter().enumerate() {
        slot[s] = q;
    }
    let free: Vec<usize> = (0..n).filter(|&i| slot[i] == usize::MAX).collect();
    let mut fields = vec![vec![0.0; n]; seeds.len()];
    for (q, &s) in seeds.iter().enumerate() {
        fields[q][s] = 1.0;
    }
    if free.is_empty() {
        return Ok(fields);
    }
    let a_ff = a.submatrix(&free);
    let lu = ProfileLu::factor(&a_ff).map_err(|e| Error::SolverFailure(e.to_string()))?;
    // rhs_q = -A_{F, s_q}
    let mut rhs = vec![vec![0.0; free.len()]; seeds.len()];
    for (fi, &i) in free.iter().enumerate() {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            if slot[j] != usize::MAX {
                rhs[slot[j]][fi] -= v;
            }
        }
    }
    let solved = par::try_map_range(seeds.len(), |q| {
        let (x, rel) = lu.solve_refined(&a_ff, &rhs[q], 1e-13);
        if rel > 1e-10 {
            Err(Error::SolverFailure(format!("constrained solve for seed {} reached residual {rel:e}", seeds[q])))
        } else {
            Ok(x)
        }
    })?;
    for (q, x) in solved.into_iter().enumerate() {
        for (fi, &i) in free.iter().enumerate() {
            fields[q][i] = x[fi];
        }
    }
    Ok(fields)
}

fn same_mesh(mesh: &TriangleMesh, op: &LaplacianOperator) -> Result<()> {
    if mesh.num_vertices() == op.dim() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: mesh.num_vertices(),
            got: op.dim(),
        })
    }
}

fn check_components(mesh: &TriangleMesh, seeds: &[usize]) -> Result<()> {
    let (labels, count) = mesh.components();
    let mut covered = vec![false; count];
    for &s in seeds {
        covered[labels[s]] = true;
    }
    match covered.iter().position(|&c| !c) {
        Some(c) => Err(Error::SolverFailure(format!(
            "connected component {c} contains no seed; the constrained system is singular"
        ))),
        None => Ok(()),
    }
}

/// Harmonic basis: one field per seed with `psi_i(p_j) = delta_ij`.
pub fn harmonic_basis(mesh: &TriangleMesh, op: &LaplacianOperator, seeds: &[usize]) -> Result<BasisSet> {
    same_mesh(mesh, op)?;
    check_seeds(op.dim(), seeds)?;
    check_components(mesh, seeds)?;
    let fields = constrained_solve(op.stiffness_csr(), seeds)?;
    let fields = fields
        .into_iter()
        .zip(seeds)
        .map(|(v, s)| ScalarField::new(v, format!("harmonic seed={s} scheme={}", op.scheme())))
        .collect::<Result<Vec<_>>>()?;
    Ok(BasisSet::new(BasisFamily::Harmonic, fields)?
        .with_seeds(seeds)
        .with_parameter("scheme", op.scheme()))
}

/// `H = L + mu B diag(V)`, symmetrised as `L + mu (B D + D B) / 2` when the
/// mass matrix is not diagonal. The flag reports possible indefiniteness.
pub fn hamiltonian_matrix(op: &LaplacianOperator, potential: &[f64], mu: f64) -> Result<(SparseSymMatrix, bool)> {
    check_len(potential, op.dim())?;
    if !mu.is_finite() || potential.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("potential and mu must be finite".into()));
    }
    let l = op.stiffness()?;
    let b = op.mass();
    let mut trip: Vec<(usize, usize, f64)> = l.triplets().collect();
    trip.extend(b.triplets().map(|(i, j, v)| (i, j, mu * v * 0.5 * (potential[i] + potential[j]))));
    let h = CsrMatrix::from_triplets(op.dim(), op.dim(), &trip);
    let indefinite = mu * potential.iter().copied().fold(f64::INFINITY, f64::min) < 0.0;
    let flag = if indefinite { Definiteness::Indefinite } else { Definiteness::PositiveSemiDefinite };
    Ok((SparseSymMatrix::new(h, flag)?, indefinite))
}

/// Hamiltonian basis: as [`harmonic_basis`] with `H` in place of `L`.
pub fn hamiltonian_basis(
    mesh: &TriangleMesh,
    op: &LaplacianOperator,
    potential: &[f64],
    mu: f64,
    seeds: &[usize],
) -> Result<BasisSet> {
    same_mesh(mesh, op)?;
    check_seeds(op.dim(), seeds)?;
    check_components(mesh, seeds)?;
    let (h, indefinite) = hamiltonian_matrix(op, potential, mu)?;
    let fields = constrained_solve(&h, seeds)?;
    let fields = fields
        .into_iter()
        .zip(seeds)
        .map(|(v, s)| ScalarField::new(v, format!("hamiltonian seed={s} mu={mu}")))
        .collect::<Result<Vec<_>>>()?;
    let mut set = BasisSet::new(BasisFamily::Hamiltonian, fields)?
        .with_seeds(seeds)
        .with_parameter("mu", mu)
        .with_parameter("scheme", op.scheme());
    if indefinite {
        let msg = "IndefiniteOperator: mu * min(V) < 0 may make the Hamiltonian indefinite".to_string();
        warn!("{msg}");
        set.warnings.push(msg);
    }
    Ok(set)
}
