//! Filtered spectral operators `K_phi = X phi(Lambda) X^T B`, evaluated by
//! truncated eigen-expansion or by rational partial fractions.

use num_complex::Complex64;
use serde::Serialize;

use super::{check_len, delta, BasisFamily, BasisSet, ScalarField};
use crate::error::{Error, Result};
use crate::filters::{FilterSpec, PartialFraction, DEFAULT_DEGREE};
use crate::laplacian::LaplacianOperator;
use crate::numerics::{
    smallest_eigenpairs, solve_psd_deflated, spectral_radius_bound, ConstantDeflation, EigenOptions, EigenSystem,
    ShiftedSolver, SparseSymMatrix,
};
use crate::par;

/// Default number of eigenpairs on the truncated path.
pub const DEFAULT_TRUNCATION: usize = 100;

/// Eigenvalues at most this fraction of the largest stored one count as the
/// constant (null) mode.
const NULL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SpectralMethod {
    /// Spectrum-free rational method of the given degree.
    Chebyshev { degree: usize },
    /// Expansion over the `k` smallest eigenpairs.
    Truncated { k: usize },
}

impl Default for SpectralMethod {
    fn default() -> Self {
        SpectralMethod::Chebyshev { degree: DEFAULT_DEGREE }
    }
}

impl std::fmt::Display for SpectralMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SpectralMethod::Chebyshev { degree } => write!(f, "chebyshev(r={degree})"),
            SpectralMethod::Truncated { k } => write!(f, "truncated(k={k})"),
        }
    }
}

fn is_null(lambda: f64, scale: f64) -> bool {
    lambda.abs() <= NULL_TOL * scale.max(1.0)
}

/// `sum_j phi(lambda_j) (x_j^T B f) x_j` over the stored pairs. Singular
/// filters skip the null mode.
pub fn truncated_spectral(
    op: &LaplacianOperator,
    eig: &EigenSystem,
    filter: &FilterSpec,
    f: &[f64],
) -> Result<ScalarField> {
    let values = truncated_apply(op.mass(), eig, filter, f)?;
    ScalarField::new(values, format!("truncated k={} filter={filter}", eig.len()))
}

fn truncated_apply(mass: &SparseSymMatrix, eig: &EigenSystem, filter: &FilterSpec, f: &[f64]) -> Result<Vec<f64>> {
    check_len(f, mass.dim())?;
    check_len(f, eig.dim())?;
    let scale = eig.values().last().copied().unwrap_or(1.0);
    let bf = mass.mul_vec(f);
    let mut out = vec![0.0; f.len()];
    for (x, &lam) in eig.vectors().iter().zip(eig.values()) {
        let phi = if filter.is_singular_at_zero() && is_null(lam, scale) {
            continue;
        } else {
            filter.evaluate(lam.max(0.0))?
        };
        let c: f64 = x.iter().zip(&bf).map(|(a, b)| a * b).sum::<f64>() * phi;
        for (o, &xi) in out.iter_mut().zip(x) {
            *o += c * xi;
        }
    }
    Ok(out)
}

/// One factorised shift with the weights of its powers `1..=weights.len()`.
#[derive(Debug, Clone)]
struct Stage {
    solver: ShiftedSolver,
    weights: Vec<Complex64>,
}

/// `alpha_0 f + sum_j alpha_j (B + beta_j L)^{-1} B f` with every shifted
/// matrix factorised once. Conjugate pairs are solved once and doubled.
#[derive(Debug, Clone)]
pub struct ChebyshevOperator {
    mass: SparseSymMatrix,
    pf: PartialFraction,
    stages: Vec<Stage>,
}

impl ChebyshevOperator {
    pub fn new(op: &LaplacianOperator, pf: PartialFraction) -> Result<Self> {
        let l = op.stiffness()?;
        let b = op.mass();
        let lambda_max = spectral_radius_bound(l, b);
        let nodes: Vec<(Complex64, u32)> = pf.nodes().into_iter().filter(|(z, _)| z.im >= 0.0).collect();
        let stages = par::try_map_range(nodes.len(), |j| {
            let (node, power) = nodes[j];
            let solver = ShiftedSolver::with_bound(b, l, node, lambda_max)?;
            let weights = (1..=power)
                .map(|p| {
                    pf.terms()
                        .iter()
                        .filter(|t| t.node == node && t.power == p)
                        .map(|t| t.weight)
                        .sum()
                })
                .collect();
            Ok::<_, Error>(Stage { solver, weights })
        })?;
        Ok(Self {
            mass: b.clone(),
            pf,
            stages,
        })
    }

    pub fn partial_fraction(&self) -> &PartialFraction {
        &self.pf
    }

    pub fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        check_len(f, self.mass.dim())?;
        let bf = self.mass.mul_vec(f);
        let parts = par::try_map_range(self.stages.len(), |j| self.stage_apply(&self.stages[j], &bf))?;
        let c = self.pf.constant();
        let mut out: Vec<f64> = f.iter().map(|v| c * v).collect();
        for part in parts {
            for (o, p) in out.iter_mut().zip(part) {
                *o += p;
            }
        }
        Ok(out)
    }

    fn stage_apply(&self, stage: &Stage, bf: &[f64]) -> Result<Vec<f64>> {
        let n = bf.len();
        let mut acc = vec![0.0; n];
        if stage.solver.is_real() {
            let mut g = stage.solver.solve_real(bf)?;
            for (p, w) in stage.weights.iter().enumerate() {
                if p > 0 {
                    g = stage.solver.solve_real(&self.mass.mul_vec(&g))?;
                }
                for (a, gi) in acc.iter_mut().zip(&g) {
                    *a += w.re * gi;
                }
            }
        } else {
            let mut g = stage.solver.solve(bf)?;
            for (p, w) in stage.weights.iter().enumerate() {
                if p > 0 {
                    let re: Vec<f64> = g.iter().map(|z| z.re).collect();
                    let im: Vec<f64> = g.iter().map(|z| z.im).collect();
                    let (br, bi) = (self.mass.mul_vec(&re), self.mass.mul_vec(&im));
                    let rhs: Vec<Complex64> = br.into_iter().zip(bi).map(|(a, b)| Complex64::new(a, b)).collect();
                    g = stage.solver.solve_complex(&rhs)?;
                }
                for (a, gi) in acc.iter_mut().zip(&g) {
                    *a += 2.0 * (w * gi).re;
                }
            }
        }
        Ok(acc)
    }
}

/// Applies a partial-fraction form to `f` without any eigenvectors.
pub fn chebyshev_spectral(op: &LaplacianOperator, pf: &PartialFraction, f: &[f64]) -> Result<ScalarField> {
    let values = ChebyshevOperator::new(op, pf.clone())?.apply(f)?;
    ScalarField::new(values, format!("chebyshev degree={}", pf.degree()))
}

/// A filtered operator ready to be applied to many fields.
#[derive(Debug, Clone)]
pub enum FilteredOperator {
    Chebyshev(ChebyshevOperator),
    Truncated {
        mass: SparseSymMatrix,
        eig: EigenSystem,
        filter: FilterSpec,
    },
}

impl FilteredOperator {
    pub fn new(op: &LaplacianOperator, filter: &FilterSpec, method: SpectralMethod) -> Result<Self> {
        match method {
            SpectralMethod::Chebyshev { degree } => {
                Ok(Self::Chebyshev(ChebyshevOperator::new(op, filter.partial_fraction(degree)?)?))
            }
            SpectralMethod::Truncated { k } => {
                let k = k.min(op.dim());
                let eig = smallest_eigenpairs(op.stiffness()?, op.mass(), k, &EigenOptions::default())?;
                Ok(Self::from_eigensystem(op, eig, filter.clone()))
            }
        }
    }

    /// Truncated operator over an existing eigensystem.
    pub fn from_eigensystem(op: &LaplacianOperator, eig: EigenSystem, filter: FilterSpec) -> Self {
        Self::Truncated {
            mass: op.mass().clone(),
            eig,
            filter,
        }
    }

    pub fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        match self {
            Self::Chebyshev(c) => c.apply(f),
            Self::Truncated { mass, eig, filter } => truncated_apply(mass, eig, filter, f),
        }
    }

    /// `K e_seed`
    pub fn column(&self, seed: usize) -> Result<Vec<f64>> {
        let n = match self {
            Self::Chebyshev(c) => c.mass.dim(),
            Self::Truncated { mass, .. } => mass.dim(),
        };
        self.apply(&delta(n, seed)?)
    }

    /// Caveats that belong in the provenance of every output.
    pub fn warnings(&self, n: usize) -> Vec<String> {
        match self {
            Self::Truncated { eig, .. } if eig.len() < n => vec![format!(
                "truncated expansion over {} of {n} eigenpairs; its accuracy cannot be estimated without the full spectrum",
                eig.len()
            )],
            _ => Vec::new(),
        }
    }
}

/// Heat-kernel column `K_t e_seed`.
pub fn diffusion_basis(op: &LaplacianOperator, t: f64, seed: usize, method: SpectralMethod) -> Result<ScalarField> {
    let set = diffusion_basis_set(op, t, &[seed], method)?;
    Ok(set.fields.into_iter().next().expect("one seed"))
}

/// Heat-kernel columns for many seeds, sharing one factorisation or one
/// eigensystem.
pub fn diffusion_basis_set(op: &LaplacianOperator, t: f64, seeds: &[usize], method: SpectralMethod) -> Result<BasisSet> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("diffusion scale must be positive, got {t}")));
    }
    let filter = FilterSpec::Exponential { t };
    let k = FilteredOperator::new(op, &filter, method)?;
    spectral_set(op, &k, &filter, seeds, method, BasisFamily::Diffusion)
}

pub(crate) fn spectral_set(
    op: &LaplacianOperator,
    k: &FilteredOperator,
    filter: &FilterSpec,
    seeds: &[usize],
    method: SpectralMethod,
    family: BasisFamily,
) -> Result<BasisSet> {
    let fields = par::try_map_range(seeds.len(), |q| {
        let v = k.column(seeds[q])?;
        ScalarField::new(v, format!("{family} seed={} filter={filter} method={method}", seeds[q]))
    })?;
    let mut set = BasisSet::new(family, fields)?
        .with_seeds(seeds)
        .with_parameter("filter", filter)
        .with_parameter("method", method);
    if filter.is_singular_at_zero() {
        set.warnings.push("constant mode deflated (filter is singular at zero)".into());
    }
    set.warnings.extend(k.warnings(op.dim()));
    Ok(set)
}

/// Which Green kernel a column is taken from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum GreenRole {
    /// Pseudo-inverse of the Laplacian (weights `1 / lambda` off the null mode).
    Harmonic,
    /// Heat kernel at scale `t`.
    Diffusion { t: f64 },
    /// Arbitrary filter.
    General(FilterSpec),
}

/// Column of a Green kernel at `seed`.
///
/// The harmonic case solves `L g = B e_i - B 1 (1^T B e_i) / (1^T B 1)` and
/// returns `g` with `<g, 1>_B = 0`.
pub fn green_column(op: &LaplacianOperator, role: &GreenRole, seed: usize, method: SpectralMethod) -> Result<ScalarField> {
    match role {
        GreenRole::Harmonic => {
            let l = op.stiffness()?;
            let rhs = op.mass().mul_vec(&delta(op.dim(), seed)?);
            let deflation = ConstantDeflation::new(op.mass_ones());
            let g = solve_psd_deflated(l, &deflation, &rhs, 1e-12)?;
            ScalarField::new(g, format!("green harmonic seed={seed}"))
        }
        GreenRole::Diffusion { t } => diffusion_basis(op, *t, seed, method),
        GreenRole::General(filter) => {
            let k = FilteredOperator::new(op, filter, method)?;
            ScalarField::new(k.column(seed)?, format!("green seed={seed} filter={filter} method={method}"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::rational_partial_fractions;
    use crate::laplacian::{MassMode, Scheme};
    use crate::mesh::shapes::icosphere;

    fn sphere(level: usize, mass: MassMode) -> LaplacianOperator {
        LaplacianOperator::assemble(&icosphere(level, 1.0), Scheme::LinearFem, mass).unwrap()
    }

    #[test]
    fn chebyshev_preserves_constants() {
        for mass in [MassMode::Lumped, MassMode::Consistent] {
            let op = sphere(2, mass);
            let pf = FilterSpec::Exponential { t: 0.1 }.partial_fraction(5).unwrap();
            let out = chebyshev_spectral(&op, &pf, &vec![1.0; op.dim()]).unwrap();
            assert!(out.values().iter().all(|v| (v - 1.0).abs() <= 5e-5));
        }
    }

    #[test]
    fn truncated_identity_filter_is_identity() {
        let op = sphere(1, MassMode::Lumped);
        let n = op.dim();
        let eig = smallest_eigenpairs(op.stiffness().unwrap(), op.mass(), n, &EigenOptions::default()).unwrap();
        let one: FilterSpec = "rat:num=1;den=1".parse().unwrap();
        let f: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let out = truncated_spectral(&op, &eig, &one, &f).unwrap();
        for (a, b) in out.values().iter().zip(&f) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn repeated_pole_chain_matches_truncated() {
        let op = sphere(1, MassMode::Consistent);
        let n = op.dim();
        let filter: FilterSpec = "rat:num=1;den=1,2,1".parse().unwrap();
        let cheb = FilteredOperator::new(&op, &filter, SpectralMethod::Chebyshev { degree: 5 }).unwrap();
        let full = FilteredOperator::new(&op, &filter, SpectralMethod::Truncated { k: n }).unwrap();
        let a = cheb.column(7).unwrap();
        let b = full.column(7).unwrap();
        let peak = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-9 * peak);
        }
    }

    #[test]
    fn rational_filter_on_conjugate_pair() {
        let op = sphere(1, MassMode::Lumped);
        let n = op.dim();
        let pf = rational_partial_fractions(&[1.0], &[1.0, 0.0, 1.0]).unwrap();
        let filter: FilterSpec = "rat:num=1;den=1,0,1".parse().unwrap();
        let f: Vec<f64> = (0..n).map(|i| (i % 5) as f64).collect();
        let a = chebyshev_spectral(&op, &pf, &f).unwrap();
        let full = FilteredOperator::new(&op, &filter, SpectralMethod::Truncated { k: n }).unwrap();
        let b = full.apply(&f).unwrap();
        for (x, y) in a.values().iter().zip(&b) {
            assert!((x - y).abs() <= 1e-9);
        }
    }

    #[test]
    fn green_column_is_deflated() {
        let op = sphere(2, MassMode::Lumped);
        let g = green_column(&op, &GreenRole::Harmonic, 5, SpectralMethod::default()).unwrap();
        let ones = op.mass_ones();
        let mean: f64 = g.values().iter().zip(&ones).map(|(a, b)| a * b).sum();
        assert!(mean.abs() < 1e-10);
        let lg = op.stiffness().unwrap().mul_vec(g.values());
        let mut rhs = op.mass().mul_vec(&delta(op.dim(), 5).unwrap());
        ConstantDeflation::new(ones).project_rhs(&mut rhs);
        let scale = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (a, b) in lg.iter().zip(&rhs) {
            assert!((a - b).abs() <= 1e-8 * scale);
        }
    }

    #[test]
    fn singular_filters_need_truncation() {
        let op = sphere(1, MassMode::Lumped);
        let f = FilterSpec::CommuteTime;
        assert!(matches!(
            FilteredOperator::new(&op, &f, SpectralMethod::Chebyshev { degree: 5 }),
            Err(Error::NoRationalForm(_))
        ));
        let set = spectral_set(
            &op,
            &FilteredOperator::new(&op, &f, SpectralMethod::Truncated { k: 20 }).unwrap(),
            &f,
            &[0],
            SpectralMethod::Truncated { k: 20 },
            BasisFamily::Spectral,
        )
        .unwrap();
        assert_eq!(set.warnings.len(), 2);
    }
}
