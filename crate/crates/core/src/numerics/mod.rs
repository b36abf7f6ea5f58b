//! Sparse matrices, linear solvers and the generalized eigensolver.

pub mod cg;
pub mod eigen;
pub mod ordering;
pub mod profile;
pub mod scalar;
pub mod shifted;
pub mod sparse;

pub use cg::{conjugate_gradient, solve_psd_deflated, solve_spd, solve_spd_with_info, ConstantDeflation, SolveInfo};
pub use eigen::{smallest_eigenpairs, EigenMethod, EigenOptions, EigenSystem, CLUSTER_TOL};
pub use profile::ProfileLu;
pub use scalar::Scalar;
pub use shifted::{shift_condition_estimate, solve_shifted, spectral_radius_bound, ShiftedSolver};
pub use sparse::{CsrMatrix, Definiteness, SparseSymMatrix};
