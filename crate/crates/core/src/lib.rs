//! Discrete Laplace-Beltrami operators on triangle meshes and the spectral
//! basis functions built from them.
//!
//! The crate assembles the stiffness/mass pair `(L, B)` of a triangle mesh and
//! evaluates harmonic, Hamiltonian, eigen, filtered-spectral, diffusion and
//! Green-kernel bases. Filtered operators `K_phi = X phi(Lambda) X^T B` are
//! computed either from a truncated eigen-expansion or without any spectrum,
//! through a rational (Chebyshev) approximation of the filter that turns every
//! application into a handful of sparse shifted solves `(B + beta L) g = B f`.
//!
//! Data-parallel loops (per seed, per pole, per Lanczos block column) run on
//! rayon when the `parallel` feature is enabled (the default) and sequentially
//! otherwise; results are identical either way.

// NaN-rejecting `!(x > 0.0)` checks and index loops over several dense
// arrays at once are both deliberate here.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod basis;
pub mod error;
pub mod filters;
pub mod laplacian;
pub mod mesh;
pub mod metrics;
pub mod numerics;
pub mod par;
pub mod seeds;

pub use basis::{BasisFamily, BasisSet, ScalarField};
pub use error::{Error, Result};
pub use filters::{FilterSpec, PartialFraction};
pub use laplacian::{LaplacianOperator, MassMode, Scheme};
pub use mesh::TriangleMesh;
pub use numerics::{EigenSystem, SparseSymMatrix};
pub use seeds::SeedSet;
