//! Basis functions on a mesh: harmonic, Hamiltonian, eigen, filtered
//! spectral, diffusion and Green-kernel columns.

mod eigen;
mod harmonic;
mod spectral;

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

pub use eigen::{eigen_basis, reconstruct, spectral_coefficients, ResidualReport};
pub use harmonic::{hamiltonian_basis, hamiltonian_matrix, harmonic_basis};
pub use spectral::{
    chebyshev_spectral, diffusion_basis, diffusion_basis_set, green_column, truncated_spectral, ChebyshevOperator,
    FilteredOperator, GreenRole, SpectralMethod, DEFAULT_TRUNCATION,
};

/// A real function on the vertices of a mesh.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalarField {
    values: Vec<f64>,
    provenance: String,
}

impl ScalarField {
    pub fn new(values: Vec<f64>, provenance: impl Into<String>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("field value at vertex {i} is not finite")));
        }
        Ok(Self {
            values,
            provenance: provenance.into(),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl AsRef<[f64]> for ScalarField {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BasisFamily {
    Harmonic,
    Hamiltonian,
    Eigen,
    Spectral,
    Diffusion,
    Green,
    /// Fields produced by an arbitrary generator (seed coverage, tests).
    Generated,
}

impl fmt::Display for BasisFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BasisFamily::Harmonic => "harmonic",
            BasisFamily::Hamiltonian => "hamiltonian",
            BasisFamily::Eigen => "eigen",
            BasisFamily::Spectral => "spectral",
            BasisFamily::Diffusion => "diffusion",
            BasisFamily::Green => "green",
            BasisFamily::Generated => "generated",
        })
    }
}

/// An ordered family of fields on one mesh, with generation parameters.
#[derive(Debug, Clone, Serialize)]
pub struct BasisSet {
    pub family: BasisFamily,
    pub fields: Vec<ScalarField>,
    /// Seed vertex of each field, when the family is seed-based.
    pub seeds: Vec<usize>,
    pub parameters: BTreeMap<String, String>,
    pub warnings: Vec<String>,
}

impl BasisSet {
    pub fn new(family: BasisFamily, fields: Vec<ScalarField>) -> Result<Self> {
        if let Some(n) = fields.first().map(ScalarField::len) {
            if let Some(bad) = fields.iter().find(|f| f.len() != n) {
                return Err(Error::DimensionMismatch { expected: n, got: bad.len() });
            }
        }
        Ok(Self {
            family,
            fields,
            seeds: Vec::new(),
            parameters: BTreeMap::new(),
            warnings: Vec::new(),
        })
    }

    pub fn with_seeds(mut self, seeds: &[usize]) -> Self {
        self.seeds = seeds.to_vec();
        self
    }

    pub fn with_parameter(mut self, key: &str, value: impl ToString) -> Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    /// Number of vertices each field lives on.
    pub fn dim(&self) -> usize {
        self.fields.first().map_or(0, ScalarField::len)
    }
}

pub(crate) fn check_len(f: &[f64], n: usize) -> Result<()> {
    if f.len() == n {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected: n, got: f.len() })
    }
}

/// The unit vector `e_i` of length `n`.
pub fn delta(n: usize, i: usize) -> Result<Vec<f64>> {
    if i >= n {
        return Err(Error::InvalidArgument(format!("seed {i} out of range for {n} vertices")));
    }
    let mut e = vec![0.0; n];
    e[i] = 1.0;
    Ok(e)
}
