//! Einstein rank-one extensions `du² + (exp(uD))* g` of metric Lie algebras
//! and homogeneous frame data.
//!
//! - [`spectral`]: admissible eigenvalue types of `D`, in exact arithmetic.
//! - [`algebra`]: structure constants and Lie-theoretic primitives.
//! - [`curvature`]: Ricci data of the deformation and the extension.
//! - [`verifier`]: the Einstein test and type-specific classifiers.
//! - [`catalog`]: named examples.
//! - [`solver`]: numerical search for structure constants.

pub mod algebra;
pub mod catalog;
pub mod cli;
pub mod curvature;
pub mod error;
pub mod exact;
pub mod io;
pub mod solver;
pub mod spectral;
pub mod verifier;

pub use algebra::{ExtensionSpec, OrthogonalDecomposition, StructureTensor, TensorKind};
pub use error::{Error, Result};
pub use exact::{Affine, Rational};
pub use spectral::{RootMatrix, RootTriple, SpectralVector};
