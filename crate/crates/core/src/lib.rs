//! Exact solvability machinery for the two-species generalized circular
//! plasma: Pfaffian identities, skew-orthogonal structure and
//! normalization, finite-N and bulk correlation kernels, screening sum
//! rules, and brute-force oracles to check them against.
//!
//! The algebraic layer ([`scalar`], [`poly`], [`linalg`], [`pfaffian`],
//! [`identities`]) is generic over the scalar type; the physics layer works
//! in `f64` and [`num_complex::Complex64`]. Common instantiations are named
//! by the aliases below.

pub mod bulk;
pub mod error;
pub mod finite;
pub mod identities;
pub mod linalg;
pub mod pfaffian;
pub mod plasma;
pub mod poly;
pub mod quadrature;
pub mod scalar;
pub mod sumrules;
pub mod validation;

use num_complex::Complex64;
use num_rational::BigRational;

pub use bulk::{bulk_correlation, bulk_kernel, two_point_explicit, BulkDensities, Pair};
pub use error::{Error, Result};
pub use finite::{correlation, correlation_zeta_oracle, CorrelationResult, Species};
pub use identities::RationalPolynomial;
pub use pfaffian::{pfaffian, pfaffian_oracle, KernelBlock, SkewMatrix, ZetaPolynomial};
pub use plasma::{partition_function, skew_structure, OneBodyWeight, PlasmaConfig};
pub use scalar::{Field, Ring};
pub use sumrules::{screening_sum, truncated_correlation, Rule};

/// Skew matrix of exact rationals.
pub type RationalSkewMatrix = SkewMatrix<BigRational>;
/// Skew matrix of double-precision reals.
pub type RealSkewMatrix = SkewMatrix<f64>;
/// Skew matrix of double-precision complex numbers.
pub type ComplexSkewMatrix = SkewMatrix<Complex64>;
/// Skew matrix of polynomials in ζ with complex coefficients.
pub type ZetaSkewMatrix = SkewMatrix<ZetaPolynomial>;
/// Dense square matrix of exact rationals.
pub type RationalMatrix = linalg::Square<BigRational>;
/// Dense square matrix of double-precision reals.
pub type RealMatrix = linalg::Square<f64>;

/// Version of this crate, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
