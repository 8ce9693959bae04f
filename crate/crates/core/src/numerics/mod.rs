//! Numeric substrate: real-coefficient polynomials, rational functions in the
//! Laplace variable `s`, dense complex matrices, and the eigen/SVD/root-finding
//! routines the higher-level modules are built on.
//!
//! All values are immutable after construction and all operations are pure, so
//! everything here can be shared freely across threads.

mod matrix;
mod poly;
mod rational;

pub use matrix::{sym_eig, ComplexMatrix};
pub use poly::{poly_roots, Polynomial};
pub use rational::RationalFunction;

use num_complex::Complex64;
use thiserror::Error;

/// Tolerance pair used throughout the crate.
///
/// `structural_tol` governs structural tests (symmetry, zero row sums,
/// classification decisions), which tolerate more slack than solver residuals;
/// `numeric_tol` governs solves, evaluations and root residuals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub structural_tol: f64,
    pub numeric_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            structural_tol: 1e-9,
            numeric_tol: 1e-10,
        }
    }
}

impl Tolerances {
    pub fn new(structural_tol: f64, numeric_tol: f64) -> Self {
        assert!(
            structural_tol > 0.0 && numeric_tol > 0.0,
            "tolerances must be strictly positive"
        );
        Tolerances {
            structural_tol,
            numeric_tol,
        }
    }
}

/// Default numeric tolerance, used where threading a [`Tolerances`] through
/// would only add noise (polynomial normalization, rational evaluation).
pub const DEFAULT_NUMERIC_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum NumericsError {
    #[error("division by the zero rational function")]
    DivisionByZeroFunction,

    #[error("evaluation too close to a pole at s = {0}")]
    EvalNearPole(Complex64),

    #[error("degenerate input: the zero polynomial has no defined roots")]
    DegenerateInput,

    #[error("matrix is numerically singular")]
    SingularMatrix,

    #[error("matrix is not symmetric (defect {defect:.3e} > tol {tol:.3e})")]
    NotSymmetric { defect: f64, tol: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

pub type Result<T> = std::result::Result<T, NumericsError>;
