use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed function, mask or option values.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Adaptive quadrature hit its subdivision budget.
    #[error(
        "quadrature did not reach tolerance after {subdivisions} subdivisions \
         (error bound {error_bound:e})"
    )]
    Convergence {
        estimate: Vec<Complex64>,
        error_bound: f64,
        subdivisions: usize,
    },

    /// No candidate node keeps the sample matrix invertible.
    #[error(
        "functions are nearly dependent on the candidate grid (node {node}, best pivot {pivot:e})"
    )]
    NearDependence { node: usize, pivot: f64 },

    #[error("window width could not be certified (last delta {delta:e}, margin sum {margin_sum})")]
    Certification { delta: f64, margin_sum: f64 },

    #[error("no Hobby-Rice seed converged (best residual {best_residual:e})")]
    HobbyRice { best_residual: f64 },

    #[error("construction failed: {0}")]
    Construction(String),

    /// Direct quadrature of `T(z)` disagrees with `δQ(δ;z) + r`.
    #[error(
        "internal consistency violation: |T_direct - (δQ + r)| = {discrepancy:e} exceeds {limit:e}"
    )]
    Consistency {
        direct: Vec<Complex64>,
        decomposed: Vec<Complex64>,
        discrepancy: f64,
        limit: f64,
    },

    /// The fixed-point search ran out of budget. A zero exists; the solver did not find it.
    #[error("fixed-point solve exhausted its budget after {iterations} iterations (best residual {best_residual:e})")]
    FixedPoint {
        best_z: Vec<Complex64>,
        best_residual: f64,
        iterations: usize,
    },

    #[error("singular matrix")]
    Singular,
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
