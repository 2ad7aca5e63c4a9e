//! Smooth circle-valued annihilators for finite families of integrable functions.
//!
//! Given complex piecewise polynomials `f_1, …, f_n` on `[0, 1]`, this crate builds a
//! smooth real phase `θ` with `∫₀¹ f_k(t) e^{iθ(t)} dt = 0` for every `k`, together with
//! the data that certifies each step of the construction:
//!
//! 1. interpolation nodes `t_j` with an invertible sample matrix `M = [f_k(t_j)]`,
//! 2. a window half-width `δ` for which the window map is a small perturbation of `M`,
//! 3. a smoothed Hobby–Rice sign phase `φ` living on the complement of the windows,
//! 4. a fixed point `z₀` of the polydisk self-map `z ↦ z − δ⁻¹M⁻¹T(z)`.
//!
//! The resulting phase has `∫|θ'| ≤ 5πn`, so `‖e^{iθ}‖_{W^{1,1}} ≤ 5πn + 1`.
//! The [`sobolev`] module measures these norms and provides the dyadic compression
//! used to show that no such bound exists for `W^{1,p}`, `p > 1`.
//!
//! The crate is `no_std` and only needs `alloc`.

// Negated comparisons reject NaN; quadrature nodes are kept at published precision;
// matrix loops read better indexed.
#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::excessive_precision,
    clippy::needless_range_loop
)]
#![no_std]

extern crate alloc;

pub mod annihilator;
mod error;
pub mod function;
pub mod hobby_rice;
mod linalg;
pub mod mask;
pub mod mollifier;
pub mod phase;
mod poly;
pub mod quadrature;
mod rng;
pub mod sobolev;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub use annihilator::{
    solve_annihilator, AnnihilatorOptions, AnnihilatorResult, DeltaCertificate, NodeSelection,
    PhiConstruction, Pipeline,
};
pub use function::PiecewiseComplexFunction;
pub use hobby_rice::{solve_hobby_rice, HobbyRiceOptions, SignPattern, SphereCoordinates};
pub use mask::IntervalMask;
pub use mollifier::Mollifier;
pub use phase::{SmoothPhase, StepPhase};
pub use quadrature::QuadratureConfig;
pub use sobolev::{NormReport, ScalingReport};
