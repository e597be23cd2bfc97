//! Pseudospectral solver for the stationary equation
//!
//! ```text
//! ½ ln(−d²/dx²) u − b u′ − a u = f + ε ∫ 𝒦(x − y) g(u(y)) dy,   x ∈ ℝ, b ≠ 0,
//! ```
//!
//! discretized on a periodic box. The linear part is inverted exactly by
//! Fourier division; the nonlinear part is handled by a Picard iteration whose
//! contraction rate and admissible coupling are computed from the certified
//! lower bound of the operator symbol.

// Parameter checks use `!(x > 0.0)` on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod model;
pub mod operator;
pub mod solver;

pub use error::{Error, Result};
pub use grid::{convolve_direct, convolve_fft, Domain, GridFunction, Norms, SpectralGrid};
pub use model::{KernelSpec, ModelSpec, NonlinearitySpec, SourceSpec};
pub use operator::{
    compute_lower_bound, epsilon_max, sigma_rate, symbol_lambda, BracketSearch,
    ContractionConstants, LowerBound, OperatorParams, SymbolValue, INF_SYMBOL,
};
pub use solver::{
    apply_operator, apply_t_g, residual_main, solve_fixed_point, solve_linear, AuxiliaryMap,
    FixedPointOptions, FixedPointResult, InvariantCheck, LinearOperator, LinearSolveResult,
    SolveReport, Tolerances, Warning, MAIN_RESIDUAL_TOL, RATIO_TOL,
};
