//! Gaussian covariance-matrix toolkit for optimal open-loop control of
//! continuous-variable states coupled to a lossy thermal channel.
//!
//! Conventions: quadratures are ordered `(x₁, p₁, …, xₙ, pₙ)`, the symplectic
//! form is `Ω = ⊕ [[0, 1], [−1, 0]]`, and the vacuum has covariance `I`, so
//! symplectic eigenvalues of physical states satisfy `ν ≥ 1`. Dynamics use
//! time rescaled by the loss rate.

// `!(x > 0.0)` style guards deliberately reject NaN along with the bad range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod exec;
pub mod gaussian;
pub mod invariants;
pub mod linalg;
pub mod sampling;
pub mod trace_opt;
pub mod williamson;

pub use dynamics::{
    evolve, optimal_control, run_scenario, synthesize_schedule, t_cool, t_free_single_mode, t_heat,
    ControlAction, ControlPolicy, Direction, Scenario, Trajectory,
};
pub use entanglement::{partial_transpose, sigma_tilde_indicator, sigma_tilde_rate, Bipartition};
pub use error::{Error, Result};
pub use exec::Execution;
pub use gaussian::{
    apply_symplectic, thermal, two_mode_squeezed, vacuum, BathParams, CovarianceMatrix, SymplecticMatrix,
};
pub use invariants::{invariant_rate, invariant_set, purity, InvariantSet, SymplecticSpectrum};
pub use trace_opt::{SqueezeBudget, DiagonalTarget};
pub use williamson::{euler_svd, williamson, EulerDecomposition, WilliamsonDecomposition};
