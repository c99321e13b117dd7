//! Obstacle problems for the regularized horizontal p-Laplacian on the first
//! Heisenberg group.
//!
//! The crate discretizes `F_ε(u) = ∫ (ε + |∇_H u|²)^{p/2}` on a box, minimizes it
//! below an obstacle (and through a smooth penalization), and checks the
//! two-sided dual estimate `0 ≤ A(u) ≤ (A ψ)⁺` together with the penalization
//! sandwich, ε-convergence rates and a battery of pointwise inequalities.

// Negated comparisons are used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod grid;
pub mod heisenberg;
pub mod operator;
pub mod report;
pub mod run;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
pub use grid::{Grid, HorizontalField, Mask, ScalarField};
pub use heisenberg::{AnalyticFunction, Point};
pub use operator::EnergyParams;
pub use solver::{ObstacleProblem, SolveOptions, SolverResult};
