//! Discrete rational minimax (Chebyshev) approximation in the complex plane.
//!
//! Given samples `(x_j, f_j)` and degree bounds `(n1, n2)`, the crate searches
//! for `p/q` with `deg p <= n1`, `deg q <= n2` minimizing `max_j |f_j - p(x_j)/q(x_j)|`.
//! The search runs on the Lagrange dual of a linearized problem: the dual
//! variable is a weight vector on the probability simplex, the dual function
//! `d2(w)` is the smallest eigenvalue of a small Hermitian matrix, and the
//! Lawson multiplicative update `w_j <- w_j r_j^beta / sum_i w_i r_i^beta`
//! ascends it.
//!
//! Module map:
//! - [`problem`]: sample data, CSV ingestion, builtin instances.
//! - [`basis`]: monomial and weighted Vandermonde-with-Arnoldi bases.
//! - [`dual_core`]: evaluation of `d2(w)` and its certificate quantities.
//! - [`lawson`]: the outer iteration, stopping rule and trace.
//! - [`diagnostics`]: convergence-theory quantities (lower bound, exponent
//!   analysis, complementary slackness, reference points, defect).
//! - [`oracle`]: brute-force references used by tests.
//! - [`cli`]: the `ratmin` command-line front-end.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod cli;
pub mod diagnostics;
pub mod dual_core;
mod error;
pub mod lawson;
pub mod linalg;
pub mod oracle;
pub mod problem;

pub use error::{Error, Result};

/// Complex double-precision scalar used throughout.
pub type C64 = num_complex::Complex<f64>;
/// Dense complex matrix.
pub type CMat = nalgebra::DMatrix<C64>;
/// Dense complex column vector.
pub type CVec = nalgebra::DVector<C64>;

pub use basis::{BasisKind, BasisMatrix};
pub use dual_core::{DualSolution, WeightVector};
pub use lawson::{run_d_lawson, RunResult, RunStatus, SolverConfig};
pub use problem::{DegreePair, SampleSet};
