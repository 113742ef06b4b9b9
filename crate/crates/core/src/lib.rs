//! Convex matrix-valued functions `F: ℝᵈ → 𝕊ℓ` (convex with respect to the
//! Loewner order) and their subdifferentials.
//!
//! * [`symmat`]: symmetric matrices, eigendecomposition, Loewner-order tests.
//! * [`expr`]: an expression language whose constructors all preserve matrix
//!   convexity, with evaluation, scalarization and exact one-sided derivatives.
//! * [`subgrad`]: subgradients by calculus rules, exact univariate
//!   subdifferentials, smooth gradients and Clarke-generator sampling.
//! * [`oracle`]: verification and falsification of subgradient candidates and
//!   of convexity claims.
//! * [`repro`]: named worked examples with executable facts.
//! * [`spec_file`] and [`cli`]: the JSON function-spec format and the
//!   command-line front end.

pub mod cli;
pub mod error;
pub mod expr;
pub mod oracle;
pub mod repro;
pub mod spec_file;
pub mod subgrad;
pub mod symmat;
pub mod testing;

pub use error::{Error, Result};
pub use expr::{ConvexMatrixExpr, Interval1D, ScalarAtom};
pub use oracle::{Oracle, Outcome, Verdict, Witness};
pub use subgrad::{MatTuple, Provenance, Rule, SubgradientCert};
pub use symmat::{Mat, PsdVerdict, SymMat};
