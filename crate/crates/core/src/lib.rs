//! Disconjugacy analysis of second order linear differential equations
//! `x'' + p(t) x' + q(t) x = 0`.
//!
//! The crate decides disconjugacy on an interval by a high-accuracy shooting
//! oracle, computes the conjugate-point maps, constructs Cauchy and Green
//! functions, evaluates a family of sufficient disconjugacy criteria with
//! named certificates, builds the positive-factor decomposition of the
//! operator, and tests periodic equations for nontrivial periodic solutions
//! through the period map.

pub mod catalog;
pub mod conjugacy;
pub mod criteria;
pub mod equation;
pub mod expr;
pub mod factorization;
pub mod green;
pub mod interval;
pub mod ode;
pub mod periodic;
pub mod quad;

pub use equation::Equation;
pub use expr::{CoeffExpr, Params};
pub use interval::Interval;
pub use ode::{Tolerances, Trajectory};

/// Schema version stamped on every JSON report.
pub const SCHEMA_VERSION: &str = "1";
