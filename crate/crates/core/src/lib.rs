//! Constraint-based routing over a pool of LLM endpoints.
//!
//! Direction keys ("I want a cheaper model.") compile into hard and soft
//! predicates over endpoint attributes; the resulting weighted selection
//! problem is solved exactly. Router replies are normalized into binary
//! masks and classified by postcondition, and no-feedback behavior is
//! explained by a sparse logistic fit over a predicate library.
//!
//! The numeric core is generic: selection weights take any [`Weight`]
//! (floats or exact rationals), fitting takes any [`Real`] float. The
//! aliases below fix the common choices.

// `!(x > 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agentio;
pub mod dirkey;
pub mod postcond;
pub mod prior;
pub mod scalar;
pub mod solver;
pub mod zoo;

pub use scalar::{Real, Weight};

/// Constraint set with `f64` clause weights.
pub type Constraints = dirkey::ConstraintSet<f64>;
pub type Constraints32 = dirkey::ConstraintSet<f32>;
/// Selection instance with `f64` weights.
pub type Instance = solver::MaxSmtInstance<f64>;
pub type Instance32 = solver::MaxSmtInstance<f32>;
pub type Selection = solver::Selection<f64>;
pub type Selection32 = solver::Selection<f32>;
pub type Coverage = postcond::CoveragePrecision<f64>;
pub type Prior = prior::PriorModel<f64>;
pub type Prior32 = prior::PriorModel<f32>;
