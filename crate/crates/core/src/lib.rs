//! Exact policy iteration and inverse-method constraint synthesis for
//! parametric Markov decision processes and parametric max-plus matrices.
//!
//! All arithmetic is over arbitrary-precision rationals. Parameters enter
//! only the weights, linearly, so every value a policy induces is an affine
//! [`LinearTerm`] and every robustness condition is a [`Constraint`], a
//! conjunction of linear inequalities.

pub mod cli;
pub mod io;
pub mod linsolve;
pub mod maxplus;
pub mod mdp;
pub mod param;
pub mod weight;

pub use param::{Constraint, Inequality, Instantiation, LinearTerm, ParamId, ParamSet, Rational, Relation};
