//! Nonlinear optimization with trained neural networks embedded as constraints.
//!
//! The crate provides:
//!
//! * [`linalg`]: dense matrices and a Bunch-Kaufman LDLᵀ factorization that reports inertia.
//! * [`nn`]: sequential dense networks with value, Jacobian and Lagrangian-Hessian oracles.
//! * [`nlp`]: equality-constrained problems with lower bounds, assembled from constraint blocks.
//! * [`ipm`]: a primal-dual interior-point solver with inertia correction.
//! * [`formulations`]: full-space and reduced-space embeddings of a network into a problem.
//! * [`problems`]: the adversarial-perturbation and surrogate-constrained dispatch problems.
//!
//! The crate is `no_std` (with `alloc`) when built without the default `std` feature. The
//! `std` feature only adds a wall clock ([`clock::StdClock`]); all numerics are identical.

#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod clock;
mod error;
pub mod formulations;
pub mod ipm;
pub mod linalg;
pub(crate) mod math;
pub mod nlp;
pub mod nn;
pub mod problems;

pub use error::{Error, Result};
pub use formulations::{embed_full_space, embed_reduced_space, formulation_stats};
pub use formulations::{EmbedHandle, Formulation, FormulationStats};
pub use ipm::{solve_with_clock, IpmOptions, IpmResult, Status};
pub use linalg::{LdltFactorization, Mat};
pub use nlp::NlpProblem;
pub use nn::{Activation, Layer, NeuralNet};

#[cfg(feature = "std")]
pub use ipm::solve;
