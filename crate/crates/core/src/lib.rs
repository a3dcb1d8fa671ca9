//! Proximal calculus for a catalog of convex functions on ℝⁿ: prox maps,
//! Moreau envelopes, Fenchel conjugates, recovery of a function from its
//! prox oracle, and sampled checks of the comparison results that tie the
//! two together.

pub mod catalog;
pub mod cli;
pub mod conjugation;
pub mod determination;
pub mod error;
pub mod point;
pub mod prox_engine;
pub mod rng;
pub mod verify;

pub use catalog::ConvexFunction;
pub use error::{Error, Result};
pub use point::{ExtReal, Point};
pub use prox_engine::{prox, ProxResult, SolverBudget};
