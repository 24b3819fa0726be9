//! Upper-envelope expectations over finite outcome spaces, and the
//! machinery built on top of them: capacity pairs with Choquet integrals,
//! nested (order-sensitive) independence, moment inequalities with
//! adversarial fuzzing, convergence criteria for random series, and
//! strong-law trajectory probes.
//!
//! The central object is a finite family of probability measures on a common
//! outcome space. Its upper expectation `E_up[X] = max_P E_P[X]` is
//! sub-additive and positively homogeneous but not linear; everything
//! downstream tracks the places where that loss of linearity matters (lower
//! capacities stop being sub-additive, independence becomes order-sensitive,
//! strong laws need upper and lower means to agree).

pub mod capacity;
pub mod error;
pub mod expectation;
pub mod independence;
pub mod inequalities;
pub mod series;
pub mod slln;

pub use error::{Result, SubexpError};
pub use expectation::{DiscreteMeasure, MeasureFamily, Outcome, RandomVariable};
