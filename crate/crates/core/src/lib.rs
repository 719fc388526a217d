//! Bessel functions on cones of positive semidefinite matrices and the
//! associated hypergroups on the cone, with Monte Carlo tools for random
//! walks on them.

pub mod algebra;
pub mod ball;
pub mod cone;
pub mod error;
pub mod jack;
pub mod random;
pub mod seeding;
pub mod stats;
pub mod walk;
pub mod wishart;

pub use error::{Error, Result};
