//! Central configurations of the Newtonian N-body problem.
//!
//! The crate computes Wintner–Conley matrices and their shifted form, the
//! Hessian of the amended force function with its vertical spectrum, the
//! rank-one structure of Dziobek configurations, and the planar sign
//! geometry of barycentric coordinates. A multistart Newton solver produces
//! central configurations to feed all of the above.

pub mod cli;
pub mod config;
pub mod dziobek;
pub mod error;
pub mod geometry;
pub mod hessian;
pub mod linalg;
pub mod oracles;
pub mod solver;
pub mod wintner_conley;

pub use config::{CentralConfiguration, ConfigurationMatrix, MassVector};
pub use error::{Error, Result};
