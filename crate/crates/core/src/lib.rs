//! Dirichlet spectra of spherical triangles and digons.

pub mod asymptotics;
pub mod continuation;
pub mod eigensolve;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod richardson;
pub mod shape_derivative;
pub mod sparse;

pub use error::{Error, Result};
