//! Numerical symplectic indices: the ρ-invariant, the mean and
//! Conley–Zehnder indices of symplectic paths, and the Maslov index of
//! loops of coisotropic subspaces.

pub mod cli;
pub mod error;
pub mod flows;
pub mod indices;
pub mod linalg;
pub mod maslov;
pub mod pathio;
pub mod random;
pub mod rho;
pub mod sympcore;
pub mod verify;

pub use error::{Error, Result};
