//! Factor group-sparse regularization for low-rank matrix completion and
//! robust PCA.

pub mod cli;
pub mod error;
pub mod experiments;
mod linalg;
pub mod lrmc;
pub mod matrix;
pub mod observations;
pub mod prox;
pub mod ratings;
pub mod regularizers;
pub mod results;
pub mod rpca;
pub mod verify;

pub use error::{FgsrError, Result};
pub use lrmc::{RecoveryResult, SolverConfig};
pub use matrix::{DenseMatrix, ThinSvd};
pub use observations::ObservationSet;
pub use regularizers::{BPenalty, FactorPair, FgsrSpec, QExponent};
