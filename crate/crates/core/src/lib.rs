//! Small complex-symmetric non-Hermitian Hamiltonians: closed-form and numeric
//! eigenvalues, biorthogonal eigenvectors, exceptional points, S-matrix line
//! shapes, and deterministic parameter sweeps.

pub mod closedform;
pub mod eploc;
pub mod error;
pub mod ham;
pub mod scenario;
pub mod smat;
pub mod spectral;
pub mod sweep;

pub use error::{Error, Result};
pub use ham::{ChannelVector, ComplexValue, Coupling, Level, LevelSet, ModelMatrix};
