//! Exceptional points of two-level non-Hermitian Hamiltonians: eigenvalue
//! trajectories, biorthogonal eigenvector diagnostics, EP location and
//! one-channel resonance line shapes.

pub mod error;
pub mod model;
pub mod spectral;
pub mod ep;
pub mod scattering;
pub mod sweep;
pub mod oracle;
pub mod config;
#[cfg(feature = "cli")]
pub mod cli;

pub use error::{EpError, ExportError, ModelError};
pub use model::{build_matrix, ComplexScalar, Matrix2, ModelKind, OpenParams, ParamTrajectory, Params, PtParams, PtVariant};
pub use spectral::{eigensystem, EigenSystem};
pub use sweep::{fig1_presets, run_sweep, SweepTable};
