//! Periodic grids, Fourier transforms and the spectral operators shared by
//! every solver: Poisson, kernel convolution, derivatives, Leray projection
//! and Sobolev norms.

mod field;
mod grid;
mod ops;
pub mod snapshot;

pub use field::{SpectralScalar, SpectralVector};
pub use grid::TorusGrid;
pub use ops::{
    advect, advect_vector, convolve_kernel, divergence, gradient, h_minus1_norm, laplacian, laplacian_vector,
    leray_project, leray_project_spectra, mollification_correction, sobolev_norm, sobolev_norm_vector, solve_poisson,
    KernelKind,
};
pub use snapshot::{read_sidecar, sidecar_path, Sidecar, Snapshot, SnapshotError, VelocityHeader};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectralError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("contract violation: {0}")]
    Contract(String),
}
