//! Phase-space solver for the kinetic equation: free transport, the Coulomb
//! force, drag toward the fluid, and the stiff ε⁻¹ alignment/Fokker-Planck
//! relaxation, combined by Strang splitting.

mod distribution;
pub mod kernel;
mod moments;
mod remap;
mod step;
mod transport;
mod velocity;

pub use distribution::{DistributionFunction, MassLedger};
pub use moments::{compute_moments, regularized_velocity, KineticMoments};
pub use step::{
    coulomb_field, drag_step, force_step, stiff_ou_step, vpns_step, SplitScheme, StepParams, StepReport,
};
pub use transport::transport_step;
pub use velocity::VelocityBox;

use crate::spectral::SpectralError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KineticError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("step-size error: {0}")]
    StepSize(String),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}
