//! The Euler-Poisson-Navier-Stokes limit in symmetrized variables:
//! g = log ρ for the isothermal system (σ > 0) and h = ρ - 1 for the
//! pressureless one, with the total-energy identity as a monitor.

mod energy;
mod rhs;
mod step;

pub use energy::{coulomb_ibp_check, energy_report, norm_tracker, EnergyReport};
pub use rhs::{epns_rhs, MacroTendency};
pub use step::{epns_step, stable_dt, EpnsStepInfo};

use crate::spectral::{SpectralError, SpectralScalar, SpectralVector};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EpnsError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("step-size error: {0}")]
    StepSize(String),
    #[error("density positivity lost: min(1 + h) = {min:e}")]
    Positivity { min: f64 },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Variant {
    Isothermal { sigma: f64 },
    Pressureless,
}

/// Limit-system unknowns; `density` is g = log ρ or h = ρ - 1 by variant.
#[derive(Clone, Debug)]
pub struct MacroState {
    pub variant: Variant,
    pub density: SpectralScalar,
    pub u: SpectralVector,
    pub v: SpectralVector,
}

impl MacroState {
    /// Builds the state from a density ρ; σ > 0 selects the isothermal form.
    pub fn from_density(rho: &SpectralScalar, u: SpectralVector, v: SpectralVector, sigma: f64) -> Result<Self, EpnsError> {
        if rho.grid().dim() != 2 {
            return Err(EpnsError::Config("the limit solver is two-dimensional".into()));
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(EpnsError::Config(format!("sigma must be non-negative, got {sigma}")));
        }
        if rho.min() <= 0.0 {
            return Err(EpnsError::Positivity { min: rho.min() });
        }
        let (variant, density) = if sigma > 0.0 {
            (Variant::Isothermal { sigma }, rho.map(f64::ln))
        } else {
            (Variant::Pressureless, rho.map(|r| r - 1.0))
        };
        Ok(Self { variant, density, u, v })
    }

    pub fn sigma(&self) -> f64 {
        match self.variant {
            Variant::Isothermal { sigma } => sigma,
            Variant::Pressureless => 0.0,
        }
    }

    pub fn rho(&self) -> SpectralScalar {
        match self.variant {
            Variant::Isothermal { .. } => self.density.map(f64::exp),
            Variant::Pressureless => self.density.map(|h| 1.0 + h),
        }
    }

    pub fn mass(&self) -> f64 {
        self.rho().integral()
    }
}
