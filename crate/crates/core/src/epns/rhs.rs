use crate::spectral::{
    advect, advect_vector, convolve_kernel, divergence, gradient, laplacian_vector, leray_project, KernelKind,
    SpectralScalar, SpectralVector,
};

use super::{EpnsError, MacroState, Variant};

/// Time derivative of (density, u, v).
#[derive(Clone, Debug)]
pub struct MacroTendency {
    pub density: SpectralScalar,
    pub u: SpectralVector,
    pub v: SpectralVector,
}

/// -∇(K ⋆ (ρ - mean ρ)).
pub(crate) fn electric_field(rho: &SpectralScalar) -> Result<SpectralVector, EpnsError> {
    let m = rho.mean();
    let phi = convolve_kernel(&rho.map(|r| r - m), KernelKind::Exact)?;
    Ok(gradient(&phi).scale(-1.0))
}

/// Dealiased right-hand side of the limit system.
pub fn epns_rhs(state: &MacroState) -> Result<MacroTendency, EpnsError> {
    rhs(state, true)
}

/// Right-hand side with or without the viscous term Δv (the stepper treats
/// it by integrating factor).
pub(crate) fn rhs(state: &MacroState, viscous: bool) -> Result<MacroTendency, EpnsError> {
    let (u, v) = (&state.u, &state.v);
    let rho = state.rho();
    if let Variant::Pressureless = state.variant {
        let min = rho.min();
        if min <= 0.0 {
            return Err(EpnsError::Positivity { min });
        }
    }
    let e = electric_field(&rho)?;
    let slip = u.sub(v);
    let mut du = advect_vector(u, u).scale(-1.0).sub(&slip).add(&e);
    let mut density = match state.variant {
        Variant::Isothermal { sigma } => {
            du = du.sub(&gradient(&state.density).scale(sigma));
            advect(u, &state.density).add(&divergence(u)).scale(-1.0)
        }
        Variant::Pressureless => {
            let flux = u.mul_scalar(&rho);
            divergence(&flux).scale(-1.0)
        }
    };
    let mut fv = advect_vector(v, v).scale(-1.0).add(&slip.mul_scalar(&rho));
    if viscous {
        fv = fv.add(&laplacian_vector(v));
    }
    let mut dv = leray_project(&fv)?;
    density.dealias();
    du.dealias();
    dv.dealias();
    Ok(MacroTendency { density, u: du, v: dv })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::TorusGrid;

    #[test]
    fn rest_and_uniform_motion_have_zero_tendency() {
        let g = TorusGrid::new(2, 16).unwrap();
        for sigma in [0.0, 1.0] {
            for w in [[0.0, 0.0], [0.3, -0.7]] {
                let s = MacroState::from_density(
                    &SpectralScalar::constant(&g, 1.0),
                    SpectralVector::constant(&g, w),
                    SpectralVector::constant(&g, w),
                    sigma,
                )
                .unwrap();
                let t = epns_rhs(&s).unwrap();
                assert!(t.density.max_abs() < 1e-14);
                assert!(t.u.max_abs() < 1e-14);
                assert!(t.v.max_abs() < 1e-14);
            }
        }
    }
}
