use crate::fluid::gradient_sq;
use crate::spectral::{
    convolve_kernel, divergence, gradient, h_minus1_norm, sobolev_norm, sobolev_norm_vector, KernelKind,
    SpectralScalar, SpectralVector,
};

use super::{EpnsError, MacroState, Variant};

/// The functionals of the limit system's energy identity.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EnergyReport {
    /// ½∫ρ|u|²
    pub kinetic: f64,
    /// ½∫|∇K ⋆ (ρ - 1)|²
    pub coulomb: f64,
    /// ½∫|v|²
    pub fluid: f64,
    /// σ∫ρ log ρ
    pub entropy: f64,
    /// ∫|∇v|²
    pub dissipation_v: f64,
    /// ∫ρ|u - v|²
    pub dissipation_drag: f64,
}

impl EnergyReport {
    pub fn total(&self) -> f64 {
        self.kinetic + self.coulomb + self.fluid + self.entropy
    }

    pub fn dissipation(&self) -> f64 {
        self.dissipation_v + self.dissipation_drag
    }
}

pub fn energy_report(state: &MacroState) -> Result<EnergyReport, EpnsError> {
    let rho = state.rho();
    let m = rho.mean();
    let hm1 = h_minus1_norm(&rho.map(|r| r - m))?;
    let entropy = match state.variant {
        Variant::Isothermal { sigma } => sigma * rho.mul(&state.density).integral(),
        Variant::Pressureless => 0.0,
    };
    Ok(EnergyReport {
        kinetic: 0.5 * state.u.norm_sq_field().mul(&rho).integral(),
        coulomb: 0.5 * hm1 * hm1,
        fluid: 0.5 * state.v.inner(&state.v),
        entropy,
        dissipation_v: gradient_sq(&state.v),
        dissipation_drag: state.u.sub(&state.v).norm_sq_field().mul(&rho).integral(),
    })
}

/// Both sides of ∫∇(∇K⋆h) : ∇u = -∫h ∇·u, computed independently.
pub fn coulomb_ibp_check(h: &SpectralScalar, u: &SpectralVector) -> Result<(f64, f64), EpnsError> {
    let phi = convolve_kernel(h, KernelKind::Exact)?;
    let grad_phi = gradient(&phi);
    let d = u.dim();
    let mut lhs = 0.0;
    for a in 0..d {
        let hess_row = gradient(grad_phi.component(a));
        let grad_u = gradient(u.component(a));
        // ∂_b∂_a φ ∂_b u_a
        lhs += hess_row.inner(&grad_u);
    }
    let rhs = -h.inner(&divergence(u));
    Ok((lhs, rhs))
}

/// ‖g‖²_{H^s} + ‖u‖²_{H^s} + ‖v‖²_{H^s} (isothermal) or
/// ‖h‖²_{H^{s-1}} + ‖u‖²_{H^s} + ‖v‖²_{H^s} (pressureless).
pub fn norm_tracker(state: &MacroState, s: f64) -> f64 {
    let ds = match state.variant {
        Variant::Isothermal { .. } => s,
        Variant::Pressureless => s - 1.0,
    };
    sobolev_norm(&state.density, ds).powi(2) + sobolev_norm_vector(&state.u, s).powi(2) + sobolev_norm_vector(&state.v, s).powi(2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::TorusGrid;
    use std::f64::consts::PI;

    #[test]
    fn equilibrium_energies_vanish() {
        let g = TorusGrid::new(2, 16).unwrap();
        for sigma in [0.0, 1.0] {
            let s = MacroState::from_density(
                &SpectralScalar::constant(&g, 1.0),
                SpectralVector::zeros(&g),
                SpectralVector::zeros(&g),
                sigma,
            )
            .unwrap();
            assert_eq!(energy_report(&s).unwrap(), EnergyReport::default());
            assert_eq!(norm_tracker(&s, 3.0), 0.0);
        }
    }

    #[test]
    fn taylor_green_fluid_energy() {
        let g = TorusGrid::new(2, 32).unwrap();
        let v = SpectralVector::from_fn(&g, |x, y| [x.sin() * y.cos(), -x.cos() * y.sin()]);
        let s = MacroState::from_density(&SpectralScalar::constant(&g, 1.0), SpectralVector::zeros(&g), v, 0.0).unwrap();
        let r = energy_report(&s).unwrap();
        assert!((r.fluid - PI * PI).abs() < 1e-12);
        // |∇v|² integrates to 2·(2π)²/2 = 4π²
        assert!((r.dissipation_v - 4.0 * PI * PI).abs() < 1e-10);
    }

    #[test]
    fn coulomb_energy_is_half_squared_dual_norm() {
        let g = TorusGrid::new(2, 32).unwrap();
        let rho = SpectralScalar::from_fn(&g, |x, y| 1.0 + 0.2 * (x + y).cos() - 0.1 * (2.0 * y).sin());
        let s = MacroState::from_density(&rho, SpectralVector::zeros(&g), SpectralVector::zeros(&g), 1.0).unwrap();
        let r = energy_report(&s).unwrap();
        let hm1 = h_minus1_norm(&rho.map(|v| v - 1.0)).unwrap();
        assert!((r.coulomb - 0.5 * hm1 * hm1).abs() < 1e-10);
    }

    #[test]
    fn ibp_trivial_cases() {
        let g = TorusGrid::new(2, 16).unwrap();
        let u = SpectralVector::from_fn(&g, |x, y| [y.sin(), x.cos()]);
        let (l, r) = coulomb_ibp_check(&SpectralScalar::zeros(&g), &u).unwrap();
        assert_eq!((l, r), (0.0, 0.0));
        let h = SpectralScalar::from_fn(&g, |x, y| (x - y).cos());
        let (l, r) = coulomb_ibp_check(&h, &u).unwrap();
        assert!(l.abs() < 1e-9 && r.abs() < 1e-12);
    }

    #[test]
    fn tracker_delegates_to_sobolev_norms() {
        let g = TorusGrid::new(2, 16).unwrap();
        let s = MacroState::from_density(
            &SpectralScalar::from_fn(&g, |x, _| x.cos().exp()),
            SpectralVector::zeros(&g),
            SpectralVector::zeros(&g),
            1.0,
        )
        .unwrap();
        // density variable is g = cos x1; ‖cos‖²_{H¹} = 4π²
        assert!((norm_tracker(&s, 1.0) - 4.0 * PI * PI).abs() < 1e-10);
    }
}
