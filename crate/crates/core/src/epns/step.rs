use crate::spectral::{SpectralScalar, SpectralVector};

use super::rhs::rhs;
use super::{EpnsError, MacroState, MacroTendency, Variant};

/// Bookkeeping of one limit step.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EpnsStepInfo {
    /// Relative mass change of the step before the mean was reset.
    pub mass_drift: f64,
}

fn heat(v: &SpectralVector, tau: f64) -> SpectralVector {
    if tau == 0.0 {
        return v.clone();
    }
    let grid = v.grid().clone();
    v.map_components(|c| {
        let s: Vec<_> = c
            .spectrum()
            .iter()
            .enumerate()
            .map(|(i, z)| z * (-grid.k_squared(i) * tau).exp())
            .collect();
        SpectralScalar::from_spectrum(&grid, &s)
    })
}

fn axpy(s: &MacroState, a: f64, t: &MacroTendency) -> MacroState {
    MacroState {
        variant: s.variant,
        density: s.density.add(&t.density.scale(a)),
        u: s.u.add(&t.u.scale(a)),
        v: s.v.add(&t.v.scale(a)),
    }
}

fn heat_state(s: &MacroState, tau: f64) -> MacroState {
    MacroState { variant: s.variant, density: s.density.clone(), u: s.u.clone(), v: heat(&s.v, tau) }
}

fn heat_tendency(t: &MacroTendency, tau: f64) -> MacroTendency {
    MacroTendency { density: t.density.clone(), u: t.u.clone(), v: heat(&t.v, tau) }
}

/// Largest dt passing both the advective and the acoustic guard.
pub fn stable_dt(s: &MacroState) -> f64 {
    let grid = s.u.grid();
    let speed = s.u.max_abs().max(s.v.max_abs());
    let n = grid.n() as f64;
    let advective = if speed > 0.0 { std::f64::consts::PI / (speed * n) } else { f64::INFINITY };
    match s.variant {
        Variant::Isothermal { sigma } if sigma > 0.0 => advective.min(1.0 / (sigma.sqrt() * n)),
        _ => advective,
    }
}

fn check_guards(s: &MacroState, dt: f64) -> Result<(), EpnsError> {
    let grid = s.u.grid();
    let speed = s.u.max_abs().max(s.v.max_abs());
    let n = grid.n() as f64;
    if dt * speed * n / (2.0 * std::f64::consts::PI) > 0.5 {
        return Err(EpnsError::StepSize(format!("dt = {dt:e} violates the advective CFL bound (max speed {speed:e})")));
    }
    if let Variant::Isothermal { sigma } = s.variant {
        if dt * sigma.sqrt() * n > 1.0 {
            return Err(EpnsError::StepSize(format!("dt = {dt:e} violates the acoustic bound dt·√σ·n ≤ 1")));
        }
    }
    Ok(())
}

/// One Lawson (integrating-factor) RK4 step with the viscous term exact,
/// followed by resetting mean ρ to 1.
pub fn epns_step(state: &MacroState, dt: f64) -> Result<(MacroState, EpnsStepInfo), EpnsError> {
    check_guards(state, dt)?;
    let h = dt;
    let mass0 = state.rho().mean();
    let k1 = rhs(state, false)?;
    let k2 = rhs(&heat_state(&axpy(state, 0.5 * h, &k1), 0.5 * h), false)?;
    let k3 = rhs(&axpy(&heat_state(state, 0.5 * h), 0.5 * h, &k2), false)?;
    let k4 = rhs(&axpy(&heat_state(state, h), h, &heat_tendency(&k3, 0.5 * h)), false)?;
    let mut out = heat_state(state, h);
    out = axpy(&out, h / 6.0, &heat_tendency(&k1, h));
    out = axpy(&out, h / 3.0, &heat_tendency(&k2, 0.5 * h));
    out = axpy(&out, h / 3.0, &heat_tendency(&k3, 0.5 * h));
    out = axpy(&out, h / 6.0, &k4);
    let mass1 = out.rho().mean();
    match out.variant {
        Variant::Isothermal { .. } => {
            let shift = mass1.ln();
            out.density = out.density.map(|g| g - shift);
        }
        Variant::Pressureless => {
            let m = out.density.mean();
            out.density = out.density.map(|x| x - m);
            let min = 1.0 + out.density.min();
            if min <= 0.0 {
                return Err(EpnsError::Positivity { min });
            }
        }
    }
    Ok((out, EpnsStepInfo { mass_drift: (mass1 - mass0) / mass0 }))
}
