use rayon::prelude::*;

use crate::spectral::{gradient, solve_poisson, SpectralScalar, SpectralVector};

use super::kernel::{apply_velocity_maps, AffineGauss, KernelKind};
use super::remap::shift_line;
use super::{compute_moments, regularized_velocity, transport_step, DistributionFunction, KineticError, KineticMoments};

/// How the velocity-space substeps of one Strang step are realized.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SplitScheme {
    /// Half alignment, half force and half drag composed into one exact
    /// velocity map on each side of the transport step.
    #[default]
    Fused,
    /// Each substep applied on its own (limited cubic remap for the force).
    Sequential,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepParams {
    /// Floor δ in u = ρu / (ρ + δ).
    pub delta_floor: f64,
    pub scheme: SplitScheme,
}

impl Default for StepParams {
    fn default() -> Self {
        Self { delta_floor: 1e-8, scheme: SplitScheme::Fused }
    }
}

/// Per-step bookkeeping returned by [`vpns_step`].
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepReport {
    pub mass: f64,
    /// M(0) - M(t).
    pub mass_drift: f64,
    /// Minimum of f before clamping.
    pub min_f: f64,
    pub max_f: f64,
    /// Outflow through the velocity-box faces during this step.
    pub outflow: f64,
    /// Mass added by clamping during this step.
    pub clamped: f64,
    /// Accumulated outflow plus clamp mass since the ledger was opened.
    pub budget: f64,
}

/// Electric acceleration -∇U with -ΔU = ρ - mean ρ.
pub fn coulomb_field(rho: &SpectralScalar) -> Result<SpectralVector, KineticError> {
    Ok(gradient(&solve_poisson(rho)?).scale(-1.0))
}

fn check_dt(dt: f64) -> Result<(), KineticError> {
    if dt >= 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(KineticError::Contract(format!("time step must be non-negative and finite, got {dt}")))
    }
}

fn check_displacement(f: &DistributionFunction, force: &SpectralVector, dt: f64) -> Result<(), KineticError> {
    let disp = dt * force.max_abs();
    let limit = 0.25 * f.vbox().v_max();
    if disp < limit || dt == 0.0 {
        Ok(())
    } else {
        Err(KineticError::StepSize(format!(
            "velocity displacement {disp:.3e} exceeds a quarter of the box half-width ({limit:.3e}); reduce dt"
        )))
    }
}

fn column_maps(n: usize, d: usize, per_axis: impl Fn(usize, usize) -> AffineGauss) -> Vec<[AffineGauss; 2]> {
    (0..n)
        .map(|x| {
            let mut m = [AffineGauss::IDENTITY; 2];
            for (a, slot) in m.iter_mut().enumerate().take(d) {
                *slot = per_axis(x, a);
            }
            m
        })
        .collect()
}

/// Exact solution of ∂f = ε⁻¹∇_ξ·(σ∇_ξf - (u_loc - ξ)f) over `dt`; returns outflow.
pub fn stiff_ou_step(f: &mut DistributionFunction, u_loc: &SpectralVector, dt: f64) -> Result<f64, KineticError> {
    check_dt(dt)?;
    let (eps, sigma) = (f.epsilon(), f.sigma());
    let maps = column_maps(f.grid().len(), f.grid().dim(), |x, a| AffineGauss::ou(dt / eps, u_loc.at(x)[a], sigma));
    Ok(apply_velocity_maps(f, &maps, KernelKind::for_sigma(sigma)))
}

/// Exact drag relaxation ∂f = ∇_ξ·((ξ - v)f) over `dt`; returns outflow.
pub fn drag_step(f: &mut DistributionFunction, v: &SpectralVector, dt: f64) -> Result<f64, KineticError> {
    check_dt(dt)?;
    let maps = column_maps(f.grid().len(), f.grid().dim(), |x, a| AffineGauss::ou(dt, v.at(x)[a], 0.0));
    Ok(apply_velocity_maps(f, &maps, KernelKind::for_sigma(f.sigma())))
}

/// f(x, ξ) ← f(x, ξ - F(x) dt) by limited cubic remap per velocity line;
/// returns outflow.
pub fn force_step(f: &mut DistributionFunction, force: &SpectralVector, dt: f64) -> Result<f64, KineticError> {
    check_dt(dt)?;
    check_displacement(f, force, dt)?;
    let vb = *f.vbox();
    let (n, d, nv) = (vb.n_v(), vb.dim(), vb.len());
    let (lo, h) = (-vb.v_max(), vb.spacing());
    let w = vb.cell_volume() / h;
    let dx = f.grid().cell_volume();
    let shifts: Vec<[f64; 2]> = (0..f.grid().len()).map(|x| force.at(x).map(|c| c * dt)).collect();
    let lost: f64 = f
        .values_mut()
        .par_chunks_mut(nv)
        .zip(shifts.par_iter())
        .map_init(
            || (Vec::new(), vec![0.0; n]),
            |(scratch, line), (col, s)| {
                let mut lost = 0.0;
                if d == 1 {
                    return shift_line(col, lo, h, s[0], scratch) * w;
                }
                if s[1] != 0.0 {
                    for row in col.chunks_mut(n) {
                        lost += shift_line(row, lo, h, s[1], scratch);
                    }
                }
                if s[0] != 0.0 {
                    for j in 0..n {
                        for i in 0..n {
                            line[i] = col[i * n + j];
                        }
                        lost += shift_line(line, lo, h, s[0], scratch);
                        for i in 0..n {
                            col[i * n + j] = line[i];
                        }
                    }
                }
                lost * w
            },
        )
        .collect::<Vec<f64>>()
        .iter()
        .sum::<f64>()
        * dx;
    f.ledger.outflow += lost;
    Ok(lost)
}

/// One Strang step of the kinetic equation with the fluid velocity held
/// fixed: half alignment, half force, half drag, full transport, then the
/// mirror image with the field and local velocity recomputed.
pub fn vpns_step(
    f: &mut DistributionFunction,
    v_fluid: &SpectralVector,
    dt: f64,
    params: &StepParams,
) -> Result<(KineticMoments, StepReport), KineticError> {
    check_dt(dt)?;
    let ledger0 = f.ledger;
    let tau = 0.5 * dt;
    let (eps, sigma) = (f.epsilon(), f.sigma());
    let delta = params.delta_floor;
    let nx = f.grid().len();
    let d = f.grid().dim();

    let m0 = compute_moments(f);
    let u0 = regularized_velocity(&m0, delta)?;
    let e0 = coulomb_field(&m0.rho)?;
    check_displacement(f, &v_fluid.add(&e0), tau)?;
    match params.scheme {
        SplitScheme::Fused => {
            let maps = column_maps(nx, d, |x, a| {
                AffineGauss::ou(tau / eps, u0.at(x)[a], sigma)
                    .then(AffineGauss::shift(tau * e0.at(x)[a]))
                    .then(AffineGauss::ou(tau, v_fluid.at(x)[a], 0.0))
            });
            apply_velocity_maps(f, &maps, KernelKind::for_sigma(sigma));
        }
        SplitScheme::Sequential => {
            stiff_ou_step(f, &u0, tau)?;
            force_step(f, &e0, tau)?;
            drag_step(f, v_fluid, tau)?;
        }
    }

    transport_step(f, dt);

    let m1 = compute_moments(f);
    let e1 = coulomb_field(&m1.rho)?;
    check_displacement(f, &v_fluid.add(&e1), tau)?;
    match params.scheme {
        SplitScheme::Fused => {
            let pre = |x: usize, a: usize| AffineGauss::ou(tau, v_fluid.at(x)[a], 0.0).then(AffineGauss::shift(tau * e1.at(x)[a]));
            // local velocity after drag and force, from the transported moments
            let rho = m1.rho.values();
            let maps = column_maps(nx, d, |x, a| {
                let p = pre(x, a);
                let j = p.scale * m1.momentum.component(a).values()[x] + p.offset * rho[x];
                let u = j / (rho[x] + delta);
                p.then(AffineGauss::ou(tau / eps, u, sigma))
            });
            apply_velocity_maps(f, &maps, KernelKind::for_sigma(sigma));
        }
        SplitScheme::Sequential => {
            drag_step(f, v_fluid, tau)?;
            force_step(f, &e1, tau)?;
            let u2 = regularized_velocity(&compute_moments(f), delta)?;
            stiff_ou_step(f, &u2, tau)?;
        }
    }

    let max_f = f.max();
    let min_f = f.clamp_negative();
    let moments = compute_moments(f);
    let mass = moments.rho.integral();
    let report = StepReport {
        mass,
        mass_drift: f.ledger.initial_mass - mass,
        min_f,
        max_f,
        outflow: f.ledger.outflow - ledger0.outflow,
        clamped: f.ledger.clamped - ledger0.clamped,
        budget: f.ledger.budget(),
    };
    Ok((moments, report))
}
