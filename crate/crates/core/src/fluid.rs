//! Pseudo-spectral incompressible Navier-Stokes on the 2-torus with a drag
//! source: viscosity by integrating factor, advection and source by
//! Williamson low-storage RK3, Leray projection of every tendency.

use num_complex::Complex64;

use crate::kinetic::KineticMoments;
use crate::spectral::{leray_project, leray_project_spectra, SpectralError, SpectralScalar, SpectralVector, TorusGrid};

/// Williamson (1980) 2N-storage RK3.
const RK3_A: [f64; 3] = [0.0, -5.0 / 9.0, -153.0 / 128.0];
const RK3_B: [f64; 3] = [1.0 / 3.0, 15.0 / 16.0, 8.0 / 15.0];
const RK3_C: [f64; 3] = [0.0, 1.0 / 3.0, 3.0 / 4.0];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FluidError {
    #[error("step-size error: {0}")]
    StepSize(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

#[derive(Clone, Debug)]
pub struct FluidState {
    pub v: SpectralVector,
    pub nu: f64,
}

/// Right-hand side forcing of the momentum equation.
#[derive(Clone, Copy, Debug)]
pub enum FluidSource<'a> {
    None,
    Fixed(&'a SpectralVector),
    /// Drag `momentum - rho·v`, re-evaluated at every stage velocity.
    Drag { rho: &'a SpectralScalar, momentum: &'a SpectralVector },
}

/// ρ(u - v) = momentum - ρv.
pub fn drag_source(m: &KineticMoments, v: &SpectralVector) -> SpectralVector {
    m.momentum.sub(&v.mul_scalar(&m.rho))
}

impl FluidState {
    pub fn new(v: SpectralVector, nu: f64) -> Result<Self, FluidError> {
        if v.grid().dim() != 2 {
            return Err(FluidError::Config("the fluid solver is two-dimensional".into()));
        }
        if !(nu >= 0.0) {
            return Err(FluidError::Config(format!("viscosity must be non-negative, got {nu}")));
        }
        Ok(Self { v, nu })
    }

    pub fn kinetic_energy(&self) -> f64 {
        0.5 * self.v.inner(&self.v)
    }

    /// ∫|∇v|².
    pub fn dissipation(&self) -> f64 {
        gradient_sq(&self.v)
    }
}

/// ∫|∇v|² computed from Fourier coefficients.
pub fn gradient_sq(v: &SpectralVector) -> f64 {
    let grid = v.grid();
    v.components()
        .iter()
        .map(|c| {
            c.spectrum()
                .iter()
                .enumerate()
                .map(|(idx, z)| grid.k_squared(idx) * z.norm_sqr())
                .sum::<f64>()
        })
        .sum::<f64>()
        * grid.volume()
}

/// Largest dt allowed by dt·max|v|·n/(2π) ≤ 1/2.
pub fn cfl_limit(grid: &TorusGrid, max_speed: f64) -> f64 {
    if max_speed == 0.0 {
        f64::INFINITY
    } else {
        0.5 * grid.dx() / max_speed
    }
}

type Spec2 = [Vec<Complex64>; 2];

fn derivative(grid: &TorusGrid, s: &[Complex64], axis: usize) -> Vec<f64> {
    let d: Vec<Complex64> = s
        .iter()
        .enumerate()
        .map(|(idx, c)| c * Complex64::new(0.0, grid.derivative_wavevector(idx)[axis]))
        .collect();
    grid.inverse(&d)
}

/// Dealiased P[-(v·∇)v + source] in Fourier space.
fn tendency(grid: &TorusGrid, vs: &Spec2, source: FluidSource<'_>) -> Spec2 {
    let v = [grid.inverse(&vs[0]), grid.inverse(&vs[1])];
    let mut out: [Vec<f64>; 2] = [vec![0.0; grid.len()], vec![0.0; grid.len()]];
    for (j, o) in out.iter_mut().enumerate() {
        let d0 = derivative(grid, &vs[j], 0);
        let d1 = derivative(grid, &vs[j], 1);
        for i in 0..grid.len() {
            o[i] = -(v[0][i] * d0[i] + v[1][i] * d1[i]);
        }
        match source {
            FluidSource::None => {}
            FluidSource::Fixed(s) => {
                for (a, b) in o.iter_mut().zip(s.component(j).values()) {
                    *a += b;
                }
            }
            FluidSource::Drag { rho, momentum } => {
                let (r, m) = (rho.values(), momentum.component(j).values());
                for i in 0..grid.len() {
                    o[i] += m[i] - r[i] * v[j][i];
                }
            }
        }
    }
    let mut s0 = grid.forward(&out[0]);
    let mut s1 = grid.forward(&out[1]);
    leray_project_spectra(grid, &mut s0, &mut s1);
    grid.dealias(&mut s0);
    grid.dealias(&mut s1);
    [s0, s1]
}

/// One step of ∂v = P[-(v·∇)v + νΔv + source].
pub fn ns_step(state: &FluidState, source: FluidSource<'_>, dt: f64) -> Result<FluidState, FluidError> {
    let grid = state.v.grid().clone();
    let limit = cfl_limit(&grid, state.v.max_abs());
    if dt > limit {
        return Err(FluidError::StepSize(format!("dt = {dt:e} violates the advective CFL limit {limit:e}")));
    }
    let decay = |tau: f64| -> Vec<f64> { (0..grid.len()).map(|i| (-state.nu * grid.k_squared(i) * tau).exp()).collect() };
    // w = e^{ν|k|²(t - t_n)} v̂
    let mut w: Spec2 = [state.v.component(0).spectrum(), state.v.component(1).spectrum()];
    let mut q: Spec2 = [vec![Complex64::new(0.0, 0.0); grid.len()], vec![Complex64::new(0.0, 0.0); grid.len()]];
    for stage in 0..3 {
        let tau = RK3_C[stage] * dt;
        let (down, up) = (decay(tau), decay(-tau));
        let vstage: Spec2 = [0, 1].map(|a| w[a].iter().zip(&down).map(|(c, e)| c * e).collect());
        let n = tendency(&grid, &vstage, source);
        for a in 0..2 {
            for i in 0..grid.len() {
                q[a][i] = RK3_A[stage] * q[a][i] + dt * up[i] * n[a][i];
                w[a][i] += RK3_B[stage] * q[a][i];
            }
        }
    }
    let end = decay(dt);
    let comps = [0, 1].map(|a| {
        let s: Vec<Complex64> = w[a].iter().zip(&end).map(|(c, e)| c * e).collect();
        SpectralScalar::from_spectrum(&grid, &s)
    });
    let v = leray_project(&SpectralVector::from_components(comps.to_vec())?)?;
    Ok(FluidState { v, nu: state.nu })
}
