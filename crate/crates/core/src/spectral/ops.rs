use num_complex::Complex64;

use super::{SpectralError, SpectralScalar, SpectralVector, TorusGrid};

const MEAN_TOL: f64 = 1e-10;

/// Interaction kernel used by [`convolve_kernel`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum KernelKind {
    /// Torus Green's function of -Δ, applied spectrally.
    Exact,
    /// Mollified kernel: the Green's function with its log singularity
    /// replaced by `-(1/4π) log(eps + |x|²)`.
    Regularized(f64),
}

fn check_mean_zero(h: &SpectralScalar, what: &str) -> Result<(), SpectralError> {
    let m = h.mean();
    if m.abs() > MEAN_TOL * h.max_abs().max(1.0) {
        return Err(SpectralError::Contract(format!("{what}: input mean {m:e} is not zero")));
    }
    Ok(())
}

fn inverse_laplacian_spectrum(grid: &TorusGrid, s: &mut [Complex64]) {
    for (idx, c) in s.iter_mut().enumerate() {
        let k2 = grid.k_squared(idx);
        *c = if k2 == 0.0 { Complex64::new(0.0, 0.0) } else { *c / k2 };
    }
}

/// Mean-zero `U` with `-ΔU = rho - mean(rho)`.
pub fn solve_poisson(rho: &SpectralScalar) -> Result<SpectralScalar, SpectralError> {
    let c = rho.mean();
    if !(c > 0.0) {
        return Err(SpectralError::Contract(format!("density mean must be positive, got {c:e}")));
    }
    let grid = rho.grid();
    let mut s = rho.spectrum();
    inverse_laplacian_spectrum(grid, &mut s);
    Ok(SpectralScalar::from_spectrum(grid, &s))
}

/// `K ⋆ h` for a mean-zero `h`.
pub fn convolve_kernel(h: &SpectralScalar, kind: KernelKind) -> Result<SpectralScalar, SpectralError> {
    check_mean_zero(h, "convolve_kernel")?;
    let grid = h.grid();
    let mut s = h.spectrum();
    match kind {
        KernelKind::Exact => inverse_laplacian_spectrum(grid, &mut s),
        KernelKind::Regularized(eps) => {
            if !(eps > 0.0) {
                return Err(SpectralError::Contract(format!("kernel regularization must be positive, got {eps}")));
            }
            let corr = mollification_correction(grid, eps).spectrum();
            let vol = grid.volume();
            for (idx, (c, k)) in s.iter_mut().zip(&corr).enumerate() {
                let k2 = grid.k_squared(idx);
                *c = if k2 == 0.0 { Complex64::new(0.0, 0.0) } else { *c * (1.0 / k2 + k * vol) };
            }
        }
    }
    Ok(SpectralScalar::from_spectrum(grid, &s))
}

fn log_coefficient(grid: &TorusGrid) -> f64 {
    match grid.dim() {
        1 => 1.0,
        _ => 1.0 / (2.0 * std::f64::consts::PI),
    }
}

/// `K^eps - K = (c0/2) log(|x|² / (eps + |x|²))` with minimum-image distance,
/// cell-averaged on a 4^d sub-grid so the integrable singularity at the
/// origin is sampled finitely, then shifted to mean zero.
pub fn mollification_correction(grid: &TorusGrid, eps: f64) -> SpectralScalar {
    use std::f64::consts::PI;
    const SUB: usize = 4;
    let c0 = log_coefficient(grid);
    let h = grid.dx();
    let wrap = |x: f64| if x > PI { x - 2.0 * PI } else { x };
    let offs: Vec<f64> = (0..SUB).map(|m| ((m as f64 + 0.5) / SUB as f64 - 0.5) * h).collect();
    let ys: &[f64] = if grid.dim() == 2 { &offs } else { &[0.0] };
    let k = SpectralScalar::from_fn(grid, |x, y| {
        let (x, y) = (wrap(x), if grid.dim() == 2 { wrap(y) } else { 0.0 });
        let mut acc = 0.0;
        for ox in &offs {
            for oy in ys {
                let r2 = (x + ox).powi(2) + (y + oy).powi(2);
                acc += 0.5 * c0 * (r2 / (eps + r2)).ln();
            }
        }
        acc / (offs.len() * ys.len()) as f64
    });
    let m = k.mean();
    k.map(|v| v - m)
}

fn apply_symbol(f: &SpectralScalar, symbol: impl Fn(usize) -> Complex64) -> SpectralScalar {
    let mut s = f.spectrum();
    for (idx, c) in s.iter_mut().enumerate() {
        *c *= symbol(idx);
    }
    SpectralScalar::from_spectrum(f.grid(), &s)
}

pub fn gradient(f: &SpectralScalar) -> SpectralVector {
    let grid = f.grid().clone();
    let s = f.spectrum();
    let components = (0..grid.dim())
        .map(|a| {
            let d: Vec<Complex64> = s
                .iter()
                .enumerate()
                .map(|(idx, c)| c * Complex64::new(0.0, grid.derivative_wavevector(idx)[a]))
                .collect();
            SpectralScalar::from_spectrum(&grid, &d)
        })
        .collect();
    SpectralVector::from_components(components).expect("gradient has d components")
}

pub fn divergence(v: &SpectralVector) -> SpectralScalar {
    let grid = v.grid().clone();
    let mut acc = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (a, comp) in v.components().iter().enumerate() {
        for (idx, (o, c)) in acc.iter_mut().zip(comp.spectrum()).enumerate() {
            *o += c * Complex64::new(0.0, grid.derivative_wavevector(idx)[a]);
        }
    }
    SpectralScalar::from_spectrum(&grid, &acc)
}

pub fn laplacian(f: &SpectralScalar) -> SpectralScalar {
    let grid = f.grid().clone();
    apply_symbol(f, |idx| Complex64::new(-grid.k_squared(idx), 0.0))
}

pub fn laplacian_vector(v: &SpectralVector) -> SpectralVector {
    v.map_components(laplacian)
}

/// Leray projection of the Fourier coefficients of a 2D vector field, in place.
pub fn leray_project_spectra(grid: &TorusGrid, s0: &mut [Complex64], s1: &mut [Complex64]) {
    for idx in 0..grid.len() {
        let [k0, k1] = grid.derivative_wavevector(idx);
        let k2 = k0 * k0 + k1 * k1;
        if k2 == 0.0 {
            continue;
        }
        let kv = (s0[idx] * k0 + s1[idx] * k1) / k2;
        s0[idx] -= kv * k0;
        s1[idx] -= kv * k1;
    }
}

/// Projection onto divergence-free fields, `v - ∇Δ⁻¹(∇·v)`; two dimensions only.
pub fn leray_project(v: &SpectralVector) -> Result<SpectralVector, SpectralError> {
    let grid = v.grid().clone();
    if grid.dim() != 2 {
        return Err(SpectralError::Contract("Leray projection requires d = 2".into()));
    }
    let mut s0 = v.component(0).spectrum();
    let mut s1 = v.component(1).spectrum();
    leray_project_spectra(&grid, &mut s0, &mut s1);
    SpectralVector::from_components(vec![
        SpectralScalar::from_spectrum(&grid, &s0),
        SpectralScalar::from_spectrum(&grid, &s1),
    ])
}

/// Dual Sobolev norm of a mean-zero field; equals ‖∇(K ⋆ h)‖_{L²}.
pub fn h_minus1_norm(h: &SpectralScalar) -> Result<f64, SpectralError> {
    check_mean_zero(h, "h_minus1_norm")?;
    let grid = h.grid();
    let sum: f64 = h
        .spectrum()
        .iter()
        .enumerate()
        .filter(|(idx, _)| grid.k_squared(*idx) > 0.0)
        .map(|(idx, c)| c.norm_sqr() / grid.k_squared(idx))
        .sum();
    Ok((grid.volume() * sum).sqrt())
}

fn sobolev_sum(f: &SpectralScalar, s: f64) -> f64 {
    let grid = f.grid();
    f.spectrum()
        .iter()
        .enumerate()
        .map(|(idx, c)| (1.0 + grid.k_squared(idx)).powf(s) * c.norm_sqr())
        .sum::<f64>()
        * grid.volume()
}

/// `((2π)^d Σ_k (1+|k|²)^s |f̂_k|²)^{1/2}`; negative `s` gives the dual norms.
pub fn sobolev_norm(f: &SpectralScalar, s: f64) -> f64 {
    sobolev_sum(f, s).sqrt()
}

pub fn sobolev_norm_vector(v: &SpectralVector, s: f64) -> f64 {
    v.components().iter().map(|c| sobolev_sum(c, s)).sum::<f64>().sqrt()
}

/// `(a·∇) b` evaluated pseudo-spectrally; the caller dealiases the result.
pub fn advect(a: &SpectralVector, b: &SpectralScalar) -> SpectralScalar {
    let g = gradient(b);
    a.dot_field(&g)
}

pub fn advect_vector(a: &SpectralVector, b: &SpectralVector) -> SpectralVector {
    b.map_components(|c| advect(a, c))
}
