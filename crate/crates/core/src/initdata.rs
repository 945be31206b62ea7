//! Initial data: seeded smooth limit profiles and well-prepared kinetic
//! families, together with the measured energy and modulation gaps.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagnostics::{free_energy, modulated_parts, DiagnosticsError};
use crate::kinetic::{compute_moments, DistributionFunction, KineticError, VelocityBox};
use crate::spectral::{h_minus1_norm, leray_project, SpectralError, SpectralScalar, SpectralVector, TorusGrid};

/// Gaussians must fit this many standard deviations inside the velocity box
/// (tail mass below 1e-10).
pub const LEAKAGE_SIGMAS: f64 = 6.5;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InitDataError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Kinetic(#[from] KineticError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
}

#[derive(Clone, Debug)]
pub struct Profiles {
    pub rho: SpectralScalar,
    pub u: SpectralVector,
    pub v: SpectralVector,
}

/// Random trigonometric polynomial over modes 1 ≤ max|k_i| ≤ cutoff with
/// coefficients normalised by their ℓ¹ sum, so mean 0 and sup ≤ 1.
fn trig_polynomial(grid: &TorusGrid, rng: &mut ChaCha8Rng, cutoff: i64) -> SpectralScalar {
    let d = grid.dim();
    let mut terms = Vec::new();
    let k2_range = if d == 1 { 0..=0 } else { -cutoff..=cutoff };
    for k1 in 0..=cutoff {
        for k2 in k2_range.clone() {
            // one of each ±k pair
            if (k1 == 0 && k2 <= 0) || k1.abs().max(k2.abs()) > cutoff {
                continue;
            }
            let a: f64 = rng.random_range(-1.0..1.0);
            let b: f64 = rng.random_range(-1.0..1.0);
            terms.push((k1 as f64, k2 as f64, a, b));
        }
    }
    let norm: f64 = terms.iter().map(|t| t.2.abs() + t.3.abs()).sum();
    SpectralScalar::from_fn(grid, |x, y| {
        terms.iter().map(|&(k1, k2, a, b)| a * (k1 * x + k2 * y).cos() + b * (k1 * x + k2 * y).sin()).sum::<f64>() / norm
    })
}

/// ρ₀ = 1 + a·p, u₀ = a·w, v₀ = P(a·w') with seeded low-mode p, w, w'.
/// In one dimension v₀ = 0, the only divergence-free mean-zero field.
pub fn smooth_profiles(grid: &TorusGrid, seed: u64, amplitude: f64, mode_cutoff: usize) -> Result<Profiles, InitDataError> {
    if !(0.0..0.5).contains(&amplitude) {
        return Err(InitDataError::Config(format!("amplitude must lie in [0, 0.5), got {amplitude}")));
    }
    if mode_cutoff == 0 || 3 * mode_cutoff > grid.n() {
        return Err(InitDataError::Config(format!(
            "mode cutoff must lie in 1..={} for n = {}, got {mode_cutoff}",
            grid.n() / 3,
            grid.n()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = mode_cutoff as i64;
    let d = grid.dim();
    let rho = trig_polynomial(grid, &mut rng, c).map(|p| 1.0 + amplitude * p);
    let u = SpectralVector::from_components((0..d).map(|_| trig_polynomial(grid, &mut rng, c).map(|p| amplitude * p)).collect())?;
    let w = SpectralVector::from_components((0..d).map(|_| trig_polynomial(grid, &mut rng, c).map(|p| amplitude * p)).collect())?;
    let v = if d == 2 { leray_project(&w)? } else { SpectralVector::zeros(grid) };
    Ok(Profiles { rho, u, v })
}

/// Measured discrepancies of a prepared family against its limit data.
#[derive(Clone, Copy, Debug, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PreparationGaps {
    /// F(f₀^ε, v₀^ε) minus the limit energy with its entropy constant.
    pub h1: f64,
    pub h1_per_mass: f64,
    /// Modulated energy plus Coulomb modulation at t = 0.
    pub h2: f64,
    pub kinetic_energy: f64,
    pub macro_energy: f64,
    pub mass: f64,
}

#[derive(Clone, Debug)]
pub struct WellPrepared {
    pub f: DistributionFunction,
    pub v: SpectralVector,
    pub gaps: PreparationGaps,
}

/// Weights on the nodes approximating a 1D Gaussian N(c, s2) with exactly
/// unit mass, mean c and variance s2: the sampled Gaussian times the
/// quadratic that fixes its first three moments.
fn moment_matched_gaussian(nodes: &[f64], h: f64, c: f64, s2: f64) -> Option<Vec<f64>> {
    let g: Vec<f64> = nodes.iter().map(|x| (-(x - c).powi(2) / (2.0 * s2)).exp()).collect();
    let mut mom = [0.0; 5];
    for (gi, x) in g.iter().zip(nodes) {
        let y = x - c;
        let mut p = 1.0;
        for m in mom.iter_mut() {
            *m += gi * p;
            p *= y;
        }
    }
    let a = [[mom[0], mom[1], mom[2]], [mom[1], mom[2], mom[3]], [mom[2], mom[3], mom[4]]];
    let coef = solve3(a, [1.0 / h, 0.0, s2 / h])?;
    let w: Vec<f64> = g
        .iter()
        .zip(nodes)
        .map(|(gi, x)| {
            let y = x - c;
            gi * (coef[0] + coef[1] * y + coef[2] * y * y)
        })
        .collect();
    w.iter().all(|v| *v >= 0.0).then_some(w)
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d0 = det(a);
    if d0.abs() < 1e-300 {
        return None;
    }
    let mut x = [0.0; 3];
    for (k, xk) in x.iter_mut().enumerate() {
        let mut m = a;
        for r in 0..3 {
            m[r][k] = b[r];
        }
        *xk = det(m) / d0;
    }
    Some(x)
}

/// Kinetic data matched to (ρ₀, u₀, v₀). σ > 0: the local Maxwellian. σ = 0:
/// ρ₀ times a Gaussian of variance ε per component centred at u₀, sampled
/// with exact discrete moments. `mis_prepared = Some(w)` shifts the kinetic
/// mean velocity to u₀ + √ε·w.
#[allow(clippy::too_many_arguments)]
pub fn well_prepared_family(
    rho0: &SpectralScalar,
    u0: &SpectralVector,
    v0: &SpectralVector,
    sigma: f64,
    epsilon: f64,
    vbox: VelocityBox,
    mis_prepared: Option<&SpectralVector>,
    delta: f64,
) -> Result<WellPrepared, InitDataError> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(InitDataError::Config(format!("sigma must be non-negative, got {sigma}")));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(InitDataError::Config(format!("epsilon must be positive, got {epsilon}")));
    }
    if rho0.min() <= 0.0 {
        return Err(InitDataError::Config(format!("rho0 must be positive, min is {}", rho0.min())));
    }
    let grid = rho0.grid();
    let d = grid.dim();
    let center = match mis_prepared {
        Some(w) => u0.add(&w.scale(epsilon.sqrt())),
        None => u0.clone(),
    };
    let var = if sigma > 0.0 { sigma } else { epsilon };
    let reach = center.max_abs() + LEAKAGE_SIGMAS * var.sqrt();
    if reach > vbox.v_max() {
        return Err(InitDataError::Config(format!(
            "velocity box half-width {} is below the required {reach:.3} for variance {var}",
            vbox.v_max()
        )));
    }
    let f = if sigma > 0.0 {
        DistributionFunction::maxwellian(rho0, &center, vbox, sigma, epsilon)?
    } else {
        let nodes = vbox.nodes();
        let h = vbox.spacing();
        let n_v = vbox.n_v();
        let mut f = DistributionFunction::zeros(grid, vbox, 0.0, epsilon)?;
        for (x, col) in f.values_mut().chunks_mut(vbox.len()).enumerate() {
            let c = center.at(x);
            let w = (0..d)
                .map(|a| {
                    moment_matched_gaussian(&nodes, h, c[a], epsilon).ok_or_else(|| {
                        InitDataError::Config(format!("velocity spacing {h:.3} cannot resolve a Gaussian of variance {epsilon}"))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            let r = rho0.values()[x];
            for (v, val) in col.iter_mut().enumerate() {
                *val = if d == 1 { r * w[0][v] } else { r * w[0][v / n_v] * w[1][v % n_v] };
            }
        }
        f.reset_ledger();
        f
    };
    finish(f, rho0, u0, v0, sigma, delta)
}

fn finish(
    f: DistributionFunction,
    rho0: &SpectralScalar,
    u0: &SpectralVector,
    v0: &SpectralVector,
    sigma: f64,
    delta: f64,
) -> Result<WellPrepared, InitDataError> {
    let kinetic_energy = free_energy(&f, v0)?;
    let macro_energy = limit_energy(rho0, u0, v0, sigma)?;
    let m = compute_moments(&f);
    let me = modulated_parts(&m, v0, rho0, u0, v0, sigma, delta)?;
    let mass = f.mass();
    let h1 = kinetic_energy - macro_energy;
    Ok(WellPrepared {
        f,
        v: v0.clone(),
        gaps: PreparationGaps {
            h1,
            h1_per_mass: h1 / mass,
            h2: me.mod_energy + me.coulomb_mod,
            kinetic_energy,
            macro_energy,
            mass,
        },
    })
}

/// Pressureless data with a cold velocity distribution: ρ₀ δ(ξ - u₀) spread
/// onto the two nearest velocity nodes per axis with weights preserving
/// mass and mean; exact when u₀ sits on nodes.
pub fn cold_family(
    rho0: &SpectralScalar,
    u0: &SpectralVector,
    v0: &SpectralVector,
    epsilon: f64,
    vbox: VelocityBox,
    delta: f64,
) -> Result<WellPrepared, InitDataError> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(InitDataError::Config(format!("epsilon must be positive, got {epsilon}")));
    }
    let grid = rho0.grid();
    let d = grid.dim();
    let (n_v, h, lo) = (vbox.n_v(), vbox.spacing(), vbox.node(0));
    if u0.max_abs() > vbox.node(n_v - 1) {
        return Err(InitDataError::Config(format!("velocity box half-width {} is below max|u0| = {}", vbox.v_max(), u0.max_abs())));
    }
    let mut f = DistributionFunction::zeros(grid, vbox, 0.0, epsilon)?;
    for (x, col) in f.values_mut().chunks_mut(vbox.len()).enumerate() {
        let u = u0.at(x);
        let w: Vec<[(usize, f64); 2]> = (0..d)
            .map(|a| {
                let s = ((u[a] - lo) / h).clamp(0.0, (n_v - 1) as f64);
                let i = (s.floor() as usize).min(n_v - 2);
                let t = s - i as f64;
                [(i, 1.0 - t), (i + 1, t)]
            })
            .collect();
        let r = rho0.values()[x] / vbox.cell_volume();
        if d == 1 {
            for (i, wi) in w[0] {
                col[i] += r * wi;
            }
        } else {
            for (i, wi) in w[0] {
                for (j, wj) in w[1] {
                    col[i * n_v + j] += r * wi * wj;
                }
            }
        }
    }
    f.reset_ledger();
    finish(f, rho0, u0, v0, 0.0, delta)
}

/// ∫ ρ|u|²/2 + σ(ρ log ρ - (d/2) log(2πσ) ρ) + ½‖∇K⋆(ρ - 1)‖² + ½‖v‖², the
/// energy a Maxwellian with these moments carries.
pub fn limit_energy(rho: &SpectralScalar, u: &SpectralVector, v: &SpectralVector, sigma: f64) -> Result<f64, InitDataError> {
    let d = rho.grid().dim() as f64;
    let kinetic = 0.5 * rho.mul(&u.norm_sq_field()).integral();
    let entropy = if sigma > 0.0 {
        let c = 0.5 * d * (2.0 * std::f64::consts::PI * sigma).ln();
        sigma * rho.map(|r| r * r.ln() - c * r).integral()
    } else {
        0.0
    };
    let mean = rho.mean();
    let hm1 = h_minus1_norm(&rho.map(|r| r - mean))?;
    Ok(kinetic + entropy + 0.5 * hm1 * hm1 + 0.5 * v.inner(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::divergence;

    fn grid() -> TorusGrid {
        TorusGrid::new(2, 16).unwrap()
    }

    #[test]
    fn zero_amplitude_is_rest() {
        let p = smooth_profiles(&grid(), 7, 0.0, 2).unwrap();
        assert!(p.rho.values().iter().all(|r| *r == 1.0));
        assert_eq!(p.u.max_abs(), 0.0);
        assert_eq!(p.v.max_abs(), 0.0);
    }

    #[test]
    fn profiles_are_bounded_and_solenoidal() {
        let g = grid();
        for seed in 0..50 {
            let p = smooth_profiles(&g, seed, 0.3, 3).unwrap();
            assert!(p.rho.min() >= 0.7);
            assert!((p.rho.mean() - 1.0).abs() < 1e-12);
            assert!(divergence(&p.v).max_abs() <= 1e-10);
        }
        let a = smooth_profiles(&g, 3, 0.2, 2).unwrap();
        let b = smooth_profiles(&g, 3, 0.2, 2).unwrap();
        assert_eq!(a.u.component(1).values(), b.u.component(1).values());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(smooth_profiles(&grid(), 0, 0.5, 2).is_err());
        assert!(smooth_profiles(&grid(), 0, 0.1, 6).is_err());
        let p = smooth_profiles(&grid(), 0, 0.1, 2).unwrap();
        let small = VelocityBox::new(2, 16, 4.0).unwrap();
        assert!(matches!(
            well_prepared_family(&p.rho, &p.u, &p.v, 1.0, 0.1, small, None, 1e-12),
            Err(InitDataError::Config(_))
        ));
    }

    #[test]
    fn maxwellian_family_has_no_gaps() {
        let g = TorusGrid::new(2, 8).unwrap();
        let p = smooth_profiles(&g, 1, 0.1, 2).unwrap();
        let vb = VelocityBox::new(2, 32, 8.0).unwrap();
        let w = well_prepared_family(&p.rho, &p.u, &p.v, 1.0, 0.1, vb, None, 1e-12).unwrap();
        assert!(w.gaps.h1.abs() <= 1e-8, "{:?}", w.gaps);
        assert!(w.gaps.h2 <= 1e-9, "{:?}", w.gaps);
    }

    #[test]
    fn monokinetic_family_energy_gap() {
        let g = TorusGrid::new(2, 8).unwrap();
        let p = smooth_profiles(&g, 1, 0.1, 2).unwrap();
        let vb = VelocityBox::new(2, 32, 2.0).unwrap();
        let w = well_prepared_family(&p.rho, &p.u, &p.v, 0.0, 0.01, vb, None, 1e-12).unwrap();
        assert!((w.gaps.h1_per_mass - 0.01).abs() <= 1e-6, "{:?}", w.gaps);
        assert!(w.gaps.h2 <= 1e-9, "{:?}", w.gaps);
    }

    #[test]
    fn mis_prepared_shift_shows_in_modulation() {
        let g = TorusGrid::new(2, 8).unwrap();
        let p = smooth_profiles(&g, 1, 0.1, 2).unwrap();
        let vb = VelocityBox::new(2, 32, 8.0).unwrap();
        let one = SpectralVector::constant(&g, [1.0, 0.0]);
        let w = well_prepared_family(&p.rho, &p.u, &p.v, 1.0, 0.04, vb, Some(&one), 1e-12).unwrap();
        // ∫ρ|√ε e₁|² = ε·mass
        assert!((w.gaps.h2 - 0.04 * p.rho.integral()).abs() < 1e-8, "{:?}", w.gaps);
    }

    #[test]
    fn cold_family_on_a_node_has_no_gaps() {
        let g = TorusGrid::new(2, 8).unwrap();
        let vb = VelocityBox::new(2, 16, 4.0).unwrap();
        let one = SpectralScalar::constant(&g, 1.0);
        let c = SpectralVector::constant(&g, [vb.node(8), vb.node(7)]);
        let w = cold_family(&one, &c, &c, 0.1, vb, 1e-14).unwrap();
        assert!(w.gaps.h1.abs() < 1e-12 && w.gaps.h2 < 1e-12, "{:?}", w.gaps);
        assert!((w.f.mass() - 4.0 * std::f64::consts::PI.powi(2)).abs() < 1e-12);
    }

    #[test]
    fn moment_matching_is_exact() {
        let vb = VelocityBox::new(1, 24, 3.0).unwrap();
        let nodes = vb.nodes();
        let h = vb.spacing();
        let w = moment_matched_gaussian(&nodes, h, 0.17, 0.09).unwrap();
        let m0: f64 = w.iter().sum::<f64>() * h;
        let m1: f64 = w.iter().zip(&nodes).map(|(a, x)| a * x).sum::<f64>() * h;
        let m2: f64 = w.iter().zip(&nodes).map(|(a, x)| a * (x - 0.17).powi(2)).sum::<f64>() * h;
        assert!((m0 - 1.0).abs() < 1e-13 && (m1 - 0.17).abs() < 1e-13 && (m2 - 0.09).abs() < 1e-13);
    }
}
