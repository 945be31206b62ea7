use crate::epns::MacroState;
use crate::kinetic::{regularized_velocity, DistributionFunction, KineticMoments, VelocityBox};
use crate::spectral::{h_minus1_norm, SpectralScalar, SpectralVector};

use super::entropy::{rel_ent, MASK_FLOOR};
use super::DiagnosticsError;

/// Components of the modulated energy between kinetic moments and a limit
/// state. `mod_energy` is the sum of the velocity and pressure terms;
/// `coulomb_mod` is kept apart.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ModulatedEnergy {
    pub mod_energy: f64,
    pub coulomb_mod: f64,
    pub l2_u_diff: f64,
    pub l2_v_diff: f64,
}

pub fn modulated_energy(
    m: &KineticMoments,
    v_eps: &SpectralVector,
    limit: &MacroState,
    delta: f64,
) -> Result<ModulatedEnergy, DiagnosticsError> {
    modulated_parts(m, v_eps, &limit.rho(), &limit.u, &limit.v, limit.sigma(), delta)
}

/// The same functional against limit fields given directly.
pub(crate) fn modulated_parts(
    m: &KineticMoments,
    v_eps: &SpectralVector,
    rho: &SpectralScalar,
    u: &SpectralVector,
    v: &SpectralVector,
    sigma: f64,
    delta: f64,
) -> Result<ModulatedEnergy, DiagnosticsError> {
    if rho.grid() != m.rho.grid() {
        return Err(DiagnosticsError::Domain("moments and limit live on different grids".into()));
    }
    let u_eps = regularized_velocity(m, delta)?;
    let du = u_eps.sub(u);
    let l2_u_diff = m.rho.mul(&du.norm_sq_field()).integral().max(0.0);
    let dv = v_eps.sub(v);
    let l2_v_diff = dv.inner(&dv);
    let pressure = if sigma > 0.0 {
        sigma * m.rho.zip_map(rho, |a, b| rel_ent(a.max(0.0), b)).integral()
    } else {
        0.0
    };
    let diff = m.rho.sub(rho);
    let mean = diff.mean();
    let hm1 = h_minus1_norm(&diff.map(|x| x - mean))?;
    Ok(ModulatedEnergy {
        mod_energy: l2_u_diff + l2_v_diff + pressure,
        coulomb_mod: hm1 * hm1,
        l2_u_diff,
        l2_v_diff,
    })
}

/// The local Maxwellian of (ρ, u) at temperature σ.
pub fn maxwellian(
    rho: &SpectralScalar,
    u: &SpectralVector,
    sigma: f64,
    vbox: VelocityBox,
    epsilon: f64,
) -> Result<DistributionFunction, DiagnosticsError> {
    if !(sigma > 0.0) {
        return Err(DiagnosticsError::Domain(format!("Maxwellian needs sigma > 0, got {sigma}")));
    }
    if rho.min() <= 0.0 {
        return Err(DiagnosticsError::Domain(format!("Maxwellian needs rho > 0, got min {}", rho.min())));
    }
    Ok(DistributionFunction::maxwellian(rho, u, vbox, sigma, epsilon)?)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RelativeEntropy {
    /// ∫∫ ℋ(f|M).
    pub value: f64,
    /// ‖f - M‖²_{L¹}.
    pub l1_sq: f64,
}

/// ∫∫ f log(f/M) - f + M, checking ‖f - M‖²₁ ≤ 4 max(‖f‖₁, ‖M‖₁) ∫∫ℋ(f|M),
/// which reduces to the usual form for unit masses.
pub fn rel_entropy_to_maxwellian(f: &DistributionFunction, m: &DistributionFunction) -> Result<RelativeEntropy, DiagnosticsError> {
    if f.values().len() != m.values().len() || f.vbox() != m.vbox() {
        return Err(DiagnosticsError::Domain("distributions live on different grids".into()));
    }
    if !(m.sigma() > 0.0) {
        return Err(DiagnosticsError::Domain(format!("Maxwellian needs sigma > 0, got {}", m.sigma())));
    }
    let floor = MASK_FLOOR * f.max().max(0.0);
    let (mut h, mut l1, mut mf, mut mm) = (0.0, 0.0, 0.0, 0.0);
    for (&a, &b) in f.values().iter().zip(m.values()) {
        let x = if a > floor { a } else { 0.0 };
        let y = b.max(f64::MIN_POSITIVE);
        h += rel_ent(x, y);
        l1 += (a - b).abs();
        mf += a.abs();
        mm += b.abs();
    }
    let w = f.cell_volume();
    let (value, l1, mass) = (h * w, l1 * w, mf.max(mm) * w);
    let l1_sq = l1 * l1;
    let bound = 4.0 * mass * value;
    // slack for rounding in the L¹ sum
    let slack = (8.0 * f64::EPSILON * (mf + mm) * w).powi(2);
    if l1_sq > bound * (1.0 + 1e-9) + slack {
        return Err(DiagnosticsError::CsiszarKullback { lhs: l1_sq, rhs: bound });
    }
    Ok(RelativeEntropy { value, l1_sq })
}

/// ‖S - (ρu⊗u + σρI)‖ in L¹(x) with the nuclear norm per point, where S is
/// the kinetic second moment and (ρ, u) come from the limit state.
pub fn stress_defect(m: &KineticMoments, limit: &MacroState, sigma: f64) -> f64 {
    let rho = limit.rho();
    let grid = rho.grid().clone();
    let d = grid.dim();
    let mut total = 0.0;
    for x in 0..grid.len() {
        let r = rho.values()[x];
        let u = limit.u.at(x);
        let mut s = [[0.0; 2]; 2];
        for a in 0..d {
            for b in 0..d {
                s[a][b] = m.stress[a][b].values()[x] - r * u[a] * u[b] - if a == b { sigma * r } else { 0.0 };
            }
        }
        total += if d == 1 {
            s[0][0].abs()
        } else {
            let mid = 0.5 * (s[0][0] + s[1][1]);
            let rad = (0.25 * (s[0][0] - s[1][1]).powi(2) + s[0][1] * s[0][1]).sqrt();
            (mid + rad).abs() + (mid - rad).abs()
        };
    }
    total * grid.cell_volume()
}
