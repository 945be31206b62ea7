use crate::fluid::gradient_sq;
use crate::kinetic::{compute_moments, DistributionFunction};
use crate::spectral::{h_minus1_norm, SpectralVector};

use super::{DiagnosticsError, DiagnosticsRecord};

/// Cells with f below this fraction of max f are masked out of D₁.
pub const MASK_FLOOR: f64 = 1e-30;

/// ℋ(x|y) = x log x - y log y - (1 + log y)(x - y).
pub fn relative_entropy_scalar(x: f64, y: f64) -> Result<f64, DiagnosticsError> {
    if !(x > 0.0 && y > 0.0) {
        return Err(DiagnosticsError::Domain(format!("relative entropy needs positive arguments, got ({x}, {y})")));
    }
    Ok(rel_ent(x, y))
}

/// x log(x/y) - x + y, with the x → 0 limit y. Written as y·φ(x/y - 1)
/// with φ(t) = (1+t)log(1+t) - t, summed as a series near t = 0 so the
/// result is never negative through cancellation.
pub(crate) fn rel_ent(x: f64, y: f64) -> f64 {
    if x <= 0.0 {
        return y;
    }
    let r = x / y;
    if r == 0.0 {
        return y;
    }
    let t = r - 1.0;
    let phi = if t.abs() < 0.1 {
        // Σ_{k≥2} (-t)^k / (k(k-1))
        let mut p = t * t;
        let mut acc = 0.0;
        for k in 2..18 {
            acc += p / (k * (k - 1)) as f64;
            p *= -t;
        }
        acc
    } else {
        r * r.ln() - t
    };
    y * phi
}

/// F(f, v) = ∫∫(|ξ|²/2 + σ log f) f + ½‖∇K⋆(ρ - 1)‖² + ½∫|v|².
pub fn free_energy(f: &DistributionFunction, v: &SpectralVector) -> Result<f64, DiagnosticsError> {
    let vb = f.vbox();
    let nv = vb.len();
    let sigma = f.sigma();
    let half_sq: Vec<f64> = (0..nv).map(|i| 0.5 * (vb.xi(i)[0].powi(2) + vb.xi(i)[1].powi(2))).collect();
    let mut kin = 0.0;
    for col in f.values().chunks(nv) {
        for (fv, e) in col.iter().zip(&half_sq) {
            if *fv > 0.0 {
                kin += fv * (e + if sigma > 0.0 { sigma * fv.ln() } else { 0.0 });
            }
        }
    }
    kin *= f.cell_volume();
    let rho = compute_moments(f).rho;
    let m = rho.mean();
    let hm1 = h_minus1_norm(&rho.map(|r| r - m))?;
    Ok(kin + 0.5 * hm1 * hm1 + 0.5 * v.inner(v))
}

/// D₁ = ∫∫ f |σ∇_ξ log f - (u - ξ)|² for σ > 0, with ∇_ξ log f by centred
/// differences (one-sided at the box faces) so that sampled Maxwellians give
/// exactly zero; cells where f or a stencil neighbour is below the mask floor
/// are skipped. For σ = 0 this is the alignment dissipation ∫∫|u - ξ|² f.
pub fn dissipation_d1(f: &DistributionFunction, u_loc: &SpectralVector) -> f64 {
    let vb = *f.vbox();
    let (n, d, nv) = (vb.n_v(), vb.dim(), vb.len());
    let sigma = f.sigma();
    let h = vb.spacing();
    let floor = MASK_FLOOR * f.max().max(0.0);
    let mut total = 0.0;
    let mut logs = vec![0.0; nv];
    for (x, col) in f.values().chunks(nv).enumerate() {
        let u = u_loc.at(x);
        if sigma == 0.0 {
            for (v, fv) in col.iter().enumerate() {
                let xi = vb.xi(v);
                total += fv.max(0.0) * ((u[0] - xi[0]).powi(2) + (u[1] - xi[1]).powi(2));
            }
            continue;
        }
        for (l, fv) in logs.iter_mut().zip(col) {
            *l = if *fv > floor { fv.ln() } else { f64::NEG_INFINITY };
        }
        'node: for v in 0..nv {
            if col[v] <= floor {
                continue;
            }
            let xi = vb.xi(v);
            let idx = if d == 1 { [v, 0] } else { [v / n, v % n] };
            let stride = if d == 1 { [1, 0] } else { [n, 1] };
            let mut q = 0.0;
            for a in 0..d {
                let i = idx[a];
                let (lo, hi) = (if i == 0 { v } else { v - stride[a] }, if i == n - 1 { v } else { v + stride[a] });
                let span = (hi - lo) / stride[a];
                if !(logs[lo].is_finite() && logs[hi].is_finite()) {
                    continue 'node;
                }
                let dlog = (logs[hi] - logs[lo]) / (span as f64 * h);
                q += (sigma * dlog - (u[a] - xi[a])).powi(2);
            }
            total += col[v] * q;
        }
    }
    total * f.cell_volume()
}

/// D₂ = ∫∫|v - ξ|² f + ∫|∇v|².
pub fn dissipation_d2(f: &DistributionFunction, v: &SpectralVector) -> f64 {
    let vb = *f.vbox();
    let nv = vb.len();
    let mut total = 0.0;
    for (x, col) in f.values().chunks(nv).enumerate() {
        let w = v.at(x);
        for (i, fv) in col.iter().enumerate() {
            let xi = vb.xi(i);
            total += fv.max(0.0) * ((w[0] - xi[0]).powi(2) + (w[1] - xi[1]).powi(2));
        }
    }
    let grad = if v.grid().dim() == 2 { gradient_sq(v) } else { 0.0 };
    total * f.cell_volume() + grad
}

/// Residual series of the entropy inequality and its maximum.
#[derive(Clone, Debug, PartialEq)]
pub struct EntropyResidual {
    pub series: Vec<f64>,
    pub max: f64,
}

/// residual(t) = F(t) + ε⁻¹∫₀ᵗD₁ + ∫₀ᵗD₂ - F(0) - σ d t M(0), trapezoid in t.
pub fn entropy_inequality_residual(
    records: &[DiagnosticsRecord],
    epsilon: f64,
    sigma: f64,
    d: usize,
) -> Result<EntropyResidual, DiagnosticsError> {
    if records.len() < 3 {
        return Err(DiagnosticsError::InsufficientData(format!("need at least 3 records, got {}", records.len())));
    }
    let dt = records[1].t - records[0].t;
    for w in records.windows(2) {
        if ((w[1].t - w[0].t) - dt).abs() > 1e-9 * dt.abs().max(1e-300) {
            return Err(DiagnosticsError::InsufficientData("records are not uniformly spaced in time".into()));
        }
    }
    let series = residual_series(records, epsilon, sigma, d);
    let max = series.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(EntropyResidual { series, max })
}

pub(crate) fn residual_series(records: &[DiagnosticsRecord], epsilon: f64, sigma: f64, d: usize) -> Vec<f64> {
    let r0 = records[0];
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(records.len());
    for (k, r) in records.iter().enumerate() {
        if k > 0 {
            let p = records[k - 1];
            let dt = r.t - p.t;
            acc += 0.5 * dt * ((p.d1 + r.d1) / epsilon + p.d2 + r.d2);
        }
        out.push(r.free_energy + acc - r0.free_energy - sigma * d as f64 * (r.t - r0.t) * r0.mass);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetic::VelocityBox;
    use crate::spectral::{SpectralScalar, TorusGrid};

    #[test]
    fn scalar_relative_entropy() {
        for x in [0.1, 1.0, 7.0] {
            assert!(relative_entropy_scalar(x, x).unwrap().abs() < 1e-15);
        }
        let h = relative_entropy_scalar(2.0, 1.0).unwrap();
        assert!((h - (2.0 * 2f64.ln() - 1.0)).abs() < 1e-15);
        assert!(h >= 0.25);
        assert!(relative_entropy_scalar(0.0, 1.0).is_err());
        assert!(relative_entropy_scalar(1.0, -1.0).is_err());
        // x/y below the rounding of 1 - x/y
        let h = relative_entropy_scalar(3.9e-51, 3.4e-25).unwrap();
        assert!((h - 3.4e-25).abs() < 1e-15 * 3.4e-25);
        for (x, y) in [(1.05f64, 1.0f64), (0.95, 1.0), (1.0 + 1e-9, 1.0), (3.0, 2.9)] {
            let direct = x * (x / y).ln() - x + y;
            let h = relative_entropy_scalar(x, y).unwrap();
            assert!(h >= 0.0 && (h - direct).abs() <= 1e-15 * x.max(y), "{x} {y}: {h} vs {direct}");
        }
    }

    #[test]
    fn d1_vanishes_on_local_maxwellian() {
        let g = TorusGrid::new(2, 8).unwrap();
        let vb = VelocityBox::new(2, 32, 8.0).unwrap();
        let rho = SpectralScalar::from_fn(&g, |x, y| 1.0 + 0.3 * (x + y).sin());
        let u = SpectralVector::from_fn(&g, |x, y| [0.4 * y.cos(), -0.2 * x.sin()]);
        let f = DistributionFunction::maxwellian(&rho, &u, vb, 1.0, 0.1).unwrap();
        assert!(dissipation_d1(&f, &u) < 1e-8);
        assert!(dissipation_d1(&f, &SpectralVector::zeros(&g)) > 1.0);
    }

    #[test]
    fn d2_of_even_distribution_without_fluid() {
        let g = TorusGrid::new(2, 8).unwrap();
        let vb = VelocityBox::new(2, 16, 4.0).unwrap();
        let f = DistributionFunction::from_fn(&g, vb, 1.0, 1.0, |_, xi| (-xi[0].powi(2) - 2.0 * xi[1].powi(4)).exp()).unwrap();
        let direct: f64 = f
            .values()
            .chunks(vb.len())
            .flat_map(|c| c.iter().enumerate().map(|(i, v)| v * (vb.xi(i)[0].powi(2) + vb.xi(i)[1].powi(2))))
            .sum::<f64>()
            * f.cell_volume();
        assert!((dissipation_d2(&f, &SpectralVector::zeros(&g)) - direct).abs() < 1e-12 * direct);
    }

    #[test]
    fn residual_needs_three_records() {
        let r = DiagnosticsRecord::default();
        assert!(entropy_inequality_residual(&[r, r], 1.0, 1.0, 2).is_err());
    }

    #[test]
    fn residual_of_stationary_records() {
        let recs: Vec<DiagnosticsRecord> =
            (0..5).map(|k| DiagnosticsRecord { t: 0.1 * k as f64, free_energy: -3.0, mass: 2.0, ..Default::default() }).collect();
        let r = entropy_inequality_residual(&recs, 0.1, 1.0, 2).unwrap();
        assert!(r.max <= 1e-6);
        assert!((r.series[4] + 1.6).abs() < 1e-12);
    }
}
