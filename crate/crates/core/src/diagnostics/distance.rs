use microlp::{ComparisonOp, OptimizationDirection, Problem};

use crate::spectral::{h_minus1_norm, SpectralScalar, TorusGrid};

use super::DiagnosticsError;

/// Largest support the exact LP is asked to handle.
pub const MAX_LP_SUPPORT: usize = 64;

/// C in d_BL(μ, ν) ≤ C‖μ - ν‖_{H⁻¹} on the 2-torus. The largest ratio seen
/// over 4000 seeded grid-supported instances at n = 8 was 5.20; the frozen
/// value is the continuum bound √2·2π from ‖φ‖_{H¹} ≤ √2 (2π) ‖φ‖_{W^{1,∞}}.
pub const BL_SURROGATE_CONSTANT: f64 = std::f64::consts::SQRT_2 * 2.0 * std::f64::consts::PI;

/// Weighted point masses on the torus [0, 2π)^d.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DiscreteMeasure {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn dirac(p: [f64; 2]) -> Self {
        Self { points: vec![p], weights: vec![1.0] }
    }

    pub fn push(&mut self, p: [f64; 2], w: f64) {
        self.points.push(p);
        self.weights.push(w);
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Euclidean distance on the torus of period 2π, minimum image per axis.
pub fn torus_distance(a: [f64; 2], b: [f64; 2], d: usize) -> f64 {
    let tau = 2.0 * std::f64::consts::PI;
    (0..d)
        .map(|i| {
            let r = (a[i] - b[i]).rem_euclid(tau);
            r.min(tau - r).powi(2)
        })
        .sum::<f64>()
        .sqrt()
}

/// Bounded-Lipschitz distance by the dual LP over node values of φ:
/// maximise Σφ_i(μ_i - ν_i) with |φ_i| ≤ 1 and φ_i - φ_j ≤ |x_i - x_j|.
pub fn bl_distance_lp(mu: &DiscreteMeasure, nu: &DiscreteMeasure, d: usize) -> Result<f64, DiagnosticsError> {
    let mut support: Vec<[f64; 2]> = Vec::new();
    let mut net: Vec<f64> = Vec::new();
    for (m, sign) in [(mu, 1.0), (nu, -1.0)] {
        if m.points.len() != m.weights.len() {
            return Err(DiagnosticsError::Domain("points and weights differ in length".into()));
        }
        for (p, w) in m.points.iter().zip(&m.weights) {
            match support.iter().position(|q| torus_distance(*p, *q, d) < 1e-14) {
                Some(i) => net[i] += sign * w,
                None => {
                    support.push(*p);
                    net.push(sign * w);
                }
            }
        }
    }
    if support.len() > MAX_LP_SUPPORT {
        return Err(DiagnosticsError::Scale(format!(
            "support of {} points exceeds {MAX_LP_SUPPORT}; use the H^-1 distance",
            support.len()
        )));
    }
    if net.iter().all(|w| *w == 0.0) {
        return Ok(0.0);
    }
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let phi: Vec<_> = net.iter().map(|w| lp.add_var(*w, (-1.0, 1.0))).collect();
    for i in 0..phi.len() {
        for j in 0..phi.len() {
            if i != j {
                let dist = torus_distance(support[i], support[j], d);
                if dist < 2.0 {
                    lp.add_constraint([(phi[i], 1.0), (phi[j], -1.0)], ComparisonOp::Le, dist);
                }
            }
        }
    }
    let sol = lp
        .solve()
        .map_err(|e| DiagnosticsError::Lp(e.to_string()))?
        .into_solution()
        .map_err(|_| DiagnosticsError::Lp("solve interrupted".into()))?;
    Ok(sol.objective().max(0.0))
}

/// ‖μ - ν‖_{H⁻¹} after depositing each atom on its nearest grid node;
/// the measures must carry equal mass.
pub fn h_minus1_distance(mu: &DiscreteMeasure, nu: &DiscreteMeasure, grid: &TorusGrid) -> Result<f64, DiagnosticsError> {
    if (mu.mass() - nu.mass()).abs() > 1e-12 * mu.mass().abs().max(1.0) {
        return Err(DiagnosticsError::Domain("H^-1 distance needs equal masses".into()));
    }
    let (n, d, dx) = (grid.n(), grid.dim(), grid.dx());
    let mut vals = vec![0.0; grid.len()];
    let node = |c: f64| ((c.rem_euclid(2.0 * std::f64::consts::PI) / dx).round() as usize) % n;
    for (m, sign) in [(mu, 1.0), (nu, -1.0)] {
        for (p, w) in m.points.iter().zip(&m.weights) {
            let idx = if d == 1 { node(p[0]) } else { node(p[0]) * n + node(p[1]) };
            vals[idx] += sign * w / grid.cell_volume();
        }
    }
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    vals.iter_mut().for_each(|v| *v -= mean);
    Ok(h_minus1_norm(&SpectralScalar::from_values(grid, vals)?)?)
}
