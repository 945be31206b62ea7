use rayon::prelude::*;

use crate::spectral::{SpectralScalar, SpectralVector};

use super::{DistributionFunction, KineticError};

/// Velocity moments of a distribution on the spatial grid.
#[derive(Clone, Debug)]
pub struct KineticMoments {
    pub rho: SpectralScalar,
    pub momentum: SpectralVector,
    /// `stress[a][b] = ∫ ξ_a ξ_b f dξ`.
    pub stress: Vec<Vec<SpectralScalar>>,
    /// ½ ∫∫ |ξ|² f.
    pub energy: f64,
}

/// Midpoint-rule velocity quadrature of 1, ξ and ξ⊗ξ.
pub fn compute_moments(f: &DistributionFunction) -> KineticMoments {
    let grid = f.grid().clone();
    let vb = *f.vbox();
    let d = grid.dim();
    let nv = vb.len();
    let w = vb.cell_volume();
    let xis: Vec<[f64; 2]> = (0..nv).map(|v| vb.xi(v)).collect();
    // per column: rho, J0, J1, S00, S01, S11
    let cols: Vec<[f64; 6]> = f
        .values()
        .par_chunks(nv)
        .map(|col| {
            let mut m = [0.0; 6];
            for (fv, xi) in col.iter().zip(&xis) {
                m[0] += fv;
                m[1] += fv * xi[0];
                m[2] += fv * xi[1];
                m[3] += fv * xi[0] * xi[0];
                m[4] += fv * xi[0] * xi[1];
                m[5] += fv * xi[1] * xi[1];
            }
            m.map(|v| v * w)
        })
        .collect();
    let field = |k: usize| {
        SpectralScalar::from_values(&grid, cols.iter().map(|m| m[k]).collect()).expect("one value per point")
    };
    let rho = field(0);
    let momentum = SpectralVector::from_components((0..d).map(|a| field(1 + a)).collect()).expect("d components");
    let stress = match d {
        1 => vec![vec![field(3)]],
        _ => vec![vec![field(3), field(4)], vec![field(4), field(5)]],
    };
    let energy = 0.5 * cols.iter().map(|m| m[3] + m[5]).sum::<f64>() * grid.cell_volume();
    KineticMoments { rho, momentum, stress, energy }
}

/// u_δ = ρu / (ρ + δ), pointwise.
pub fn regularized_velocity(m: &KineticMoments, delta: f64) -> Result<SpectralVector, KineticError> {
    if !(delta > 0.0) {
        return Err(KineticError::Contract(format!("velocity floor must be positive, got {delta}")));
    }
    let denom = m.rho.map(|r| r + delta);
    Ok(m.momentum.map_components(|j| j.zip_map(&denom, |a, b| a / b)))
}
