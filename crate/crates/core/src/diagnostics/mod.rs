//! Functionals of kinetic and limit states: free energy and dissipations,
//! the entropy-inequality residual, modulated energies, Maxwellian relative
//! entropy, stress defect, and distribution distances.

mod distance;
mod entropy;
mod modulated;

pub(crate) use entropy::residual_series as entropy_residual_series;
pub(crate) use modulated::modulated_parts;

pub use distance::{bl_distance_lp, h_minus1_distance, torus_distance, DiscreteMeasure, BL_SURROGATE_CONSTANT};
pub use entropy::{
    dissipation_d1, dissipation_d2, entropy_inequality_residual, free_energy, relative_entropy_scalar, EntropyResidual,
    MASK_FLOOR,
};
pub use modulated::{maxwellian, modulated_energy, rel_entropy_to_maxwellian, stress_defect, ModulatedEnergy, RelativeEntropy};

use crate::kinetic::KineticError;
use crate::spectral::SpectralError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DiagnosticsError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("problem too large for the exact solver: {0}")]
    Scale(String),
    #[error("Csiszar-Kullback bound violated: |f-M|_1^2 = {lhs:e} > {rhs:e}")]
    CsiszarKullback { lhs: f64, rhs: f64 },
    #[error("linear program failed: {0}")]
    Lp(String),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Kinetic(#[from] KineticError),
}

/// One time slice of every tracked functional.
#[derive(Clone, Copy, Debug, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass: f64,
    pub free_energy: f64,
    pub d1: f64,
    pub d2: f64,
    pub entropy_residual: f64,
    pub mod_energy: f64,
    pub coulomb_mod: f64,
    pub l2_u_diff: f64,
    pub l2_v_diff: f64,
    pub rel_entropy_maxwellian: f64,
    pub hminus1_rho: f64,
    pub stress_defect: f64,
}

impl DiagnosticsRecord {
    pub const COLUMNS: [&'static str; 13] = [
        "t",
        "mass",
        "free_energy",
        "d1",
        "d2",
        "entropy_residual",
        "mod_energy",
        "coulomb_mod",
        "l2_u_diff",
        "l2_v_diff",
        "rel_entropy_maxwellian",
        "hminus1_rho",
        "stress_defect",
    ];

    pub fn values(&self) -> [f64; 13] {
        [
            self.t,
            self.mass,
            self.free_energy,
            self.d1,
            self.d2,
            self.entropy_residual,
            self.mod_energy,
            self.coulomb_mod,
            self.l2_u_diff,
            self.l2_v_diff,
            self.rel_entropy_maxwellian,
            self.hminus1_rho,
            self.stress_defect,
        ]
    }

    pub fn from_values(v: &[f64]) -> Option<Self> {
        let v: [f64; 13] = v.try_into().ok()?;
        Some(Self {
            t: v[0],
            mass: v[1],
            free_energy: v[2],
            d1: v[3],
            d2: v[4],
            entropy_residual: v[5],
            mod_energy: v[6],
            coulomb_mod: v[7],
            l2_u_diff: v[8],
            l2_v_diff: v[9],
            rel_entropy_maxwellian: v[10],
            hminus1_rho: v[11],
            stress_defect: v[12],
        })
    }
}
