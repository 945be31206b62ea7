use crate::spectral::{Snapshot, SpectralScalar, SpectralVector, TorusGrid, VelocityHeader};

use super::{KineticError, VelocityBox};

/// Running mass bookkeeping: everything that legitimately changes ∫∫f.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MassLedger {
    pub initial_mass: f64,
    /// Mass carried out of the velocity box.
    pub outflow: f64,
    /// Mass added by clamping negative values to zero.
    pub clamped: f64,
}

impl MassLedger {
    pub fn budget(&self) -> f64 {
        self.outflow + self.clamped
    }
}

/// Phase-space density on torus × velocity box; `values[x * n_v^d + v]`.
#[derive(Clone, Debug)]
pub struct DistributionFunction {
    grid: TorusGrid,
    vbox: VelocityBox,
    values: Vec<f64>,
    sigma: f64,
    epsilon: f64,
    pub ledger: MassLedger,
}

impl DistributionFunction {
    pub fn zeros(grid: &TorusGrid, vbox: VelocityBox, sigma: f64, epsilon: f64) -> Result<Self, KineticError> {
        if vbox.dim() != grid.dim() {
            return Err(KineticError::Config("velocity and space dimensions differ".into()));
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(KineticError::Config(format!("sigma must be non-negative, got {sigma}")));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(KineticError::Config(format!("epsilon must be positive, got {epsilon}")));
        }
        Ok(Self {
            grid: grid.clone(),
            vbox,
            values: vec![0.0; grid.len() * vbox.len()],
            sigma,
            epsilon,
            ledger: MassLedger::default(),
        })
    }

    /// Samples `f(x, ξ)` at every node and opens the mass ledger.
    pub fn from_fn(
        grid: &TorusGrid,
        vbox: VelocityBox,
        sigma: f64,
        epsilon: f64,
        f: impl Fn(usize, [f64; 2]) -> f64,
    ) -> Result<Self, KineticError> {
        let mut out = Self::zeros(grid, vbox, sigma, epsilon)?;
        let nv = vbox.len();
        for (x, col) in out.values.chunks_mut(nv).enumerate() {
            for (v, val) in col.iter_mut().enumerate() {
                *val = f(x, vbox.xi(v));
            }
        }
        out.reset_ledger();
        Ok(out)
    }

    /// Local Maxwellian ρ(2πσ)^{-d/2} exp(-|ξ-u|²/2σ) sampled on the grid.
    pub fn maxwellian(
        rho: &SpectralScalar,
        u: &SpectralVector,
        vbox: VelocityBox,
        sigma: f64,
        epsilon: f64,
    ) -> Result<Self, KineticError> {
        if !(sigma > 0.0) {
            return Err(KineticError::Domain(format!("Maxwellian needs sigma > 0, got {sigma}")));
        }
        let d = vbox.dim() as i32;
        let norm = (2.0 * std::f64::consts::PI * sigma).powf(-0.5 * d as f64);
        let r = rho.values();
        Self::from_fn(rho.grid(), vbox, sigma, epsilon, |x, xi| {
            let ux = u.at(x);
            let q = (xi[0] - ux[0]).powi(2) + (xi[1] - ux[1]).powi(2);
            r[x] * norm * (-q / (2.0 * sigma)).exp()
        })
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn vbox(&self) -> &VelocityBox {
        &self.vbox
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn column(&self, x: usize) -> &[f64] {
        let nv = self.vbox.len();
        &self.values[x * nv..(x + 1) * nv]
    }

    /// Phase-space volume element dx^d dξ^d.
    pub fn cell_volume(&self) -> f64 {
        self.grid.cell_volume() * self.vbox.cell_volume()
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_volume()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn reset_ledger(&mut self) {
        self.ledger = MassLedger { initial_mass: self.mass(), outflow: 0.0, clamped: 0.0 };
    }

    /// |M(0) - M(t)| minus what the ledger accounts for; ≤ 0 when consistent.
    pub fn unaccounted_mass(&self) -> f64 {
        (self.ledger.initial_mass - self.mass()).abs() - self.ledger.budget()
    }

    /// Sets negative values to zero and books the added mass; returns the pre-clamp minimum.
    pub fn clamp_negative(&mut self) -> f64 {
        let mut min = f64::INFINITY;
        let mut added = 0.0;
        for v in &mut self.values {
            min = min.min(*v);
            if *v < 0.0 {
                added -= *v;
                *v = 0.0;
            }
        }
        self.ledger.clamped += added * self.cell_volume();
        min
    }

    pub fn snapshot(&self) -> Snapshot {
        let mut s = Snapshot::new(&self.grid).with_raw("f", self.values.clone());
        s.velocity = Some(VelocityHeader { v_max: self.vbox.v_max(), n_v: self.vbox.n_v() });
        s
    }

    pub fn from_snapshot(s: &Snapshot, sigma: f64, epsilon: f64) -> Result<Self, KineticError> {
        let vh = s.velocity.ok_or_else(|| KineticError::Config("snapshot has no velocity box".into()))?;
        let grid = TorusGrid::new(s.d, s.n)?;
        let vbox = VelocityBox::new(s.d, vh.n_v, vh.v_max)?;
        let mut out = Self::zeros(&grid, vbox, sigma, epsilon)?;
        let data = s.field("f").ok_or_else(|| KineticError::Config("snapshot has no field `f`".into()))?;
        if data.len() != out.values.len() {
            return Err(KineticError::Config("snapshot size does not match its header".into()));
        }
        out.values.copy_from_slice(data);
        out.reset_ledger();
        Ok(out)
    }
}
