use super::KineticError;

/// Uniform cell-centred velocity grid on [-V, V)^d.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VelocityBox {
    d: usize,
    n_v: usize,
    v_max: f64,
}

impl VelocityBox {
    pub fn new(d: usize, n_v: usize, v_max: f64) -> Result<Self, KineticError> {
        if !(1..=2).contains(&d) {
            return Err(KineticError::Config(format!("velocity dimension must be 1 or 2, got {d}")));
        }
        if n_v < 4 || !n_v.is_multiple_of(2) {
            return Err(KineticError::Config(format!("n_v must be even and at least 4, got {n_v}")));
        }
        if !(v_max > 0.0 && v_max.is_finite()) {
            return Err(KineticError::Config(format!("velocity half-width must be positive, got {v_max}")));
        }
        Ok(Self { d, n_v, v_max })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn n_v(&self) -> usize {
        self.n_v
    }

    pub fn v_max(&self) -> f64 {
        self.v_max
    }

    /// Velocity nodes per column, n_v^d.
    pub fn len(&self) -> usize {
        self.n_v.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.v_max / self.n_v as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.d as i32)
    }

    /// 1D node coordinate, -V + (i + 1/2) Δξ.
    pub fn node(&self, i: usize) -> f64 {
        -self.v_max + (i as f64 + 0.5) * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_v).map(|i| self.node(i)).collect()
    }

    /// Velocity of flat index `v` (first component slowest); unused component 0.
    pub fn xi(&self, v: usize) -> [f64; 2] {
        match self.d {
            1 => [self.node(v), 0.0],
            _ => [self.node(v / self.n_v), self.node(v % self.n_v)],
        }
    }
}
