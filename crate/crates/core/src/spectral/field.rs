use num_complex::Complex64;

use super::{SpectralError, TorusGrid};

/// Real scalar field on a [`TorusGrid`].
#[derive(Clone, Debug)]
pub struct SpectralScalar {
    grid: TorusGrid,
    values: Vec<f64>,
}

impl SpectralScalar {
    pub fn zeros(grid: &TorusGrid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: &TorusGrid, c: f64) -> Self {
        Self { grid: grid.clone(), values: vec![c; grid.len()] }
    }

    pub fn from_values(grid: &TorusGrid, values: Vec<f64>) -> Result<Self, SpectralError> {
        if values.len() != grid.len() {
            return Err(SpectralError::Shape { expected: grid.len(), got: values.len() });
        }
        Ok(Self { grid: grid.clone(), values })
    }

    /// Samples `f` at the grid points `(x1, x2)`; `x2` is 0 in one dimension.
    pub fn from_fn(grid: &TorusGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|i| {
                let [a, b] = grid.point(i);
                f(a, b)
            })
            .collect();
        Self { grid: grid.clone(), values }
    }

    pub fn from_spectrum(grid: &TorusGrid, spectrum: &[Complex64]) -> Self {
        Self { grid: grid.clone(), values: grid.inverse(spectrum) }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn spectrum(&self) -> Vec<Complex64> {
        self.grid.forward(&self.values)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Trapezoid (equivalently midpoint) rule for ∫ f dx over the torus.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Self { grid: self.grid.clone(), values }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// Spatial L² inner product.
    pub fn inner(&self, other: &Self) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum::<f64>() * self.grid.cell_volume()
    }

    /// Applies the 2/3 rule in place.
    pub fn dealias(&mut self) {
        let mut s = self.spectrum();
        self.grid.dealias(&mut s);
        self.values = self.grid.inverse(&s);
    }
}

/// d-component vector field on a [`TorusGrid`].
#[derive(Clone, Debug)]
pub struct SpectralVector {
    components: Vec<SpectralScalar>,
}

impl SpectralVector {
    pub fn zeros(grid: &TorusGrid) -> Self {
        Self { components: (0..grid.dim()).map(|_| SpectralScalar::zeros(grid)).collect() }
    }

    pub fn constant(grid: &TorusGrid, c: [f64; 2]) -> Self {
        Self { components: (0..grid.dim()).map(|a| SpectralScalar::constant(grid, c[a])).collect() }
    }

    pub fn from_components(components: Vec<SpectralScalar>) -> Result<Self, SpectralError> {
        let Some(first) = components.first() else {
            return Err(SpectralError::Shape { expected: 1, got: 0 });
        };
        let grid = first.grid().clone();
        if components.len() != grid.dim() || components.iter().any(|c| *c.grid() != grid) {
            return Err(SpectralError::Shape { expected: grid.dim(), got: components.len() });
        }
        Ok(Self { components })
    }

    pub fn from_fn(grid: &TorusGrid, f: impl Fn(f64, f64) -> [f64; 2]) -> Self {
        let components = (0..grid.dim())
            .map(|a| SpectralScalar::from_fn(grid, |x, y| f(x, y)[a]))
            .collect();
        Self { components }
    }

    pub fn grid(&self) -> &TorusGrid {
        self.components[0].grid()
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, a: usize) -> &SpectralScalar {
        &self.components[a]
    }

    pub fn component_mut(&mut self, a: usize) -> &mut SpectralScalar {
        &mut self.components[a]
    }

    pub fn components(&self) -> &[SpectralScalar] {
        &self.components
    }

    /// Vector at grid point `idx`; unused component is 0.
    pub fn at(&self, idx: usize) -> [f64; 2] {
        let mut out = [0.0; 2];
        for (a, c) in self.components.iter().enumerate() {
            out[a] = c.values()[idx];
        }
        out
    }

    pub fn map_components(&self, f: impl Fn(&SpectralScalar) -> SpectralScalar) -> Self {
        Self { components: self.components.iter().map(f).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        let components = self.components.iter().zip(&other.components).map(|(a, b)| a.add(b)).collect();
        Self { components }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let components = self.components.iter().zip(&other.components).map(|(a, b)| a.sub(b)).collect();
        Self { components }
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map_components(|s| s.scale(c))
    }

    /// Pointwise product with a scalar field.
    pub fn mul_scalar(&self, s: &SpectralScalar) -> Self {
        self.map_components(|c| c.mul(s))
    }

    /// Pointwise |v|².
    pub fn norm_sq_field(&self) -> SpectralScalar {
        let mut out = SpectralScalar::zeros(self.grid());
        for c in &self.components {
            for (o, v) in out.values_mut().iter_mut().zip(c.values()) {
                *o += v * v;
            }
        }
        out
    }

    /// Pointwise dot product.
    pub fn dot_field(&self, other: &Self) -> SpectralScalar {
        let mut out = SpectralScalar::zeros(self.grid());
        for (a, b) in self.components.iter().zip(&other.components) {
            for ((o, x), y) in out.values_mut().iter_mut().zip(a.values()).zip(b.values()) {
                *o += x * y;
            }
        }
        out
    }

    pub fn inner(&self, other: &Self) -> f64 {
        self.components.iter().zip(&other.components).map(|(a, b)| a.inner(b)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.norm_sq_field().max().sqrt()
    }

    pub fn mean(&self) -> [f64; 2] {
        let mut m = [0.0; 2];
        for (a, c) in self.components.iter().enumerate() {
            m[a] = c.mean();
        }
        m
    }

    pub fn dealias(&mut self) {
        self.components.iter_mut().for_each(SpectralScalar::dealias);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_within_machine_tolerance() {
        let g = TorusGrid::new(2, 32).unwrap();
        let f = SpectralScalar::from_fn(&g, |x, y| (x + 0.3).sin() * (2.0 * y).cos() + 0.1 * (5.0 * x).cos());
        let back = SpectralScalar::from_spectrum(&g, &f.spectrum());
        let err = f.sub(&back).max_abs() / f.max_abs();
        assert!(err <= 10.0 * f64::EPSILON * g.len() as f64);
    }

    #[test]
    fn integral_of_constant_is_area() {
        let g = TorusGrid::new(2, 8).unwrap();
        let f = SpectralScalar::constant(&g, 2.0);
        assert!((f.integral() - 2.0 * g.volume()).abs() < 1e-12);
    }

    #[test]
    fn vector_shape_is_checked() {
        let g = TorusGrid::new(2, 8).unwrap();
        assert!(SpectralVector::from_components(vec![SpectralScalar::zeros(&g)]).is_err());
    }
}
