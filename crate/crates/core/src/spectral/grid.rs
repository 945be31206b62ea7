use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::SpectralError;

struct Plans {
    d: usize,
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Uniform periodic grid on [0, 2π)^d, d ∈ {1, 2}, with cached FFT plans.
///
/// Cheap to clone; clones share the plans. Fields are stored row-major with
/// the first coordinate varying slowest (`idx = i * n + j`).
#[derive(Clone)]
pub struct TorusGrid {
    plans: Arc<Plans>,
}

impl fmt::Debug for TorusGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TorusGrid")
            .field("d", &self.plans.d)
            .field("n", &self.plans.n)
            .finish()
    }
}

impl PartialEq for TorusGrid {
    fn eq(&self, other: &Self) -> bool {
        self.plans.d == other.plans.d && self.plans.n == other.plans.n
    }
}

impl TorusGrid {
    pub fn new(d: usize, n: usize) -> Result<Self, SpectralError> {
        if !(1..=2).contains(&d) {
            return Err(SpectralError::Config(format!("spatial dimension must be 1 or 2, got {d}")));
        }
        if n < 8 || !n.is_multiple_of(2) {
            return Err(SpectralError::Config(format!(
                "points per dimension must be even and at least 8, got {n}"
            )));
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        Ok(Self { plans: Arc::new(Plans { d, n, forward, inverse }) })
    }

    pub fn dim(&self) -> usize {
        self.plans.d
    }

    pub fn n(&self) -> usize {
        self.plans.n
    }

    /// Number of grid points, n^d.
    pub fn len(&self) -> usize {
        self.plans.n.pow(self.plans.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        2.0 * PI / self.plans.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(self.plans.d as i32)
    }

    /// Lebesgue measure of the torus, (2π)^d.
    pub fn volume(&self) -> f64 {
        (2.0 * PI).powi(self.plans.d as i32)
    }

    /// Per-axis integer indices of a flat index; unused axes are 0.
    pub fn split_index(&self, idx: usize) -> [usize; 2] {
        let n = self.plans.n;
        match self.plans.d {
            1 => [idx, 0],
            _ => [idx / n, idx % n],
        }
    }

    pub fn point(&self, idx: usize) -> [f64; 2] {
        let [i, j] = self.split_index(idx);
        let h = self.dx();
        [i as f64 * h, j as f64 * h]
    }

    /// Signed wavenumber of FFT bin `m`; the Nyquist bin maps to -n/2.
    pub fn wavenumber(&self, m: usize) -> f64 {
        let n = self.plans.n;
        if m < n / 2 {
            m as f64
        } else {
            m as f64 - n as f64
        }
    }

    pub fn wavevector(&self, idx: usize) -> [f64; 2] {
        let [a, b] = self.split_index(idx);
        match self.plans.d {
            1 => [self.wavenumber(a), 0.0],
            _ => [self.wavenumber(a), self.wavenumber(b)],
        }
    }

    pub fn k_squared(&self, idx: usize) -> f64 {
        let [a, b] = self.wavevector(idx);
        a * a + b * b
    }

    /// Wavevector used for first derivatives: the Nyquist component is zeroed
    /// so that derivatives of real fields stay real.
    pub fn derivative_wavevector(&self, idx: usize) -> [f64; 2] {
        let n = self.plans.n;
        let [a, b] = self.split_index(idx);
        let ka = if a == n / 2 { 0.0 } else { self.wavenumber(a) };
        let kb = if self.plans.d == 2 && b != n / 2 { self.wavenumber(b) } else { 0.0 };
        [ka, kb]
    }

    /// 2/3-rule mask: true if the mode survives dealiasing.
    pub fn keeps_mode(&self, idx: usize) -> bool {
        let cut = self.plans.n as f64 / 3.0;
        let [a, b] = self.wavevector(idx);
        a.abs() <= cut && b.abs() <= cut
    }

    pub fn dealias(&self, spectrum: &mut [Complex64]) {
        for (idx, c) in spectrum.iter_mut().enumerate() {
            if !self.keeps_mode(idx) {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// Unnormalized in-place d-dimensional DFT.
    pub fn fft_in_place(&self, data: &mut [Complex64], inverse: bool) {
        let p = &*self.plans;
        let plan = if inverse { &p.inverse } else { &p.forward };
        plan.process(data);
        if p.d == 2 {
            let n = p.n;
            let mut t = vec![Complex64::new(0.0, 0.0); n * n];
            transpose(data, &mut t, n);
            plan.process(&mut t);
            transpose(&t, data, n);
        }
    }

    /// Fourier coefficients in the convention f̂_k = (2π)^{-d} ∫ f e^{-ik·x}.
    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        debug_assert_eq!(values.len(), self.len());
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft_in_place(&mut buf, false);
        let scale = 1.0 / self.len() as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
        buf
    }

    /// Real part of the inverse transform of coefficients in the forward convention.
    pub fn inverse(&self, spectrum: &[Complex64]) -> Vec<f64> {
        let mut buf = spectrum.to_vec();
        self.fft_in_place(&mut buf, true);
        buf.into_iter().map(|c| c.re).collect()
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in 0..n {
            dst[j * n + i] = src[i * n + j];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_grids() {
        assert!(TorusGrid::new(2, 6).is_err());
        assert!(TorusGrid::new(2, 9).is_err());
        assert!(TorusGrid::new(3, 8).is_err());
        assert!(TorusGrid::new(1, 8).is_ok());
    }

    #[test]
    fn single_mode_coefficients() {
        let g = TorusGrid::new(2, 16).unwrap();
        let vals: Vec<f64> = (0..g.len()).map(|i| g.point(i)[0].cos()).collect();
        let s = g.forward(&vals);
        // cos(x1) has coefficient 1/2 at k = (±1, 0)
        assert!((s[16].re - 0.5).abs() < 1e-14);
        assert!((s[15 * 16].re - 0.5).abs() < 1e-14);
        let back = g.inverse(&s);
        for (a, b) in vals.iter().zip(&back) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn nyquist_has_negative_wavenumber_and_zero_derivative_symbol() {
        let g = TorusGrid::new(1, 8).unwrap();
        assert_eq!(g.wavenumber(4), -4.0);
        assert_eq!(g.derivative_wavevector(4), [0.0, 0.0]);
        assert!(!g.keeps_mode(3));
        assert!(g.keeps_mode(2));
    }
}
