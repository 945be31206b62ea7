use num_complex::Complex64;
use rayon::prelude::*;

use super::DistributionFunction;

/// Free streaming f(x, ξ) ← f(x - ξ dt, ξ), one Fourier phase shift per
/// velocity slice.
pub fn transport_step(f: &mut DistributionFunction, dt: f64) {
    if dt == 0.0 {
        return;
    }
    let grid = f.grid().clone();
    let vb = *f.vbox();
    let nx = grid.len();
    let nv = vb.len();
    let kvec: Vec<[f64; 2]> = (0..nx).map(|i| grid.wavevector(i)).collect();
    let mut slices = vec![0.0; nx * nv];
    for (x, col) in f.values().chunks(nv).enumerate() {
        for (v, &val) in col.iter().enumerate() {
            slices[v * nx + x] = val;
        }
    }
    slices.par_chunks_mut(nx).enumerate().for_each(|(v, slice)| {
        let xi = vb.xi(v);
        let mut buf: Vec<Complex64> = slice.iter().map(|&r| Complex64::new(r, 0.0)).collect();
        grid.fft_in_place(&mut buf, false);
        for (c, k) in buf.iter_mut().zip(&kvec) {
            let phase = -(k[0] * xi[0] + k[1] * xi[1]) * dt;
            *c *= Complex64::from_polar(1.0, phase);
        }
        grid.fft_in_place(&mut buf, true);
        let scale = 1.0 / nx as f64;
        for (s, c) in slice.iter_mut().zip(&buf) {
            *s = c.re * scale;
        }
    });
    for (x, col) in f.values_mut().chunks_mut(nv).enumerate() {
        for (v, val) in col.iter_mut().enumerate() {
            *val = slices[v * nx + x];
        }
    }
}
