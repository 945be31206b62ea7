//! Exact velocity-space substeps. Every ξ-only substep of the splitting
//! (alignment/Fokker-Planck, drag, uniform force) maps a particle velocity
//! η to `scale·η + offset` plus independent Gaussian noise of variance
//! `var`, so each is applied per x-column as a linear map on the velocity
//! nodes, and consecutive ones compose in closed form.

use rayon::prelude::*;

use super::{DistributionFunction, VelocityBox};

/// η ↦ scale·η + offset + N(0, var), per velocity component.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineGauss {
    pub scale: f64,
    pub offset: f64,
    pub var: f64,
}

impl AffineGauss {
    pub const IDENTITY: Self = Self { scale: 1.0, offset: 0.0, var: 0.0 };

    /// Ornstein-Uhlenbeck flow ∂f = r∇·(σ∇f - (c-ξ)f) over `rate_time = r·t`.
    pub fn ou(rate_time: f64, center: f64, sigma: f64) -> Self {
        let a = (-rate_time).exp();
        Self { scale: a, offset: (1.0 - a) * center, var: sigma * (1.0 - a * a) }
    }

    pub fn shift(delta: f64) -> Self {
        Self { scale: 1.0, offset: delta, var: 0.0 }
    }

    /// `self` followed by `next`.
    pub fn then(self, next: Self) -> Self {
        Self {
            scale: next.scale * self.scale,
            offset: next.scale * self.offset + next.offset,
            var: next.scale * next.scale * self.var + next.var,
        }
    }

    /// Image of the mean of a velocity distribution.
    pub fn apply_mean(&self, m: f64) -> f64 {
        self.scale * m + self.offset
    }
}

/// How a velocity map is discretized on the node grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelKind {
    /// Periodized band-limited Gaussian; spectrally accurate for resolved,
    /// box-decaying densities, conserves mass exactly.
    BandLimited,
    /// Linear (cloud-in-cell) deposit of each node's mass at its image;
    /// positive, conserves mass and mean exactly, no noise.
    Deposit,
}

impl KernelKind {
    pub fn for_sigma(sigma: f64) -> Self {
        if sigma > 0.0 {
            Self::BandLimited
        } else {
            Self::Deposit
        }
    }
}

/// Dense n_v × n_v transfer matrix, `m[i * n_v + j]` = weight from node j to node i.
pub fn line_matrix(vb: &VelocityBox, map: AffineGauss, kind: KernelKind) -> Vec<f64> {
    let n = vb.n_v();
    let h = vb.spacing();
    let v = vb.v_max();
    let mut m = vec![0.0; n * n];
    match kind {
        KernelKind::BandLimited => {
            let half = n / 2;
            let k1 = std::f64::consts::PI / v;
            let g: Vec<f64> = (0..=half).map(|q| (-0.5 * map.var * (k1 * q as f64).powi(2)).exp()).collect();
            let pref = h / (2.0 * v);
            for j in 0..n {
                let y = map.scale * vb.node(j) + map.offset;
                for i in 0..n {
                    let theta = k1 * (vb.node(i) - y);
                    let c1 = theta.cos();
                    let (mut prev, mut cur) = (1.0, c1);
                    let mut acc = 1.0;
                    for gq in &g[1..half] {
                        acc += 2.0 * gq * cur;
                        let next = 2.0 * c1 * cur - prev;
                        prev = cur;
                        cur = next;
                    }
                    acc += g[half] * cur;
                    m[i * n + j] = pref * acc;
                }
            }
        }
        KernelKind::Deposit => {
            for j in 0..n {
                let y = map.scale * vb.node(j) + map.offset;
                if !(y >= -v && y < v) {
                    continue;
                }
                let t = (y - vb.node(0)) / h;
                if t <= 0.0 {
                    m[j] = 1.0;
                } else if t >= (n - 1) as f64 {
                    m[(n - 1) * n + j] = 1.0;
                } else {
                    let l = t.floor() as usize;
                    let w = t - l as f64;
                    m[l * n + j] = 1.0 - w;
                    m[(l + 1) * n + j] = w;
                }
            }
        }
    }
    m
}

fn column_sums(m: &[f64], n: usize) -> Vec<f64> {
    let mut s = vec![0.0; n];
    for row in m.chunks(n) {
        for (a, b) in s.iter_mut().zip(row) {
            *a += b;
        }
    }
    s
}

/// out = M · x
fn matvec(m: &[f64], x: &[f64], out: &mut [f64]) {
    let n = x.len();
    for (o, row) in out.iter_mut().zip(m.chunks(n)) {
        *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
    }
}

/// Applies per-axis maps to one velocity column; returns the node-weight
/// (Σ f · cell volume in ξ) that left the box.
fn apply_column(vb: &VelocityBox, col: &mut [f64], maps: [AffineGauss; 2], kind: KernelKind, scratch: &mut Vec<f64>) -> f64 {
    let n = vb.n_v();
    let w = vb.cell_volume();
    if vb.dim() == 1 {
        let m = line_matrix(vb, maps[0], kind);
        let lost: f64 = column_sums(&m, n).iter().zip(col.iter()).map(|(s, f)| (1.0 - s) * f).sum();
        scratch.resize(n, 0.0);
        matvec(&m, col, scratch);
        col.copy_from_slice(scratch);
        return lost * w;
    }
    let m0 = line_matrix(vb, maps[0], kind);
    let m1 = line_matrix(vb, maps[1], kind);
    let s0 = column_sums(&m0, n);
    let s1 = column_sums(&m1, n);
    // transpose of m1 so the axis-1 pass is a sequence of contiguous axpys
    let mut m1t = vec![0.0; n * n];
    for l in 0..n {
        for j in 0..n {
            m1t[j * n + l] = m1[l * n + j];
        }
    }
    scratch.clear();
    scratch.resize(n * n, 0.0);
    let mut lost = 0.0;
    // axis 1 (fast index)
    for i in 0..n {
        let src = &col[i * n..(i + 1) * n];
        let dst = &mut scratch[i * n..(i + 1) * n];
        for (j, &fv) in src.iter().enumerate() {
            if fv == 0.0 {
                continue;
            }
            lost += (1.0 - s1[j]) * fv;
            for (d, mv) in dst.iter_mut().zip(&m1t[j * n..(j + 1) * n]) {
                *d += fv * mv;
            }
        }
    }
    // axis 0 (slow index)
    col.iter_mut().for_each(|v| *v = 0.0);
    for j in 0..n {
        let src = &scratch[j * n..(j + 1) * n];
        lost += (1.0 - s0[j]) * src.iter().sum::<f64>();
        for i in 0..n {
            let wgt = m0[i * n + j];
            if wgt == 0.0 {
                continue;
            }
            for (d, s) in col[i * n..(i + 1) * n].iter_mut().zip(src) {
                *d += wgt * s;
            }
        }
    }
    lost * w
}

/// Applies `maps[x]` to every column of `f`, books outflow in the ledger
/// and returns the outflow mass.
pub fn apply_velocity_maps(f: &mut DistributionFunction, maps: &[[AffineGauss; 2]], kind: KernelKind) -> f64 {
    let vb = *f.vbox();
    let nv = vb.len();
    let dx = f.grid().cell_volume();
    let lost: f64 = f
        .values_mut()
        .par_chunks_mut(nv)
        .zip(maps.par_iter())
        .map_init(Vec::new, |scratch, (col, m)| apply_column(&vb, col, *m, kind, scratch))
        .collect::<Vec<f64>>()
        .iter()
        .sum::<f64>()
        * dx;
    f.ledger.outflow += lost;
    lost
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composition_matches_sequential_moments() {
        let a = AffineGauss::ou(0.3, 1.0, 2.0);
        let b = AffineGauss::shift(0.25);
        let c = a.then(b);
        // mean m -> a -> b
        let m = -0.7;
        assert!((c.apply_mean(m) - b.apply_mean(a.apply_mean(m))).abs() < 1e-15);
        // variance s -> scale² s + var
        let s = 0.4;
        let seq = b.scale.powi(2) * (a.scale.powi(2) * s + a.var) + b.var;
        assert!((c.scale.powi(2) * s + c.var - seq).abs() < 1e-15);
    }

    #[test]
    fn identity_maps_are_identity_matrices() {
        let vb = VelocityBox::new(1, 16, 4.0).unwrap();
        for kind in [KernelKind::BandLimited, KernelKind::Deposit] {
            let m = line_matrix(&vb, AffineGauss::IDENTITY, kind);
            for i in 0..16 {
                for j in 0..16 {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((m[i * 16 + j] - want).abs() < 1e-13, "{kind:?} {i} {j}");
                }
            }
        }
    }

    #[test]
    fn band_limited_columns_sum_to_one() {
        let vb = VelocityBox::new(1, 32, 8.0).unwrap();
        let m = line_matrix(&vb, AffineGauss { scale: 0.37, offset: 0.9, var: 0.3 }, KernelKind::BandLimited);
        for s in column_sums(&m, 32) {
            assert!((s - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn deposit_preserves_mean_exactly() {
        let vb = VelocityBox::new(1, 32, 4.0).unwrap();
        let map = AffineGauss { scale: 0.5, offset: 0.3, var: 0.0 };
        let m = line_matrix(&vb, map, KernelKind::Deposit);
        for j in 4..28 {
            let mean: f64 = (0..32).map(|i| m[i * 32 + j] * vb.node(i)).sum();
            assert!((mean - map.apply_mean(vb.node(j))).abs() < 1e-13);
        }
    }
}
