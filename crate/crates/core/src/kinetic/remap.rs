//! Conservative shift of a velocity line by a uniform displacement, through
//! a monotone cubic Hermite interpolant of the cumulative mass. Positive
//! input stays positive, nothing flows in through the box faces and what
//! leaves is returned.

/// Tangents at the n+1 cell edges, limited so that each cubic piece of the
/// cumulative mass stays monotone (m ≤ 3·min of the adjacent densities).
fn edge_tangents(f: &[f64]) -> Vec<f64> {
    let n = f.len();
    let mut m = vec![0.0; n + 1];
    for k in 1..n {
        let (a, b) = (f[k - 1], f[k]);
        if a > 0.0 && b > 0.0 {
            m[k] = (0.5 * (a + b)).min(3.0 * a.min(b));
        }
    }
    m
}

struct Cumulative {
    c: Vec<f64>,
    m: Vec<f64>,
    lo: f64,
    h: f64,
}

impl Cumulative {
    fn eval(&self, x: f64) -> f64 {
        let n = self.c.len() - 1;
        let t = (x - self.lo) / self.h;
        if t <= 0.0 {
            return 0.0;
        }
        if t >= n as f64 {
            return self.c[n];
        }
        let k = (t.floor() as usize).min(n - 1);
        let s = t - k as f64;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.c[k] + h01 * self.c[k + 1] + self.h * (h10 * self.m[k] + h11 * self.m[k + 1])
    }
}

/// Replaces `line` (densities at n cell centres of width `h` starting at
/// `lo`) by its shift by `delta`; returns the lost Σ f·h.
pub fn shift_line(line: &mut [f64], lo: f64, h: f64, delta: f64, scratch: &mut Vec<f64>) -> f64 {
    let n = line.len();
    let mut c = vec![0.0; n + 1];
    for k in 0..n {
        c[k + 1] = c[k] + line[k] * h;
    }
    let cum = Cumulative { m: edge_tangents(line), c, lo, h };
    scratch.clear();
    scratch.extend((0..=n).map(|k| cum.eval(lo + k as f64 * h - delta)));
    let total = cum.c[n];
    let kept = scratch[n] - scratch[0];
    for k in 0..n {
        line[k] = (scratch[k + 1] - scratch[k]) / h;
    }
    total - kept
}
