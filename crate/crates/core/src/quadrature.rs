//! Gauss–Legendre rules and the weighted node sets used for integrals of
//! log(1 − |r|²) against Cauchy-type kernels.

use serde::{Deserialize, Serialize};

use crate::maps::C64;

/// Nodes and weights of the n-point Gauss–Legendre rule on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p1 = t;
                p0 = 1.0;
            }
            dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
            let dt = p1 / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -t;
        x[n - 1 - i] = t;
        w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Gauss–Legendre nodes in u on panels [u_e 2^{−k−1}, u_e 2^{−k}] and their
/// mirror images, covering 0 < |u| < u_e down to |u| ≈ `floor`.
pub fn graded_window(u_edge: f64, floor: f64, order: usize) -> Vec<(f64, f64)> {
    let (t, w) = gauss_legendre(order);
    let mut out = Vec::new();
    let mut b = u_edge;
    while b > floor {
        let a = 0.5 * b;
        for (ti, wi) in t.iter().zip(&w) {
            let u = 0.5 * (a + b) + 0.5 * (b - a) * ti;
            out.push((u, 0.5 * (b - a) * wi));
            out.push((-u, 0.5 * (b - a) * wi));
        }
        b = a;
    }
    out.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
    out
}

/// Samples g(s) = log(1 − |r(s)|²) with quadrature weights for ds, split
/// into the two half-lines. Each half covers δ₀ ≤ |s| ≤ 1/δ₀ including the
/// window around |s| = 1.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LogWeight {
    pub s: Vec<f64>,
    pub w: Vec<f64>,
    pub g: Vec<f64>,
    /// Extent [δ₀, 1/δ₀] of each half-line covered by the nodes.
    pub range: (f64, f64),
}

impl LogWeight {
    pub fn push(&mut self, s: f64, w: f64, g: f64) {
        self.s.push(s);
        self.w.push(w);
        self.g.push(g);
    }

    pub fn sort(&mut self) {
        let mut idx: Vec<usize> = (0..self.s.len()).collect();
        idx.sort_by(|&a, &b| self.s[a].partial_cmp(&self.s[b]).unwrap());
        self.s = idx.iter().map(|&i| self.s[i]).collect();
        self.w = idx.iter().map(|&i| self.w[i]).collect();
        self.g = idx.iter().map(|&i| self.g[i]).collect();
    }

    /// ∫ g(s) k(s) ds over the positive nodes.
    pub fn positive(&self, k: impl Fn(f64) -> C64) -> C64 {
        self.sum(|s| s > 0.0, k)
    }

    /// ∫ g(s) k(s) ds over all nodes.
    pub fn line(&self, k: impl Fn(f64) -> C64) -> C64 {
        self.sum(|_| true, k)
    }

    fn sum(&self, keep: impl Fn(f64) -> bool, k: impl Fn(f64) -> C64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.s.len() {
            if keep(self.s[i]) && self.g[i] != 0.0 {
                acc += self.w[i] * self.g[i] * k(self.s[i]);
            }
        }
        acc
    }

    /// ∫₀^∞ g(s)/(s − z) ds, with the singular part subtracted when z is
    /// close to the positive axis so that boundary values are resolved.
    pub fn cauchy_positive(&self, z: C64) -> C64 {
        let (lo, hi) = self.positive_range();
        let near = z.re > lo && z.re < hi && z.im.abs() < 0.05 * z.re.max(1.0);
        if !near {
            return self.positive(|s| (C64::new(s, 0.0) - z).inv());
        }
        let g0 = self.interpolate_positive(z.re);
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.s.len() {
            let s = self.s[i];
            if s > 0.0 {
                acc += self.w[i] * (self.g[i] - g0) / (C64::new(s, 0.0) - z);
            }
        }
        let span = (C64::new(hi, 0.0) - z).ln() - (C64::new(lo, 0.0) - z).ln();
        acc + g0 * span
    }

    fn positive_range(&self) -> (f64, f64) {
        self.range
    }

    /// Local Lagrange interpolation of g in u = log s on positive nodes.
    pub fn interpolate_positive(&self, s0: f64) -> f64 {
        let pos: Vec<(f64, f64)> =
            self.s.iter().zip(&self.g).filter(|(s, _)| **s > 0.0).map(|(s, g)| (s.ln(), *g)).collect();
        if pos.is_empty() {
            return 0.0;
        }
        let u0 = s0.ln();
        let j = pos.partition_point(|p| p.0 < u0);
        let lo = j.saturating_sub(3);
        let hi = (lo + 6).min(pos.len());
        let lo = hi.saturating_sub(6);
        let pts = &pos[lo..hi];
        let mut acc = 0.0;
        for (a, pa) in pts.iter().enumerate() {
            let mut l = 1.0;
            for (b, pb) in pts.iter().enumerate() {
                if a != b {
                    l *= (u0 - pb.0) / (pa.0 - pb.0);
                }
            }
            acc += l * pa.1;
        }
        acc
    }
}
