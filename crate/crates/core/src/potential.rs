//! Potentials q(x): closed-form builtins and sampled grid functions made
//! evaluable at arbitrary x.

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::grid::{GridFunction, SpatialGrid};
use crate::maps::C64;
use crate::nsoliton::{one_soliton, SolitonSpec};

/// Anything the Zakharov–Shabat integrator can evaluate.
pub trait Potential: Sync {
    fn eval(&self, x: f64) -> C64;

    /// q(−∞); unit modulus. q(+∞) = 1 throughout.
    fn left_limit(&self) -> C64;

    /// An interval outside of which q equals its limits to ~1e−13.
    fn support(&self) -> (f64, f64);
}

/// Smooth bump supported on (c − w, c + w): exp(1 − 1/(1 − y²)), peak 1.
pub fn compact_bump(x: f64, center: f64, half_width: f64) -> f64 {
    let y = (x - center) / half_width;
    if y.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - y * y)).exp()
    }
}

/// The builtin initial data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Builtin {
    /// tanh x.
    BlackSoliton,
    /// The one-soliton with pole e^{iθ} centred at x0, at t = 0.
    DarkSoliton {
        theta: f64,
        #[serde(default)]
        x0: f64,
    },
    /// Reflectionless data evaluated at time t.
    Nsoliton {
        spec: SolitonSpec,
        #[serde(default)]
        t: f64,
    },
    /// tanh x + A exp(−x²/σ²).
    TanhGaussian { amplitude: f64, sigma: f64 },
    /// tanh x + (a_re + i a_im)·p(x)·bump, with p(x) = 1 for an even bump
    /// and p(x) = −x for an odd one.
    TanhCompactBump {
        amp_re: f64,
        amp_im: f64,
        #[serde(default)]
        center: f64,
        half_width: f64,
        #[serde(default)]
        odd: bool,
    },
}

impl Builtin {
    /// The perturbation part of `TanhCompactBump` without its amplitude.
    pub fn bump_profile(center: f64, half_width: f64, odd: bool, x: f64) -> f64 {
        let b = compact_bump(x, center, half_width);
        if odd {
            -(x - center) * b
        } else {
            b
        }
    }

    pub fn sample(&self, grid: SpatialGrid) -> GridFunction {
        GridFunction::from_fn(grid, |x| self.eval(x))
    }
}

impl Potential for Builtin {
    fn eval(&self, x: f64) -> C64 {
        match self {
            Builtin::BlackSoliton => C64::new(x.tanh(), 0.0),
            Builtin::DarkSoliton { theta, x0 } => one_soliton(x, 0.0, C64::from_polar(1.0, *theta), *x0),
            Builtin::Nsoliton { spec, t } => spec.eval(x, *t).unwrap_or(C64::new(f64::NAN, 0.0)),
            Builtin::TanhGaussian { amplitude, sigma } => {
                C64::new(x.tanh() + amplitude * (-(x / sigma).powi(2)).exp(), 0.0)
            }
            Builtin::TanhCompactBump { amp_re, amp_im, center, half_width, odd } => {
                C64::new(x.tanh(), 0.0) + C64::new(*amp_re, *amp_im) * Self::bump_profile(*center, *half_width, *odd, x)
            }
        }
    }

    fn left_limit(&self) -> C64 {
        match self {
            Builtin::DarkSoliton { theta, .. } => C64::from_polar(1.0, 2.0 * theta),
            Builtin::Nsoliton { spec, .. } => spec.left_limit(),
            _ => C64::new(-1.0, 0.0),
        }
    }

    fn support(&self) -> (f64, f64) {
        // tanh reaches ±1 to 1e−14 at |x| ≈ 16.5
        match self {
            Builtin::BlackSoliton => (-17.0, 17.0),
            Builtin::DarkSoliton { theta, x0 } => {
                let w = 17.0 / theta.sin().max(1e-3);
                (x0 - w, x0 + w)
            }
            Builtin::Nsoliton { spec, t } => spec.support(*t),
            Builtin::TanhGaussian { sigma, .. } => {
                let w = 17.0f64.max(6.0 * sigma.abs());
                (-w, w)
            }
            Builtin::TanhCompactBump { center, half_width, .. } => {
                (-17.0f64.min(center - half_width), 17.0f64.max(center + half_width))
            }
        }
    }
}

/// The smooth background joining q(−∞) = q₋ to q(+∞) = 1:
/// ((1 + q₋) + (1 − q₋) tanh x)/2.
pub fn background(left: C64, x: f64) -> C64 {
    0.5 * ((1.0 + left) + (1.0 - left) * x.tanh())
}

/// Second derivative of [`background`].
pub fn background_xx(left: C64, x: f64) -> C64 {
    let s = 1.0 / x.cosh();
    0.5 * (1.0 - left) * (-2.0 * s * s * x.tanh())
}

/// Unit-modulus estimate of q(−∞) from the leftmost sample.
pub fn left_limit_of(q: &GridFunction) -> C64 {
    let v = q.values[0];
    if v.norm() > 0.0 {
        v / v.norm()
    } else {
        C64::new(-1.0, 0.0)
    }
}

/// A sampled field made evaluable anywhere: v = q − background is refined
/// spectrally (zero padding) and then interpolated by local Lagrange
/// polynomials; the background is added back in closed form.
#[derive(Debug, Clone)]
pub struct SampledPotential {
    left: C64,
    x0: f64,
    h: f64,
    v: Vec<C64>,
    support: (f64, f64),
}

const REFINE: usize = 8;
const STENCIL: usize = 6;

impl SampledPotential {
    pub fn new(q: &GridFunction) -> Self {
        Self::with_left_limit(q, left_limit_of(q))
    }

    pub fn with_left_limit(q: &GridFunction, left: C64) -> Self {
        let g = q.grid;
        let n = g.n;
        let mut v: Vec<C64> = (0..n).map(|j| q.values[j] - background(left, g.x(j))).collect();

        let m = n * REFINE;
        let mut planner = FftPlanner::new();
        planner.plan_fft_forward(n).process(&mut v);
        let mut padded = vec![C64::new(0.0, 0.0); m];
        let half = n / 2;
        padded[..half].copy_from_slice(&v[..half]);
        padded[m - half + 1..].copy_from_slice(&v[half + 1..]);
        // split the Nyquist coefficient evenly between ±k
        padded[half] = 0.5 * v[half];
        padded[m - half] = 0.5 * v[half];
        planner.plan_fft_inverse(m).process(&mut padded);
        let scale = 1.0 / n as f64;
        padded.iter_mut().for_each(|c| *c *= scale);

        let tol = 1e-13;
        let hf = g.h() / REFINE as f64;
        let first = padded.iter().position(|c| c.norm() > tol);
        let last = padded.iter().rposition(|c| c.norm() > tol);
        let support = match (first, last) {
            (Some(a), Some(b)) => {
                let lo = (g.x_min + a as f64 * hf - 1.0).max(g.x_min);
                let hi = (g.x_min + b as f64 * hf + 1.0).min(g.x_max - g.h());
                // the background itself settles by |x| ≈ 17
                (lo.min(-17.0).max(g.x_min), hi.max(17.0).min(g.x_max - g.h()))
            }
            _ => ((-17.0f64).max(g.x_min), 17.0f64.min(g.x_max - g.h())),
        };
        Self { left, x0: g.x_min, h: hf, v: padded, support }
    }

    fn v_at(&self, x: f64) -> C64 {
        let m = self.v.len();
        let p = (x - self.x0) / self.h;
        let j = p.floor() as i64;
        let start = j - (STENCIL as i64 / 2 - 1);
        if start < 0 || start + STENCIL as i64 > m as i64 {
            return C64::new(0.0, 0.0);
        }
        let mut acc = C64::new(0.0, 0.0);
        for a in 0..STENCIL {
            let pa = (start + a as i64) as f64;
            let mut l = 1.0;
            for b in 0..STENCIL {
                if a != b {
                    let pb = (start + b as i64) as f64;
                    l *= (p - pb) / (pa - pb);
                }
            }
            acc += l * self.v[(start + a as i64) as usize];
        }
        acc
    }
}

impl Potential for SampledPotential {
    fn eval(&self, x: f64) -> C64 {
        background(self.left, x) + self.v_at(x)
    }

    fn left_limit(&self) -> C64 {
        self.left
    }

    fn support(&self) -> (f64, f64) {
        self.support
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampled_potential_interpolates_between_nodes() {
        let grid = SpatialGrid::symmetric(40.0, 2048).unwrap();
        let b = Builtin::TanhGaussian { amplitude: 0.1, sigma: 1.0 };
        let p = SampledPotential::new(&b.sample(grid));
        for k in 0..200 {
            let x = -7.3 + 0.0731 * k as f64;
            assert!((p.eval(x) - b.eval(x)).norm() < 1e-11, "x={x}");
        }
        assert!((p.left_limit() + 1.0).norm() < 1e-12);
    }

    #[test]
    fn background_limits() {
        let left = C64::from_polar(1.0, 0.7);
        assert!((background(left, -40.0) - left).norm() < 1e-12);
        assert!((background(left, 40.0) - 1.0).norm() < 1e-12);
        assert!((background(C64::new(-1.0, 0.0), 0.3) - 0.3f64.tanh()).norm() < 1e-15);
    }

    #[test]
    fn compact_bump_is_compact() {
        assert_eq!(compact_bump(1.0, 0.0, 1.0), 0.0);
        assert!((compact_bump(0.0, 0.0, 1.0) - 1.0).abs() < 1e-15);
        assert!(compact_bump(0.999, 0.0, 1.0) < 1e-200);
    }
}
