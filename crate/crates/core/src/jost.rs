//! Jost solutions of the Zakharov–Shabat system v_x = iσ₃(Q − λ)v and the
//! scattering coefficients built from their Wronskians.
//!
//! The columns are integrated in normalized form m = ψ e^{±iζx}, which
//! removes the plane-wave factor of the boundary solutions X^± = B_± e^{−iζxσ₃}
//! with B_± = I + Q_±/z.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridFunction, SpectralGrid};
use crate::maps::{lambda, zeta, C64, I};
use crate::potential::{Potential, SampledPotential};
use crate::quadrature::{graded_window, LogWeight};

pub type Vec2 = [C64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Plus,
    Minus,
}

/// Normalized Jost columns at the matching point. Columns that are not
/// computed for the requested side are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct JostColumns {
    pub z: C64,
    pub x_match: f64,
    pub m1_minus: Option<Vec2>,
    pub m2_minus: Option<Vec2>,
    pub m1_plus: Option<Vec2>,
    pub m2_plus: Option<Vec2>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JostOptions {
    /// Largest RK4 step.
    pub h_max: f64,
    /// Step bound relative to the oscillation rate 2|ζ| + 2.
    pub phase_step: f64,
    /// Smallest admissible |z|.
    pub delta0: f64,
}

impl Default for JostOptions {
    fn default() -> Self {
        Self { h_max: 0.01, phase_step: 0.03, delta0: 0.05 }
    }
}

pub fn det(u: Vec2, v: Vec2) -> C64 {
    u[0] * v[1] - u[1] * v[0]
}

/// Which column of which boundary matrix.
#[derive(Debug, Clone, Copy)]
enum Column {
    FirstMinus,
    SecondMinus,
    FirstPlus,
    SecondPlus,
}

impl Column {
    fn first(self) -> bool {
        matches!(self, Column::FirstMinus | Column::FirstPlus)
    }

    fn starts_left(self) -> bool {
        matches!(self, Column::FirstMinus | Column::SecondMinus)
    }
}

/// Integrator bound to one potential.
pub struct Jost<'a, P: Potential + ?Sized> {
    pot: &'a P,
    pub opts: JostOptions,
}

impl<'a, P: Potential + ?Sized> Jost<'a, P> {
    pub fn new(pot: &'a P) -> Self {
        Self { pot, opts: JostOptions::default() }
    }

    pub fn with_options(pot: &'a P, opts: JostOptions) -> Self {
        Self { pot, opts }
    }

    pub fn potential(&self) -> &P {
        self.pot
    }

    fn check(&self, z: C64) -> Result<()> {
        if !(z.norm() >= self.opts.delta0) || !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::SingularParameter(format!("|z| = {:.3e}", z.norm())));
        }
        Ok(())
    }

    fn initial(&self, z: C64, col: Column) -> Vec2 {
        let w = z.inv();
        let qm = self.pot.left_limit();
        match col {
            Column::FirstMinus => [C64::new(1.0, 0.0), qm * w],
            Column::SecondMinus => [qm.conj() * w, C64::new(1.0, 0.0)],
            Column::FirstPlus => [C64::new(1.0, 0.0), w],
            Column::SecondPlus => [w, C64::new(1.0, 0.0)],
        }
    }

    fn step_size(&self, z: C64) -> f64 {
        let rate = 2.0 * zeta(z).map(|v| v.norm()).unwrap_or(1e3) + 2.0;
        self.opts.h_max.min(self.opts.phase_step / rate)
    }

    /// Integrates one normalized column from its end of the support to
    /// `x_end`, optionally recording (x, m) at every step.
    fn integrate(&self, z: C64, col: Column, x_end: f64, mut record: Option<&mut Vec<(f64, Vec2)>>) -> Result<Vec2> {
        let lam = lambda(z)?;
        let zt = zeta(z)?;
        let s = if col.first() { I * zt } else { -I * zt };
        let (lo, hi) = self.pot.support();
        let reach = if col.starts_left() { x_end - lo } else { hi - x_end };
        let h = self.step_size(z);
        // the step is fixed by z alone, so columns integrated from either
        // end land on a common lattice through x_end
        let n = (reach.max(0.0) / h).ceil().max(1.0) as usize;
        let hstep = if col.starts_left() { h } else { -h };
        let x_start = x_end - n as f64 * hstep;
        let mut m = self.initial(z, col);

        let rhs = |x: f64, m: &Vec2| -> Vec2 {
            let q = self.pot.eval(x);
            [(-I * lam + s) * m[0] + I * q.conj() * m[1], -I * q * m[0] + (I * lam + s) * m[1]]
        };
        let axpy = |m: &Vec2, a: f64, k: &Vec2| -> Vec2 { [m[0] + k[0] * a, m[1] + k[1] * a] };

        if let Some(r) = record.as_deref_mut() {
            r.push((x_start, m));
        }
        for i in 0..n {
            let x = x_start + i as f64 * hstep;
            let k1 = rhs(x, &m);
            let k2 = rhs(x + 0.5 * hstep, &axpy(&m, 0.5 * hstep, &k1));
            let k3 = rhs(x + 0.5 * hstep, &axpy(&m, 0.5 * hstep, &k2));
            let k4 = rhs(x + hstep, &axpy(&m, hstep, &k3));
            for c in 0..2 {
                m[c] += (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]) * (hstep / 6.0);
            }
            if let Some(r) = record.as_deref_mut() {
                r.push((x_start + (i + 1) as f64 * hstep, m));
            }
        }
        if !(m[0].norm().is_finite() && m[1].norm().is_finite()) {
            return Err(Error::Numeric(format!("Jost integration diverged at z = {z}")));
        }
        Ok(m)
    }

    /// The columns normalized at the requested end, evaluated at `x_match`.
    /// The minus side also integrates m₂⁻ and the plus side m₁⁺; these are
    /// only meaningful for real z.
    pub fn solve(&self, z: C64, side: Side, x_match: f64) -> Result<JostColumns> {
        self.check(z)?;
        let mut out = JostColumns { z, x_match, m1_minus: None, m2_minus: None, m1_plus: None, m2_plus: None };
        match side {
            Side::Minus => {
                out.m1_minus = Some(self.integrate(z, Column::FirstMinus, x_match, None)?);
                out.m2_minus = Some(self.integrate(z, Column::SecondMinus, x_match, None)?);
            }
            Side::Plus => {
                out.m1_plus = Some(self.integrate(z, Column::FirstPlus, x_match, None)?);
                out.m2_plus = Some(self.integrate(z, Column::SecondPlus, x_match, None)?);
            }
        }
        Ok(out)
    }

    /// Unnormalized Wronskian det[ψ₁⁻, ψ₂⁺] = (1 − z⁻²) a(z); analytic in ℂ⁺
    /// and, for potentials settling exponentially fast, slightly below it.
    pub fn wronskian_a(&self, z: C64) -> Result<C64> {
        self.check(z)?;
        let m1 = self.integrate(z, Column::FirstMinus, 0.0, None)?;
        let m2 = self.integrate(z, Column::SecondPlus, 0.0, None)?;
        Ok(det(m1, m2))
    }

    /// Both Wronskians (1 − z⁻²)a and (1 − z⁻²)b at real z.
    pub fn wronskians(&self, z: f64) -> Result<(C64, C64)> {
        let zc = C64::new(z, 0.0);
        self.check(zc)?;
        let m1m = self.integrate(zc, Column::FirstMinus, 0.0, None)?;
        let m2p = self.integrate(zc, Column::SecondPlus, 0.0, None)?;
        let m1p = self.integrate(zc, Column::FirstPlus, 0.0, None)?;
        Ok((det(m1m, m2p), det(m1p, m1m)))
    }

    /// a(z) for Im z ≥ 0.
    pub fn a(&self, z: C64) -> Result<C64> {
        if z.im < 0.0 {
            return Err(Error::Domain(format!("a is extended only to Im z ≥ 0, got {z}")));
        }
        let d = 1.0 - (z * z).inv();
        if d.norm() < 1e-14 {
            return Err(Error::SingularParameter(format!("a is singular at {z}")));
        }
        Ok(self.wronskian_a(z)? / d)
    }

    /// ψ₁⁻(z; x) and ψ₂⁺(z; x) on a common x-lattice, plus their
    /// proportionality factor γ with ψ₁⁻ = γψ₂⁺ estimated at x = 0.
    /// Intended for z at a zero of a on the unit circle.
    pub fn bound_state(&self, z: C64) -> Result<BoundState> {
        self.check(z)?;
        let zt = zeta(z)?;
        let mut left = Vec::new();
        let mut right = Vec::new();
        let m1 = self.integrate(z, Column::FirstMinus, 0.0, Some(&mut left))?;
        let m2 = self.integrate(z, Column::SecondPlus, 0.0, Some(&mut right))?;
        // ψ₁⁻ = m₁⁻ e^{−iζx}, ψ₂⁺ = m₂⁺ e^{iζx}; both equal m at x = 0
        let w0 = m2[0].norm_sqr() + m2[1].norm_sqr();
        let gamma = (m1[0] * m2[0].conj() + m1[1] * m2[1].conj()) / w0;
        let gamma_parts = [m1[0] / m2[0], m1[1] / m2[1]];

        // ∫|ψ₂⁺|² by the trapezoid rule on the shared lattice: the right
        // half from ψ₂⁺ itself, the left half through ψ₁⁻/γ, which is the
        // stable representative there. Beyond the lattice the columns sit
        // at their boundary values, so the tails are geometric series.
        let h = self.step_size(z);
        let alpha = 2.0 * zt.im;
        let dens = |x: f64, m: &Vec2, sign: f64| -> f64 {
            (-I * sign * zt * x).exp().norm_sqr() * (m[0].norm_sqr() + m[1].norm_sqr())
        };
        let g2 = gamma.norm_sqr();
        let mut sum = 0.0;
        for (x, m) in &right {
            sum += dens(*x, m, -1.0);
        }
        for (x, m) in &left[..left.len() - 1] {
            sum += dens(*x, m, 1.0) / g2;
        }
        let tail = |f_end: f64| f_end * (-alpha * h).exp() / (1.0 - (-alpha * h).exp());
        let (xr, mr) = right[0];
        let (xl, ml) = left[0];
        sum += tail(dens(xr, &mr, -1.0)) + tail(dens(xl, &ml, 1.0) / g2);
        let norm = h * sum;
        Ok(BoundState { z, gamma, gamma_parts, norm, left, right })
    }
}

/// Profiles of the bound state at a zero of a.
#[derive(Debug, Clone)]
pub struct BoundState {
    pub z: C64,
    pub gamma: C64,
    pub gamma_parts: [C64; 2],
    /// ∫|ψ₂⁺(z; x)|² dx.
    pub norm: f64,
    pub left: Vec<(f64, Vec2)>,
    pub right: Vec<(f64, Vec2)>,
}

/// Columns for `side`, normalized at the matching point 0.
pub fn jost_solve(q: &GridFunction, z: C64, side: Side) -> Result<JostColumns> {
    let pot = SampledPotential::new(q);
    Jost::new(&pot).solve(z, side, 0.0)
}

/// a(z) for Im z ≥ 0.
pub fn a_extend(q: &GridFunction, z: C64) -> Result<C64> {
    let pot = SampledPotential::new(q);
    Jost::new(&pot).a(z)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatteringCoefficients {
    pub grid: SpectralGrid,
    pub a: Vec<C64>,
    pub b: Vec<C64>,
    pub r: Vec<C64>,
}

impl ScatteringCoefficients {
    /// log(1 − |r|²) on the grid nodes with quadrature weights.
    pub fn log_weight(&self) -> LogWeight {
        let mut lw =
            LogWeight { range: (self.grid.params.delta0, 1.0 / self.grid.params.delta0), ..Default::default() };
        for i in 0..self.grid.len() {
            lw.push(self.grid.z[i], self.grid.weights[i], (1.0 - self.r[i].norm_sqr()).ln());
        }
        lw
    }
}

pub fn scattering_coefficients(q: &GridFunction, grid: &SpectralGrid) -> Result<ScatteringCoefficients> {
    let pot = SampledPotential::new(q);
    coefficients_for(&Jost::new(&pot), grid)
}

pub fn coefficients_for<P: Potential + ?Sized>(
    jost: &Jost<'_, P>,
    grid: &SpectralGrid,
) -> Result<ScatteringCoefficients> {
    let vals: Result<Vec<(C64, C64)>> = grid.z.par_iter().map(|&z| jost.wronskians(z)).collect();
    let vals = vals?;
    let mut a = Vec::with_capacity(vals.len());
    let mut b = Vec::with_capacity(vals.len());
    let mut r = Vec::with_capacity(vals.len());
    for (&z, &(wa, wb)) in grid.z.iter().zip(&vals) {
        if wa.norm() == 0.0 {
            return Err(Error::Numeric(format!("a vanishes at real z = {z}")));
        }
        let d = 1.0 - 1.0 / (z * z);
        a.push(wa / d);
        b.push(wb / d);
        r.push(wb / wa);
    }
    Ok(ScatteringCoefficients { grid: grid.clone(), a, b, r })
}

/// log(1 − |r|²) inside the windows around ±1, written through the
/// identity 1 − |r|² = |1 − s⁻²|²/|W_a(s)|² (unitarity) so that the
/// logarithmic singularity at ±1 is explicit and W_a is smooth.
pub fn window_log_weight<P: Potential + ?Sized>(jost: &Jost<'_, P>, u_edge: f64, order: usize) -> Result<LogWeight> {
    let nodes = graded_window(u_edge, 1e-11, order);
    let mut pts = Vec::new();
    for &(u, wu) in &nodes {
        for sign in [-1.0, 1.0] {
            pts.push((sign, u, wu));
        }
    }
    let vals: Result<Vec<(f64, f64, f64)>> = pts
        .par_iter()
        .map(|&(sign, u, wu)| {
            let s = sign * u.exp();
            let wa = jost.wronskian_a(C64::new(s, 0.0))?;
            // 1 − s⁻² = −expm1(−2u)
            let g = 2.0 * (-(-2.0 * u).exp_m1()).abs().ln() - 2.0 * wa.norm().ln();
            Ok((s, wu * u.exp(), g.min(0.0)))
        })
        .collect();
    let mut lw = LogWeight::default();
    for (s, w, g) in vals? {
        lw.push(s, w, g);
    }
    Ok(lw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Builtin;

    #[test]
    fn black_soliton_a_off_axis() {
        let jost = Jost::new(&Builtin::BlackSoliton);
        for z in [C64::new(0.0, 2.0), C64::new(1.0, 1.0), C64::new(-0.4, 0.3)] {
            let exact = (z - I) / (z + I);
            assert!((jost.a(z).unwrap() - exact).norm() < 1e-8, "{z}");
        }
        assert!(matches!(jost.a(C64::new(1.0, -0.5)), Err(Error::Domain(_))));
        assert!(matches!(jost.a(C64::new(0.01, 0.0)), Err(Error::SingularParameter(_))));
    }

    #[test]
    fn black_soliton_is_reflectionless() {
        let jost = Jost::new(&Builtin::BlackSoliton);
        for z in [-3.0, -0.5, 0.7, 2.0] {
            let (wa, wb) = jost.wronskians(z).unwrap();
            assert!(wb.norm() < 1e-8 * wa.norm(), "{z}");
        }
    }

    #[test]
    fn bound_state_norm_of_black_soliton() {
        // c = 2iz/∫|ψ₂⁺|² = −2 at z = i needs ∫|ψ₂⁺|² = 1
        let bs = Jost::new(&Builtin::BlackSoliton).bound_state(I).unwrap();
        assert!((bs.norm - 1.0).abs() < 1e-6, "{}", bs.norm);
        assert!((bs.gamma_parts[0] - bs.gamma_parts[1]).norm() < 1e-8);
    }
}
