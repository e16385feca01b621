//! Split-step Fourier evolution of the defocusing NLS on a finite-density
//! background. The unknown is v = q − bg with
//! bg(x) = ((1 + q₋) + (1 − q₋) tanh x)/2, which decays at both ends of the
//! box and is therefore treated as periodic. It solves
//!   i v_t + v_xx + bg_xx − 2(|bg + v|² − 1)(bg + v) = 0.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridFunction, SpatialGrid};
use crate::maps::{C64, I};
use crate::potential::{background, background_xx, left_limit_of};

pub struct EvolutionState {
    pub grid: SpatialGrid,
    pub v: Vec<C64>,
    pub t: f64,
    pub dt: f64,
    pub left: C64,
    bg: Vec<C64>,
    bg_xx: Vec<C64>,
    /// e^{−ik²dt} for the exact linear flow.
    propagator: Vec<C64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    scratch: Vec<C64>,
}

impl std::fmt::Debug for EvolutionState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EvolutionState").field("grid", &self.grid).field("t", &self.t).field("dt", &self.dt).finish()
    }
}

/// Sample of the conserved mass and the field size at the box ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassSample {
    pub t: f64,
    pub mass: f64,
    pub edge: f64,
}

impl EvolutionState {
    pub fn new(q0: &GridFunction, dt: f64) -> Result<Self> {
        Self::with_left_limit(q0, left_limit_of(q0), dt)
    }

    pub fn with_left_limit(q0: &GridFunction, left: C64, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt <= 1e-2) {
            return Err(Error::Config(format!("time step {dt} outside (0, 0.01]")));
        }
        let grid = q0.grid;
        let xs = grid.points();
        let bg: Vec<C64> = xs.iter().map(|&x| background(left, x)).collect();
        let bg_xx = xs.iter().map(|&x| background_xx(left, x)).collect();
        let v = q0.values.iter().zip(&bg).map(|(q, b)| q - b).collect();
        let propagator = grid.wavenumbers().iter().map(|k| (-I * k * k * dt).exp()).collect();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(grid.n);
        let ifft = planner.plan_fft_inverse(grid.n);
        let scratch = vec![C64::new(0.0, 0.0); fft.get_inplace_scratch_len().max(ifft.get_inplace_scratch_len())];
        Ok(Self { grid, v, t: 0.0, dt, left, bg, bg_xx, propagator, fft, ifft, scratch })
    }

    pub fn q(&self) -> GridFunction {
        let values = self.v.iter().zip(&self.bg).map(|(v, b)| v + b).collect();
        GridFunction { grid: self.grid, values }
    }

    pub fn mass(&self) -> f64 {
        self.q().mass()
    }

    /// max |v| over the outermost 1% of the box on each side.
    pub fn edge_magnitude(&self) -> f64 {
        let m = (self.grid.n / 100).max(1);
        let n = self.v.len();
        self.v[..m].iter().chain(&self.v[n - m..]).map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Pointwise flow v_t = i(bg_xx − 2(|q|² − 1)q), one RK4 step of length h.
    fn nonlinear(&mut self, h: f64) {
        let rhs = |v: C64, b: C64, bxx: C64| {
            let q = b + v;
            I * (bxx - 2.0 * (q.norm_sqr() - 1.0) * q)
        };
        for ((v, &b), &bxx) in self.v.iter_mut().zip(&self.bg).zip(&self.bg_xx) {
            let k1 = rhs(*v, b, bxx);
            let k2 = rhs(*v + 0.5 * h * k1, b, bxx);
            let k3 = rhs(*v + 0.5 * h * k2, b, bxx);
            let k4 = rhs(*v + h * k3, b, bxx);
            *v += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
    }

    fn linear(&mut self) {
        self.fft.process_with_scratch(&mut self.v, &mut self.scratch);
        let norm = 1.0 / self.grid.n as f64;
        for (v, p) in self.v.iter_mut().zip(&self.propagator) {
            *v *= p * norm;
        }
        self.ifft.process_with_scratch(&mut self.v, &mut self.scratch);
    }

    /// One Strang step: half nonlinear, exact linear, half nonlinear.
    pub fn step(&mut self) -> Result<()> {
        self.nonlinear(0.5 * self.dt);
        self.linear();
        self.nonlinear(0.5 * self.dt);
        self.t += self.dt;
        if self.v.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::BlowUp { t: self.t });
        }
        Ok(())
    }

    /// Steps to `t_final`; the last step is shortened to land on it exactly.
    pub fn advance_to(&mut self, t_final: f64) -> Result<()> {
        let remaining = t_final - self.t;
        if remaining < -1e-12 {
            return Err(Error::Config(format!("cannot step back from t = {} to {t_final}", self.t)));
        }
        let steps = (remaining / self.dt - 1e-9).ceil().max(0.0) as usize;
        if steps == 0 {
            return Ok(());
        }
        let dt = self.dt;
        let h = remaining / steps as f64;
        if (h - dt).abs() > 1e-15 {
            self.set_dt(h);
        }
        for _ in 0..steps {
            self.step()?;
        }
        self.t = t_final;
        if (h - dt).abs() > 1e-15 {
            self.set_dt(dt);
        }
        Ok(())
    }

    fn set_dt(&mut self, dt: f64) {
        self.dt = dt;
        self.propagator = self.grid.wavenumbers().iter().map(|k| (-I * k * k * dt).exp()).collect();
    }

    pub fn sample(&self) -> MassSample {
        MassSample { t: self.t, mass: self.mass(), edge: self.edge_magnitude() }
    }
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub q: GridFunction,
    pub trace: Vec<MassSample>,
}

impl Evolution {
    /// max_t |M(t) − M(0)| / max(|M(0)|, 1e−12).
    pub fn mass_drift(&self) -> f64 {
        let m0 = self.trace[0].mass;
        self.trace.iter().map(|s| (s.mass - m0).abs()).fold(0.0, f64::max) / m0.abs().max(1e-12)
    }

    pub fn max_edge(&self) -> f64 {
        self.trace.iter().map(|s| s.edge).fold(0.0, f64::max)
    }
}

/// Evolves q0 to `t_final`, sampling the mass once per unit time.
pub fn evolve_to(q0: &GridFunction, t_final: f64, dt: f64) -> Result<Evolution> {
    if !(t_final >= 0.0) {
        return Err(Error::Config(format!("final time {t_final} is negative")));
    }
    let mut st = EvolutionState::new(q0, dt)?;
    let mut trace = vec![st.sample()];
    let mut next = 1.0;
    while next < t_final {
        st.advance_to(next)?;
        trace.push(st.sample());
        next += 1.0;
    }
    st.advance_to(t_final)?;
    if t_final > 0.0 {
        trace.push(st.sample());
    }
    Ok(Evolution { q: if t_final == 0.0 { q0.clone() } else { st.q() }, trace })
}

/// Evolves once and returns q at each requested time (increasing).
pub fn snapshots(q0: &GridFunction, times: &[f64], dt: f64) -> Result<Vec<GridFunction>> {
    let mut st = EvolutionState::new(q0, dt)?;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        st.advance_to(t)?;
        out.push(st.q());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nsoliton::one_soliton;

    #[test]
    fn black_soliton_is_stationary() {
        let g = SpatialGrid::symmetric(40.0, 1024).unwrap();
        let q0 = GridFunction::from_fn(g, |x| C64::new(x.tanh(), 0.0));
        let ev = evolve_to(&q0, 2.0, 2e-3).unwrap();
        assert!(ev.q.max_abs_diff(&q0) < 1e-12, "{}", ev.q.max_abs_diff(&q0));
    }

    #[test]
    fn zero_time_is_identity() {
        let g = SpatialGrid::symmetric(40.0, 256).unwrap();
        let q0 = GridFunction::from_fn(g, |x| C64::new(x.tanh(), 0.1 * (-x * x).exp()));
        assert_eq!(evolve_to(&q0, 0.0, 1e-3).unwrap().q, q0);
    }

    #[test]
    fn gray_soliton_moves_at_twice_its_real_part() {
        let z0 = C64::from_polar(1.0, std::f64::consts::PI / 3.0);
        let g = SpatialGrid::symmetric(40.0, 2048).unwrap();
        let q0 = GridFunction::from_fn(g, |x| one_soliton(x, 0.0, z0, 0.0));
        let exact = GridFunction::from_fn(g, |x| one_soliton(x, 3.0, z0, 0.0));
        let q = evolve_to(&q0, 3.0, 2e-3).unwrap().q;
        assert!(q.max_abs_diff(&exact) < 1e-5, "{}", q.max_abs_diff(&exact));
    }

    #[test]
    fn rejects_oversized_step() {
        let g = SpatialGrid::symmetric(10.0, 64).unwrap();
        let q0 = GridFunction::from_fn(g, |x| C64::new(x.tanh(), 0.0));
        assert!(EvolutionState::new(&q0, 0.05).is_err());
    }
}
