//! Uniform spatial grids, sampled fields and the real spectral grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::C64;
use crate::quadrature::gauss_legendre;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl SpatialGrid {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !(x_min < x_max) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::Config(format!("bad interval [{x_min}, {x_max}]")));
        }
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::Config(format!("sample count {n} is not a power of two")));
        }
        Ok(Self { x_min, x_max, n })
    }

    /// The box [−L, L).
    pub fn symmetric(half_width: f64, n: usize) -> Result<Self> {
        Self::new(-half_width, half_width, n)
    }

    pub fn h(&self) -> f64 {
        (self.x_max - self.x_min) / self.n as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.h()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    /// Angular wavenumbers in FFT order for the periodic box.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n as i64;
        let dk = 2.0 * std::f64::consts::PI / (self.x_max - self.x_min);
        (0..n).map(|j| if j < n / 2 { j } else { j - n }).map(|j| j as f64 * dk).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub grid: SpatialGrid,
    pub values: Vec<C64>,
}

impl GridFunction {
    pub fn new(grid: SpatialGrid, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::Config(format!("{} samples for a grid of {}", values.len(), grid.n)));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: SpatialGrid, f: impl Fn(f64) -> C64) -> Self {
        let values = (0..grid.n).map(|j| f(grid.x(j))).collect();
        Self { grid, values }
    }

    pub fn max_abs_diff(&self, other: &GridFunction) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// ∫ (1 − |q|²) dx by the periodic trapezoid rule.
    pub fn mass(&self) -> f64 {
        self.grid.h() * self.values.iter().map(|q| 1.0 - q.norm_sqr()).sum::<f64>()
    }
}

/// Sizes of the composite Gauss–Legendre spectral grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralParams {
    pub delta0: f64,
    pub delta1: f64,
    /// Nodes per Gauss–Legendre panel.
    pub order: usize,
    /// Geometrically graded panels next to each excluded window around ±1.
    pub graded_panels: usize,
    /// Uniform panels filling the rest of each quarter.
    pub outer_panels: usize,
}

impl Default for SpectralParams {
    fn default() -> Self {
        Self { delta0: 0.05, delta1: 0.02, order: 8, graded_panels: 5, outer_panels: 20 }
    }
}

impl SpectralParams {
    /// Approximate node count per quarter (one sign of z, one side of |z| = 1).
    pub fn nodes_per_quarter(&self) -> usize {
        self.order * (self.graded_panels + self.outer_panels)
    }

    /// Chooses the panel count so a quarter holds roughly `nodes` nodes.
    pub fn with_nodes_per_quarter(mut self, nodes: usize) -> Self {
        let panels = (nodes / self.order).max(2);
        self.graded_panels = self.graded_panels.min(panels - 1);
        self.outer_panels = panels - self.graded_panels;
        self
    }

    /// Half-width, in u = log|z|, of the window excluded around |z| = 1.
    pub fn u_window(&self) -> f64 {
        -(1.0 - self.delta1).ln()
    }

    pub fn u_max(&self) -> f64 {
        -self.delta0.ln()
    }

    fn validate(&self) -> Result<()> {
        let ok = self.delta0 > 0.0
            && self.delta0 < 0.5
            && self.delta1 > 0.0
            && self.delta1 < 0.5
            && self.order >= 2
            && self.outer_panels >= 1
            && self.u_window() < self.u_max();
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("unusable spectral grid parameters {self:?}")))
        }
    }
}

/// Real spectral nodes z = ±e^{u}. The u-nodes are symmetric about 0, so
/// every node z has its partner 1/z on the grid; the same holds for −z.
/// Each node carries the weight of ∫ ds over its panel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralGrid {
    pub params: SpectralParams,
    pub z: Vec<f64>,
    pub weights: Vec<f64>,
}

impl SpectralGrid {
    pub fn new(params: SpectralParams) -> Result<Self> {
        params.validate()?;
        let (nodes, w) = gauss_legendre(params.order);
        let ue = params.u_window();
        let umax = params.u_max();

        let mut breaks = vec![ue];
        let mut u = ue;
        for _ in 0..params.graded_panels {
            if 2.0 * u > umax / 4.0 {
                break;
            }
            u *= 2.0;
            breaks.push(u);
        }
        let start = *breaks.last().unwrap();
        let width = (umax - start) / params.outer_panels as f64;
        for k in 1..=params.outer_panels {
            breaks.push(start + width * k as f64);
        }
        *breaks.last_mut().unwrap() = umax;

        let mut quarter = Vec::new();
        for pair in breaks.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            for (t, wt) in nodes.iter().zip(&w) {
                quarter.push((0.5 * (a + b) + 0.5 * (b - a) * t, 0.5 * (b - a) * wt));
            }
        }

        // positive half: u ranging over ±quarter
        let mut half: Vec<(f64, f64)> = Vec::new();
        for &(u, wu) in &quarter {
            half.push((u, wu));
            half.push((-u, wu));
        }
        half.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

        let mut pts: Vec<(f64, f64)> = Vec::with_capacity(2 * half.len());
        for &(u, wu) in half.iter().rev() {
            let s = u.exp();
            pts.push((-s, wu * s));
        }
        for &(u, wu) in &half {
            let s = u.exp();
            pts.push((s, wu * s));
        }
        Ok(Self { params, z: pts.iter().map(|p| p.0).collect(), weights: pts.iter().map(|p| p.1).collect() })
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    /// Index of the node at 1/z. Within each sign the nodes are ordered
    /// by u and the u-nodes are symmetric, so inversion mirrors the index.
    pub fn inverse_partner(&self, i: usize) -> usize {
        let half = self.z.len() / 2;
        if i < half {
            half - 1 - i
        } else {
            3 * half - 1 - i
        }
    }
}
