//! Reflectionless (N-dark-soliton) solutions from their discrete data.
//!
//! With time-dependent couplings c_k(x,t) = c_k e^{Φ(z_k;x,t)} the residue
//! conditions reduce to (I − CZ)β = C·1 with Z_jk = z̄_j/(z̄_j − z_k), and
//! q = 1 + Σβ_k. Dividing row j by |c_j(x,t)| gives the Hermitian form
//! (E + K)β = w with E = diag(1/|c_j(x,t)|), K_jk = 1/(i(z̄_j − z_k)) and
//! w_j = i z_j; K is a Gram matrix, hence positive definite.

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::{circle_phase, C64, I};
use crate::spectrum::DiscreteSpectrum;

/// −i z₀(i Re z₀ + Im z₀ tanh(Im z₀ (x − x₀ − 2 Re z₀ t))).
pub fn one_soliton(x: f64, t: f64, z0: C64, x0: f64) -> C64 {
    let arg = z0.im * (x - x0 - 2.0 * z0.re * t);
    -I * z0 * (I * z0.re + z0.im * arg.tanh())
}

/// Reflectionless scattering data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DiscreteSpectrum", into = "DiscreteSpectrum")]
pub struct SolitonSpec {
    pub discrete: DiscreteSpectrum,
}

impl TryFrom<DiscreteSpectrum> for SolitonSpec {
    type Error = Error;

    fn try_from(d: DiscreteSpectrum) -> Result<Self> {
        SolitonSpec::new(d)
    }
}

impl From<SolitonSpec> for DiscreteSpectrum {
    fn from(s: SolitonSpec) -> Self {
        s.discrete
    }
}

/// The linear systems at one (x, t), assembled naively. Entries overflow
/// once |Φ| is large; meant for inspection and cross-checks.
#[derive(Debug, Clone)]
pub struct SolitonLinearSystem {
    pub c_tx: DVector<C64>,
    pub z: DMatrix<C64>,
    pub y: DMatrix<C64>,
    pub rhs: DVector<C64>,
}

impl SolitonLinearSystem {
    /// β from (I − CZ)β = C·1.
    pub fn solve_raw(&self) -> Option<DVector<C64>> {
        let n = self.c_tx.len();
        let cz = DMatrix::from_fn(n, n, |j, k| self.c_tx[j] * self.z[(j, k)]);
        let m = DMatrix::<C64>::identity(n, n) - cz;
        m.lu().solve(&self.c_tx)
    }

    /// β from (I + Y)β̂ = b, β_k = |c_k(x,t)|^{1/2} β̂_k.
    pub fn solve_hermitian(&self) -> Option<DVector<C64>> {
        let n = self.c_tx.len();
        let m = DMatrix::<C64>::identity(n, n) + &self.y;
        let bh = Cholesky::new(m)?.solve(&self.rhs);
        Some(DVector::from_fn(n, |k, _| bh[k] * self.c_tx[k].norm().sqrt()))
    }

    /// Smallest eigenvalue of the Hermitian matrix Y.
    pub fn min_eigenvalue(&self) -> f64 {
        self.y.clone().symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// q by Cramer's rule: 1 − det(I − (CZ)₁)/det(I − CZ), where (CZ)₁ is
    /// CZ bordered by the column of c_k(x,t) and a row of ones.
    pub fn cramer(&self) -> C64 {
        let n = self.c_tx.len();
        let cz = DMatrix::from_fn(n, n, |j, k| self.c_tx[j] * self.z[(j, k)]);
        let base = DMatrix::<C64>::identity(n, n) - &cz;
        let mut bordered = DMatrix::<C64>::identity(n + 1, n + 1);
        for j in 0..n {
            for k in 0..n {
                bordered[(j, k)] = base[(j, k)];
            }
            bordered[(j, n)] = -self.c_tx[j];
            bordered[(n, j)] = C64::new(-1.0, 0.0);
        }
        bordered[(n, n)] = C64::new(0.0, 0.0);
        C64::new(1.0, 0.0) - bordered.determinant() / base.determinant()
    }
}

impl SolitonSpec {
    pub fn new(discrete: DiscreteSpectrum) -> Result<Self> {
        discrete.validate()?;
        Ok(Self { discrete })
    }

    pub fn len(&self) -> usize {
        self.discrete.len()
    }

    pub fn is_empty(&self) -> bool {
        self.discrete.len() == 0
    }

    pub fn poles(&self) -> Vec<C64> {
        self.discrete.poles()
    }

    /// q(−∞) = ∏ z_k² = a(0).
    pub fn left_limit(&self) -> C64 {
        self.poles().iter().fold(C64::new(1.0, 0.0), |acc, z| acc * z * z)
    }

    /// Whether ∏ z_k² = −1, i.e. the data fit q → ±1 at ±∞.
    pub fn has_odd_boundary(&self) -> bool {
        (self.left_limit() + 1.0).norm() < 1e-12
    }

    /// Centre of soliton k when it travels alone: x = x_k + 2 Re z_k t.
    fn centre(&self, k: usize, t: f64) -> f64 {
        let z = self.poles()[k];
        let x0 = (self.discrete.c[k].norm() / (2.0 * z.im)).ln() / (2.0 * z.im);
        x0 + 2.0 * z.re * t
    }

    /// An interval outside of which q is at its limits to ~1e−13.
    pub fn support(&self, t: f64) -> (f64, f64) {
        let poles = self.poles();
        if poles.is_empty() {
            return (-1.0, 1.0);
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut shift = 0.0;
        for (k, z) in poles.iter().enumerate() {
            let w = 17.0 / z.im;
            lo = lo.min(self.centre(k, t) - w);
            hi = hi.max(self.centre(k, t) + w);
            for (j, zj) in poles.iter().enumerate() {
                if j != k {
                    shift += ((z - zj) / (z * zj - 1.0)).norm().ln().abs() / z.im;
                }
            }
        }
        (lo - shift, hi + shift)
    }

    /// log|c_k(x,t)| for every pole.
    fn log_couplings(&self, x: f64, t: f64) -> Vec<f64> {
        self.discrete
            .thetas
            .iter()
            .zip(&self.discrete.c)
            .map(|(&th, c)| c.norm().ln() + circle_phase(th, x, t))
            .collect()
    }

    pub fn system(&self, x: f64, t: f64) -> SolitonLinearSystem {
        let zs = self.poles();
        let n = zs.len();
        let ell = self.log_couplings(x, t);
        let c_tx = DVector::from_fn(n, |k, _| I * zs[k] * ell[k].exp());
        let z = DMatrix::from_fn(n, n, |j, k| zs[j].conj() / (zs[j].conj() - zs[k]));
        let y = DMatrix::from_fn(n, n, |j, k| (0.5 * (ell[j] + ell[k])).exp() / (I * (zs[j].conj() - zs[k])));
        let rhs = DVector::from_fn(n, |k, _| I * zs[k] * (0.5 * ell[k]).exp());
        SolitonLinearSystem { c_tx, z, y, rhs }
    }

    /// β_k(x, t), solved in scaled form: with p_j = min(1, |c_j(x,t)|^{1/2})
    /// and β = Pu, the matrix P(E + K)P has diagonal part min(1, 1/|c_j|)
    /// and bounded entries for any Φ.
    pub fn betas(&self, x: f64, t: f64) -> Result<Vec<C64>> {
        let zs = self.poles();
        let n = zs.len();
        let ell = self.log_couplings(x, t);
        let p: Vec<f64> = ell.iter().map(|l| (0.5 * l.min(0.0)).exp()).collect();
        let m = DMatrix::from_fn(n, n, |j, k| {
            let kjk = p[j] * p[k] / (I * (zs[j].conj() - zs[k]));
            if j == k {
                kjk + (-ell[j].max(0.0)).exp()
            } else {
                kjk
            }
        });
        let rhs = DVector::from_fn(n, |k, _| I * zs[k] * p[k]);
        let chol = Cholesky::new(m)
            .ok_or_else(|| Error::InvalidSpec(format!("soliton system is not positive definite at x={x}, t={t}")))?;
        let u = chol.solve(&rhs);
        Ok((0..n).map(|k| p[k] * u[k]).collect())
    }

    /// q^{(sol),N}(x, t).
    pub fn eval(&self, x: f64, t: f64) -> Result<C64> {
        Ok(self.betas(x, t)?.iter().fold(C64::new(1.0, 0.0), |acc, b| acc + b))
    }

    /// The reflectionless phase shifts: soliton k emerges at
    /// x_k = log(|c_k|/(2 Im z_k) ∏_{ℓ<k} |(z_k − z_ℓ)/(z_k z_ℓ − 1)|²)/(2 Im z_k),
    /// the product running over the faster solitons.
    pub fn phase_shifts(&self) -> Vec<f64> {
        let zs = self.poles();
        (0..zs.len())
            .map(|k| {
                let z = zs[k];
                let mut l = (self.discrete.c[k].norm() / (2.0 * z.im)).ln();
                for zl in &zs[..k] {
                    l += 2.0 * ((z - zl) / (z * zl - 1.0)).norm().ln();
                }
                l / (2.0 * z.im)
            })
            .collect()
    }
}

/// e^{iα(1)} [1 + Σ_k (∏_{j<k} z_j²)(sol(x − x_k, t; z_k) − 1)].
pub fn nsoliton_separation(spec: &SolitonSpec, x_shifts: &[f64], alpha_one: f64, x: f64, t: f64) -> C64 {
    let mut acc = C64::new(1.0, 0.0);
    let mut prefix = C64::new(1.0, 0.0);
    for (z, &xk) in spec.poles().iter().zip(x_shifts) {
        acc += prefix * (one_soliton(x, t, *z, xk) - 1.0);
        prefix *= z * z;
    }
    C64::from_polar(1.0, alpha_one) * acc
}
