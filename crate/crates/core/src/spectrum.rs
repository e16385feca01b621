//! Discrete spectrum on the unit circle, norming constants, and the
//! trace-formula / θ-condition diagnostics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::cser;
use crate::error::{Error, Result};
use crate::grid::{SpectralGrid, SpectralParams};
use crate::jost::{coefficients_for, window_log_weight, Jost, ScatteringCoefficients};
use crate::maps::{zeta, C64, I};
use crate::potential::Potential;
use crate::quadrature::{graded_window, LogWeight};

/// Poles z_k = e^{iθ_k} ordered by decreasing Re z_k, with couplings
/// c_k = i z_k |c_k|.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscreteSpectrum {
    pub thetas: Vec<f64>,
    #[serde(with = "cser::vec")]
    pub c: Vec<C64>,
}

impl DiscreteSpectrum {
    pub fn new(thetas: Vec<f64>, c: Vec<C64>) -> Result<Self> {
        if thetas.len() != c.len() {
            return Err(Error::InvalidSpec("one coupling per pole is required".into()));
        }
        let mut pairs: Vec<(f64, C64)> = thetas.into_iter().zip(c).collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        let d = Self { thetas: pairs.iter().map(|p| p.0).collect(), c: pairs.iter().map(|p| p.1).collect() };
        d.validate()?;
        Ok(d)
    }

    /// Couplings from their moduli, c_k = i z_k |c_k|.
    pub fn from_moduli(thetas: Vec<f64>, moduli: Vec<f64>) -> Result<Self> {
        let c = thetas.iter().zip(&moduli).map(|(&th, &m)| I * C64::from_polar(1.0, th) * m).collect();
        Self::new(thetas, c)
    }

    pub fn len(&self) -> usize {
        self.thetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thetas.is_empty()
    }

    pub fn poles(&self) -> Vec<C64> {
        self.thetas.iter().map(|&t| C64::from_polar(1.0, t)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.thetas.len() != self.c.len() {
            return Err(Error::InvalidSpec("one coupling per pole is required".into()));
        }
        for (k, (&th, &c)) in self.thetas.iter().zip(&self.c).enumerate() {
            if !(th > 0.0 && th < PI) {
                return Err(Error::InvalidSpec(format!("θ_{k} = {th} is not in (0, π)")));
            }
            let ratio = c / (I * C64::from_polar(1.0, th));
            if !(ratio.re > 0.0) || ratio.im.abs() > 1e-8 * ratio.re {
                return Err(Error::InvalidSpec(format!("c_{k} = {c} is not on the ray i z_k ℝ₊")));
            }
        }
        for w in self.thetas.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidSpec("poles must be distinct and ordered".into()));
            }
        }
        Ok(())
    }
}

/// r on the spectral grid plus the discrete spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringData {
    pub coefficients: ScatteringCoefficients,
    pub discrete: DiscreteSpectrum,
    /// q(−∞); −1 for the standard boundary conditions.
    pub left_limit: C64,
    /// log(1 − |r|²) resolved inside the windows around ±1, when known.
    pub window: Option<LogWeight>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScatteringDoc {
    schema: String,
    grid: SpectralGrid,
    #[serde(with = "cser::vec")]
    r: Vec<C64>,
    #[serde(with = "cser::vec")]
    a: Vec<C64>,
    #[serde(with = "cser::vec")]
    b: Vec<C64>,
    thetas: Vec<f64>,
    #[serde(with = "cser::vec")]
    c: Vec<C64>,
    #[serde(with = "cser::scalar")]
    left_limit: C64,
    window: Option<LogWeight>,
}

pub const SCATTERING_SCHEMA: &str = "dnls.scattering/1";

impl Serialize for ScatteringData {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ScatteringDoc {
            schema: SCATTERING_SCHEMA.into(),
            grid: self.coefficients.grid.clone(),
            r: self.coefficients.r.clone(),
            a: self.coefficients.a.clone(),
            b: self.coefficients.b.clone(),
            thetas: self.discrete.thetas.clone(),
            c: self.discrete.c.clone(),
            left_limit: self.left_limit,
            window: self.window.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ScatteringData {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let doc = ScatteringDoc::deserialize(d)?;
        if doc.schema != SCATTERING_SCHEMA {
            return Err(D::Error::custom(format!("unsupported schema {}", doc.schema)));
        }
        let n = doc.grid.len();
        if doc.r.len() != n || doc.a.len() != n || doc.b.len() != n {
            return Err(D::Error::custom("coefficient arrays do not match the grid"));
        }
        let discrete = DiscreteSpectrum::new(doc.thetas, doc.c).map_err(D::Error::custom)?;
        Ok(ScatteringData {
            coefficients: ScatteringCoefficients { grid: doc.grid, a: doc.a, b: doc.b, r: doc.r },
            discrete,
            left_limit: doc.left_limit,
            window: doc.window,
        })
    }
}

impl ScatteringData {
    /// Reflectionless data on a given grid.
    pub fn reflectionless(discrete: DiscreteSpectrum, grid: SpectralGrid) -> Self {
        let n = grid.len();
        let poles = discrete.poles();
        let a: Vec<C64> = grid
            .z
            .iter()
            .map(|&s| poles.iter().fold(C64::new(1.0, 0.0), |acc, zk| acc * (s - zk) / (s - zk.conj())))
            .collect();
        let left = poles.iter().fold(C64::new(1.0, 0.0), |acc, z| acc * z * z);
        let zero = C64::new(0.0, 0.0);
        ScatteringData {
            coefficients: ScatteringCoefficients { grid, a, b: vec![zero; n], r: vec![zero; n] },
            discrete,
            left_limit: left,
            window: None,
        }
    }

    pub fn poles(&self) -> Vec<C64> {
        self.discrete.poles()
    }

    /// log(1 − |r|²) with weights over the whole real line: grid nodes,
    /// plus either the resolved window samples or the log-fit estimate.
    pub fn log_weight(&self) -> LogWeight {
        let mut lw = self.coefficients.log_weight();
        let win = match &self.window {
            Some(w) => w.clone(),
            None => log_fit_window(&lw, &self.coefficients.grid.params),
        };
        for i in 0..win.s.len() {
            lw.push(win.s[i], win.w[i], win.g[i]);
        }
        lw.sort();
        lw
    }
}

/// Window estimate from the two grid nodes nearest each side of ±1:
/// log(1 − |r|²) ≈ A log|s ∓ 1| + B, integrated on a graded rule. When
/// the fitted A is small the integrand is bounded there (|r(±1)| < 1), and
/// the window is filled by linear interpolation between its edges instead.
pub fn log_fit_window(lw: &LogWeight, params: &SpectralParams) -> LogWeight {
    let ue = params.u_window();
    let nodes = graded_window(ue, 1e-11, params.order);
    let mut out = LogWeight::default();
    for sign in [-1.0, 1.0] {
        // (u, g) of grid nodes with this sign, sorted by u
        let mut pts: Vec<(f64, f64)> =
            lw.s.iter().zip(&lw.g).filter(|(s, _)| **s * sign > 0.0).map(|(s, g)| (s.abs().ln(), *g)).collect();
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let j = pts.partition_point(|p| p.0 < 0.0);
        if j < 2 || j + 2 > pts.len() {
            continue;
        }
        let fit = |p1: (f64, f64), p2: (f64, f64)| {
            let l1 = (p1.0.exp() - 1.0).abs().ln();
            let l2 = (p2.0.exp() - 1.0).abs().ln();
            let a = (p1.1 - p2.1) / (l1 - l2);
            (a, p1.1 - a * l1)
        };
        let below = fit(pts[j - 1], pts[j - 2]);
        let above = fit(pts[j], pts[j + 1]);
        let bounded = below.0 < 0.5 && above.0 < 0.5;
        let (ul, gl) = pts[j - 1];
        let (ur, gr) = pts[j];
        for &(u, wu) in &nodes {
            let g = if bounded {
                gl + (gr - gl) * (u - ul) / (ur - ul)
            } else {
                let (a, b) = if u < 0.0 { below } else { above };
                a * (u.exp() - 1.0).abs().ln() + b
            };
            out.push(sign * u.exp(), wu * u.exp(), g.min(0.0));
        }
    }
    out
}

/// A zero of a on the unit circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleZero {
    pub theta: f64,
    /// |a(e^{iθ})| after refinement.
    pub residual: f64,
    /// Inside the excluded window around ±1, where the zero may be an
    /// artefact of the endpoint singularity.
    pub boundary_suspect: bool,
}

/// a(e^{iθ}) divided by its constant phase on the circle (√q₋), which makes
/// it real there.
fn circle_real<P: Potential + ?Sized>(jost: &Jost<'_, P>, theta: f64) -> Result<(f64, f64)> {
    let rot = jost.potential().left_limit().sqrt();
    let a = jost.a(C64::from_polar(1.0, theta))? / rot;
    Ok((a.re, a.norm()))
}

/// All zeros of a on the upper unit circle: a uniform scan in θ (plus a
/// geometric refinement towards θ = 0, π) bracketing sign changes of the
/// real-valued function a/√q₋, each refined by a safeguarded secant
/// (Illinois) iteration until |a| < 1e−9.
pub fn find_circle_zeros<P: Potential + ?Sized>(
    jost: &Jost<'_, P>,
    n_scan: usize,
    delta1: f64,
) -> Result<Vec<CircleZero>> {
    if n_scan < 64 {
        return Err(Error::Config(format!("n_scan = {n_scan} is below 64")));
    }
    let step = PI / n_scan as f64;
    let mut thetas: Vec<f64> = (1..n_scan).map(|i| step * i as f64).collect();
    let mut th = step;
    while th > 1e-6 {
        th *= 0.5;
        thetas.push(th);
        thetas.push(PI - th);
    }
    thetas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let vals: Result<Vec<(f64, f64)>> = thetas.par_iter().map(|&t| circle_real(jost, t)).collect();
    let vals = vals?;

    let mut zeros = Vec::new();
    for i in 0..thetas.len() - 1 {
        let (g0, g1) = (vals[i].0, vals[i + 1].0);
        if g0 == 0.0 {
            zeros.push(CircleZero { theta: thetas[i], residual: 0.0, boundary_suspect: false });
        } else if g0 * g1 < 0.0 {
            let (theta, res) = illinois(|t| circle_real(jost, t), thetas[i], thetas[i + 1], g0, g1)?;
            zeros.push(CircleZero { theta, residual: res, boundary_suspect: false });
        }
    }
    let w = 2.0 * (0.5 * delta1).asin();
    for z in &mut zeros {
        z.boundary_suspect = z.theta < w || z.theta > PI - w;
    }
    zeros.retain(|z| z.residual < 1e-9 || z.boundary_suspect);
    Ok(zeros)
}

fn illinois(
    f: impl Fn(f64) -> Result<(f64, f64)>,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut fb: f64,
) -> Result<(f64, f64)> {
    let mut side = 0;
    let mut best = (a, f64::INFINITY);
    for _ in 0..200 {
        let c = (a * fb - b * fa) / (fb - fa);
        let (fc, ac) = f(c)?;
        if ac < best.1 {
            best = (c, ac);
        }
        if ac < 1e-12 || (b - a).abs() < 4e-16 {
            break;
        }
        if fc * fb < 0.0 {
            a = b;
            fa = fb;
            side = 0;
        } else if side == 1 {
            fa *= 0.5;
        } else {
            side = 1;
        }
        b = c;
        fb = fc;
        if fa * fb > 0.0 {
            break;
        }
    }
    Ok(best)
}

/// The norming constant of a circle zero, computed two ways.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormingConstant {
    #[serde(with = "cser::scalar")]
    pub c: C64,
    /// γ / a′(z) with a′ by central difference along the circle.
    #[serde(with = "cser::scalar")]
    pub via_derivative: C64,
    /// 2i z / ∫|ψ₂⁺|² dx.
    #[serde(with = "cser::scalar")]
    pub via_norm: C64,
    #[serde(with = "cser::scalar")]
    pub gamma: C64,
    /// ∂a/∂λ by finite differences and by (−iγ/2ζ)∫|ψ₂⁺|².
    #[serde(with = "cser::scalar")]
    pub da_dlambda: C64,
    #[serde(with = "cser::scalar")]
    pub da_dlambda_identity: C64,
    pub relative_gap: f64,
}

/// Both routes to c_k at z = e^{iθ}. Their relative gap above 5e−3 is an
/// error; the result is projected onto i z ℝ₊.
pub fn norming_constant<P: Potential + ?Sized>(jost: &Jost<'_, P>, theta: f64) -> Result<NormingConstant> {
    let z = C64::from_polar(1.0, theta);
    let h = 1e-5;
    let ap = jost.a(C64::from_polar(1.0, theta + h))?;
    let am = jost.a(C64::from_polar(1.0, theta - h))?;
    let a_prime = (ap - am) / (2.0 * h) / (I * z);
    if a_prime.norm() < 1e-6 {
        return Err(Error::Numeric(format!("zero at θ = {theta} is not simple")));
    }
    let bs = jost.bound_state(z)?;
    let via_derivative = bs.gamma / a_prime;
    let via_norm = 2.0 * I * z / bs.norm;
    let gap = (via_derivative - via_norm).norm() / via_norm.norm();
    if gap > 5e-3 {
        return Err(Error::Inconsistent { gap });
    }
    let dlam = 0.5 * (1.0 - (z * z).inv());
    let da_dlambda = a_prime / dlam;
    let da_dlambda_identity = -I * bs.gamma / (2.0 * zeta(z)?) * bs.norm;
    let modulus = 0.5 * ((via_derivative / (I * z)).re + (via_norm / (I * z)).re);
    Ok(NormingConstant {
        c: I * z * modulus,
        via_derivative,
        via_norm,
        gamma: bs.gamma,
        da_dlambda,
        da_dlambda_identity,
        relative_gap: gap,
    })
}

/// Options for the full forward transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatterOptions {
    pub spectral: SpectralParams,
    pub n_scan: usize,
    /// Resolve the windows around ±1 by direct Wronskian evaluation rather
    /// than the log-fit estimate.
    pub resolve_window: bool,
}

impl Default for ScatterOptions {
    fn default() -> Self {
        Self { spectral: SpectralParams::default(), n_scan: 256, resolve_window: true }
    }
}

/// Scattering data of a potential: r on the grid, the circle zeros that
/// are not boundary-suspect, and their norming constants.
pub fn scatter<P: Potential + ?Sized>(
    jost: &Jost<'_, P>,
    opts: &ScatterOptions,
) -> Result<(ScatteringData, Vec<CircleZero>)> {
    let grid = SpectralGrid::new(opts.spectral)?;
    let coefficients = coefficients_for(jost, &grid)?;
    let zeros = find_circle_zeros(jost, opts.n_scan, opts.spectral.delta1)?;
    let mut thetas = Vec::new();
    let mut cs = Vec::new();
    for z in zeros.iter().filter(|z| !z.boundary_suspect) {
        let nc = norming_constant(jost, z.theta)?;
        thetas.push(z.theta);
        cs.push(nc.c);
    }
    let window = if opts.resolve_window {
        let mut w = window_log_weight(jost, opts.spectral.u_window(), opts.spectral.order)?;
        w.range = (opts.spectral.delta0, 1.0 / opts.spectral.delta0);
        Some(w)
    } else {
        None
    };
    let data = ScatteringData {
        coefficients,
        discrete: DiscreteSpectrum::new(thetas, cs)?,
        left_limit: jost.potential().left_limit(),
        window,
    };
    Ok((data, zeros))
}

/// a(z) from its zeros and log(1 − |r|²): the Blaschke product times
/// exp(−(1/2πi)∫ log(1 − |r(s)|²)/(s − z) ds).
pub fn trace_formula(data: &ScatteringData, lw: &LogWeight, z: C64) -> C64 {
    let blaschke = data.poles().iter().fold(C64::new(1.0, 0.0), |acc, zk| acc * (z - zk) / (z - zk.conj()));
    let cauchy = lw.line(|s| (C64::new(s, 0.0) - z).inv());
    blaschke * (-cauchy / (2.0 * PI * I)).exp()
}

/// Largest relative gap between the trace formula and directly computed a
/// at the probes 2i and 1 + i.
pub fn trace_formula_residual<P: Potential + ?Sized>(data: &ScatteringData, jost: &Jost<'_, P>) -> Result<f64> {
    let lw = data.log_weight();
    let mut worst: f64 = 0.0;
    for z in [C64::new(0.0, 2.0), C64::new(1.0, 1.0)] {
        let direct = jost.a(z)?;
        let formula = trace_formula(data, &lw, z);
        worst = worst.max((direct - formula).norm() / direct.norm());
    }
    Ok(worst)
}

/// |∏ z_k² − q₋ exp((1/2πi)∫ log(1 − |r|²)/s ds)|, the θ-condition with
/// a(0) = q₋ (= −1 for the standard boundary conditions).
pub fn theta_condition_residual(data: &ScatteringData) -> f64 {
    let lw = data.log_weight();
    let lhs = data.poles().iter().fold(C64::new(1.0, 0.0), |acc, z| acc * z * z);
    let integral = lw.line(|s| C64::new(1.0 / s, 0.0));
    let rhs = data.left_limit * (integral / (2.0 * PI * I)).exp();
    (lhs - rhs).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Builtin;

    #[test]
    fn discrete_spectrum_is_sorted_and_validated() {
        let d = DiscreteSpectrum::from_moduli(vec![2.0, 1.0], vec![0.5, 3.0]).unwrap();
        assert_eq!(d.thetas, vec![1.0, 2.0]);
        assert!((d.c[0].norm() - 3.0).abs() < 1e-15);
        assert!(DiscreteSpectrum::from_moduli(vec![0.0], vec![1.0]).is_err());
        assert!(DiscreteSpectrum::from_moduli(vec![1.0, 1.0], vec![1.0, 1.0]).is_err());
        assert!(DiscreteSpectrum::from_moduli(vec![1.0], vec![-1.0]).is_err());
        assert!(DiscreteSpectrum::new(vec![1.0], vec![C64::new(1.0, 0.0)]).is_err());
    }

    #[test]
    fn black_soliton_norming_constant() {
        let jost = Jost::new(&Builtin::BlackSoliton);
        let zeros = find_circle_zeros(&jost, 128, 0.02).unwrap();
        assert_eq!(zeros.len(), 1);
        assert!((zeros[0].theta - PI / 2.0).abs() < 1e-9);
        let nc = norming_constant(&jost, zeros[0].theta).unwrap();
        assert!((nc.c - C64::new(-2.0, 0.0)).norm() < 1e-6, "{}", nc.c);
        assert!((nc.da_dlambda - nc.da_dlambda_identity).norm() < 1e-5 * nc.da_dlambda.norm());
    }

    #[test]
    fn reflectionless_data_satisfy_theta_condition() {
        // ∏ z_k² = −1 for one pole at i
        let d = DiscreteSpectrum::from_moduli(vec![PI / 2.0], vec![2.0]).unwrap();
        let data = ScatteringData::reflectionless(d, SpectralGrid::new(SpectralParams::default()).unwrap());
        assert!(theta_condition_residual(&data) < 1e-14);
        let z = C64::new(0.3, 0.8);
        let a = trace_formula(&data, &data.log_weight(), z);
        assert!((a - (z - I) / (z + I)).norm() < 1e-14);
    }

    #[test]
    fn scattering_data_json_round_trip() {
        let d = DiscreteSpectrum::from_moduli(vec![1.0], vec![1.5]).unwrap();
        let data = ScatteringData::reflectionless(d, SpectralGrid::new(SpectralParams::default()).unwrap());
        let text = serde_json::to_string(&data).unwrap();
        let back: ScatteringData = serde_json::from_str(&text).unwrap();
        assert_eq!(back.discrete, data.discrete);
        assert_eq!(back.coefficients, data.coefficients);
        let wrong = text.replacen(SCATTERING_SCHEMA, "other/1", 1);
        assert!(serde_json::from_str::<ScatteringData>(&wrong).is_err());
    }
}
