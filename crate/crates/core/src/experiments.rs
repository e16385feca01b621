//! End-to-end checks of the long-time and perturbation results: each runs
//! the full pipeline and returns a report with a table, a fitted rate where
//! one applies, and a pass flag.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::asymptotics::Asymptotics;
use crate::error::{Error, Result};
use crate::evolve::{snapshots, EvolutionState};
use crate::grid::{GridFunction, SpectralGrid};
use crate::jost::{coefficients_for, Jost};
use crate::maps::{lambda, zeta, C64, I};
use crate::nsoliton::SolitonSpec;
use crate::potential::{Potential, SampledPotential};
use crate::spectrum::{find_circle_zeros, norming_constant, scatter, ScatterOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    /// t, ε or a spectral node, depending on the experiment.
    pub param: f64,
    pub measured: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub table: Vec<ReportRow>,
    pub fitted_slope: Option<f64>,
    pub pass: bool,
    pub runtime: f64,
    /// Experiment-specific extras.
    pub details: serde_json::Value,
}

/// Least-squares slope of log y against log x.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Theorem1Config {
    pub t_list: Vec<f64>,
    /// Explicit ξ samples; when empty, [`theorem1_xi_samples`] with `xi_max`.
    #[serde(default)]
    pub xi_list: Vec<f64>,
    pub xi_max: f64,
    pub xi_count: usize,
    pub dt: f64,
    #[serde(default)]
    pub rho: Option<f64>,
    /// E below this at every t counts as solver noise and passes outright.
    #[serde(default = "default_noise_floor")]
    pub noise_floor: f64,
    #[serde(default)]
    pub scatter: ScatterOptions,
}

fn default_noise_floor() -> f64 {
    1e-4
}

impl Default for Theorem1Config {
    fn default() -> Self {
        Self {
            t_list: vec![5.0, 10.0, 20.0, 40.0],
            xi_list: Vec::new(),
            xi_max: 0.9,
            xi_count: 181,
            dt: 2.5e-4,
            rho: None,
            noise_floor: default_noise_floor(),
            scatter: ScatterOptions::default(),
        }
    }
}

/// Uniform ξ samples on [−ξ_max, ξ_max] outside the strips |ξ − Re z_k| < ρ,
/// plus the strip centres Re z_k themselves.
pub fn theorem1_xi_samples(poles: &[C64], xi_max: f64, count: usize, rho: f64) -> Vec<f64> {
    let mut xs: Vec<f64> = (0..count)
        .map(|i| -xi_max + 2.0 * xi_max * i as f64 / (count.max(2) - 1) as f64)
        .filter(|xi| poles.iter().all(|z| (xi - z.re).abs() >= rho))
        .collect();
    xs.extend(poles.iter().map(|z| z.re).filter(|r| r.abs() <= xi_max));
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs
}

/// E(t) = max over the ξ samples of |q(2ξt, t) − e^{iα(1)} q^{(sol),N}(2ξt, t)|
/// with the soliton built from {z_j, c̃_j}, for each t; passes when E is
/// decreasing and the log-log slope is at most −0.8, or when every E is
/// below the noise floor (reflectionless input). The literal
/// e^{iα(ξ)} form and the regional formulas are reported alongside.
pub fn verify_theorem1(q0: &GridFunction, cfg: &Theorem1Config) -> Result<ExperimentReport> {
    let start = Instant::now();
    if cfg.t_list.len() < 2 || cfg.t_list.windows(2).any(|w| w[1] <= w[0]) || cfg.t_list[0] <= 0.0 {
        return Err(Error::Config("t_list must hold at least two increasing positive times".into()));
    }
    let pot = SampledPotential::new(q0);
    let jost = Jost::new(&pot);
    let (data, _) = scatter(&jost, &cfg.scatter)?;
    let asym = Asymptotics::new(&data);
    let rho = cfg.rho.unwrap_or_else(|| asym.default_rho());
    asym.validate_rho(rho)?;
    let poles = asym.poles();
    let xis = if cfg.xi_list.is_empty() {
        theorem1_xi_samples(&poles, cfg.xi_max, cfg.xi_count, rho)
    } else {
        cfg.xi_list.clone()
    };
    if xis.iter().any(|xi| xi.abs() >= 1.0) {
        return Err(Error::Config("every ξ sample must satisfy |ξ| < 1".into()));
    }
    let spec = asym.modified_spec()?;

    let snaps = snapshots(q0, &cfg.t_list, cfg.dt)?;
    let (mut es, mut literal, mut regional, mut edges) = (vec![], vec![], vec![], vec![]);
    for (q, &t) in snaps.iter().zip(&cfg.t_list) {
        let field = SampledPotential::with_left_limit(q, pot.left_limit());
        let (mut e, mut el, mut er) = (0.0f64, 0.0f64, 0.0f64);
        for &xi in &xis {
            let x = 2.0 * xi * t;
            if x < q.grid.x_min || x >= q.grid.x_max - q.grid.h() {
                return Err(Error::Config(format!("x = {x} at t = {t} leaves the box")));
            }
            let qn = field.eval(x);
            e = e.max((qn - asym.predictor(&spec, x, t)?).norm());
            el = el.max((qn - asym.predictor_alpha_xi(&spec, x, t)?).norm());
            let ad = asym.partition_and_phase(xi, rho)?;
            er = er.max((qn - asym.leading_order(&ad, x, t)?).norm());
        }
        let m = (q.grid.n / 100).max(1);
        let edge = q.values[..m]
            .iter()
            .zip(q.grid.points())
            .map(|(v, x)| (v - crate::potential::background(pot.left_limit(), x)).norm())
            .fold(0.0, f64::max);
        es.push(e);
        literal.push(el);
        regional.push(er);
        edges.push(edge);
    }
    let slope = loglog_slope(&cfg.t_list, &es);
    let decreasing = es.windows(2).all(|w| w[1] < w[0]);
    let (t0, e0) = (cfg.t_list[0], es[0]);
    let table =
        cfg.t_list.iter().zip(&es).map(|(&t, &e)| ReportRow { param: t, measured: e, bound: e0 * t0 / t }).collect();
    Ok(ExperimentReport {
        name: "theorem1".into(),
        table,
        fitted_slope: Some(slope),
        pass: (decreasing && slope <= -0.8) || es.iter().all(|&e| e <= cfg.noise_floor),
        runtime: start.elapsed().as_secs_f64(),
        details: json!({
            "decreasing": decreasing,
            "xi_samples": xis.len(),
            "xi_max": xis.iter().fold(0.0f64, |m, x| m.max(x.abs())),
            "rho": rho,
            "alpha_one": asym.alpha_one(),
            "thetas": data.discrete.thetas,
            "c_tilde_modulus": asym.c_tilde().iter().map(|c| c.norm()).collect::<Vec<_>>(),
            "error_alpha_xi_form": literal,
            "slope_alpha_xi_form": loglog_slope(&cfg.t_list, &literal),
            "error_regional": regional,
            "left_edge_deviation": edges,
        }),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationConfig {
    pub eps_list: Vec<f64>,
    #[serde(default)]
    pub scatter: ScatterOptions,
}

impl Default for PerturbationConfig {
    fn default() -> Self {
        Self { eps_list: vec![0.02, 0.04], scatter: ScatterOptions::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoleMatch {
    pub eps: f64,
    /// max_j |z_j − z′_j| + |c_j − c′_j| over the matched poles.
    pub deviation: f64,
    /// max |1 ∓ z′| over the extra poles.
    pub extra_distance: f64,
    pub extras: usize,
    pub ambiguous: bool,
}

/// Perturbs the M-soliton at t = 0 by εf and matches the recovered poles to
/// the original ones; leftover poles must sit near ±1. Passes when every
/// deviation is bounded by C·ε, C fitted at the largest ε.
pub fn verify_theorem2(spec: &SolitonSpec, f: &GridFunction, cfg: &PerturbationConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    let base = GridFunction::from_fn(f.grid, |x| spec.eval(x, 0.0).unwrap_or(C64::new(f64::NAN, 0.0)));
    if base.values.iter().any(|v| !v.re.is_finite()) {
        return Err(Error::Numeric("soliton synthesis failed on the grid".into()));
    }
    let poles = spec.poles();
    let mut matches = Vec::new();
    for &eps in &cfg.eps_list {
        let q = GridFunction {
            grid: f.grid,
            values: base.values.iter().zip(&f.values).map(|(b, v)| b + eps * v).collect(),
        };
        let pot = SampledPotential::with_left_limit(&q, spec.left_limit());
        let jost = Jost::new(&pot);
        let zeros = find_circle_zeros(&jost, cfg.scatter.n_scan, cfg.scatter.spectral.delta1)?;
        let found: Vec<C64> = zeros.iter().map(|z| C64::from_polar(1.0, z.theta)).collect();
        let mut used = vec![false; found.len()];
        let mut deviation: f64 = 0.0;
        let mut ambiguous = false;
        for (j, z) in poles.iter().enumerate() {
            let mut order: Vec<usize> = (0..found.len()).filter(|&k| !used[k]).collect();
            order.sort_by(|&a, &b| (found[a] - z).norm().partial_cmp(&(found[b] - z).norm()).unwrap());
            let Some(&k) = order.first() else {
                ambiguous = true;
                continue;
            };
            // a runner-up as close as the match makes the pairing unreliable
            if let Some(&k2) = order.get(1) {
                if (found[k2] - z).norm() < 2.0 * (found[k] - z).norm() + 1e-9 {
                    ambiguous = true;
                }
            }
            used[k] = true;
            let c = norming_constant(&jost, zeros[k].theta)?.c;
            deviation = deviation.max((found[k] - z).norm() + (c - spec.discrete.c[j]).norm());
        }
        let extras: Vec<C64> = (0..found.len()).filter(|&k| !used[k]).map(|k| found[k]).collect();
        let extra_distance = extras.iter().map(|z| (z - 1.0).norm().min((z + 1.0).norm())).fold(0.0, f64::max);
        matches.push(PoleMatch { eps, deviation, extra_distance, extras: extras.len(), ambiguous });
    }
    let (worst_eps, worst) = matches
        .iter()
        .filter(|m| m.eps > 0.0)
        .map(|m| (m.eps, m.deviation.max(m.extra_distance)))
        .fold((0.0, 0.0), |acc, v| if v.0 > acc.0 { v } else { acc });
    let c_fit = if worst_eps > 0.0 { worst / worst_eps } else { 0.0 };
    let mut pass = !matches.iter().any(|m| m.ambiguous);
    let table: Vec<ReportRow> = matches
        .iter()
        .map(|m| {
            let measured = m.deviation.max(m.extra_distance);
            let bound = if m.eps > 0.0 { 1.25 * c_fit * m.eps } else { 1e-6 };
            pass &= measured <= bound;
            ReportRow { param: m.eps, measured, bound }
        })
        .collect();
    let largest_unambiguous = matches.iter().filter(|m| !m.ambiguous).map(|m| m.eps).fold(0.0, f64::max);
    Ok(ExperimentReport {
        name: "theorem2".into(),
        table,
        fitted_slope: None,
        pass,
        runtime: start.elapsed().as_secs_f64(),
        details: json!({
            "matches": matches,
            "fitted_constant": c_fit,
            "largest_unambiguous_eps": largest_unambiguous,
        }),
    })
}

/// C(±, f) = ∫ ((e^{−4y} − 1) f_R ∓ 2e^{−2y} f_I)/(1 + e^{−2y})² dy
///         = −∫ tanh y f_R dy ∓ ½∫ sech² y f_I dy.
pub fn appendix_c_constants(f: &GridFunction) -> (f64, f64) {
    let h = f.grid.h();
    let (mut r, mut i) = (0.0, 0.0);
    for (k, v) in f.values.iter().enumerate() {
        let y = f.grid.x(k);
        let s = 1.0 / y.cosh();
        r += -y.tanh() * v.re;
        i += 0.5 * s * s * v.im;
    }
    (h * (r - i), h * (r + i))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonOutcome {
    #[serde(with = "crate::cser::scalar")]
    pub z: C64,
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
}

/// Damped Newton for a zero of the Wronskian det[ψ₁⁻, ψ₂⁺] with a central
/// difference derivative (step 1e−6).
pub fn wronskian_newton<P: Potential + ?Sized>(jost: &Jost<'_, P>, z0: C64) -> Result<NewtonOutcome> {
    let h = 1e-6;
    let mut z = z0;
    let mut w = jost.wronskian_a(z)?;
    for it in 0..80 {
        if w.norm() < 1e-14 {
            return Ok(NewtonOutcome { z, converged: true, iterations: it, residual: w.norm() });
        }
        let d = (jost.wronskian_a(z + h)? - jost.wronskian_a(z - h)?) / (2.0 * h);
        if d.norm() == 0.0 {
            break;
        }
        let step = w / d;
        let mut damp = 1.0;
        let mut accepted = false;
        while damp > 1e-4 {
            let zn = z - damp * step;
            let wn = jost.wronskian_a(zn)?;
            if wn.norm() < w.norm() {
                z = zn;
                w = wn;
                accepted = true;
                break;
            }
            damp *= 0.5;
        }
        if !accepted || (damp * step).norm() < 1e-14 {
            let ok = w.norm() < 1e-10;
            return Ok(NewtonOutcome { z, converged: ok, iterations: it + 1, residual: w.norm() });
        }
    }
    Ok(NewtonOutcome { z, converged: w.norm() < 1e-10, iterations: 80, residual: w.norm() })
}

/// Predicted zeros of the Wronskian of tanh + εf near ±1 to first order:
/// z₊ = 1 + iεC(−, f) and z₋ = −1 + iεC(+, f). A real f gives C(+) = C(−)
/// and the pair is symmetric under z → −z̄, as it must be for real data.
pub fn appendix_c_prediction(c_plus: f64, c_minus: f64, eps: f64) -> (C64, C64) {
    (1.0 + I * eps * c_minus, -1.0 + I * eps * c_plus)
}

/// The stated form ±(1 + iεC(±, f)). It agrees with
/// [`appendix_c_prediction`] near +1 only when f is real, and near −1
/// only to zeroth order.
pub fn appendix_c_prediction_stated(c_plus: f64, c_minus: f64, eps: f64) -> (C64, C64) {
    (1.0 + I * eps * c_plus, -(1.0 + I * eps * c_minus))
}

/// For each ε locates the Wronskian zeros of tanh + εf near ±1 by Newton
/// from the first-order prediction. Passes when the zero near +1 is found
/// for every ε and its distance to the prediction grows fourfold per
/// doubling of ε (ratio in [3, 5]).
pub fn appendix_c_zero(f: &GridFunction, eps_list: &[f64]) -> Result<ExperimentReport> {
    let start = Instant::now();
    let (cp, cm) = appendix_c_constants(f);
    let mut rows = Vec::new();
    let mut outcomes = Vec::new();
    let mut found = true;
    for &eps in eps_list {
        let q = GridFunction {
            grid: f.grid,
            values: f.values.iter().zip(f.grid.points()).map(|(v, x)| x.tanh() + eps * v).collect(),
        };
        let pot = SampledPotential::with_left_limit(&q, C64::new(-1.0, 0.0));
        let jost = Jost::new(&pot);
        let (gp, gm) = appendix_c_prediction(cp, cm, eps);
        let (sp, sm) = appendix_c_prediction_stated(cp, cm, eps);
        let plus = wronskian_newton(&jost, gp)?;
        let minus = wronskian_newton(&jost, gm)?;
        found &= plus.converged;
        let res = (plus.z - gp).norm();
        rows.push(ReportRow { param: eps, measured: res, bound: f64::NAN });
        outcomes.push(json!({
            "eps": eps,
            "plus": plus,
            "plus_above_axis": plus.z.im > 0.0,
            "plus_residual": res,
            "plus_residual_stated_form": (plus.z - sp).norm(),
            "minus": minus,
            "minus_above_axis": minus.z.im > 0.0,
            "minus_residual": (minus.z - gm).norm(),
            "minus_residual_stated_form": (minus.z - sm).norm(),
        }));
    }
    let mut ratios = Vec::new();
    for i in 1..rows.len() {
        let r = rows[i].measured / rows[i - 1].measured;
        let e = rows[i].param / rows[i - 1].param;
        // residuals scale as ε²: normalise to a doubling
        ratios.push(r.powf(2.0f64.ln() / e.ln()));
        rows[i].bound = rows[i - 1].measured * e * e;
    }
    if let Some(r) = rows.first_mut() {
        r.bound = r.measured;
    }
    let pass = found && !ratios.is_empty() && ratios.iter().all(|r| (3.0..=5.0).contains(r));
    let slope = (rows.len() >= 2).then(|| {
        loglog_slope(
            &rows.iter().map(|r| r.param).collect::<Vec<_>>(),
            &rows.iter().map(|r| r.measured).collect::<Vec<_>>(),
        )
    });
    Ok(ExperimentReport {
        name: "appendix-c".into(),
        table: rows,
        fitted_slope: slope,
        pass,
        runtime: start.elapsed().as_secs_f64(),
        details: json!({ "c_plus": cp, "c_minus": cm, "ratios": ratios, "zeros": outcomes }),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffEvoConfig {
    pub t: f64,
    pub dt: f64,
    #[serde(default)]
    pub scatter: ScatterOptions,
}

impl Default for CoeffEvoConfig {
    fn default() -> Self {
        Self { t: 1.0, dt: 2e-3, scatter: ScatterOptions::default() }
    }
}

/// a(z, t) against a(z, 0) and b(z, t)e^{4iζλt} against b(z, 0) on the
/// spectral grid; passes when both node-wise errors are at most 5e−3.
pub fn coeffevo_check(q0: &GridFunction, cfg: &CoeffEvoConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    let grid = SpectralGrid::new(cfg.scatter.spectral)?;
    let pot0 = SampledPotential::new(q0);
    let left = pot0.left_limit();
    let c0 = coefficients_for(&Jost::new(&pot0), &grid)?;
    let mut st = EvolutionState::with_left_limit(q0, left, cfg.dt)?;
    st.advance_to(cfg.t)?;
    let qt = st.q();
    let pot1 = SampledPotential::with_left_limit(&qt, left);
    let c1 = coefficients_for(&Jost::new(&pot1), &grid)?;
    let mut table = Vec::with_capacity(grid.len());
    let (mut ea, mut eb, mut b_max) = (0.0f64, 0.0f64, 0.0f64);
    for (k, &z) in grid.z.iter().enumerate() {
        let zc = C64::new(z, 0.0);
        let rot = (4.0 * I * zeta(zc)? * lambda(zc)? * cfg.t).exp();
        let da = (c1.a[k] - c0.a[k]).norm();
        let db = (c1.b[k] * rot - c0.b[k]).norm();
        ea = ea.max(da);
        eb = eb.max(db);
        b_max = b_max.max(c1.b[k].norm());
        table.push(ReportRow { param: z, measured: da.max(db), bound: 5e-3 });
    }
    Ok(ExperimentReport {
        name: "coeffevo".into(),
        table,
        fitted_slope: None,
        pass: ea <= 5e-3 && eb <= 5e-3,
        runtime: start.elapsed().as_secs_f64(),
        details: json!({ "t": cfg.t, "max_error_a": ea, "max_error_b": eb, "max_abs_b": b_max,
                         "mass_drift": (qt.mass() - q0.mass()).abs() / q0.mass().abs().max(1e-12) }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::SpatialGrid;

    #[test]
    fn slope_of_a_power_law() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(-1.3)).collect();
        assert!((loglog_slope(&x, &y) + 1.3).abs() < 1e-12);
    }

    #[test]
    fn xi_samples_skip_strips_but_keep_centres() {
        let poles = [C64::from_polar(1.0, 1.2)];
        let xs = theorem1_xi_samples(&poles, 0.9, 181, 0.1);
        let r = poles[0].re;
        assert!(xs.iter().all(|x| (x - r).abs() >= 0.1 || *x == r));
        assert!(xs.contains(&r));
        assert!(xs.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn constants_of_simple_profiles() {
        let g = SpatialGrid::symmetric(30.0, 4096).unwrap();
        // f = i: C(±) = ∓½∫sech² = ∓1
        let f = GridFunction::from_fn(g, |_| I);
        let (cp, cm) = appendix_c_constants(&f);
        assert!((cp + 1.0).abs() < 1e-10 && (cm - 1.0).abs() < 1e-10);
        // real f gives the mirror-symmetric pair
        let (zp, zm) = appendix_c_prediction(0.7, 0.7, 0.1);
        assert!((zm + zp.conj()).norm() < 1e-15);
        let (sp, _) = appendix_c_prediction_stated(0.7, 0.7, 0.1);
        assert_eq!(sp, zp);
    }

    #[test]
    fn newton_finds_black_soliton_zero() {
        let pot = crate::potential::Builtin::BlackSoliton;
        let jost = Jost::new(&pot);
        let out = wronskian_newton(&jost, C64::new(0.1, 0.9)).unwrap();
        assert!(out.converged);
        assert!((out.z - I).norm() < 1e-9, "{}", out.z);
    }
}
