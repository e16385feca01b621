//! The pipelines behind each verb. Every run writes into its own directory:
//! manifest.json plus the verb's data files.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use dnls::asymptotics::Asymptotics;
use dnls::evolve::EvolutionState;
use dnls::experiments::{
    appendix_c_zero, coeffevo_check, verify_theorem1, verify_theorem2, CoeffEvoConfig, ExperimentReport,
    PerturbationConfig, Theorem1Config,
};
use dnls::grid::{GridFunction, SpatialGrid};
use dnls::jost::Jost;
use dnls::nsoliton::SolitonSpec;
use dnls::potential::{Builtin, Potential, SampledPotential};
use dnls::spectrum::{
    norming_constant, scatter, theta_condition_residual, trace_formula_residual, DiscreteSpectrum, ScatterOptions,
};
use dnls::C64;

use crate::config::{Command, ExperimentKind, PotentialSource, RunConfig};

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or unreadable input: exit status 2.
    Config(String),
    /// Numerical or output failure: exit status 3.
    Run(String),
}

impl From<dnls::Error> for CliError {
    fn from(e: dnls::Error) -> Self {
        match e {
            dnls::Error::Config(m) | dnls::Error::InvalidSpec(m) => CliError::Config(m),
            other => CliError::Run(other.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Outcome of a run: whether an experiment passed.
pub struct Outcome {
    pub pass: bool,
}

struct Output {
    dir: PathBuf,
    files: Vec<String>,
}

impl Output {
    fn new(dir: &Path) -> Self {
        Self { dir: dir.to_path_buf(), files: Vec::new() }
    }

    /// Created on first write so that rejected inputs leave nothing behind.
    fn path(&self, name: &str) -> CliResult<PathBuf> {
        fs::create_dir_all(&self.dir)
            .map_err(|e| CliError::Run(format!("cannot create {}: {e}", self.dir.display())))?;
        Ok(self.dir.join(name))
    }

    fn json(&mut self, name: &str, value: &impl Serialize) -> CliResult<()> {
        let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Run(e.to_string()))?;
        self.write(name, text + "\n")
    }

    fn write(&mut self, name: &str, text: String) -> CliResult<()> {
        let path = self.path(name)?;
        fs::write(&path, text).map_err(|e| CliError::Run(format!("cannot write {}: {e}", path.display())))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn csv<R: Serialize>(&mut self, name: &str, rows: impl IntoIterator<Item = R>) -> CliResult<()> {
        let path = self.path(name)?;
        let err = |e: csv::Error| CliError::Run(format!("cannot write {}: {e}", path.display()));
        let mut w = csv::Writer::from_path(&path).map_err(err)?;
        for r in rows {
            w.serialize(r).map_err(err)?;
        }
        w.flush().map_err(|e| CliError::Run(e.to_string()))?;
        self.files.push(name.to_string());
        Ok(())
    }
}

#[derive(Serialize)]
struct FieldRow {
    x: f64,
    re: f64,
    im: f64,
    abs2: f64,
}

fn field_rows(q: &GridFunction) -> Vec<FieldRow> {
    q.values.iter().zip(q.grid.points()).map(|(v, x)| FieldRow { x, re: v.re, im: v.im, abs2: v.norm_sqr() }).collect()
}

#[derive(serde::Deserialize)]
struct SampleRow {
    x: f64,
    re: f64,
    im: f64,
}

/// Reads x, re, im samples; x must be uniform and the count a power of two.
pub fn read_samples(path: &Path) -> CliResult<GridFunction> {
    let mut r = csv::Reader::from_path(path)
        .map_err(|e| CliError::Config(format!("cannot read samples {}: {e}", path.display())))?;
    let rows: Vec<SampleRow> = r
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Config(format!("bad sample row in {}: {e}", path.display())))?;
    if rows.len() < 2 {
        return Err(CliError::Config(format!("{} holds fewer than two samples", path.display())));
    }
    let h = rows[1].x - rows[0].x;
    let uniform = rows.windows(2).all(|w| ((w[1].x - w[0].x) - h).abs() <= 1e-9 * h.abs().max(1.0));
    if !(h > 0.0) || !uniform {
        return Err(CliError::Config("sample abscissae are not uniform and increasing".into()));
    }
    let grid = SpatialGrid::new(rows[0].x, rows[0].x + h * rows.len() as f64, rows.len())?;
    Ok(GridFunction { grid, values: rows.iter().map(|r| C64::new(r.re, r.im)).collect() })
}

fn spatial_grid(cfg: &RunConfig) -> CliResult<SpatialGrid> {
    let l = cfg.grid.half_width.ok_or_else(|| CliError::Config("grid L unset".into()))?;
    let n = cfg.grid.n.ok_or_else(|| CliError::Config("grid n unset".into()))?;
    if !(l > 0.0) {
        return Err(CliError::Config(format!("grid L = {l} must be positive")));
    }
    Ok(SpatialGrid::symmetric(l, n)?)
}

fn scatter_options(cfg: &RunConfig) -> CliResult<ScatterOptions> {
    let spectral = cfg.spectral_params().map_err(CliError::Config)?;
    Ok(ScatterOptions { spectral, ..Default::default() })
}

/// The initial data sampled on the configured grid (or as read from file).
fn initial_field(cfg: &RunConfig) -> CliResult<GridFunction> {
    match cfg.potential.as_ref().ok_or_else(|| CliError::Config("no potential given".into()))? {
        PotentialSource::Builtin(b) => {
            validate_builtin(b)?;
            Ok(b.sample(spatial_grid(cfg)?))
        }
        PotentialSource::Samples { path } => read_samples(path),
    }
}

fn validate_builtin(b: &Builtin) -> CliResult<()> {
    match b {
        Builtin::DarkSoliton { theta, .. } if !(*theta > 0.0 && *theta < PI) => {
            Err(CliError::Config(format!("dark-soliton θ = {theta} is not in (0, π)")))
        }
        Builtin::TanhGaussian { sigma, .. } if !(*sigma > 0.0) => {
            Err(CliError::Config(format!("σ = {sigma} must be positive")))
        }
        Builtin::TanhCompactBump { half_width, .. } if !(*half_width > 0.0) => {
            Err(CliError::Config(format!("bump half-width {half_width} must be positive")))
        }
        _ => Ok(()),
    }
}

pub fn run(cfg: &RunConfig) -> CliResult<Outcome> {
    let command = cfg.command.ok_or_else(|| CliError::Config("no command".into()))?;
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let mut out = Output::new(&dir);
    let pass = match command {
        Command::Scatter => run_scatter(cfg, &mut out)?,
        Command::Synthesize => run_synthesize(cfg, &mut out)?,
        Command::Evolve => run_evolve(cfg, &mut out)?,
        Command::Predict => run_predict(cfg, &mut out)?,
        Command::Experiment => run_experiment(cfg, &mut out)?,
    };
    let mut files = out.files.clone();
    files.push("manifest.json".into());
    let manifest = json!({
        "schema": "dnls.manifest/1",
        "config": cfg,
        "versions": { "dnls-cli": env!("CARGO_PKG_VERSION"), "dnls-core": dnls::VERSION },
        "files": files,
    });
    out.json("manifest.json", &manifest)?;
    Ok(Outcome { pass })
}

#[derive(Serialize)]
struct CoefficientRow {
    z: f64,
    weight: f64,
    a_re: f64,
    a_im: f64,
    b_re: f64,
    b_im: f64,
    r_re: f64,
    r_im: f64,
}

fn run_scatter(cfg: &RunConfig, out: &mut Output) -> CliResult<bool> {
    let q = initial_field(cfg)?;
    let pot: Box<dyn Potential> = match cfg.potential.as_ref() {
        Some(PotentialSource::Builtin(b)) => Box::new(b.clone()),
        _ => Box::new(SampledPotential::new(&q)),
    };
    let jost = Jost::new(pot.as_ref());
    let (data, zeros) = scatter(&jost, &scatter_options(cfg)?)?;
    let mut listed = Vec::new();
    for z in &zeros {
        let mut entry = json!({
            "theta": z.theta,
            "z": { "re": z.theta.cos(), "im": z.theta.sin() },
            "residual": z.residual,
            "boundary_suspect": z.boundary_suspect,
        });
        if !z.boundary_suspect {
            let nc = norming_constant(&jost, z.theta)?;
            entry["norming"] = serde_json::to_value(nc).map_err(|e| CliError::Run(e.to_string()))?;
        }
        listed.push(entry);
    }
    out.json(
        "a.json",
        &json!({
            "schema": "dnls.zeros/1",
            "left_limit": { "re": data.left_limit.re, "im": data.left_limit.im },
            "zeros": listed,
            "trace_formula_residual": trace_formula_residual(&data, &jost)?,
            "theta_condition_residual": theta_condition_residual(&data),
        }),
    )?;
    out.json("scattering.json", &data)?;
    let c = &data.coefficients;
    out.csv(
        "coefficients.csv",
        (0..c.grid.len()).map(|k| CoefficientRow {
            z: c.grid.z[k],
            weight: c.grid.weights[k],
            a_re: c.a[k].re,
            a_im: c.a[k].im,
            b_re: c.b[k].re,
            b_im: c.b[k].im,
            r_re: c.r[k].re,
            r_im: c.r[k].im,
        }),
    )?;
    Ok(true)
}

fn soliton_spec(cfg: &RunConfig) -> CliResult<SolitonSpec> {
    match cfg.potential.as_ref() {
        Some(PotentialSource::Builtin(Builtin::Nsoliton { spec, .. })) => Ok(spec.clone()),
        Some(PotentialSource::Builtin(Builtin::DarkSoliton { theta, x0 })) => {
            // sol(x − x0) has |c| = 2 Im z e^{2 Im z x0}
            let m = 2.0 * theta.sin() * (2.0 * theta.sin() * x0).exp();
            Ok(SolitonSpec::new(DiscreteSpectrum::from_moduli(vec![*theta], vec![m])?)?)
        }
        Some(PotentialSource::Builtin(Builtin::BlackSoliton)) => {
            Ok(SolitonSpec::new(DiscreteSpectrum::from_moduli(vec![PI / 2.0], vec![2.0])?)?)
        }
        None => Err(CliError::Config("synthesize needs --poles or an nsoliton potential".into())),
        _ => Err(CliError::Config("synthesize needs reflectionless data".into())),
    }
}

fn run_synthesize(cfg: &RunConfig, out: &mut Output) -> CliResult<bool> {
    let spec = soliton_spec(cfg)?;
    let t = cfg.t.unwrap_or(0.0);
    let grid = spatial_grid(cfg)?;
    let mut values = Vec::with_capacity(grid.n);
    for x in grid.points() {
        values.push(spec.eval(x, t)?);
    }
    let q = GridFunction { grid, values };
    out.csv("q.csv", field_rows(&q))?;
    out.json(
        "spectrum.json",
        &json!({ "schema": "dnls.spectrum/1", "t": t, "discrete": spec, "phase_shifts": spec.phase_shifts() }),
    )?;
    Ok(true)
}

#[derive(Serialize)]
struct MassRow {
    t: f64,
    mass: f64,
    edge: f64,
}

fn run_evolve(cfg: &RunConfig, out: &mut Output) -> CliResult<bool> {
    let q0 = initial_field(cfg)?;
    let t_final = cfg.t.unwrap_or(1.0);
    let dt = cfg.dt.unwrap_or(2e-3);
    let every = cfg.snapshot_every.unwrap_or(t_final);
    if !(t_final >= 0.0) || !(every > 0.0) {
        return Err(CliError::Config("final time must be ≥ 0 and the snapshot interval > 0".into()));
    }
    let mut st = EvolutionState::new(&q0, dt)?;
    let mut trace = vec![st.sample()];
    out.csv("q_0000.csv", field_rows(&q0))?;
    let mut k = 1;
    loop {
        let target = (k as f64 * every).min(t_final);
        if target <= st.t && k > 1 {
            break;
        }
        st.advance_to(target)?;
        trace.push(st.sample());
        out.csv(&format!("q_{k:04}.csv"), field_rows(&st.q()))?;
        if target >= t_final {
            break;
        }
        k += 1;
    }
    out.csv("mass.csv", trace.iter().map(|s| MassRow { t: s.t, mass: s.mass, edge: s.edge }))?;
    out.json(
        "snapshots.json",
        &json!({
            "schema": "dnls.snapshots/1",
            "times": trace.iter().map(|s| s.t).collect::<Vec<_>>(),
            "files": (0..trace.len()).map(|k| format!("q_{k:04}.csv")).collect::<Vec<_>>(),
        }),
    )?;
    Ok(true)
}

#[derive(Serialize)]
struct PredictRow {
    x: f64,
    re: f64,
    im: f64,
    abs2: f64,
    regional_re: f64,
    regional_im: f64,
}

fn run_predict(cfg: &RunConfig, out: &mut Output) -> CliResult<bool> {
    let q0 = initial_field(cfg)?;
    let pot: Box<dyn Potential> = match cfg.potential.as_ref() {
        Some(PotentialSource::Builtin(b)) => Box::new(b.clone()),
        _ => Box::new(SampledPotential::new(&q0)),
    };
    let jost = Jost::new(pot.as_ref());
    let (data, _) = scatter(&jost, &scatter_options(cfg)?)?;
    let asym = Asymptotics::new(&data);
    let rho = cfg.rho.unwrap_or_else(|| asym.default_rho());
    asym.validate_rho(rho)?;
    let t = cfg.t.unwrap_or(10.0);
    if !(t > 0.0) {
        return Err(CliError::Config(format!("prediction time {t} must be positive")));
    }
    let spec = asym.modified_spec()?;
    let grid = spatial_grid(cfg)?;
    let mut rows = Vec::new();
    for x in grid.points() {
        if (x / (2.0 * t)).abs() >= 1.0 {
            continue;
        }
        let p = asym.predictor(&spec, x, t)?;
        let ad = asym.partition_and_phase(x / (2.0 * t), rho)?;
        let r = asym.leading_order(&ad, x, t)?;
        rows.push(PredictRow { x, re: p.re, im: p.im, abs2: p.norm_sqr(), regional_re: r.re, regional_im: r.im });
    }
    out.csv("predict.csv", rows)?;
    let mut regions = Vec::new();
    for &xi in cfg.xi.as_deref().unwrap_or(&[0.0]) {
        regions.push(asym.partition_and_phase(xi, rho)?);
    }
    out.json(
        "asymptotics.json",
        &json!({
            "schema": "dnls.asymptotics/1",
            "t": t,
            "alpha_one": asym.alpha_one(),
            "modified_spectrum": spec,
            "frame_phase_shifts": asym.frame_phase_shifts(),
            "regions": regions,
        }),
    )?;
    out.json("scattering.json", &data)?;
    Ok(true)
}

#[derive(Serialize)]
struct ReportCsvRow {
    param: f64,
    measured: f64,
    bound: f64,
}

fn run_experiment(cfg: &RunConfig, out: &mut Output) -> CliResult<bool> {
    let kind = cfg.experiment.ok_or_else(|| CliError::Config("no experiment named".into()))?;
    let eps = cfg.eps.ok_or_else(|| CliError::Config("eps unset".into()))?;
    if !(eps >= 0.0) {
        return Err(CliError::Config(format!("ε = {eps} must be non-negative")));
    }
    let grid = spatial_grid(cfg)?;
    let scatter = scatter_options(cfg)?;
    let odd_bump =
        |g: SpatialGrid| GridFunction::from_fn(g, |x| C64::new(Builtin::bump_profile(0.0, 2.0, true, x), 0.0));
    let report: ExperimentReport = match kind {
        ExperimentKind::Theorem1 => {
            let q0 = match cfg.potential {
                Some(_) => initial_field(cfg)?,
                None => Builtin::TanhGaussian { amplitude: eps, sigma: 1.0 }.sample(grid),
            };
            let t1 = Theorem1Config {
                t_list: cfg.times.clone().unwrap_or_else(|| vec![5.0, 10.0, 20.0, 40.0]),
                xi_list: cfg.xi.clone().unwrap_or_default(),
                xi_max: cfg.xi_max.unwrap_or(0.9),
                dt: cfg.dt.unwrap_or(2.5e-4),
                rho: cfg.rho,
                scatter,
                ..Default::default()
            };
            verify_theorem1(&q0, &t1)?
        }
        ExperimentKind::Theorem2 => {
            let spec = match cfg.potential {
                Some(_) => soliton_spec(cfg)?,
                None => {
                    SolitonSpec::new(DiscreteSpectrum::from_moduli(vec![PI / 3.0, 2.0 * PI / 3.0], vec![1.3, 0.7])?)?
                }
            };
            let pc = PerturbationConfig { eps_list: vec![eps, 2.0 * eps], scatter };
            verify_theorem2(&spec, &odd_bump(grid), &pc)?
        }
        ExperimentKind::AppendixC => appendix_c_zero(&odd_bump(grid), &[eps, 2.0 * eps, 4.0 * eps])?,
        ExperimentKind::Coeffevo => {
            let q0 = match cfg.potential {
                Some(_) => initial_field(cfg)?,
                None => Builtin::TanhGaussian { amplitude: eps, sigma: 1.0 }.sample(grid),
            };
            let cc = CoeffEvoConfig { t: cfg.t.unwrap_or(1.0), dt: cfg.dt.unwrap_or(2e-3), scatter };
            coeffevo_check(&q0, &cc)?
        }
    };
    // wall time is the one field that differs between identical runs
    let mut doc = serde_json::to_value(&report).map_err(|e| CliError::Run(e.to_string()))?;
    if let Some(m) = doc.as_object_mut() {
        m.remove("runtime");
    }
    out.json("report.json", &doc)?;
    eprintln!("{}: {} in {:.1} s", report.name, if report.pass { "pass" } else { "FAIL" }, report.runtime);
    out.csv(
        "report.csv",
        report.table.iter().map(|r| ReportCsvRow { param: r.param, measured: r.measured, bound: r.bound }),
    )?;
    Ok(report.pass)
}
