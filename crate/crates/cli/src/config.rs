//! Run configuration: a JSON file merged with command-line flags (flags win).

use std::f64::consts::PI;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use dnls::grid::SpectralParams;
use dnls::potential::Builtin;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Scatter,
    Synthesize,
    Evolve,
    Predict,
    Experiment,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Theorem1,
    Theorem2,
    AppendixC,
    Coeffevo,
}

/// Where the initial data comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialSource {
    Builtin(Builtin),
    /// CSV with columns x, re, im on a uniform grid of 2^k points.
    Samples {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    #[serde(rename = "L")]
    pub half_width: Option<f64>,
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectralConfig {
    pub delta0: Option<f64>,
    pub delta1: Option<f64>,
    /// Total node count; a multiple of 4 × the panel order.
    pub z_nodes: Option<usize>,
}

/// Everything a run may be configured with. All fields are optional in the
/// file; missing values fall back to per-command defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub experiment: Option<ExperimentKind>,
    pub potential: Option<PotentialSource>,
    pub grid: GridConfig,
    pub spectral: SpectralConfig,
    pub dt: Option<f64>,
    /// Final time (evolve), evaluation time (synthesize, predict, coeffevo).
    pub t: Option<f64>,
    pub times: Option<Vec<f64>>,
    pub rho: Option<f64>,
    pub eps: Option<f64>,
    pub xi: Option<Vec<f64>>,
    pub xi_max: Option<f64>,
    pub snapshot_every: Option<f64>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    /// Fills every unset field of `self` from `base`.
    pub fn or(self, base: RunConfig) -> RunConfig {
        RunConfig {
            command: self.command.or(base.command),
            experiment: self.experiment.or(base.experiment),
            potential: self.potential.or(base.potential),
            grid: GridConfig {
                half_width: self.grid.half_width.or(base.grid.half_width),
                n: self.grid.n.or(base.grid.n),
            },
            spectral: SpectralConfig {
                delta0: self.spectral.delta0.or(base.spectral.delta0),
                delta1: self.spectral.delta1.or(base.spectral.delta1),
                z_nodes: self.spectral.z_nodes.or(base.spectral.z_nodes),
            },
            dt: self.dt.or(base.dt),
            t: self.t.or(base.t),
            times: self.times.or(base.times),
            rho: self.rho.or(base.rho),
            eps: self.eps.or(base.eps),
            xi: self.xi.or(base.xi),
            xi_max: self.xi_max.or(base.xi_max),
            snapshot_every: self.snapshot_every.or(base.snapshot_every),
            out: self.out.or(base.out),
        }
    }

    /// Per-command defaults; the result has every field the command uses set.
    pub fn defaults(command: Command, experiment: Option<ExperimentKind>) -> RunConfig {
        let mut d = RunConfig {
            command: Some(command),
            experiment,
            grid: GridConfig { half_width: Some(40.0), n: Some(2048) },
            spectral: SpectralConfig { delta0: Some(0.05), delta1: Some(0.02), z_nodes: Some(800) },
            dt: Some(2e-3),
            out: Some(PathBuf::from("out")),
            ..Default::default()
        };
        match command {
            Command::Scatter => d.potential = Some(PotentialSource::Builtin(Builtin::BlackSoliton)),
            Command::Synthesize => d.t = Some(0.0),
            Command::Evolve => {
                d.potential = Some(PotentialSource::Builtin(Builtin::TanhGaussian { amplitude: 0.1, sigma: 1.0 }));
                d.t = Some(1.0);
                d.snapshot_every = Some(0.5);
            }
            Command::Predict => {
                d.potential = Some(PotentialSource::Builtin(Builtin::TanhGaussian { amplitude: 0.05, sigma: 1.0 }));
                d.t = Some(10.0);
                d.xi = Some(vec![0.0]);
            }
            Command::Experiment => match experiment.unwrap_or(ExperimentKind::Theorem1) {
                ExperimentKind::Theorem1 => {
                    d.eps = Some(0.05);
                    d.grid = GridConfig { half_width: Some(512.0), n: Some(16384) };
                    d.dt = Some(2.5e-4);
                    d.times = Some(vec![5.0, 10.0, 20.0, 40.0]);
                    d.xi_max = Some(0.9);
                }
                ExperimentKind::Theorem2 => d.eps = Some(0.02),
                ExperimentKind::AppendixC => d.eps = Some(0.02),
                ExperimentKind::Coeffevo => {
                    d.eps = Some(0.1);
                    d.t = Some(1.0);
                }
            },
        }
        d
    }

    pub fn spectral_params(&self) -> Result<SpectralParams, String> {
        let mut p = SpectralParams::default();
        if let Some(v) = self.spectral.delta0 {
            p.delta0 = v;
        }
        if let Some(v) = self.spectral.delta1 {
            p.delta1 = v;
        }
        if !(p.delta0 > 0.0 && p.delta0 < 1.0 && p.delta1 > 0.0 && p.delta1 < 1.0 - p.delta0) {
            return Err(format!("δ0 = {}, δ1 = {} out of range", p.delta0, p.delta1));
        }
        if let Some(n) = self.spectral.z_nodes {
            let quantum = 4 * p.order;
            if n == 0 || n % quantum != 0 {
                return Err(format!("z-nodes = {n} is not a positive multiple of {quantum}"));
            }
            if n / 4 <= p.graded_panels * p.order {
                return Err(format!("z-nodes = {n} leaves no room outside the graded panels"));
            }
            p = p.with_nodes_per_quarter(n / 4);
        }
        Ok(p)
    }
}

/// Parses an angle such as `1.2`, `pi/3`, `2pi/3`, `2*pi/3` or `0.5pi`.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_lowercase();
    let bad = || format!("cannot read angle '{s}'");
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a, Some(b.parse::<f64>().map_err(|_| bad())?)),
        None => (t.as_str(), None),
    };
    let value = if let Some(coef) = num.strip_suffix("pi") {
        let coef = coef.trim_end_matches('*');
        let c = if coef.is_empty() { 1.0 } else { coef.parse::<f64>().map_err(|_| bad())? };
        c * PI
    } else {
        num.parse::<f64>().map_err(|_| bad())?
    };
    let v = match den {
        Some(d) if d != 0.0 => value / d,
        Some(_) => return Err(bad()),
        None => value,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

pub fn parse_list(s: &str, item: impl Fn(&str) -> Result<f64, String>) -> Result<Vec<f64>, String> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(|p| item(p.trim())).collect()
}

pub fn parse_number(s: &str) -> Result<f64, String> {
    s.parse::<f64>().map_err(|_| format!("cannot read number '{s}'"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles() {
        assert_eq!(parse_angle("pi/3").unwrap(), PI / 3.0);
        assert_eq!(parse_angle("2pi/3").unwrap(), 2.0 * PI / 3.0);
        assert_eq!(parse_angle("2*pi/3").unwrap(), 2.0 * PI / 3.0);
        assert_eq!(parse_angle(" 0.5PI ").unwrap(), 0.5 * PI);
        assert_eq!(parse_angle("1.25").unwrap(), 1.25);
        assert!(parse_angle("pi/0").is_err());
        assert!(parse_angle("tau").is_err());
        assert_eq!(parse_list("pi/3, 2pi/3", parse_angle).unwrap(), vec![PI / 3.0, 2.0 * PI / 3.0]);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"grid": {"L": 20}, "colour": 1}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"grid": {"L": 20, "m": 3}}"#).is_err());
        let c: RunConfig = serde_json::from_str(r#"{"grid": {"L": 20}}"#).unwrap();
        assert_eq!(c.grid.half_width, Some(20.0));
    }

    #[test]
    fn flags_win_over_file() {
        let file = RunConfig { dt: Some(1e-3), t: Some(4.0), ..Default::default() };
        let flags = RunConfig { dt: Some(5e-4), ..Default::default() };
        let merged = flags.or(file);
        assert_eq!(merged.dt, Some(5e-4));
        assert_eq!(merged.t, Some(4.0));
    }

    #[test]
    fn z_nodes_must_fit_the_panels() {
        let mut c = RunConfig::default();
        c.spectral.z_nodes = Some(801);
        assert!(c.spectral_params().is_err());
        c.spectral.z_nodes = Some(1024);
        assert_eq!(c.spectral_params().unwrap().nodes_per_quarter(), 256);
    }
}
