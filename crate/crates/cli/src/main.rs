//! `dnls`: scattering, synthesis, evolution, prediction and experiments for
//! the defocusing NLS on a unit background.

// `!(x > 0.0)` is used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{run, CliError};
use config::{parse_angle, parse_list, parse_number, Command, ExperimentKind, PotentialSource, RunConfig};
use dnls::nsoliton::SolitonSpec;
use dnls::potential::Builtin;
use dnls::spectrum::DiscreteSpectrum;

#[derive(Parser, Debug)]
#[command(name = "dnls", version, about = "Defocusing NLS with a unit background: scattering, solitons, asymptotics")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand, Debug)]
enum Verb {
    /// Forward scattering: a, b, r on the real line, zeros and norming constants.
    Scatter(PotentialArgs),
    /// Reflectionless N-soliton on the spatial grid.
    Synthesize(PotentialArgs),
    /// Split-step evolution with CSV snapshots.
    Evolve(PotentialArgs),
    /// Long-time prediction from the scattering data.
    Predict(PotentialArgs),
    /// Scripted verification runs.
    Experiment {
        #[arg(value_enum)]
        name: ExperimentKind,
        #[command(flatten)]
        potential: PotentialArgs,
    },
}

#[derive(Args, Debug, Default)]
struct Common {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default ./out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Half-width L of the box [−L, L).
    #[arg(long = "grid-L", global = true)]
    grid_l: Option<f64>,
    /// Number of grid points (a power of two).
    #[arg(long = "grid-n", global = true)]
    grid_n: Option<usize>,
    /// Split-step time step.
    #[arg(long, global = true)]
    dt: Option<f64>,
    /// Total number of spectral nodes on the real line.
    #[arg(long = "z-nodes", global = true)]
    z_nodes: Option<usize>,
    /// Spectral grid covers δ0 < |z| < 1/δ0.
    #[arg(long, global = true)]
    delta0: Option<f64>,
    /// Half-width of the windows excluded around z = ±1.
    #[arg(long, global = true)]
    delta1: Option<f64>,
    /// Strip half-width ρ around each Re z_k (default from the poles).
    #[arg(long, global = true)]
    rho: Option<f64>,
}

#[derive(Args, Debug, Default)]
struct PotentialArgs {
    /// black-soliton | dark-soliton | nsoliton | tanh-gaussian | tanh-compact-bump
    #[arg(long)]
    potential: Option<String>,
    /// Samples file (CSV: x,re,im) instead of a builtin.
    #[arg(long)]
    samples: Option<PathBuf>,
    /// Pole angles, e.g. "pi/3,2pi/3"; implies an nsoliton.
    #[arg(long)]
    poles: Option<String>,
    /// Coupling moduli |c_k|, one per pole (default 2 sin θ_k).
    #[arg(long)]
    moduli: Option<String>,
    /// Pole angle of a dark soliton, e.g. "pi/3".
    #[arg(long)]
    theta: Option<String>,
    /// Centre of a dark soliton.
    #[arg(long)]
    x0: Option<f64>,
    /// A in tanh x + A exp(−x²/σ²).
    #[arg(long)]
    amplitude: Option<f64>,
    /// σ in tanh x + A exp(−x²/σ²).
    #[arg(long)]
    sigma: Option<f64>,
    /// Real part of the compact-bump amplitude.
    #[arg(long)]
    amp_re: Option<f64>,
    /// Imaginary part of the compact-bump amplitude.
    #[arg(long)]
    amp_im: Option<f64>,
    /// Centre of the compact bump.
    #[arg(long)]
    center: Option<f64>,
    /// Half-width of the compact bump.
    #[arg(long)]
    half_width: Option<f64>,
    /// Multiply the bump by −(x − centre).
    #[arg(long)]
    odd: bool,
    /// Time: final (evolve), evaluation (synthesize, predict, coeffevo).
    #[arg(long)]
    t: Option<f64>,
    /// Comma-separated times (theorem1).
    #[arg(long)]
    times: Option<String>,
    /// ε: Gaussian amplitude for theorem1 and coeffevo, smallest ε of the sweep otherwise.
    #[arg(long)]
    eps: Option<f64>,
    /// Comma-separated ξ values.
    #[arg(long)]
    xi: Option<String>,
    /// Largest |ξ| sampled by theorem1.
    #[arg(long)]
    xi_max: Option<f64>,
    /// Interval between evolve snapshots.
    #[arg(long)]
    snapshot_every: Option<f64>,
}

fn config_error(m: impl Into<String>) -> CliError {
    CliError::Config(m.into())
}

fn builtin_from_flags(p: &PotentialArgs) -> Result<Option<PotentialSource>, CliError> {
    if let Some(path) = &p.samples {
        return Ok(Some(PotentialSource::Samples { path: path.clone() }));
    }
    let name = match (&p.potential, &p.poles) {
        (Some(n), _) => n.as_str(),
        (None, Some(_)) => "nsoliton",
        (None, None) => return Ok(None),
    };
    let b = match name {
        "black-soliton" => Builtin::BlackSoliton,
        "dark-soliton" => Builtin::DarkSoliton {
            theta: p
                .theta
                .as_deref()
                .map(parse_angle)
                .transpose()
                .map_err(config_error)?
                .unwrap_or(std::f64::consts::FRAC_PI_3),
            x0: p.x0.unwrap_or(0.0),
        },
        "nsoliton" => {
            let poles = p.poles.as_deref().ok_or_else(|| config_error("nsoliton needs --poles"))?;
            let thetas = parse_list(poles, parse_angle).map_err(config_error)?;
            let moduli = match &p.moduli {
                Some(m) => parse_list(m, parse_number).map_err(config_error)?,
                None => thetas.iter().map(|t| 2.0 * t.sin()).collect(),
            };
            let spec = SolitonSpec::new(DiscreteSpectrum::from_moduli(thetas, moduli)?)?;
            Builtin::Nsoliton { spec, t: 0.0 }
        }
        "tanh-gaussian" => {
            Builtin::TanhGaussian { amplitude: p.amplitude.or(p.eps).unwrap_or(0.1), sigma: p.sigma.unwrap_or(1.0) }
        }
        "tanh-compact-bump" => Builtin::TanhCompactBump {
            amp_re: p.amp_re.unwrap_or(0.05),
            amp_im: p.amp_im.unwrap_or(0.0),
            center: p.center.unwrap_or(0.0),
            half_width: p.half_width.unwrap_or(2.0),
            odd: p.odd,
        },
        other => return Err(config_error(format!("unknown potential '{other}'"))),
    };
    Ok(Some(PotentialSource::Builtin(b)))
}

fn flags_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let (command, experiment, p) = match &cli.verb {
        Verb::Scatter(p) => (Command::Scatter, None, p),
        Verb::Synthesize(p) => (Command::Synthesize, None, p),
        Verb::Evolve(p) => (Command::Evolve, None, p),
        Verb::Predict(p) => (Command::Predict, None, p),
        Verb::Experiment { name, potential } => (Command::Experiment, Some(*name), potential),
    };
    let c = &cli.common;
    let mut cfg = RunConfig {
        command: Some(command),
        experiment,
        potential: builtin_from_flags(p)?,
        dt: c.dt,
        t: p.t,
        rho: c.rho,
        eps: p.eps,
        xi_max: p.xi_max,
        snapshot_every: p.snapshot_every,
        out: c.out.clone(),
        ..Default::default()
    };
    cfg.grid.half_width = c.grid_l;
    cfg.grid.n = c.grid_n;
    cfg.spectral.delta0 = c.delta0;
    cfg.spectral.delta1 = c.delta1;
    cfg.spectral.z_nodes = c.z_nodes;
    cfg.times = p.times.as_deref().map(|s| parse_list(s, parse_number)).transpose().map_err(config_error)?;
    cfg.xi = p.xi.as_deref().map(|s| parse_list(s, parse_number)).transpose().map_err(config_error)?;
    Ok(cfg)
}

fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let flags = flags_config(cli)?;
    let file = match &cli.common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| config_error(format!("cannot read config {}: {e}", path.display())))?;
            serde_json::from_str::<RunConfig>(&text)
                .map_err(|e| config_error(format!("invalid config {}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    // the verb on the command line decides the command
    let file = RunConfig { command: None, ..file };
    let merged = flags.or(file);
    let defaults = RunConfig::defaults(merged.command.unwrap(), merged.experiment);
    let resolved = merged.or(defaults);
    resolved.spectral_params().map_err(config_error)?;
    Ok(resolved)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match resolve(&cli) {
        Ok(c) => c,
        Err(CliError::Config(m)) | Err(CliError::Run(m)) => {
            eprintln!("configuration error: {m}");
            return ExitCode::from(2);
        }
    };
    match run(&cfg) {
        Ok(o) if o.pass => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(CliError::Config(m)) => {
            eprintln!("configuration error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Run(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
