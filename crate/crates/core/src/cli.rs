//! Configuration parsing and the command implementations behind the `dgrowth` binary.
//!
//! Commands write to any [`Write`] sink and return a process exit code:
//! 0 success, 1 verification failure, 2 configuration error, 3 runtime or solver error.

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use rayon::prelude::*;
use thiserror::Error;

use crate::bgp::{bgp_rates, validate_params};
use crate::error::Error as ModelError;
use crate::gradcheck::{random_points, run_gradcheck, COMPONENTS};
use crate::model::Params;
use crate::sim::{
    bgp_initial_state, integrate_partial, verify_bgp_with, IntegrationSettings, TrajectoryRecord,
    VerifyOptions,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

/// Largest relative error accepted by `gradcheck`.
pub const GRADCHECK_TOLERANCE: f64 = 1e-6;
/// Number of random points used by `gradcheck`.
pub const GRADCHECK_POINTS: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("invalid value for `{key}`: {message}")]
    Domain { key: String, message: String },
    #[error("no sweep axes configured")]
    EmptySweep,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("{0}")]
    Model(#[from] ModelError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Io(_) | CliError::Model(_) => EXIT_RUNTIME,
        }
    }
}

/// The four model primitives, in sweep-grid order (first varies slowest).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ParamName {
    Sigma,
    Gamma,
    Rho,
    Beta,
}

impl ParamName {
    pub const ALL: [ParamName; 4] = [
        ParamName::Sigma,
        ParamName::Gamma,
        ParamName::Rho,
        ParamName::Beta,
    ];

    pub fn key(self) -> &'static str {
        match self {
            ParamName::Sigma => "sigma",
            ParamName::Gamma => "gamma",
            ParamName::Rho => "rho",
            ParamName::Beta => "beta",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.key() == s)
    }

    fn get(self, p: &Params<f64>) -> f64 {
        match self {
            ParamName::Sigma => p.sigma,
            ParamName::Gamma => p.gamma,
            ParamName::Rho => p.rho,
            ParamName::Beta => p.beta,
        }
    }

    fn set(self, p: &mut Params<f64>, v: f64) {
        match self {
            ParamName::Sigma => p.sigma = v,
            ParamName::Gamma => p.gamma = v,
            ParamName::Rho => p.rho = v,
            ParamName::Beta => p.beta = v,
        }
    }
}

impl fmt::Display for ParamName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepAxis {
    pub param: ParamName,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl SweepAxis {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let n = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                let frac = i as f64 / n;
                match self.spacing {
                    Spacing::Linear => self.start + (self.stop - self.start) * frac,
                    Spacing::Log => 10f64
                        .powf(self.start.log10() + (self.stop.log10() - self.start.log10()) * frac),
                }
            })
            .enumerate()
            .map(|(i, v)| if i + 1 == self.count { self.stop } else { v })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: Params<f64>,
    pub h0: f64,
    pub t_end: f64,
    pub tol: f64,
    pub records: usize,
    /// Sorted by [`ParamName`].
    pub sweep: Vec<SweepAxis>,
    pub out_prefix: Option<String>,
    pub seed: u64,
    pub fd_step: f64,
    /// Multiplies the initial `λ₂` in `simulate` and `verify`; 1 means unperturbed.
    pub perturb_lambda2: f64,
}

#[derive(Default)]
struct PartialAxis {
    start: Option<f64>,
    stop: Option<f64>,
    count: Option<usize>,
    spacing: Spacing,
}

fn parse_f64(line: usize, key: &str, v: &str) -> Result<f64, ConfigError> {
    let x: f64 = v.parse().map_err(|_| ConfigError::Parse {
        line,
        message: format!("`{key}` expects a number, got `{v}`"),
    })?;
    if !x.is_finite() {
        return Err(ConfigError::Domain {
            key: key.to_string(),
            message: format!("must be finite, got {v}"),
        });
    }
    Ok(x)
}

fn parse_usize(line: usize, key: &str, v: &str) -> Result<usize, ConfigError> {
    v.parse().map_err(|_| ConfigError::Parse {
        line,
        message: format!("`{key}` expects a nonnegative integer, got `{v}`"),
    })
}

fn domain_err(key: &str, message: &str) -> ConfigError {
    ConfigError::Domain {
        key: key.to_string(),
        message: message.to_string(),
    }
}

/// Parses line-oriented `key = value` text. `#` starts a comment.
///
/// Required keys: `sigma`, `gamma`, `rho`, `beta`. Optional keys (defaults): `h0` (1),
/// `t_end` (20), `tol` (1e-9), `records` (200), `out_prefix`, `seed` (42), `fd_step`
/// (1e-6), `perturb_lambda2` (1), and `sweep.<param>.{start,stop,count,spacing}`.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut prim: [Option<f64>; 4] = [None; 4];
    let mut h0 = 1.0;
    let mut t_end = 20.0;
    let mut tol = 1e-9;
    let mut records = 200usize;
    let mut out_prefix = None;
    let mut seed = 42u64;
    let mut fd_step = 1e-6;
    let mut perturb_lambda2 = 1.0;
    let mut axes: [Option<PartialAxis>; 4] = Default::default();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Parse {
            line,
            message: format!("expected `key = value`, got `{content}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if value.is_empty() {
            return Err(ConfigError::Parse {
                line,
                message: format!("missing value for `{key}`"),
            });
        }
        if let Some(p) = ParamName::parse(key) {
            prim[p as usize] = Some(parse_f64(line, key, value)?);
            continue;
        }
        match key {
            "h0" => h0 = parse_f64(line, key, value)?,
            "t_end" => t_end = parse_f64(line, key, value)?,
            "tol" => tol = parse_f64(line, key, value)?,
            "records" => records = parse_usize(line, key, value)?,
            "out_prefix" => out_prefix = Some(value.to_string()),
            "seed" => {
                seed = value.parse().map_err(|_| ConfigError::Parse {
                    line,
                    message: format!("`seed` expects an unsigned integer, got `{value}`"),
                })?
            }
            "fd_step" => fd_step = parse_f64(line, key, value)?,
            "perturb_lambda2" => perturb_lambda2 = parse_f64(line, key, value)?,
            _ => {
                let mut parts = key.split('.');
                let (Some("sweep"), Some(name), Some(field), None) =
                    (parts.next(), parts.next(), parts.next(), parts.next())
                else {
                    return Err(ConfigError::UnknownKey {
                        line,
                        key: key.to_string(),
                    });
                };
                let Some(param) = ParamName::parse(name) else {
                    return Err(ConfigError::UnknownKey {
                        line,
                        key: key.to_string(),
                    });
                };
                let axis = axes[param as usize].get_or_insert_with(PartialAxis::default);
                match field {
                    "start" => axis.start = Some(parse_f64(line, key, value)?),
                    "stop" => axis.stop = Some(parse_f64(line, key, value)?),
                    "count" => axis.count = Some(parse_usize(line, key, value)?),
                    "spacing" => {
                        axis.spacing = match value {
                            "linear" => Spacing::Linear,
                            "log" => Spacing::Log,
                            _ => {
                                return Err(ConfigError::Parse {
                                    line,
                                    message: format!(
                                        "`{key}` expects `linear` or `log`, got `{value}`"
                                    ),
                                })
                            }
                        }
                    }
                    _ => {
                        return Err(ConfigError::UnknownKey {
                            line,
                            key: key.to_string(),
                        })
                    }
                }
            }
        }
    }

    let mut values = [0.0; 4];
    for p in ParamName::ALL {
        values[p as usize] = prim[p as usize].ok_or(ConfigError::Missing(p.key()))?;
    }
    let params = Params::new(values[0], values[1], values[2], values[3]);
    check_params(&params)?;
    if !(h0 > 0.0) {
        return Err(domain_err("h0", "must be positive"));
    }
    if !(t_end >= 0.0) {
        return Err(domain_err("t_end", "must be nonnegative"));
    }
    if !(tol > 0.0) {
        return Err(domain_err("tol", "must be positive"));
    }
    if records < 2 {
        return Err(domain_err("records", "must be at least 2"));
    }
    if !(fd_step > 0.0) {
        return Err(domain_err("fd_step", "must be positive"));
    }
    if !(perturb_lambda2 > 0.0) {
        return Err(domain_err("perturb_lambda2", "must be positive"));
    }

    let mut sweep = Vec::new();
    for p in ParamName::ALL {
        let Some(axis) = axes[p as usize].take() else {
            continue;
        };
        let key = |field: &str| format!("sweep.{p}.{field}");
        let start = axis
            .start
            .ok_or_else(|| domain_err(&key("start"), "missing"))?;
        let stop = axis
            .stop
            .ok_or_else(|| domain_err(&key("stop"), "missing"))?;
        let count = axis
            .count
            .ok_or_else(|| domain_err(&key("count"), "missing"))?;
        if count < 1 {
            return Err(domain_err(&key("count"), "must be at least 1"));
        }
        if axis.spacing == Spacing::Log && !(start > 0.0 && stop > 0.0) {
            return Err(domain_err(
                &key("spacing"),
                "log spacing needs positive start and stop",
            ));
        }
        sweep.push(SweepAxis {
            param: p,
            start,
            stop,
            count,
            spacing: axis.spacing,
        });
    }

    Ok(RunConfig {
        params,
        h0,
        t_end,
        tol,
        records,
        sweep,
        out_prefix,
        seed,
        fd_step,
        perturb_lambda2,
    })
}

/// Basic domain accepted on input. `ρ ≥ 1` passes here and is flagged by the validator.
fn check_params(p: &Params<f64>) -> Result<(), ConfigError> {
    if !(p.sigma > 0.0) {
        return Err(domain_err("sigma", "must be positive (sigma > 0)"));
    }
    if p.sigma == 1.0 {
        return Err(domain_err("sigma", "must differ from 1"));
    }
    if !(p.gamma > 0.0) {
        return Err(domain_err("gamma", "must be positive (gamma > 0)"));
    }
    if !(p.rho > 0.0) {
        return Err(domain_err("rho", "must be positive (rho > 0)"));
    }
    if !(p.beta > 0.0 && p.beta < 1.0) {
        return Err(domain_err("beta", "must lie in (0, 1)"));
    }
    Ok(())
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

pub const RATES_HEADER: [&str; 17] = [
    "sigma",
    "gamma",
    "rho",
    "beta",
    "h_hat",
    "theta",
    "l_hat",
    "lambda1_hat",
    "lambda2_hat",
    "x",
    "mpk",
    "effort_bgp",
    "ies",
    "domain_ok",
    "denominator_ok",
    "convergence_regime",
    "bgp_feasible",
];

fn rates_row(p: &Params<f64>) -> Vec<String> {
    let v = validate_params(p);
    let mut row: Vec<String> = [p.sigma, p.gamma, p.rho, p.beta]
        .into_iter()
        .map(fmt_num)
        .collect();
    match bgp_rates(p) {
        Ok(r) => row.extend(
            [
                r.h_hat,
                r.theta,
                r.l_hat,
                r.lambda1_hat,
                r.lambda2_hat,
                r.x,
                r.mpk,
                r.effort_bgp,
                r.ies,
            ]
            .into_iter()
            .map(fmt_num),
        ),
        Err(_) => row.extend(std::iter::repeat_n(fmt_num(f64::NAN), 9)),
    }
    row.extend(
        [
            v.domain_ok,
            v.denominator_ok,
            v.convergence_regime,
            v.bgp_feasible,
        ]
        .into_iter()
        .map(|b| u8::from(b).to_string()),
    );
    row
}

fn write_csv_line<W: Write + ?Sized>(out: &mut W, fields: &[String]) -> io::Result<()> {
    writeln!(out, "{}", fields.join(","))
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

/// Prints the balanced-growth rates and validation flags.
pub fn cmd_rates<W: Write>(
    cfg: &RunConfig,
    csv: bool,
    strict: bool,
    out: &mut W,
) -> Result<i32, CliError> {
    let p = &cfg.params;
    let row = rates_row(p);
    if csv {
        write_csv_line(out, &strings(&RATES_HEADER))?;
        write_csv_line(out, &row)?;
    } else {
        for (name, value) in RATES_HEADER.iter().zip(&row) {
            writeln!(out, "{name:<20} {value}")?;
        }
    }
    let v = validate_params(p);
    if !v.all_ok() {
        writeln!(out, "# validation failed: {}", v.failures().join(", "))?;
        if strict {
            return Ok(EXIT_VERIFY_FAILED);
        }
    }
    Ok(EXIT_OK)
}

pub const TRAJECTORY_HEADER: [&str; 16] = [
    "t", "k", "h", "lambda1", "lambda2", "c", "s", "l", "y", "effort", "mpk", "res1", "res2",
    "res3", "tv1", "tv2",
];

pub fn trajectory_row(r: &TrajectoryRecord<f64>) -> Vec<String> {
    [
        r.t,
        r.k,
        r.h,
        r.lambda1,
        r.lambda2,
        r.c,
        r.s,
        r.l,
        r.y,
        r.effort,
        r.mpk,
        r.residuals[0],
        r.residuals[1],
        r.residuals[2],
        r.tv1,
        r.tv2,
    ]
    .into_iter()
    .map(fmt_num)
    .collect()
}

fn output_path(cfg: &RunConfig, name: &str) -> Option<PathBuf> {
    cfg.out_prefix
        .as_ref()
        .map(|prefix| PathBuf::from(format!("{prefix}{name}")))
}

fn with_sink<W: Write>(
    cfg: &RunConfig,
    name: &str,
    out: &mut W,
    body: impl FnOnce(&mut dyn Write) -> io::Result<()>,
) -> Result<(), CliError> {
    match output_path(cfg, name) {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            let mut w = BufWriter::new(File::create(&path)?);
            body(&mut w)?;
            w.flush()?;
            writeln!(out, "wrote {}", path.display())?;
        }
        None => body(out)?,
    }
    Ok(())
}

/// Integrates from the balanced-path initial state and writes the trajectory as CSV.
/// A run that stops early still writes the records it produced, then reports the error.
pub fn cmd_simulate<W: Write>(cfg: &RunConfig, out: &mut W) -> Result<i32, CliError> {
    let p = &cfg.params;
    let (mut x0, _) = bgp_initial_state(p, cfg.h0)?;
    x0.costates.lambda2 *= cfg.perturb_lambda2;
    let settings = IntegrationSettings {
        tol: cfg.tol,
        records: cfg.records,
    };
    let (traj, failure) = integrate_partial(p, &x0, cfg.t_end, &settings);
    with_sink(cfg, "trajectory.csv", out, |w| {
        write_csv_line(w, &strings(&TRAJECTORY_HEADER))?;
        for r in &traj.records {
            write_csv_line(w, &trajectory_row(r))?;
        }
        Ok(())
    })?;
    match failure {
        Some(e) => Err(e.into()),
        None => Ok(EXIT_OK),
    }
}

/// Runs the full balanced-path verification and prints one line per check.
pub fn cmd_verify<W: Write>(cfg: &RunConfig, out: &mut W) -> Result<i32, CliError> {
    let p = &cfg.params;
    let opts = VerifyOptions {
        integration: IntegrationSettings {
            tol: cfg.tol,
            records: cfg.records,
        },
        lambda2_factor: cfg.perturb_lambda2,
        ..VerifyOptions::default()
    };
    let report = match verify_bgp_with(p, cfg.h0, cfg.t_end, &opts) {
        Ok(r) => r,
        Err(ModelError::InvalidRegime(msg)) => {
            writeln!(
                out,
                "FAIL regime: parameters outside the balanced-growth regime ({msg})"
            )?;
            return Ok(EXIT_VERIFY_FAILED);
        }
        Err(e) => return Err(e.into()),
    };
    writeln!(
        out,
        "{:<24} {:>24} {:>24} {:>10}  result",
        "check", "expected", "observed", "tolerance"
    )?;
    for c in &report.checks {
        writeln!(
            out,
            "{:<24} {:>24.16e} {:>24.16e} {:>10.1e}  {}",
            c.name,
            c.expected,
            c.observed,
            c.tolerance,
            if c.passed { "PASS" } else { "FAIL" }
        )?;
    }
    if let Some(e) = &report.integration_error {
        writeln!(out, "# integration stopped early: {e}")?;
    }
    if let Some(mode) = report.leading_growth_mode {
        writeln!(
            out,
            "# leading growth mode of the linearized system: {mode:.4} (rounding amplification over the horizon ~ {:.1e})",
            (mode * cfg.t_end).exp()
        )?;
    }
    let failed = report.failed_checks().count();
    writeln!(
        out,
        "{} of {} checks passed",
        report.checks.len() - failed,
        report.checks.len()
    )?;
    Ok(if failed == 0 {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    })
}

/// Cartesian product of the sweep axes, first axis varying slowest.
pub fn sweep_grid(cfg: &RunConfig) -> Result<Vec<Params<f64>>, ConfigError> {
    if cfg.sweep.is_empty() {
        return Err(ConfigError::EmptySweep);
    }
    let mut grid = vec![cfg.params];
    for axis in &cfg.sweep {
        let values = axis.values();
        grid = grid
            .into_iter()
            .flat_map(|base| {
                values.iter().map(move |&v| {
                    let mut p = base;
                    axis.param.set(&mut p, v);
                    p
                })
            })
            .collect();
    }
    Ok(grid)
}

/// Closed-form rates over the configured grid, one CSV row per grid point.
pub fn cmd_sweep<W: Write>(cfg: &RunConfig, out: &mut W) -> Result<i32, CliError> {
    let grid = sweep_grid(cfg)?;
    let rows: Vec<Vec<String>> = grid.par_iter().map(rates_row).collect();
    let swept: Vec<ParamName> = cfg.sweep.iter().map(|a| a.param).collect();
    with_sink(cfg, "sweep.csv", out, |w| {
        let mut header: Vec<String> = swept.iter().map(|p| format!("swept_{p}")).collect();
        header.extend(strings(&RATES_HEADER));
        write_csv_line(w, &header)?;
        for (p, row) in grid.iter().zip(&rows) {
            let mut line: Vec<String> = swept.iter().map(|name| fmt_num(name.get(p))).collect();
            line.extend(row.iter().cloned());
            write_csv_line(w, &line)?;
        }
        Ok(())
    })?;
    Ok(EXIT_OK)
}

/// Finite-difference check of the Hamiltonian partials over seeded random points.
pub fn cmd_gradcheck<W: Write>(cfg: &RunConfig, out: &mut W) -> Result<i32, CliError> {
    let points = random_points(cfg.seed, GRADCHECK_POINTS);
    let report = run_gradcheck(&cfg.params, &points, cfg.fd_step)?;
    writeln!(out, "points: {}", report.points)?;
    writeln!(out, "seed: {}", cfg.seed)?;
    writeln!(out, "fd_step: {}", fmt_num(cfg.fd_step))?;
    writeln!(out, "max_rel_error: {}", fmt_num(report.max_rel_error))?;
    writeln!(
        out,
        "worst: point {} partial H_{}",
        report.worst.0, COMPONENTS[report.worst.1]
    )?;
    let pass = report.max_rel_error < GRADCHECK_TOLERANCE;
    writeln!(out, "{}", if pass { "PASS" } else { "FAIL" })?;
    Ok(if pass { EXIT_OK } else { EXIT_VERIFY_FAILED })
}
