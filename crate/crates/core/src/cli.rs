//! Command-line front end: argument parsing, key-value configuration, and
//! CSV rendering for the library operations.

use std::fmt::{self, Write as _};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::bvp::{
    integrate_ode_at, pole_series, shoot_continuation, solve_conformal, BoundaryCondition, ContinuationOptions,
    PoleSeed, ShootingOptions, DEFAULT_EPS,
};
use crate::catalog::{
    catalog_csv, catalog_solution, classify_constant_curvature, CaseId, CaseParams, CatalogEntry, ENDPOINT_MARGIN,
};
use crate::cylinder::cylinder_hamiltonian;
use crate::error::Error;
use crate::functionals::{biharmonic_residual, tension, Normalization};
use crate::hamiltonian::{hamiltonian_numeric, DiffSteps, LogLagrangian};
use crate::logvar::to_log_variable;
use crate::map::{log_spaced, UniformGrid};
use crate::ode::Tolerances;
use crate::profile::{make_space_form, MapSpec, SpaceForm};
use crate::stability::{catalog_beta, certificates_csv, min_rayleigh, StabilityCase, Verdict};
use crate::verify::{report_table, run_all};

/// First token of the metadata line written above every CSV.
pub const METADATA_PREFIX: &str = "# biharm";
/// Default output directory when set.
pub const OUT_DIR_ENV: &str = "BIHARM_OUT_DIR";

pub const EXIT_OK: i32 = 0;
/// `verify-all` ran but at least one criterion failed.
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error(transparent)]
    Model(#[from] Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Model(e) if e.is_numerical() => EXIT_NUMERICAL,
            _ => EXIT_VALIDATION,
        }
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Catalog,
    Residual,
    Hamiltonian,
    Solve,
    Conformal,
    Stability,
    Classify,
    VerifyAll,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::Catalog,
        Command::Residual,
        Command::Hamiltonian,
        Command::Solve,
        Command::Conformal,
        Command::Stability,
        Command::Classify,
        Command::VerifyAll,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Catalog => "catalog",
            Command::Residual => "residual",
            Command::Hamiltonian => "hamiltonian",
            Command::Solve => "solve",
            Command::Conformal => "conformal",
            Command::Stability => "stability",
            Command::Classify => "classify",
            Command::VerifyAll => "verify-all",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| invalid(format!("unknown command `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Log,
    Uniform,
}

impl Spacing {
    fn name(self) -> &'static str {
        match self {
            Spacing::Log => "log",
            Spacing::Uniform => "uniform",
        }
    }
}

fn parse_spacing(s: &str) -> Result<Spacing, CliError> {
    match s {
        "log" => Ok(Spacing::Log),
        "uniform" => Ok(Spacing::Uniform),
        other => Err(invalid(format!("spacing must be `log` or `uniform`, got `{other}`"))),
    }
}

fn normalization_name(n: Normalization) -> &'static str {
    match n {
        Normalization::Verbatim => "verbatim",
        Normalization::Normalized => "normalized",
    }
}

fn parse_normalization(s: &str) -> Result<Normalization, CliError> {
    match s {
        "verbatim" => Ok(Normalization::Verbatim),
        "normalized" => Ok(Normalization::Normalized),
        other => Err(invalid(format!(
            "normalization must be `verbatim` or `normalized`, got `{other}`"
        ))),
    }
}

/// One run of the tool. Unset fields take command-specific defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub case: Option<String>,
    pub from: Option<SpaceForm>,
    pub to: Option<SpaceForm>,
    pub m: Option<usize>,
    pub c: Option<f64>,
    pub d: Option<f64>,
    pub lambda: Option<f64>,
    pub rmin: Option<f64>,
    pub rmax: Option<f64>,
    pub tmin: Option<f64>,
    pub tmax: Option<f64>,
    pub nodes: Option<usize>,
    pub spacing: Option<Spacing>,
    pub normalization: Option<Normalization>,
    /// Boundary radius of the shooting problem.
    pub b: Option<f64>,
    /// Boundary value `alpha(b)` with the conformal slope.
    pub rstar: Option<f64>,
    pub alpha_b: Option<f64>,
    pub dalpha_b: Option<f64>,
    /// Slope at the pole for `conformal`.
    pub slope: Option<f64>,
    pub eps: Option<f64>,
    pub rtol: Option<f64>,
    /// Not part of the metadata: it does not affect the output.
    pub out: Option<PathBuf>,
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| invalid(format!("`{key}` expects a number, got `{value}`")))
}

fn parse_space_form(value: &str) -> Result<SpaceForm, CliError> {
    value.parse().map_err(CliError::Model)
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            case: None,
            from: None,
            to: None,
            m: None,
            c: None,
            d: None,
            lambda: None,
            rmin: None,
            rmax: None,
            tmin: None,
            tmax: None,
            nodes: None,
            spacing: None,
            normalization: None,
            b: None,
            rstar: None,
            alpha_b: None,
            dalpha_b: None,
            slope: None,
            eps: None,
            rtol: None,
            out: None,
        }
    }

    /// Set one field from its key. `version` is accepted and ignored so that
    /// metadata lines parse back.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "command" => {
                let cmd: Command = value.parse()?;
                if cmd != self.command {
                    return Err(invalid(format!("configuration is for `{cmd}`, not `{}`", self.command)));
                }
            }
            "version" => {}
            "case" => self.case = Some(value.to_string()),
            "from" => self.from = Some(parse_space_form(value)?),
            "to" => self.to = Some(parse_space_form(value)?),
            "m" => self.m = Some(parse_num(key, value)?),
            "c" => self.c = Some(parse_num(key, value)?),
            "d" => self.d = Some(parse_num(key, value)?),
            "lambda" => self.lambda = Some(parse_num(key, value)?),
            "rmin" => self.rmin = Some(parse_num(key, value)?),
            "rmax" => self.rmax = Some(parse_num(key, value)?),
            "tmin" => self.tmin = Some(parse_num(key, value)?),
            "tmax" => self.tmax = Some(parse_num(key, value)?),
            "nodes" => self.nodes = Some(parse_num(key, value)?),
            "spacing" => self.spacing = Some(parse_spacing(value)?),
            "normalization" => self.normalization = Some(parse_normalization(value)?),
            "b" => self.b = Some(parse_num(key, value)?),
            "rstar" => self.rstar = Some(parse_num(key, value)?),
            "alpha_b" => self.alpha_b = Some(parse_num(key, value)?),
            "dalpha_b" => self.dalpha_b = Some(parse_num(key, value)?),
            "slope" => self.slope = Some(parse_num(key, value)?),
            "eps" => self.eps = Some(parse_num(key, value)?),
            "rtol" => self.rtol = Some(parse_num(key, value)?),
            "out" => self.out = Some(PathBuf::from(value)),
            other => return Err(invalid(format!("unknown configuration key `{other}`"))),
        }
        Ok(())
    }

    /// Set fields, keeping values already present.
    pub fn fill_from(&mut self, pairs: &[(String, String)]) -> Result<(), CliError> {
        let mut from_file = RunConfig::new(self.command);
        for (k, v) in pairs {
            from_file.set(k, v)?;
        }
        self.merge_missing(from_file);
        Ok(())
    }

    fn merge_missing(&mut self, other: RunConfig) {
        macro_rules! fill {
            ($($f:ident),*) => { $( if self.$f.is_none() { self.$f = other.$f; } )* };
        }
        fill!(
            case,
            from,
            to,
            m,
            c,
            d,
            lambda,
            rmin,
            rmax,
            tmin,
            tmax,
            nodes,
            spacing,
            normalization,
            b,
            rstar,
            alpha_b,
            dalpha_b,
            slope,
            eps,
            rtol,
            out
        );
    }

    /// Set fields as `(key, value)` in a fixed order; floats use the
    /// shortest representation that parses back to the same value.
    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        let mut out = vec![("command", self.command.to_string())];
        let mut put = |k: &'static str, v: Option<String>| {
            if let Some(v) = v {
                out.push((k, v));
            }
        };
        put("case", self.case.clone());
        put("from", self.from.map(|s| s.name().to_string()));
        put("to", self.to.map(|s| s.name().to_string()));
        put("m", self.m.map(|v| v.to_string()));
        put("c", self.c.map(|v| v.to_string()));
        put("d", self.d.map(|v| v.to_string()));
        put("lambda", self.lambda.map(|v| v.to_string()));
        put("rmin", self.rmin.map(|v| v.to_string()));
        put("rmax", self.rmax.map(|v| v.to_string()));
        put("tmin", self.tmin.map(|v| v.to_string()));
        put("tmax", self.tmax.map(|v| v.to_string()));
        put("nodes", self.nodes.map(|v| v.to_string()));
        put("spacing", self.spacing.map(|s| s.name().to_string()));
        put(
            "normalization",
            self.normalization.map(|n| normalization_name(n).to_string()),
        );
        put("b", self.b.map(|v| v.to_string()));
        put("rstar", self.rstar.map(|v| v.to_string()));
        put("alpha_b", self.alpha_b.map(|v| v.to_string()));
        put("dalpha_b", self.dalpha_b.map(|v| v.to_string()));
        put("slope", self.slope.map(|v| v.to_string()));
        put("eps", self.eps.map(|v| v.to_string()));
        put("rtol", self.rtol.map(|v| v.to_string()));
        out
    }

    /// `# biharm version=... command=... key=value ...`.
    pub fn metadata_line(&self) -> String {
        let mut line = format!("{METADATA_PREFIX} version={}", env!("CARGO_PKG_VERSION"));
        for (k, v) in self.pairs() {
            let _ = write!(line, " {k}={v}");
        }
        line
    }

    /// Inverse of [`RunConfig::metadata_line`].
    pub fn from_metadata(line: &str) -> Result<Self, CliError> {
        let body = line
            .strip_prefix(METADATA_PREFIX)
            .ok_or_else(|| invalid(format!("metadata line must start with `{METADATA_PREFIX}`")))?;
        let pairs = parse_pairs(body)?;
        let command = pairs
            .iter()
            .find(|(k, _)| k == "command")
            .ok_or_else(|| invalid("metadata line has no command"))?
            .1
            .parse()?;
        let mut cfg = RunConfig::new(command);
        for (k, v) in &pairs {
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    /// Parameter checks shared by all commands.
    pub fn validate(&self) -> Result<(), CliError> {
        let positive = [
            ("c", self.c),
            ("d", self.d),
            ("lambda", self.lambda),
            ("b", self.b),
            ("eps", self.eps),
            ("rtol", self.rtol),
        ];
        for (k, v) in positive {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(invalid(format!("`{k}` must be positive, got {v}")));
                }
            }
        }
        let finite = [
            ("rmin", self.rmin),
            ("rmax", self.rmax),
            ("tmin", self.tmin),
            ("tmax", self.tmax),
            ("rstar", self.rstar),
            ("alpha_b", self.alpha_b),
            ("dalpha_b", self.dalpha_b),
            ("slope", self.slope),
        ];
        for (k, v) in finite {
            if let Some(v) = v {
                if !v.is_finite() {
                    return Err(invalid(format!("`{k}` must be finite, got {v}")));
                }
            }
        }
        for (lo, hi, name) in [(self.rmin, self.rmax, "r"), (self.tmin, self.tmax, "t")] {
            if let (Some(lo), Some(hi)) = (lo, hi) {
                if !(lo < hi) {
                    return Err(invalid(format!("{name} interval [{lo}, {hi}] is not well ordered")));
                }
            }
        }
        if let Some(n) = self.nodes {
            if n < 2 {
                return Err(invalid(format!("`nodes` must be at least 2, got {n}")));
            }
        }
        if let Some(m) = self.m {
            if m < 3 {
                return Err(invalid(format!("`m` must be at least 3, got {m}")));
            }
        }
        Ok(())
    }

    fn params(&self) -> CaseParams {
        let base = CaseParams::default();
        CaseParams {
            c: self.c.unwrap_or(base.c),
            d: self.d.unwrap_or(base.d),
            lambda: self.lambda.unwrap_or(base.lambda),
        }
    }

    fn require_case(&self) -> Result<&str, CliError> {
        self.case
            .as_deref()
            .ok_or_else(|| invalid(format!("`{}` needs --case", self.command)))
    }

    fn tolerances(&self) -> Tolerances {
        self.rtol.map(Tolerances::with_rtol).unwrap_or_default()
    }
}

/// `key=value` tokens separated by whitespace.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, CliError> {
    text.split_whitespace()
        .map(|tok| {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| invalid(format!("expected key=value, got `{tok}`")))?;
            let k = k.trim().replace('-', "_");
            if k.is_empty() || v.is_empty() {
                return Err(invalid(format!("expected key=value, got `{tok}`")));
            }
            Ok((k, v.to_string()))
        })
        .collect()
}

/// Configuration file: `key=value` pairs, whitespace or newline separated,
/// `#` comments. A file whose first line is a metadata line (any CSV written
/// by this tool) yields that line's pairs.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>, CliError> {
    if let Some(first) = text.lines().next() {
        if let Some(rest) = first.strip_prefix(METADATA_PREFIX) {
            return parse_pairs(rest);
        }
    }
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("");
        out.extend(parse_pairs(line)?);
    }
    Ok(out)
}

const CATALOG_COLUMNS: &str = "\
CSV columns:
  case_id  catalog identifier
  c        domain (or dilation) parameter
  d        target curvature parameter
  lambda   eigenmap eigenvalue (cylinder cases)
  nature   Harmonic, ProperBiharmonic or NonexistenceIdentity
  domain   interval of the radial variable";

const RESIDUAL_COLUMNS: &str = "\
CSV columns:
  r         radius
  alpha     closed-form solution at r
  tension   reduced tension field
  residual  fourth-order biharmonicity residual";

const HAMILTONIAN_COLUMNS: &str = "\
CSV columns:
  t            log radius (cylinder variable for cylinder cases)
  beta         solution in the t variable
  hamiltonian  prime integral at t";

const SOLVE_COLUMNS: &str = "\
CSV columns:
  r         radius
  alpha     solution
  dalpha    first derivative
  ddalpha   second derivative
  dddalpha  third derivative
  residual  fourth-order biharmonicity residual";

const CONFORMAL_COLUMNS: &str = "\
CSV columns:
  r         radius
  alpha     conformal solution through the pole
  dalpha    first derivative
  tension   reduced tension field
  residual  fourth-order biharmonicity residual";

const STABILITY_COLUMNS: &str = "\
CSV columns:
  case          quadratic form used
  interval_lo   left end of the t interval
  interval_hi   right end of the t interval
  nodes         finest grid size (the coarse grid has half as many)
  min_rayleigh  bottom of the discrete Rayleigh quotient
  verdict       Stable, Indefinite or Inconclusive";

#[derive(Debug, Parser)]
#[command(
    name = "biharm",
    version,
    about = "Rotationally symmetric biharmonic maps between model spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Args)]
struct IoArgs {
    /// Key=value configuration file; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV (relative paths resolve against $BIHARM_OUT_DIR when set).
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Domain or dilation parameter.
    #[arg(long, alias = "domain-scale", allow_negative_numbers = true)]
    c: Option<f64>,
    /// Target curvature parameter.
    #[arg(long, alias = "target-scale", allow_negative_numbers = true)]
    d: Option<f64>,
    /// Eigenmap eigenvalue.
    #[arg(long, alias = "eigenvalue", allow_negative_numbers = true)]
    lambda: Option<f64>,
}

#[derive(Debug, Args)]
struct CatalogArgs {
    /// Case identifier; all cases when omitted.
    #[arg(long)]
    case: Option<String>,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Debug, Args)]
struct ResidualArgs {
    #[arg(long)]
    case: Option<String>,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, allow_negative_numbers = true)]
    rmin: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    rmax: Option<f64>,
    #[arg(long, alias = "n")]
    nodes: Option<usize>,
    /// `log` (default when rmin > 0) or `uniform`.
    #[arg(long)]
    spacing: Option<String>,
    /// `verbatim` (default) or `normalized` (divided by f^(m-5)).
    #[arg(long)]
    normalization: Option<String>,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Debug, Args)]
struct HamiltonianArgs {
    #[arg(long)]
    case: Option<String>,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, allow_negative_numbers = true)]
    tmin: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    tmax: Option<f64>,
    #[arg(long, alias = "n")]
    nodes: Option<usize>,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// Domain model: euclidean, sphere or hyperbolic.
    #[arg(long)]
    from: Option<String>,
    /// Target model: euclidean, sphere or hyperbolic.
    #[arg(long)]
    to: Option<String>,
    /// Domain dimension.
    #[arg(long, alias = "dimension")]
    m: Option<usize>,
    #[command(flatten)]
    model: ModelArgs,
    /// Boundary radius.
    #[arg(long, alias = "boundary-radius")]
    b: Option<f64>,
    /// Boundary value R* = alpha(b), with the conformal slope at b.
    #[arg(long, alias = "boundary-value", allow_negative_numbers = true)]
    rstar: Option<f64>,
    /// Clamped data: alpha(b).
    #[arg(long, allow_negative_numbers = true)]
    alpha_b: Option<f64>,
    /// Clamped data: alpha'(b).
    #[arg(long, allow_negative_numbers = true)]
    dalpha_b: Option<f64>,
    /// Resample onto this many equispaced radii (adaptive nodes otherwise).
    #[arg(long, alias = "n")]
    nodes: Option<usize>,
    /// Radius where the pole series hands over to the integrator.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    rtol: Option<f64>,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Debug, Args)]
struct ConformalArgs {
    #[arg(long)]
    from: Option<String>,
    #[arg(long)]
    to: Option<String>,
    #[arg(long, alias = "dimension")]
    m: Option<usize>,
    #[command(flatten)]
    model: ModelArgs,
    /// Slope alpha'(0).
    #[arg(long, allow_negative_numbers = true)]
    slope: Option<f64>,
    #[arg(long)]
    rmax: Option<f64>,
    #[arg(long, alias = "n")]
    nodes: Option<usize>,
    #[arg(long)]
    normalization: Option<String>,
    #[arg(long)]
    rtol: Option<f64>,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Debug, Args)]
struct StabilityArgs {
    /// sphere, hyperbolic, flat, or a catalog case with a solution curve.
    #[arg(long)]
    case: Option<String>,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, allow_negative_numbers = true)]
    tmin: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    tmax: Option<f64>,
    /// Coarse grid size; the certificate also runs at twice this.
    #[arg(long, alias = "n")]
    nodes: Option<usize>,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    #[arg(long)]
    from: Option<String>,
    #[arg(long)]
    to: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Closed-form catalog entries.
    #[command(after_help = CATALOG_COLUMNS)]
    Catalog(CatalogArgs),
    /// Biharmonicity residual along a catalog solution.
    #[command(after_help = RESIDUAL_COLUMNS)]
    Residual(ResidualArgs),
    /// Hamiltonian along a catalog solution.
    #[command(after_help = HAMILTONIAN_COLUMNS)]
    Hamiltonian(HamiltonianArgs),
    /// Shooting solve of the boundary-value problem on [0, b].
    #[command(after_help = SOLVE_COLUMNS)]
    Solve(SolveArgs),
    /// Integrate the conformal relation from the pole.
    #[command(after_help = CONFORMAL_COLUMNS)]
    Conformal(ConformalArgs),
    /// Equivariant stability certificate.
    #[command(after_help = STABILITY_COLUMNS)]
    Stability(StabilityArgs),
    /// Classify conformal biharmonic maps between space forms.
    Classify(ClassifyArgs),
    /// Run every acceptance criterion and print a pass/fail table.
    VerifyAll,
}

fn apply_model(cfg: &mut RunConfig, m: ModelArgs) {
    cfg.c = m.c;
    cfg.d = m.d;
    cfg.lambda = m.lambda;
}

fn space_forms(cfg: &mut RunConfig, from: Option<String>, to: Option<String>) -> Result<(), CliError> {
    cfg.from = from.as_deref().map(parse_space_form).transpose()?;
    cfg.to = to.as_deref().map(parse_space_form).transpose()?;
    Ok(())
}

/// Flag values plus the optional configuration file.
fn into_config(sub: Sub) -> Result<(RunConfig, Option<PathBuf>), CliError> {
    let (cfg, config) = match sub {
        Sub::Catalog(a) => {
            let mut cfg = RunConfig::new(Command::Catalog);
            cfg.case = a.case;
            apply_model(&mut cfg, a.model);
            cfg.out = a.io.out;
            (cfg, a.io.config)
        }
        Sub::Residual(a) => {
            let mut cfg = RunConfig::new(Command::Residual);
            cfg.case = a.case;
            apply_model(&mut cfg, a.model);
            cfg.rmin = a.rmin;
            cfg.rmax = a.rmax;
            cfg.nodes = a.nodes;
            cfg.spacing = a.spacing.as_deref().map(parse_spacing).transpose()?;
            cfg.normalization = a.normalization.as_deref().map(parse_normalization).transpose()?;
            cfg.out = a.io.out;
            (cfg, a.io.config)
        }
        Sub::Hamiltonian(a) => {
            let mut cfg = RunConfig::new(Command::Hamiltonian);
            cfg.case = a.case;
            apply_model(&mut cfg, a.model);
            cfg.tmin = a.tmin;
            cfg.tmax = a.tmax;
            cfg.nodes = a.nodes;
            cfg.out = a.io.out;
            (cfg, a.io.config)
        }
        Sub::Solve(a) => {
            let mut cfg = RunConfig::new(Command::Solve);
            space_forms(&mut cfg, a.from, a.to)?;
            cfg.m = a.m;
            apply_model(&mut cfg, a.model);
            cfg.b = a.b;
            cfg.rstar = a.rstar;
            cfg.alpha_b = a.alpha_b;
            cfg.dalpha_b = a.dalpha_b;
            cfg.nodes = a.nodes;
            cfg.eps = a.eps;
            cfg.rtol = a.rtol;
            cfg.out = a.io.out;
            (cfg, a.io.config)
        }
        Sub::Conformal(a) => {
            let mut cfg = RunConfig::new(Command::Conformal);
            space_forms(&mut cfg, a.from, a.to)?;
            cfg.m = a.m;
            apply_model(&mut cfg, a.model);
            cfg.slope = a.slope;
            cfg.rmax = a.rmax;
            cfg.nodes = a.nodes;
            cfg.normalization = a.normalization.as_deref().map(parse_normalization).transpose()?;
            cfg.rtol = a.rtol;
            cfg.out = a.io.out;
            (cfg, a.io.config)
        }
        Sub::Stability(a) => {
            let mut cfg = RunConfig::new(Command::Stability);
            cfg.case = a.case;
            apply_model(&mut cfg, a.model);
            cfg.tmin = a.tmin;
            cfg.tmax = a.tmax;
            cfg.nodes = a.nodes;
            cfg.out = a.io.out;
            (cfg, a.io.config)
        }
        Sub::Classify(a) => {
            let mut cfg = RunConfig::new(Command::Classify);
            space_forms(&mut cfg, a.from, a.to)?;
            (cfg, a.config)
        }
        Sub::VerifyAll => (RunConfig::new(Command::VerifyAll), None),
    };
    Ok((cfg, config))
}

/// Result of a run: the primary output and diagnostic lines for stderr.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    /// CSV (with metadata line) or plain text for `classify`/`verify-all`.
    pub body: String,
    pub is_csv: bool,
    pub notes: Vec<String>,
    pub exit_code: i32,
}

impl RunOutput {
    fn csv(cfg: &RunConfig, csv: String, notes: Vec<String>) -> Self {
        RunOutput {
            body: format!("{}\n{csv}", cfg.metadata_line()),
            is_csv: true,
            notes,
            exit_code: EXIT_OK,
        }
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn catalog_entry(cfg: &RunConfig) -> Result<CatalogEntry, CliError> {
    let id: CaseId = cfg.require_case()?.parse()?;
    Ok(catalog_solution(id, cfg.params())?)
}

fn run_catalog(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let ids = match &cfg.case {
        Some(s) => vec![s.parse::<CaseId>()?],
        None => CaseId::ALL.to_vec(),
    };
    let entries = ids
        .into_iter()
        .map(|id| catalog_solution(id, cfg.params()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RunOutput::csv(cfg, catalog_csv(&entries), Vec::new()))
}

fn run_residual(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let entry = catalog_entry(cfg)?;
    let map = entry
        .map
        .as_ref()
        .ok_or_else(|| invalid(format!("{} is an identity without a solution curve", entry.case_id)))?;
    let dom = entry.domain;
    let rmin = cfg.rmin.unwrap_or(dom.lo_value().max(0.0) + ENDPOINT_MARGIN);
    let rmax = cfg.rmax.unwrap_or(if dom.is_bounded() {
        dom.hi_value() - ENDPOINT_MARGIN
    } else {
        10.0
    });
    if !(dom.interior_contains(rmin) && dom.interior_contains(rmax)) || !(rmin < rmax) {
        return Err(invalid(format!(
            "[{rmin}, {rmax}] is not inside the domain {dom} of {}",
            entry.case_id
        )));
    }
    let nodes = cfg.nodes.unwrap_or(200);
    let spacing = cfg
        .spacing
        .unwrap_or(if rmin > 0.0 { Spacing::Log } else { Spacing::Uniform });
    let rs = match spacing {
        Spacing::Log if rmin > 0.0 => log_spaced(rmin, rmax, nodes),
        Spacing::Log => return Err(invalid("log spacing needs rmin > 0")),
        Spacing::Uniform => UniformGrid::new(rmin, rmax, nodes)?.points().collect(),
    };
    let norm = cfg.normalization.unwrap_or_default();
    let mut csv = String::from("r,alpha,tension,residual\n");
    let mut worst: f64 = 0.0;
    for r in rs {
        let jet = map.jet(r);
        let tau = tension(&entry.spec, &jet)?;
        let res = biharmonic_residual(&entry.spec, &jet, norm)?;
        worst = worst.max(res.abs());
        let _ = writeln!(csv, "{},{},{},{}", num(r), num(jet.a[0]), num(tau), num(res));
    }
    let notes = vec![format!("max |residual| = {worst:.3e} over {nodes} points")];
    Ok(RunOutput::csv(cfg, csv, notes))
}

fn run_hamiltonian(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let entry = catalog_entry(cfg)?;
    let map = entry
        .map
        .as_ref()
        .ok_or_else(|| invalid(format!("{} is an identity without a solution curve", entry.case_id)))?;
    let cylinder = matches!(entry.case_id, CaseId::CylQuarterPi | CaseId::CylThreeQuarterPi);
    let beta = if cylinder {
        map.clone()
    } else {
        to_log_variable(entry.spec.f(), map)?
    };
    let hi_default = if beta.domain().hi_value().is_finite() {
        8f64.min(beta.domain().hi_value() - 0.1)
    } else {
        8.0
    };
    let tmin = cfg.tmin.unwrap_or(-8.0);
    let tmax = cfg.tmax.unwrap_or(hi_default);
    if !(tmin < tmax) {
        return Err(invalid(format!("t interval [{tmin}, {tmax}] is not well ordered")));
    }
    let ts: Vec<f64> = UniformGrid::new(tmin, tmax, cfg.nodes.unwrap_or(200))?
        .points()
        .collect();
    let lambda = entry.spec.lambda();
    let lag = LogLagrangian::new(entry.spec.m(), entry.spec.h().clone())?;
    let mut csv = String::from("t,beta,hamiltonian\n");
    let mut values = Vec::with_capacity(ts.len());
    for &t in &ts {
        let h = if cylinder {
            cylinder_hamiltonian(lambda, entry.spec.h(), &beta.jet(t))
        } else {
            hamiltonian_numeric(&lag, &beta, t, DiffSteps::default())?
        };
        values.push(h);
        let _ = writeln!(csv, "{},{},{}", num(t), num(beta.eval(t, 0)), num(h));
    }
    let drift = values.iter().fold(0.0_f64, |m, v| m.max((v - values[0]).abs()));
    Ok(RunOutput::csv(
        cfg,
        csv,
        vec![format!("max drift from H(tmin) = {drift:.3e}")],
    ))
}

fn model_spec(cfg: &RunConfig, default_to: SpaceForm) -> Result<MapSpec, CliError> {
    let p = cfg.params();
    let f = make_space_form(cfg.from.unwrap_or(SpaceForm::Euclidean), p.c)?;
    let h = make_space_form(cfg.to.unwrap_or(default_to), p.d)?;
    Ok(MapSpec::new(cfg.m.unwrap_or(4), f, h)?)
}

fn run_solve(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let spec = model_spec(cfg, SpaceForm::Sphere)?;
    let b = cfg.b.unwrap_or(1.0);
    let eps = cfg.eps.unwrap_or(DEFAULT_EPS);
    let family: Box<dyn Fn(f64) -> BoundaryCondition> = match (cfg.rstar, cfg.alpha_b, cfg.dalpha_b) {
        (Some(rs), None, None) => Box::new(move |s| BoundaryCondition::ConformalSlope { alpha_b: s * rs }),
        (None, Some(a), Some(da)) => Box::new(move |s| BoundaryCondition::Clamped {
            alpha_b: s * a,
            dalpha_b: s * da,
        }),
        _ => return Err(invalid("`solve` needs either --rstar or both --alpha-b and --dalpha-b")),
    };
    let opts = ShootingOptions {
        integrator: cfg.tolerances(),
        ..Default::default()
    };
    // alpha = 0 solves the s = 0 member of both families.
    let start = PoleSeed::new(0.0, 0.0, eps)?;
    let cont = shoot_continuation(&spec, b, family, start, &opts, &ContinuationOptions::default())?;
    let res = cont.result;
    let traj = match cfg.nodes {
        Some(n) => {
            let grid: Vec<f64> = UniformGrid::new(eps, b, n)?.points().collect();
            let jet = pole_series(&spec, res.seed)?.jet;
            integrate_ode_at(&spec, &jet, &grid[1..n - 1], b, &opts.integrator)?
        }
        None => res.trajectory.clone(),
    };
    let notes = vec![
        format!("a1 = {:.16e}, a3 = {:.16e}", res.seed.a1, res.seed.a3),
        format!(
            "boundary mismatch {:.3e} after {} continuation solves; max |residual| {:.3e}",
            res.residual,
            cont.solves,
            traj.max_residual()
        ),
    ];
    Ok(RunOutput::csv(cfg, traj.to_csv(), notes))
}

fn run_conformal(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let spec = model_spec(cfg, SpaceForm::Sphere)?;
    let slope = cfg.slope.unwrap_or(1.0);
    let rmax = cfg.rmax.unwrap_or(1.0);
    let nodes = cfg.nodes.unwrap_or(200);
    let sol = solve_conformal(&spec, slope, rmax, nodes, &cfg.tolerances())?;
    let norm = cfg.normalization.unwrap_or_default();
    let mut csv = String::from("r,alpha,dalpha,tension,residual\n");
    for &r in &sol.nodes {
        let jet = sol.map.jet(r);
        let tau = tension(&spec, &jet)?;
        let res = biharmonic_residual(&spec, &jet, norm)?;
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            num(r),
            num(jet.a[0]),
            num(jet.a[1]),
            num(tau),
            num(res)
        );
    }
    let mut notes = Vec::new();
    if sol.truncated {
        notes.push(format!("alpha left the target domain; stopped at r = {}", sol.end));
    }
    Ok(RunOutput::csv(cfg, csv, notes))
}

fn run_stability(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let p = cfg.params();
    let name = cfg.require_case()?;
    let (case, beta) = match name.to_ascii_lowercase().as_str() {
        "sphere" => catalog_beta(CaseId::C1B, p)?,
        "hyperbolic" => catalog_beta(CaseId::C1C, p)?,
        "flat" => (StabilityCase::Flat, catalog_beta(CaseId::C1A, p)?.1),
        other => catalog_beta(other.parse()?, p)?,
    };
    let log_scale = (1.0 / (p.c * p.c)).ln();
    let tmin = cfg.tmin.unwrap_or(-10.0);
    let tmax = match (cfg.tmax, &case) {
        (Some(t), _) => t,
        (None, StabilityCase::Sphere { .. }) => log_scale,
        (None, StabilityCase::Hyperbolic { .. }) => log_scale - 0.1,
        (None, _) => return Err(invalid("`stability` needs --tmax for this case")),
    };
    let cert = min_rayleigh(&case, &beta, (tmin, tmax), cfg.nodes.unwrap_or(512))?;
    let mut notes: Vec<String> = cert
        .history
        .iter()
        .map(|e| {
            format!(
                "{} nodes: bottom {:.6e} ({} iterations)",
                e.nodes, e.value, e.iterations
            )
        })
        .collect();
    notes.extend(cert.diagnostics.clone());
    if cert.verdict == Verdict::Inconclusive {
        notes.push("verdict Inconclusive".into());
    }
    Ok(RunOutput::csv(cfg, certificates_csv(&[cert]), notes))
}

fn run_classify(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let (Some(from), Some(to)) = (cfg.from, cfg.to) else {
        return Err(invalid("`classify` needs --from and --to"));
    };
    let class = classify_constant_curvature(from, to);
    Ok(RunOutput {
        body: format!("{class}\n"),
        is_csv: false,
        notes: Vec::new(),
        exit_code: EXIT_OK,
    })
}

fn run_verify_all() -> RunOutput {
    let reports = run_all();
    let passed = reports.iter().all(|r| r.passed);
    RunOutput {
        body: report_table(&reports),
        is_csv: false,
        notes: Vec::new(),
        exit_code: if passed { EXIT_OK } else { EXIT_CHECK_FAILED },
    }
}

/// Validate and dispatch a configuration.
pub fn run(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    cfg.validate()?;
    match cfg.command {
        Command::Catalog => run_catalog(cfg),
        Command::Residual => run_residual(cfg),
        Command::Hamiltonian => run_hamiltonian(cfg),
        Command::Solve => run_solve(cfg),
        Command::Conformal => run_conformal(cfg),
        Command::Stability => run_stability(cfg),
        Command::Classify => run_classify(cfg),
        Command::VerifyAll => Ok(run_verify_all()),
    }
}

/// Where the output goes: `--out` (joined to `out_dir` when relative), else
/// `<out_dir>/<command>.csv`, else standard output.
pub fn output_path(cfg: &RunConfig, out_dir: Option<&Path>) -> Option<PathBuf> {
    match (&cfg.out, out_dir) {
        (Some(p), Some(dir)) if p.is_relative() => Some(dir.join(p)),
        (Some(p), _) => Some(p.clone()),
        (None, Some(dir)) => Some(dir.join(format!("{}.csv", cfg.command))),
        (None, None) => None,
    }
}

fn write_file(path: &Path, body: &str) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(io)?;
    }
    std::fs::write(path, body).map_err(io)
}

fn execute(sub: Sub, out_dir: Option<&Path>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    let (mut cfg, config) = into_config(sub)?;
    if let Some(path) = config {
        let text = std::fs::read_to_string(&path).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        cfg.fill_from(&parse_config_text(&text)?)?;
    }
    let out = run(&cfg)?;
    let target = if out.is_csv { output_path(&cfg, out_dir) } else { None };
    match target {
        Some(path) => {
            write_file(&path, &out.body)?;
            let _ = writeln!(stderr, "wrote {}", path.display());
        }
        None => {
            let _ = stdout.write_all(out.body.as_bytes());
        }
    }
    for note in &out.notes {
        let _ = writeln!(stderr, "{note}");
    }
    Ok(out.exit_code)
}

/// Parse `args` (program name first), run, and return the exit status.
pub fn main_with<I, T>(args: I, out_dir: Option<&Path>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = stderr.write_all(text.as_bytes());
                return EXIT_VALIDATION;
            }
            let _ = stdout.write_all(text.as_bytes());
            return EXIT_OK;
        }
    };
    match execute(cli.command, out_dir, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut full = vec!["biharm"];
        full.extend_from_slice(args);
        let code = main_with(full, None, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn classify_hyperbolic_to_sphere() {
        let (code, out, _) = run_args(&["classify", "--from", "hyperbolic", "--to", "sphere"]);
        assert_eq!(code, 0);
        assert_eq!(out, "NoSolution NX3B\n");
    }

    #[test]
    fn residual_example_is_small() {
        let args = [
            "residual", "--case", "C1B", "--c", "1", "--d", "1", "--rmin", "0.01", "--rmax", "10", "--nodes", "500",
        ];
        let (code, out, _) = run_args(&args);
        assert_eq!(code, 0);
        let mut lines = out.lines();
        assert!(lines.next().unwrap().starts_with(METADATA_PREFIX));
        assert_eq!(lines.next().unwrap(), "r,alpha,tension,residual");
        let rows: Vec<f64> = lines.map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
        assert_eq!(rows.len(), 500);
        assert!(rows.iter().all(|v| v.abs() < 1e-8));
    }

    #[test]
    fn stability_example_is_stable() {
        let args = [
            "stability",
            "--case",
            "hyperbolic",
            "--c",
            "1",
            "--d",
            "1",
            "--tmin",
            "-10",
            "--tmax",
            "-0.1",
            "--nodes",
            "512",
        ];
        let (code, out, _) = run_args(&args);
        assert_eq!(code, 0);
        let row = out.lines().nth(2).unwrap();
        assert!(row.ends_with(",Stable"), "{row}");
        assert!(row.starts_with("hyperbolic(d=1),"));
    }

    #[test]
    fn output_is_byte_identical() {
        let args = ["catalog", "--c", "0.7", "--d", "1.3"];
        assert_eq!(run_args(&args).1, run_args(&args).1);
    }

    #[test]
    fn metadata_round_trips() {
        let mut cfg = RunConfig::new(Command::Residual);
        cfg.case = Some("C1C".into());
        cfg.c = Some(0.1 + 0.2);
        cfg.d = Some(1.0 / 3.0);
        cfg.rmin = Some(1e-3);
        cfg.nodes = Some(77);
        cfg.spacing = Some(Spacing::Uniform);
        cfg.normalization = Some(Normalization::Normalized);
        let back = RunConfig::from_metadata(&cfg.metadata_line()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn config_file_fills_missing_flags() {
        let pairs = parse_config_text("# comment\ncase=C1B\nc=2 # dilation\nnodes=10 d=0.5\n").unwrap();
        let mut cfg = RunConfig::new(Command::Residual);
        cfg.c = Some(1.0);
        cfg.fill_from(&pairs).unwrap();
        assert_eq!(cfg.c, Some(1.0));
        assert_eq!(cfg.d, Some(0.5));
        assert_eq!(cfg.nodes, Some(10));
        assert_eq!(cfg.case.as_deref(), Some("C1B"));
    }

    #[test]
    fn config_for_another_command_is_rejected() {
        let pairs = parse_config_text("# biharm version=0 command=catalog c=1\n").unwrap();
        let mut cfg = RunConfig::new(Command::Residual);
        assert!(cfg.fill_from(&pairs).is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run_args(&["frobnicate"]).0, EXIT_VALIDATION);
        assert_eq!(run_args(&["residual", "--case", "C1B", "--c", "-1"]).0, EXIT_VALIDATION);
        assert_eq!(run_args(&["residual", "--case", "NX2A"]).0, EXIT_VALIDATION);
        assert_eq!(
            run_args(&["residual", "--case", "C1B", "--rmin", "2", "--rmax", "1"]).0,
            EXIT_VALIDATION
        );
        let (code, _, err) = run_args(&["solve", "--b", "1"]);
        assert_eq!(code, EXIT_VALIDATION);
        assert!(err.starts_with("error: "));
        let numerical = CliError::Model(Error::NoConvergence {
            iterations: 3,
            best_residual: 1.0,
            best: (0.0, 0.0),
        });
        assert_eq!(numerical.exit_code(), EXIT_NUMERICAL);
        assert_eq!(run_args(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn help_documents_columns() {
        let (code, out, _) = run_args(&["stability", "--help"]);
        assert_eq!(code, 0);
        for col in crate::stability::CERTIFICATE_CSV_HEADER.split(',') {
            assert!(out.contains(col), "{col}");
        }
    }

    #[test]
    fn output_path_resolution() {
        let mut cfg = RunConfig::new(Command::Catalog);
        let dir = Path::new("/tmp/o");
        assert_eq!(output_path(&cfg, None), None);
        assert_eq!(output_path(&cfg, Some(dir)), Some(dir.join("catalog.csv")));
        cfg.out = Some("x.csv".into());
        assert_eq!(output_path(&cfg, Some(dir)), Some(dir.join("x.csv")));
        cfg.out = Some("/abs/x.csv".into());
        assert_eq!(output_path(&cfg, Some(dir)), Some(PathBuf::from("/abs/x.csv")));
    }
}
