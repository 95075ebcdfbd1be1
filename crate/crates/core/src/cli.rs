//! Command-line front end.
//!
//! Every subcommand writes plot-ready text to stdout (or `--out`). Floats
//! are printed with fixed significant digits, so identical invocations
//! produce identical bytes. A `--config <file.json>` object may supply any
//! flag by its long name; flags on the command line win.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::format::{fmt_g, to_json_string, CSV_DIGITS};
use crate::potential::{realize, realize_geometry, BwParams, Geometry, Kind};
use crate::resonance::{resonance_sets, ResonanceError, ResonanceRoot, RootScan};
use crate::scattering::{amplitudes, grid, write_csv_row, ScatteringError, Sweep, TransmissionGrid};
use crate::transfer::{chain_matrix, closed_form, TransferMatrix};
use crate::zerolimit::{classify, converge_study};

const UNITS: &str = "Units: hbar^2/2m = 1, so E = k^2; lengths and strengths are dimensionless.";

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags or values; exit status 2.
    #[error("{0}")]
    Usage(String),
    /// `--help` / `--version` text; exit status 0.
    #[error("{0}")]
    Info(String),
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Resonance(#[from] ResonanceError),
    #[error(transparent)]
    Scattering(#[from] ScatteringError),
    #[error(transparent)]
    Potential(#[from] crate::potential::PotentialError),
    #[error("output error: {0}")]
    Io(#[from] io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Plus,
    Minus,
}

impl From<Model> for Kind {
    fn from(m: Model) -> Kind {
        match m {
            Model::Plus => Kind::Plus,
            Model::Minus => Kind::Minus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Parser, Debug)]
#[command(
    name = "bwtunnel",
    version,
    about = "Resonant tunneling through squeezed barrier-well potentials",
    after_help = UNITS,
    args_override_self = true
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Transmission T(alpha) at fixed k (CSV: alpha,k,T,log10T).
    #[command(after_help = UNITS)]
    ScanAlpha(ScanArgs),
    /// Transmission T(alpha, k) on a uniform grid (CSV: alpha,k,T,log10T).
    #[command(after_help = UNITS)]
    Grid(GridArgs),
    /// Roots of the zero-range resonance equations (JSON).
    #[command(after_help = UNITS)]
    Resonances(ResonanceArgs),
    /// Finite-eps peak positions approaching a limiting root
    /// (CSV: eps,alpha_peak,T_peak,alpha_drift).
    #[command(after_help = UNITS)]
    Converge(ConvergeArgs),
    /// Zero-range transparency class of a strength (JSON).
    #[command(after_help = UNITS)]
    Classify(ClassifyArgs),
    /// Transfer matrix by slab product and by closed form (JSON).
    #[command(after_help = UNITS)]
    Matrix(MatrixArgs),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Potential family.
    #[arg(long, value_enum, default_value = "plus")]
    model: Model,
    /// Shape ratio b = c1/c2 (sets c1 = b, c2 = 1) [default: 3].
    #[arg(long, allow_negative_numbers = true, conflicts_with_all = ["c1", "c2"])]
    b: Option<f64>,
    /// Barrier width constant c1 (requires --c2).
    #[arg(long, allow_negative_numbers = true, requires = "c2")]
    c1: Option<f64>,
    /// Well width constant c2 (requires --c1).
    #[arg(long, allow_negative_numbers = true, requires = "c1")]
    c2: Option<f64>,
    /// Well-control parameter sigma >= 0.
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
    sigma: f64,
    /// Output format.
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON file whose keys mirror flag names; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[command(flatten)]
    common: Common,
    /// Wave number k > 0.
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
    k: f64,
    /// Squeezing parameter eps > 0.
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.1)]
    eps: f64,
    /// Lower strength.
    #[arg(long, allow_negative_numbers = true, default_value_t = -40.0)]
    alpha_min: f64,
    /// Upper strength.
    #[arg(long, allow_negative_numbers = true, default_value_t = 40.0)]
    alpha_max: f64,
    /// Number of grid points, endpoints included (>= 2).
    #[arg(long, default_value_t = 4000)]
    steps: usize,
}

#[derive(Args, Debug)]
struct GridArgs {
    #[command(flatten)]
    common: Common,
    /// Squeezing parameter eps > 0.
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.2)]
    eps: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = -40.0)]
    alpha_min: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 40.0)]
    alpha_max: f64,
    /// Strength grid points (>= 2).
    #[arg(long, default_value_t = 401)]
    alpha_steps: usize,
    /// Smallest wave number (> 0).
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.01)]
    k_min: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 10.0)]
    k_max: f64,
    /// Wave-number grid points (>= 2).
    #[arg(long, default_value_t = 200)]
    k_steps: usize,
}

#[derive(Args, Debug)]
struct ResonanceArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, allow_negative_numbers = true, default_value_t = -40.0)]
    alpha_min: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 40.0)]
    alpha_max: f64,
    /// Sign-change scan cells (>= 100).
    #[arg(long, default_value_t = 20_000)]
    grid_steps: usize,
    /// Bisection width.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Args, Debug)]
struct ConvergeArgs {
    #[command(flatten)]
    common: Common,
    /// Limiting root to track.
    #[arg(long, allow_negative_numbers = true)]
    alpha: f64,
    /// Wave number k > 0.
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
    k: f64,
    /// Strictly decreasing squeezing parameters, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.2,0.1,0.05,0.02")]
    eps_list: Vec<f64>,
    /// Half-width of the peak search window in alpha.
    #[arg(long, default_value_t = 0.5)]
    radius: f64,
}

#[derive(Args, Debug)]
struct ClassifyArgs {
    #[command(flatten)]
    common: Common,
    /// Strength to classify.
    #[arg(long, allow_negative_numbers = true)]
    alpha: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = -40.0)]
    alpha_min: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 40.0)]
    alpha_max: f64,
    /// Set-membership tolerance in alpha.
    #[arg(long, default_value_t = 1e-6)]
    match_tol: f64,
    #[arg(long, default_value_t = 20_000)]
    grid_steps: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Args, Debug)]
struct MatrixArgs {
    #[command(flatten)]
    common: Common,
    /// Strength alpha.
    #[arg(long, allow_negative_numbers = true)]
    alpha: f64,
    /// Wave number k > 0.
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
    k: f64,
    /// Squeezing parameter eps > 0.
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.1)]
    eps: f64,
    /// Raw geometry h,l,d,r, bypassing the eps parametrization
    /// (barrier height/width, well depth/width before scaling by alpha).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    raw: Option<Vec<f64>>,
}

/// Validated invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub output: OutputFormat,
    pub out_path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    ScanAlpha {
        template: BwParams,
        k: f64,
        alphas: Sweep,
    },
    Grid {
        template: BwParams,
        alphas: Sweep,
        ks: Sweep,
    },
    Resonances {
        kind: Kind,
        b: f64,
        sigma: f64,
        window: (f64, f64),
        scan: RootScan,
    },
    Converge {
        template: BwParams,
        alpha: f64,
        k: f64,
        eps_list: Vec<f64>,
        radius: f64,
    },
    Classify {
        kind: Kind,
        alpha: f64,
        b: f64,
        sigma: f64,
        window: (f64, f64),
        match_tol: f64,
        scan: RootScan,
    },
    Matrix {
        kind: Kind,
        alpha: f64,
        k: f64,
        source: MatrixSource,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MatrixSource {
    Params(BwParams),
    Raw(Geometry),
}

fn usage(flag: &str, constraint: &str, value: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("invalid value '{value}' for '--{flag}': {constraint}"))
}

fn check(ok: bool, flag: &str, constraint: &str, value: impl std::fmt::Display) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(usage(flag, constraint, value))
    }
}

fn positive(flag: &str, v: f64) -> Result<(), CliError> {
    check(v > 0.0 && v.is_finite(), flag, "must be > 0", v)
}

fn range(lo_flag: &str, lo: f64, hi: f64) -> Result<(), CliError> {
    check(
        lo.is_finite() && hi.is_finite() && lo < hi,
        lo_flag,
        "range must be non-empty (min < max)",
        lo,
    )
}

fn steps(flag: &str, n: usize) -> Result<(), CliError> {
    check(n >= 2, flag, "must be >= 2", n)
}

impl Common {
    /// `(c1, c2)` from either `--b` or `--c1/--c2`.
    fn shape(&self) -> Result<(f64, f64), CliError> {
        match (self.b, self.c1, self.c2) {
            (Some(b), None, None) => {
                positive("b", b)?;
                Ok((b, 1.0))
            }
            (None, Some(c1), Some(c2)) => {
                positive("c1", c1)?;
                positive("c2", c2)?;
                Ok((c1, c2))
            }
            (None, None, None) => Ok((3.0, 1.0)),
            _ => Err(CliError::Usage(
                "give either '--b' or both '--c1' and '--c2'".into(),
            )),
        }
    }

    fn b(&self) -> Result<f64, CliError> {
        self.shape().map(|(c1, c2)| c1 / c2)
    }

    fn sigma(&self) -> Result<f64, CliError> {
        check(self.sigma >= 0.0 && self.sigma.is_finite(), "sigma", "must be >= 0", self.sigma)?;
        Ok(self.sigma)
    }

    fn template(&self, eps: f64) -> Result<BwParams, CliError> {
        positive("eps", eps)?;
        let (c1, c2) = self.shape()?;
        BwParams::new(self.model.into(), 0.0, eps, c1, c2, self.sigma()?)
            .map_err(|e| CliError::Usage(e.to_string()))
    }

    fn format(&self, default: OutputFormat, allowed: &[OutputFormat]) -> Result<OutputFormat, CliError> {
        let f = self.format.unwrap_or(default);
        if allowed.contains(&f) {
            Ok(f)
        } else {
            Err(CliError::Usage(format!(
                "invalid value '{f:?}' for '--format': this subcommand supports {allowed:?}"
            )))
        }
    }
}

/// Splices `--config` file entries in right after the subcommand name, so
/// that later command-line flags override them.
fn expand_config(argv: Vec<String>) -> Result<Vec<String>, CliError> {
    let mut path = None;
    let mut rest = Vec::with_capacity(argv.len());
    let mut it = argv.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            path = Some(it.next().ok_or_else(|| {
                CliError::Usage("'--config' needs a file path".into())
            })?);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else {
        return Ok(rest);
    };
    let text = fs::read_to_string(&path)
        .map_err(|e| CliError::Usage(format!("cannot read '--config' file {path}: {e}")))?;
    let obj: serde_json::Map<String, serde_json::Value> = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("'--config' file {path} is not a JSON object: {e}")))?;
    let mut injected = Vec::new();
    for (key, value) in obj {
        let flag = format!("--{key}");
        match value {
            serde_json::Value::Bool(true) => injected.push(flag),
            serde_json::Value::Bool(false) | serde_json::Value::Null => {}
            serde_json::Value::Number(n) => {
                injected.push(flag);
                injected.push(n.to_string());
            }
            serde_json::Value::String(s) => {
                injected.push(flag);
                injected.push(s);
            }
            serde_json::Value::Array(items) => {
                let joined = items
                    .iter()
                    .map(|v| match v {
                        serde_json::Value::String(s) => s.clone(),
                        other => other.to_string(),
                    })
                    .collect::<Vec<_>>()
                    .join(",");
                injected.push(flag);
                injected.push(joined);
            }
            serde_json::Value::Object(_) => {
                return Err(CliError::Usage(format!(
                    "'--config' key '{key}' must not be an object"
                )))
            }
        }
    }
    if rest.len() < 2 {
        return Err(CliError::Usage("'--config' needs a subcommand".into()));
    }
    let tail = rest.split_off(2);
    rest.extend(injected);
    rest.extend(tail);
    Ok(rest)
}

/// Parses and validates `argv` (including the program name).
pub fn parse_args<I, S>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv = expand_config(argv.into_iter().map(Into::into).collect())?;
    let cli = Cli::try_parse_from(argv).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
            CliError::Info(e.render().to_string())
        }
        _ => CliError::Usage(e.render().to_string()),
    })?;

    use OutputFormat::{Csv, Json};
    let (command, common) = match cli.command {
        Sub::ScanAlpha(a) => {
            positive("k", a.k)?;
            steps("steps", a.steps)?;
            check(
                a.alpha_min <= a.alpha_max && a.alpha_min.is_finite() && a.alpha_max.is_finite(),
                "alpha-min",
                "must not exceed --alpha-max",
                a.alpha_min,
            )?;
            let alphas = Sweep::new(a.alpha_min, a.alpha_max, a.steps)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let template = a.common.template(a.eps)?;
            (
                Command::ScanAlpha {
                    template,
                    k: a.k,
                    alphas,
                },
                (a.common, Csv, vec![Csv, Json]),
            )
        }
        Sub::Grid(a) => {
            range("alpha-min", a.alpha_min, a.alpha_max)?;
            positive("k-min", a.k_min)?;
            range("k-min", a.k_min, a.k_max)?;
            steps("alpha-steps", a.alpha_steps)?;
            steps("k-steps", a.k_steps)?;
            let template = a.common.template(a.eps)?;
            let alphas = Sweep::new(a.alpha_min, a.alpha_max, a.alpha_steps)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let ks = Sweep::new(a.k_min, a.k_max, a.k_steps).map_err(|e| CliError::Usage(e.to_string()))?;
            (
                Command::Grid {
                    template,
                    alphas,
                    ks,
                },
                (a.common, Csv, vec![Csv, Json]),
            )
        }
        Sub::Resonances(a) => {
            range("alpha-min", a.alpha_min, a.alpha_max)?;
            check(a.grid_steps >= 100, "grid-steps", "must be >= 100", a.grid_steps)?;
            positive("tol", a.tol)?;
            (
                Command::Resonances {
                    kind: a.common.model.into(),
                    b: a.common.b()?,
                    sigma: a.common.sigma()?,
                    window: (a.alpha_min, a.alpha_max),
                    scan: RootScan {
                        grid_steps: a.grid_steps,
                        tol: a.tol,
                    },
                },
                (a.common, Json, vec![Json]),
            )
        }
        Sub::Converge(a) => {
            positive("k", a.k)?;
            positive("radius", a.radius)?;
            check(!a.eps_list.is_empty(), "eps-list", "must not be empty", "")?;
            for &e in &a.eps_list {
                positive("eps-list", e)?;
            }
            check(
                a.eps_list.windows(2).all(|w| w[1] < w[0]),
                "eps-list",
                "must be strictly decreasing",
                a.eps_list.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(","),
            )?;
            let template = a.common.template(a.eps_list[0])?;
            (
                Command::Converge {
                    template,
                    alpha: a.alpha,
                    k: a.k,
                    eps_list: a.eps_list,
                    radius: a.radius,
                },
                (a.common, Csv, vec![Csv, Json]),
            )
        }
        Sub::Classify(a) => {
            range("alpha-min", a.alpha_min, a.alpha_max)?;
            check(
                a.alpha_min <= a.alpha && a.alpha <= a.alpha_max,
                "alpha",
                "must lie inside [--alpha-min, --alpha-max]",
                a.alpha,
            )?;
            positive("match-tol", a.match_tol)?;
            check(a.grid_steps >= 100, "grid-steps", "must be >= 100", a.grid_steps)?;
            positive("tol", a.tol)?;
            (
                Command::Classify {
                    kind: a.common.model.into(),
                    alpha: a.alpha,
                    b: a.common.b()?,
                    sigma: a.common.sigma()?,
                    window: (a.alpha_min, a.alpha_max),
                    match_tol: a.match_tol,
                    scan: RootScan {
                        grid_steps: a.grid_steps,
                        tol: a.tol,
                    },
                },
                (a.common, Json, vec![Json]),
            )
        }
        Sub::Matrix(a) => {
            positive("k", a.k)?;
            check(a.alpha.is_finite(), "alpha", "must be finite", a.alpha)?;
            let source = match &a.raw {
                Some(v) => {
                    let [h, l, d, r] = v[..] else {
                        return Err(usage("raw", "expects four values h,l,d,r", v.len()));
                    };
                    check(h.is_finite() && d.is_finite(), "raw", "h and d must be finite", h)?;
                    positive("raw", l)?;
                    positive("raw", r)?;
                    MatrixSource::Raw(Geometry { h, l, d, r })
                }
                None => MatrixSource::Params(a.common.template(a.eps)?.with_alpha(a.alpha)),
            };
            (
                Command::Matrix {
                    kind: a.common.model.into(),
                    alpha: a.alpha,
                    k: a.k,
                    source,
                },
                (a.common, Json, vec![Json]),
            )
        }
    };
    let (common, default, allowed) = common;
    Ok(RunConfig {
        output: common.format(default, &allowed)?,
        out_path: common.out.clone(),
        command,
    })
}

/// JSON report of the `matrix` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct MatrixReport {
    pub model: Kind,
    pub alpha: f64,
    pub k: f64,
    pub geometry: Geometry,
    pub product: TransferMatrix,
    pub closed_form: TransferMatrix,
    pub det_error: f64,
    pub closed_form_max_rel_diff: f64,
    pub near_opaque: bool,
    #[serde(rename = "T")]
    pub transmission: f64,
}

#[derive(Serialize)]
struct ConvergeJsonRow {
    eps: f64,
    alpha_peak: f64,
    #[serde(rename = "T_peak")]
    t_peak: f64,
    alpha_drift: f64,
}

fn write_json<W: Write + ?Sized, T: Serialize + ?Sized>(w: &mut W, value: &T) -> Result<(), RunError> {
    let s = to_json_string(value)?;
    w.write_all(s.as_bytes())?;
    w.write_all(b"\n")?;
    Ok(())
}

/// Executes a validated configuration, writing to `out`.
pub fn run_to<W: Write + ?Sized>(config: &RunConfig, out: &mut W) -> Result<(), RunError> {
    let mut buf: Vec<u8> = Vec::new();
    match &config.command {
        Command::ScanAlpha { template, k, alphas } => {
            let g = grid(template, *alphas, Sweep::new(*k, *k, 1)?)?;
            emit_grid(&g, config.output, &mut buf)?;
        }
        Command::Grid { template, alphas, ks } => {
            let g = grid(template, *alphas, *ks)?;
            emit_grid(&g, config.output, &mut buf)?;
        }
        Command::Resonances {
            kind,
            b,
            sigma,
            window,
            scan,
        } => {
            let (model, prime) = resonance_sets(*kind, *b, *sigma, *window, *scan)?;
            let mut all: Vec<ResonanceRoot> = model.roots.into_iter().chain(prime.roots).collect();
            all.sort_by(|x, y| x.alpha.total_cmp(&y.alpha).then(x.set_label.cmp(&y.set_label)));
            write_json(&mut buf, &all)?;
        }
        Command::Converge {
            template,
            alpha,
            k,
            eps_list,
            radius,
        } => {
            let rows = converge_study(template, *alpha, *k, eps_list, *radius)?;
            match config.output {
                OutputFormat::Csv => {
                    writeln!(buf, "eps,alpha_peak,T_peak,alpha_drift")?;
                    for r in &rows {
                        writeln!(
                            buf,
                            "{},{},{},{}",
                            fmt_g(r.eps, CSV_DIGITS),
                            fmt_g(r.alpha_peak, CSV_DIGITS),
                            fmt_g(r.t_peak, CSV_DIGITS),
                            fmt_g(r.alpha_drift, CSV_DIGITS)
                        )?;
                    }
                }
                OutputFormat::Json => {
                    let rows: Vec<_> = rows
                        .iter()
                        .map(|r| ConvergeJsonRow {
                            eps: r.eps,
                            alpha_peak: r.alpha_peak,
                            t_peak: r.t_peak,
                            alpha_drift: r.alpha_drift,
                        })
                        .collect();
                    write_json(&mut buf, &rows)?;
                }
            }
        }
        Command::Classify {
            kind,
            alpha,
            b,
            sigma,
            window,
            match_tol,
            scan,
        } => {
            let (model, prime) = resonance_sets(*kind, *b, *sigma, *window, *scan)?;
            let c = classify(*kind, *alpha, &model, &prime, *match_tol)?;
            write_json(&mut buf, &c)?;
        }
        Command::Matrix {
            kind,
            alpha,
            k,
            source,
        } => {
            let report = matrix_report(*kind, *alpha, *k, source)?;
            write_json(&mut buf, &report)?;
        }
    }
    out.write_all(&buf)?;
    out.flush()?;
    Ok(())
}

fn emit_grid(g: &TransmissionGrid, format: OutputFormat, buf: &mut Vec<u8>) -> Result<(), RunError> {
    match format {
        OutputFormat::Csv => {
            writeln!(buf, "alpha,k,T,log10T")?;
            for (a, row) in g.alphas.iter().zip(&g.values) {
                for (k, t) in g.ks.iter().zip(row) {
                    write_csv_row(buf, *a, *k, *t)?;
                }
            }
        }
        OutputFormat::Json => write_json(buf, g)?,
    }
    Ok(())
}

pub fn matrix_report(kind: Kind, alpha: f64, k: f64, source: &MatrixSource) -> Result<MatrixReport, RunError> {
    let (chain, geometry) = match source {
        MatrixSource::Params(p) => (realize(p)?, p.geometry()),
        MatrixSource::Raw(g) => (realize_geometry(kind, alpha, g)?, *g),
    };
    let energy = k * k;
    let product = chain_matrix(&chain, energy);
    let cf = closed_form(kind, alpha, &geometry, energy);
    let scat = amplitudes(&product, k, chain.x_left(), chain.x_right())?;
    Ok(MatrixReport {
        model: kind,
        alpha,
        k,
        geometry,
        product,
        closed_form: cf,
        det_error: (product.det() - 1.0).norm(),
        closed_form_max_rel_diff: product.max_rel_diff(&cf),
        near_opaque: product.is_near_opaque(),
        transmission: scat.trans,
    })
}

/// Runs with the given argument vector; returns the process exit status.
pub fn main_with_args<I, S, O, E>(argv: I, stdout: &mut O, stderr: &mut E) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
    O: Write + ?Sized,
    E: Write + ?Sized,
{
    let config = match parse_args(argv) {
        Ok(c) => c,
        Err(CliError::Info(text)) => {
            let _ = stdout.write_all(text.as_bytes());
            return 0;
        }
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(stderr, "{}", msg.trim_end());
            return 2;
        }
    };
    let result = match &config.out_path {
        Some(path) => fs::File::create(path)
            .map_err(RunError::from)
            .and_then(|mut f| run_to(&config, &mut f)),
        None => run_to(&config, stdout),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<RunConfig, CliError> {
        parse_args(std::iter::once("bwtunnel").chain(s.split_whitespace()))
    }

    #[test]
    fn fig2_scan_config() {
        let c = parse(
            "scan-alpha --model plus --k 1 --eps 0.1 --b 3 --sigma 1 --alpha-min -40 --alpha-max 40 --steps 4000",
        )
        .unwrap();
        let Command::ScanAlpha { template, k, alphas } = c.command else {
            panic!()
        };
        assert_eq!(template.kind, Kind::Plus);
        assert_eq!((template.c1, template.c2, template.eps, template.sigma), (3.0, 1.0, 0.1, 1.0));
        assert_eq!(k, 1.0);
        assert_eq!(alphas, Sweep::new(-40.0, 40.0, 4000).unwrap());
        assert_eq!(c.output, OutputFormat::Csv);
    }

    #[test]
    fn sigma_zero_grid_is_valid() {
        let c = parse("grid --model minus --sigma 0 --eps 0.2").unwrap();
        let Command::Grid { template, ks, .. } = c.command else {
            panic!()
        };
        assert_eq!(template.sigma, 0.0);
        assert_eq!(template.kind, Kind::Minus);
        assert_eq!(ks.min, 0.01);
    }

    #[test]
    fn usage_errors_name_the_flag() {
        for (args, flag) in [
            ("scan-alpha --steps 1", "--steps"),
            ("scan-alpha --k 0", "--k"),
            ("grid --k-min 0", "--k-min"),
            ("resonances --sigma -1", "--sigma"),
            ("converge --alpha 2.28 --eps-list 0.1,0.2", "--eps-list"),
            ("resonances --b 3 --c1 3 --c2 1", "--b"),
            ("resonances --format csv", "--format"),
            ("scan-alpha --bogus 1", "--bogus"),
        ] {
            match parse(args) {
                Err(CliError::Usage(m)) => assert!(m.contains(flag), "{args}: {m}"),
                other => panic!("{args}: {other:?}"),
            }
        }
        assert!(matches!(parse("resonances --c1 3"), Err(CliError::Usage(_))));
    }

    #[test]
    fn c1_c2_shape() {
        let c = parse("resonances --c1 6 --c2 2").unwrap();
        let Command::Resonances { b, .. } = c.command else {
            panic!()
        };
        assert_eq!(b, 3.0);
    }

    #[test]
    fn help_is_info() {
        for sub in ["scan-alpha", "grid", "resonances", "converge", "classify", "matrix"] {
            match parse(&format!("{sub} --help")) {
                Err(CliError::Info(text)) => {
                    assert!(text.contains("default"), "{sub}");
                    assert!(text.contains("hbar^2/2m"), "{sub}");
                }
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn config_file_with_override() {
        let dir = std::env::temp_dir().join(format!("bwtunnel-cfg-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("cfg.json");
        fs::write(&path, r#"{"k": 2.5, "eps": 0.05, "alpha-min": -10, "steps": 11}"#).unwrap();
        let c = parse(&format!("scan-alpha --config {} --k 0.5", path.display())).unwrap();
        let Command::ScanAlpha { template, k, alphas } = c.command else {
            panic!()
        };
        assert_eq!(k, 0.5);
        assert_eq!(template.eps, 0.05);
        assert_eq!(alphas.min, -10.0);
        assert_eq!(alphas.steps, 11);
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn raw_geometry() {
        let c = parse("matrix --model plus --alpha 1 --raw 1,1,1,1").unwrap();
        let Command::Matrix { source, .. } = c.command else {
            panic!()
        };
        assert_eq!(
            source,
            MatrixSource::Raw(Geometry {
                h: 1.0,
                l: 1.0,
                d: 1.0,
                r: 1.0
            })
        );
        assert!(parse("matrix --alpha 1 --raw 1,0,1,1").is_err());
    }
}
