//! Command-line and config-file parsing into a resolved [`RunManifest`].
//!
//! Precedence is flags, then the `--config` file, then the built-in defaults.
//! The file holds `key = value` lines with `#` comments; keys are the flag
//! names without the leading dashes.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use heston_core::{HestonParams, OptionSpec, Parallelism, Right, SamplerKind, Scheme, SimConfig};

use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "heston",
    version,
    about = "Heston Monte Carlo pricing and benchmark harness"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Price one option.
    Price(Opts),
    /// Price with pathwise Delta and Rho.
    Greeks(Opts),
    /// Price over a sweep of schemes, steps and path counts (comma lists).
    Bench(Opts),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Opts {
    /// exact | euler | milstein
    #[arg(long)]
    pub scheme: Option<String>,
    /// pseudo | sobol
    #[arg(long)]
    pub sampler: Option<String>,
    /// Allow Sobol points to drive the discretised schemes.
    #[arg(long)]
    pub sobol_highdim_ack: bool,
    /// european | asian
    #[arg(long)]
    pub product: Option<String>,
    /// call | put
    #[arg(long)]
    pub right: Option<String>,
    #[arg(long)]
    pub paths: Option<String>,
    #[arg(long)]
    pub steps: Option<String>,
    #[arg(long)]
    pub runs: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// auto | N
    #[arg(long)]
    pub parallelism: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub kappa: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub sigma: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub rho: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub r: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub v0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub s0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub strike: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub maturity: Option<String>,
    /// Comma-separated averaging dates (asian only).
    #[arg(long)]
    pub averaging_times: Option<String>,
    /// table | csv | jsonl
    #[arg(long)]
    pub format: Option<String>,
    /// Write 2-D pseudo and Sobol points to this CSV file.
    #[arg(long)]
    pub emit_points: Option<PathBuf>,
    /// Flat `key = value` configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Keys accepted in a config file.
pub const KEYS: &[&str] = &[
    "scheme",
    "sampler",
    "sobol-highdim-ack",
    "product",
    "right",
    "paths",
    "steps",
    "runs",
    "seed",
    "parallelism",
    "kappa",
    "theta",
    "sigma",
    "rho",
    "r",
    "v0",
    "s0",
    "strike",
    "maturity",
    "averaging-times",
    "format",
    "emit-points",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Price,
    Greeks,
    Bench,
}

impl CommandKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CommandKind::Price => "price",
            CommandKind::Greeks => "greeks",
            CommandKind::Bench => "bench",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Table,
    Csv,
    JsonLines,
}

impl Format {
    pub fn as_str(&self) -> &'static str {
        match self {
            Format::Table => "table",
            Format::Csv => "csv",
            Format::JsonLines => "jsonl",
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table" => Ok(Format::Table),
            "csv" => Ok(Format::Csv),
            "jsonl" | "json-lines" => Ok(Format::JsonLines),
            other => Err(format!(
                "unknown format `{other}` (expected table|csv|jsonl)"
            )),
        }
    }
}

/// Sweep axes for `bench`; single-element lists for the other commands.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub schemes: Vec<Scheme>,
    pub steps: Vec<usize>,
    pub paths: Vec<usize>,
}

/// Fully resolved invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: CommandKind,
    pub params: HestonParams<f64>,
    pub spec: OptionSpec<f64>,
    /// Base configuration; `bench` overrides scheme, steps and paths per cell.
    pub config: SimConfig,
    pub sweep: Sweep,
    pub format: Format,
    pub emit_points: Option<PathBuf>,
    pub version: String,
    pub timestamp: String,
}

impl RunManifest {
    /// Configurations to run, scheme-major then steps then paths.
    pub fn configs(&self) -> Vec<SimConfig> {
        let mut out = Vec::new();
        for &scheme in &self.sweep.schemes {
            for &n_steps in &self.sweep.steps {
                for &n_paths in &self.sweep.paths {
                    out.push(SimConfig {
                        scheme,
                        n_steps,
                        n_paths,
                        ..self.config.clone()
                    });
                }
            }
        }
        out
    }
}

/// Parses argv (program name first) and any config file it names.
pub fn parse_config<I, S>(argv: I) -> Result<RunManifest, CliError>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| CliError::Usage(e.to_string()))?;
    resolve(&cli)
}

pub fn resolve(cli: &Cli) -> Result<RunManifest, CliError> {
    let (kind, opts) = match &cli.command {
        Command::Price(o) => (CommandKind::Price, o),
        Command::Greeks(o) => (CommandKind::Greeks, o),
        Command::Bench(o) => (CommandKind::Bench, o),
    };
    let mut values = match &opts.config {
        Some(path) => read_config_file(path)?,
        None => BTreeMap::new(),
    };
    for (key, value) in flag_values(opts) {
        values.insert(key.to_string(), value);
    }
    build_manifest(kind, &values)
}

/// Reads a `key = value` file. Unknown keys and malformed lines are errors.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config_text(&text)
}

pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!(
                "config line {}: expected `key = value`",
                lineno + 1
            ))
        })?;
        let key = key.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Usage(format!(
                "config line {}: unknown key `{key}`",
                lineno + 1
            )));
        }
        out.insert(key, value.trim().to_string());
    }
    Ok(out)
}

fn flag_values(o: &Opts) -> Vec<(&'static str, String)> {
    let mut v: Vec<(&'static str, String)> = [
        ("scheme", &o.scheme),
        ("sampler", &o.sampler),
        ("product", &o.product),
        ("right", &o.right),
        ("paths", &o.paths),
        ("steps", &o.steps),
        ("runs", &o.runs),
        ("seed", &o.seed),
        ("parallelism", &o.parallelism),
        ("kappa", &o.kappa),
        ("theta", &o.theta),
        ("sigma", &o.sigma),
        ("rho", &o.rho),
        ("r", &o.r),
        ("v0", &o.v0),
        ("s0", &o.s0),
        ("strike", &o.strike),
        ("maturity", &o.maturity),
        ("averaging-times", &o.averaging_times),
        ("format", &o.format),
    ]
    .into_iter()
    .filter_map(|(k, v)| v.clone().map(|v| (k, v)))
    .collect();
    if o.sobol_highdim_ack {
        v.push(("sobol-highdim-ack", "true".into()));
    }
    if let Some(p) = &o.emit_points {
        v.push(("emit-points", p.display().to_string()));
    }
    v
}

fn parse_one<T: FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    value
        .trim()
        .parse()
        .map_err(|e| CliError::Usage(format!("--{key} `{value}`: {e}")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, CliError>
where
    T::Err: std::fmt::Display,
{
    value.split(',').map(|x| parse_one(key, x)).collect()
}

fn positive(key: &str, value: &str) -> Result<usize, CliError> {
    match value.trim().parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(CliError::Usage(format!(
            "--{key} must be a positive integer, got `{value}`"
        ))),
    }
}

fn build_manifest(
    kind: CommandKind,
    values: &BTreeMap<String, String>,
) -> Result<RunManifest, CliError> {
    let get = |k: &str| values.get(k).map(String::as_str);
    let real = |k: &str, default: f64| -> Result<f64, CliError> {
        get(k).map_or(Ok(default), |v| parse_one::<f64>(k, v))
    };

    let base = HestonParams::<f64>::benchmark();
    let params = HestonParams {
        kappa: real("kappa", base.kappa)?,
        theta: real("theta", base.theta)?,
        sigma: real("sigma", base.sigma)?,
        rho: real("rho", base.rho)?,
        r: real("r", base.r)?,
        v0: real("v0", base.v0)?,
    };
    params.validate().map_err(CliError::Validation)?;

    let spot = real("s0", 100.0)?;
    let strike = real("strike", 100.0)?;
    let maturity = real("maturity", 1.0)?;
    let right = match get("right").unwrap_or("call") {
        "call" => Right::Call,
        "put" => Right::Put,
        other => {
            return Err(CliError::Usage(format!(
                "--right `{other}` (expected call|put)"
            )))
        }
    };
    let product = get("product").unwrap_or("european");
    let spec = match product {
        "european" => {
            if get("averaging-times").is_some() {
                return Err(CliError::Usage(
                    "--averaging-times only applies to --product asian".into(),
                ));
            }
            OptionSpec::european(right, strike, maturity, spot)
        }
        "asian" => {
            let times = match get("averaging-times") {
                Some(v) => parse_list::<f64>("averaging-times", v)?,
                None => vec![0.25, 0.5, 0.75, 1.0]
                    .into_iter()
                    .map(|t| t * maturity)
                    .collect(),
            };
            OptionSpec::asian(right, strike, maturity, spot, times)
        }
        other => {
            return Err(CliError::Usage(format!(
                "--product `{other}` (expected european|asian)"
            )))
        }
    }
    .map_err(CliError::Validation)?;

    let list_or =
        |key: &str, default: &'static str| -> String { get(key).unwrap_or(default).to_string() };
    let schemes = parse_list::<Scheme>("scheme", &list_or("scheme", "exact"))?;
    let steps = list_or("steps", "128")
        .split(',')
        .map(|v| positive("steps", v))
        .collect::<Result<Vec<_>, _>>()?;
    let paths = list_or("paths", "10000")
        .split(',')
        .map(|v| positive("paths", v))
        .collect::<Result<Vec<_>, _>>()?;
    if kind != CommandKind::Bench {
        for (key, n) in [
            ("scheme", schemes.len()),
            ("steps", steps.len()),
            ("paths", paths.len()),
        ] {
            if n != 1 {
                return Err(CliError::Usage(format!(
                    "--{key} takes a single value for {}; use bench to sweep",
                    kind.as_str()
                )));
            }
        }
    }

    let ack = match get("sobol-highdim-ack") {
        None => false,
        Some(v) => parse_one::<bool>("sobol-highdim-ack", v)?,
    };
    let config = SimConfig {
        scheme: schemes[0],
        sampler: parse_one::<SamplerKind>("sampler", &list_or("sampler", "pseudo"))?,
        n_paths: paths[0],
        n_steps: steps[0],
        n_runs: positive("runs", &list_or("runs", "30"))?,
        seed: parse_one::<u64>("seed", &list_or("seed", "42"))?,
        parallelism: parse_one::<Parallelism>("parallelism", &list_or("parallelism", "auto"))?,
        sobol_highdim_ack: ack,
    };
    let manifest = RunManifest {
        command: kind,
        params,
        spec,
        config,
        sweep: Sweep {
            schemes,
            steps,
            paths,
        },
        format: parse_one::<Format>("format", &list_or("format", "table"))?,
        emit_points: get("emit-points").map(PathBuf::from),
        version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
    };
    for cfg in manifest.configs() {
        heston_core::validate_inputs(&manifest.params, &manifest.spec, &cfg)
            .map_err(CliError::Validation)?;
    }
    Ok(manifest)
}
