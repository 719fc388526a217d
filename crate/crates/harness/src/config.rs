//! Run configuration: a flat `key = value` file overlaid by command-line flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use conebessel::cone::{Field, HypergroupParams};

use crate::error::{CliError, CliResult};

pub const DEFAULT_N_SAMPLES: usize = 100_000;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_WORKERS: usize = 1;
pub const DEFAULT_SEED: u64 = 7;
pub const SEED_ENV: &str = "CONEBESSEL_SEED";

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    EvalBessel,
    Conv,
    Wishart,
    Clt,
    Slln,
    Check,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::EvalBessel => "eval-bessel",
            Command::Conv => "conv",
            Command::Wishart => "wishart",
            Command::Clt => "clt",
            Command::Slln => "slln",
            Command::Check => "check",
        }
    }

    /// Commands whose output depends on the convolution, which needs μ > ρ − 1.
    pub fn needs_hypergroup(self) -> bool {
        matches!(self, Command::Conv | Command::Clt | Command::Slln | Command::Check)
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        [Command::EvalBessel, Command::Conv, Command::Wishart, Command::Clt, Command::Slln, Command::Check]
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown command `{s}`"))
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where a setting came from, for diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub enum Origin {
    File { path: PathBuf, line: usize },
    Flag,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Setting {
    pub value: String,
    pub origin: Origin,
}

/// Raw settings keyed by name. Later inserts win, so flags are applied after the file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Settings(BTreeMap<String, Setting>);

pub const KNOWN_KEYS: &[&str] = &[
    "command", "q", "d", "mu", "seed", "workers", "n_samples", "tol", "output", "report", "x", "eigenvalues", "r",
    "s", "scale", "t", "step", "replicas", "checkpoints", "n_max", "lambda", "grid", "criteria",
];

impl Settings {
    pub fn parse(text: &str, path: &Path) -> CliResult<Self> {
        let mut out = Settings::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body.split_once('=').ok_or_else(|| CliError::Config {
                location: format!("{}:{line}", path.display()),
                message: format!("expected `key = value`, got `{body}`"),
            })?;
            let key = key.trim().replace('-', "_");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CliError::Config {
                    location: format!("{}:{line}", path.display()),
                    message: format!("unknown key `{key}`"),
                });
            }
            out.0.insert(
                key,
                Setting { value: value.trim().to_string(), origin: Origin::File { path: path.to_path_buf(), line } },
            );
        }
        Ok(out)
    }

    pub fn read(path: impl AsRef<Path>) -> CliResult<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config { location: path.display().to_string(), message: e.to_string() })?;
        Self::parse(&text, path)
    }

    pub fn set_flag(&mut self, key: &str, value: impl ToString) {
        self.0.insert(key.to_string(), Setting { value: value.to_string(), origin: Origin::Flag });
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(|s| s.value.as_str())
    }

    fn location(&self, key: &str) -> String {
        match self.0.get(key).map(|s| &s.origin) {
            Some(Origin::File { path, line }) => format!("{}:{line}", path.display()),
            _ => format!("--{}", key.replace('_', "-")),
        }
    }

    pub fn get<T: FromStr>(&self, key: &str) -> CliResult<Option<T>>
    where
        T::Err: fmt::Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v.parse::<T>().map(Some).map_err(|e| CliError::Config {
                location: self.location(key),
                message: format!("invalid value `{v}` for `{key}`: {e}"),
            }),
        }
    }

    /// Comma-separated list.
    pub fn get_list<T: FromStr>(&self, key: &str) -> CliResult<Option<Vec<T>>>
    where
        T::Err: fmt::Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .split(',')
                .map(|x| x.trim())
                .filter(|x| !x.is_empty())
                .map(|x| {
                    x.parse::<T>().map_err(|e| CliError::Config {
                        location: self.location(key),
                        message: format!("invalid entry `{x}` in `{key}`: {e}"),
                    })
                })
                .collect::<CliResult<Vec<T>>>()
                .map(Some),
        }
    }

    pub fn invalid(&self, key: &str, message: impl Into<String>) -> CliError {
        CliError::Validation { key: key.to_string(), location: self.location(key), message: message.into() }
    }
}

/// Validated configuration for one run.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: Command,
    /// Present unless the command is `check` without a full parameter scope.
    pub params: Option<HypergroupParams>,
    pub q: Option<usize>,
    pub d: Option<usize>,
    pub mu: Option<f64>,
    pub seed: u64,
    pub workers: usize,
    pub n_samples: usize,
    pub tol: f64,
    pub output: Option<PathBuf>,
    pub settings: Settings,
}

fn env_seed() -> CliResult<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| CliError::Config {
            location: SEED_ENV.to_string(),
            message: format!("invalid seed `{v}`"),
        }),
        Err(_) => Ok(None),
    }
}

impl RunConfig {
    pub fn from_settings(settings: Settings) -> CliResult<Self> {
        let command: Command = settings
            .get("command")?
            .ok_or_else(|| CliError::Usage("no command given (use a subcommand or `command = ...`)".into()))?;
        let q: Option<usize> = settings.get("q")?;
        let d: Option<usize> = settings.get("d")?;
        let mu: Option<f64> = settings.get("mu")?;
        if let Some(d) = d {
            Field::from_d(d).map_err(|_| {
                settings.invalid("d", format!("unsupported field dimension d = {d} (supported: 1 = real, 2 = complex)"))
            })?;
        }
        if q == Some(0) {
            return Err(settings.invalid("q", "q must be at least 1"));
        }
        if let Some(mu) = mu {
            if !(mu > 0.0 && mu.is_finite()) {
                return Err(settings.invalid("mu", format!("mu = {mu} must be positive and finite")));
            }
        }
        let params = match (q, d, mu) {
            (Some(q), Some(d), Some(mu)) => {
                let field = Field::from_d(d).expect("checked above");
                let p = if command.needs_hypergroup() {
                    HypergroupParams::with_field(q, field, mu).map_err(|_| {
                        let rho = d as f64 * (q as f64 - 0.5) + 1.0;
                        settings.invalid(
                            "mu",
                            format!("mu = {mu} must exceed rho - 1 = {} for q = {q}, d = {d}", rho - 1.0),
                        )
                    })?
                } else {
                    HypergroupParams::wishart_shape(q, d, mu).map_err(|_| {
                        settings.invalid(
                            "mu",
                            format!("mu = {mu} must exceed (d/2)(q - 1) = {}", d as f64 / 2.0 * (q as f64 - 1.0)),
                        )
                    })?
                };
                Some(p)
            }
            _ if command == Command::Check => None,
            _ => {
                let missing: Vec<&str> =
                    [("q", q.is_none()), ("d", d.is_none()), ("mu", mu.is_none())].iter().filter(|m| m.1).map(|m| m.0).collect();
                return Err(CliError::Usage(format!("`{command}` needs {}", missing.join(", "))));
            }
        };
        let seed = match settings.get("seed")? {
            Some(s) => s,
            None => env_seed()?.unwrap_or(DEFAULT_SEED),
        };
        let workers = settings.get("workers")?.unwrap_or(DEFAULT_WORKERS);
        if workers == 0 {
            return Err(settings.invalid("workers", "workers must be at least 1"));
        }
        let n_samples = match settings.get::<f64>("n_samples")? {
            None => DEFAULT_N_SAMPLES,
            Some(n) if n >= 1.0 && n.fract() == 0.0 && n < 1e12 => n as usize,
            Some(n) => return Err(settings.invalid("n_samples", format!("n_samples = {n} must be a positive integer"))),
        };
        let tol = settings.get("tol")?.unwrap_or(DEFAULT_TOL);
        if !(tol > 0.0) {
            return Err(settings.invalid("tol", "tol must be positive"));
        }
        let output = settings.get::<PathBuf>("output")?;
        Ok(RunConfig { command, params, q, d, mu, seed, workers, n_samples, tol, output, settings })
    }

    /// Parameters for commands that require them.
    pub fn params(&self) -> CliResult<HypergroupParams> {
        self.params.ok_or_else(|| CliError::Usage(format!("`{}` needs q, d and mu", self.command)))
    }
}

/// Reads `path` and fills in defaults.
pub fn load_config(path: impl AsRef<Path>) -> CliResult<RunConfig> {
    RunConfig::from_settings(Settings::read(path)?)
}
