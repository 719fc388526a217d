use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use conebessel_cli::commands::run;
use conebessel_cli::config::{Command, RunConfig, Settings};
use conebessel_cli::error::CliResult;

/// Bessel functions on matrix cones and random walks on the associated hypergroups.
///
/// Settings may come from a `key = value` file (--config); flags override it.
#[derive(Parser, Debug)]
#[command(name = "conebessel", version)]
struct Cli {
    /// Subcommand; may instead be given as `command = ...` in the config file.
    command: Option<Command>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    q: Option<String>,
    #[arg(long)]
    d: Option<String>,
    #[arg(long)]
    mu: Option<String>,
    /// Root seed (default: $CONEBESSEL_SEED, then 7).
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    workers: Option<String>,
    #[arg(long = "n-samples", visible_alias = "n")]
    n_samples: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    /// Main artifact (CSV or JSON); stdout when omitted.
    #[arg(long)]
    output: Option<String>,
    /// JSON summary for `conv` and `wishart`.
    #[arg(long)]
    report: Option<String>,
    /// Matrix file for `eval-bessel`.
    #[arg(long)]
    x: Option<String>,
    /// Comma-separated eigenvalues for `eval-bessel`.
    #[arg(long)]
    eigenvalues: Option<String>,
    #[arg(long)]
    r: Option<String>,
    #[arg(long)]
    s: Option<String>,
    /// Scale matrix file for `wishart` (default identity).
    #[arg(long)]
    scale: Option<String>,
    #[arg(long)]
    t: Option<String>,
    /// `wishart` or a matrix file for point-mass steps.
    #[arg(long)]
    step: Option<String>,
    #[arg(long)]
    replicas: Option<String>,
    #[arg(long)]
    checkpoints: Option<String>,
    #[arg(long = "n-max")]
    n_max: Option<String>,
    /// Exponent λ for a_n = n^{1/λ}; linear normalization when omitted.
    #[arg(long)]
    lambda: Option<String>,
    /// Comma-separated levels tr(sσ²s) for `clt`.
    #[arg(long)]
    grid: Option<String>,
    /// Comma-separated criterion numbers for `check` (default all).
    #[arg(long)]
    criteria: Option<String>,
}

impl Cli {
    fn settings(&self) -> CliResult<Settings> {
        let mut settings = match &self.config {
            Some(path) => Settings::read(path)?,
            None => Settings::default(),
        };
        if let Some(c) = self.command {
            settings.set_flag("command", c.name());
        }
        let flags = [
            ("q", &self.q),
            ("d", &self.d),
            ("mu", &self.mu),
            ("seed", &self.seed),
            ("workers", &self.workers),
            ("n_samples", &self.n_samples),
            ("tol", &self.tol),
            ("output", &self.output),
            ("report", &self.report),
            ("x", &self.x),
            ("eigenvalues", &self.eigenvalues),
            ("r", &self.r),
            ("s", &self.s),
            ("scale", &self.scale),
            ("t", &self.t),
            ("step", &self.step),
            ("replicas", &self.replicas),
            ("checkpoints", &self.checkpoints),
            ("n_max", &self.n_max),
            ("lambda", &self.lambda),
            ("grid", &self.grid),
            ("criteria", &self.criteria),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                settings.set_flag(key, v);
            }
        }
        Ok(settings)
    }
}

fn main() -> ExitCode {
    // clap's own exit code 2 is reserved here for failed checks.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = cli.settings().and_then(RunConfig::from_settings).and_then(|cfg| run(&cfg));
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            let msg = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{msg}");
            ExitCode::from(1)
        }
    }
}
