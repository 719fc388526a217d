//! The subcommands. Each writes its artifacts and returns whether it passed;
//! only `check` can return `false`.

use std::io::Write;
use std::path::{Path, PathBuf};

use conebessel::algebra::FourierPanel;
use conebessel::ball::{conv_sample, EmpiricalMeasure};
use conebessel::cone::text::read_matrix;
use conebessel::cone::{ConePoint, HermitianMatrix, HypergroupParams};
use conebessel::jack::BesselFunction;
use conebessel::seeding::replica_rng;
use conebessel::walk::{clt_experiment, slln_experiment, Normalization, StepLaw};
use conebessel::wishart::{fourier_closed, sample_scaled, WishartSpec};
use rayon::prelude::*;
use serde_json::json;

use crate::checks::{all_passed, run_suite, Scope, Verdict};
use crate::config::{Command, RunConfig};
use crate::error::{CliError, CliResult};
use crate::report::{matrix_json, Report};

/// Samples are drawn in blocks, each from its own stream, so output does not
/// depend on the number of workers.
const BLOCK: usize = 1024;

pub fn run(cfg: &RunConfig) -> CliResult<bool> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {} workers: {e}", cfg.workers)))?;
    pool.install(|| match cfg.command {
        Command::EvalBessel => eval_bessel(cfg),
        Command::Conv => conv(cfg),
        Command::Wishart => wishart(cfg),
        Command::Clt => clt(cfg),
        Command::Slln => slln(cfg),
        Command::Check => check(cfg),
    })
}

fn read_point(cfg: &RunConfig, key: &str, p: &HypergroupParams) -> CliResult<ConePoint> {
    let path: PathBuf = cfg
        .settings
        .get(key)?
        .ok_or_else(|| CliError::Usage(format!("`{}` needs --{key} <matrix file>", cfg.command)))?;
    let m = read_matrix(&path)
        .map_err(|e| cfg.settings.invalid(key, format!("cannot read matrix file {}: {e}", path.display())))?;
    if m.q() != p.q() {
        return Err(cfg.settings.invalid(key, format!("matrix is {0}x{0}, expected q = {1}", m.q(), p.q())));
    }
    if m.field().d() > p.d() {
        return Err(cfg.settings.invalid(key, format!("matrix has d = {}, expected d = {}", m.field().d(), p.d())));
    }
    Ok(ConePoint::from_matrix(m.promote(p.field()))?)
}

fn blocked_samples<T: Send>(
    seed: u64,
    n: usize,
    draw: impl Fn(&mut rand_chacha::ChaCha8Rng) -> conebessel::Result<T> + Sync,
) -> CliResult<Vec<T>> {
    let blocks = n.div_ceil(BLOCK);
    let parts = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = replica_rng(seed, b as u64);
            let len = BLOCK.min(n - b * BLOCK);
            (0..len).map(|_| draw(&mut rng)).collect::<conebessel::Result<Vec<T>>>()
        })
        .collect::<conebessel::Result<Vec<_>>>()?;
    Ok(parts.into_iter().flatten().collect())
}

fn write_csv(m: &EmpiricalMeasure, path: Option<&Path>) -> CliResult<()> {
    match path {
        Some(p) => m.write_csv_file(p)?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            m.write_csv(&mut lock)?;
            lock.flush()?;
        }
    }
    Ok(())
}

fn report_path(cfg: &RunConfig) -> CliResult<Option<PathBuf>> {
    cfg.settings.get("report")
}

fn eval_bessel(cfg: &RunConfig) -> CliResult<bool> {
    let p = cfg.params()?;
    let x = match (cfg.settings.raw("x"), cfg.settings.get_list::<f64>("eigenvalues")?) {
        (Some(_), Some(_)) => return Err(CliError::Usage("give either --x or --eigenvalues, not both".into())),
        (Some(path), None) => {
            let m = read_matrix(path)
                .map_err(|e| cfg.settings.invalid("x", format!("cannot read matrix file {path}: {e}")))?;
            if m.q() != p.q() {
                return Err(cfg.settings.invalid("x", format!("matrix is {0}x{0}, expected q = {1}", m.q(), p.q())));
            }
            HermitianMatrix::new(m.promote(p.field()))?
        }
        (None, Some(ev)) => {
            if ev.len() != p.q() {
                return Err(cfg.settings.invalid("eigenvalues", format!("expected {} eigenvalues", p.q())));
            }
            HermitianMatrix::diagonal(p.field(), &ev)
        }
        (None, None) => HermitianMatrix::zeros(p.q(), p.field()),
    };
    let eval = BesselFunction::new(p.q(), p.field(), p.mu())?.eval(&x, cfg.tol)?;
    let mut report = Report::new(cfg);
    report.grid = json!({ "x": matrix_json(&x) });
    report.estimates = json!(eval.value);
    report.stderrs = json!(eval.truncation_bound);
    report.detail("degree_used", eval.degree_used)?;
    report.detail("tol", cfg.tol)?;
    report.emit(cfg.output.as_deref())?;
    Ok(true)
}

fn conv(cfg: &RunConfig) -> CliResult<bool> {
    let p = cfg.params()?;
    let r = read_point(cfg, "r", &p)?;
    let s = read_point(cfg, "s", &p)?;
    let pts = blocked_samples(cfg.seed, cfg.n_samples, |rng| conv_sample(&p, &r, &s, rng))?;
    let bound = r.spectral_norm() + s.spectral_norm();
    let max_norm = pts.iter().map(|z| z.spectral_norm()).fold(0.0, f64::max);
    let m = EmpiricalMeasure::uniform(p, pts, cfg.seed)?;
    write_csv(&m, cfg.output.as_deref())?;
    if let Some(path) = report_path(cfg)? {
        let mut report = Report::new(cfg);
        report.grid = json!({ "r": matrix_json(&r), "s": matrix_json(&s) });
        let tr = m.expect(|z| Ok(z.trace_re()))?;
        report.estimates = json!({ "mean_trace": tr.estimate });
        report.stderrs = json!({ "mean_trace": tr.stderr });
        report.verdicts = json!({ "norm_bound": max_norm <= bound + 1e-9 });
        report.detail("n_samples", cfg.n_samples)?;
        report.detail("max_norm", max_norm)?;
        report.detail("norm_bound", bound)?;
        report.emit(Some(&path))?;
    }
    Ok(true)
}

fn wishart(cfg: &RunConfig) -> CliResult<bool> {
    let p = cfg.params()?;
    let scale = match cfg.settings.raw("scale") {
        Some(_) => read_point(cfg, "scale", &p)?,
        None => ConePoint::identity(p.q(), p.field()),
    };
    let t: f64 = cfg.settings.get("t")?.unwrap_or(1.0);
    let spec = WishartSpec::new(p, scale, t).map_err(|e| cfg.settings.invalid("t", e.to_string()))?;
    let pts = blocked_samples(cfg.seed, cfg.n_samples, |rng| sample_scaled(&spec, rng))?;
    let m = EmpiricalMeasure::uniform(p, pts, cfg.seed)?;
    write_csv(&m, cfg.output.as_deref())?;
    if let Some(path) = report_path(cfg)? {
        let mut report = Report::new(cfg);
        let cov = spec.covariance();
        report.detail("covariance", matrix_json(&cov))?;
        report.detail("t", t)?;
        report.detail("n_samples", cfg.n_samples)?;
        // Fourier panel along s = c·I; characters need the hypergroup range of μ.
        let levels = [0.1, 0.5, 1.0, 2.0];
        let tr_cov = cov.trace_re();
        if p.is_hypergroup() && tr_cov > 0.0 {
            let grid = levels
                .iter()
                .map(|v| ConePoint::identity(p.q(), p.field()).scale((v / tr_cov).sqrt()))
                .collect::<conebessel::Result<Vec<_>>>()?;
            let panel = FourierPanel::of_measure(&p, &m, &grid, |s| fourier_closed(&cov, s))?;
            let z = panel.z_scores();
            report.grid = json!(levels);
            report.estimates = json!(panel.estimates.iter().map(|e| e.estimate).collect::<Vec<_>>());
            report.stderrs = json!(panel.estimates.iter().map(|e| e.stderr).collect::<Vec<_>>());
            report.verdicts = json!(z.iter().map(|z| *z <= 3.0).collect::<Vec<_>>());
            report.detail("targets", &panel.targets)?;
        }
        report.emit(Some(&path))?;
    }
    Ok(true)
}

fn step_law(cfg: &RunConfig, p: &HypergroupParams) -> CliResult<StepLaw> {
    match cfg.settings.raw("step") {
        None | Some("wishart") => Ok(StepLaw::Wishart(WishartSpec::standard(*p))),
        Some(_) => Ok(StepLaw::PointMass(read_point(cfg, "step", p)?)),
    }
}

fn clt(cfg: &RunConfig) -> CliResult<bool> {
    let p = cfg.params()?;
    let law = step_law(cfg, &p)?;
    let checkpoints: Vec<usize> = cfg.settings.get_list("checkpoints")?.unwrap_or(vec![4, 16, 64]);
    if checkpoints.is_empty() || checkpoints.contains(&0) {
        return Err(cfg.settings.invalid("checkpoints", "checkpoints must be positive"));
    }
    let replicas: usize = cfg.settings.get("replicas")?.unwrap_or(20_000);
    let levels: Vec<f64> = cfg.settings.get_list("grid")?.unwrap_or(vec![0.25, 0.5, 1.0, 2.0]);
    // s = c·I with tr(s σ² s) equal to each level.
    let tr_sigma = law.second_moment().trace_re() / (2.0 * p.mu());
    let grid = levels
        .iter()
        .map(|v| ConePoint::identity(p.q(), p.field()).scale((v / tr_sigma).sqrt()))
        .collect::<conebessel::Result<Vec<_>>>()?;
    let out = clt_experiment(&p, &law, &checkpoints, replicas, &grid, cfg.seed)?;
    let mut report = Report::new(cfg);
    report.grid = json!(levels);
    report.estimates = json!(out.estimates.iter().map(|row| row.iter().map(|e| e.estimate).collect::<Vec<_>>()).collect::<Vec<_>>());
    report.stderrs = json!(out.estimates.iter().map(|row| row.iter().map(|e| e.stderr).collect::<Vec<_>>()).collect::<Vec<_>>());
    let sup: Vec<f64> = (0..checkpoints.len()).map(|i| out.sup_deviation(i)).collect();
    report.verdicts = json!({ "deviation_decreasing": sup.windows(2).all(|w| w[1] < w[0]) });
    report.detail("checkpoints", &checkpoints)?;
    report.detail("replicas", replicas)?;
    report.detail("targets", &out.targets)?;
    report.detail("sup_deviation", &sup)?;
    report.detail("sigma2", matrix_json(out.sigma2.as_matrix()))?;
    report.detail("sigma2_exact", matrix_json(out.sigma2_exact.as_matrix()))?;
    report.emit(cfg.output.as_deref())?;
    Ok(true)
}

fn slln(cfg: &RunConfig) -> CliResult<bool> {
    let p = cfg.params()?;
    let law = step_law(cfg, &p)?;
    let n_max: usize = cfg.settings.get("n_max")?.unwrap_or(4096);
    let replicas: usize = cfg.settings.get("replicas")?.unwrap_or(200);
    let norm = match cfg.settings.get::<f64>("lambda")? {
        None => Normalization::Linear,
        Some(l) => Normalization::Power(l),
    };
    let out = slln_experiment(&p, &law, norm, n_max, replicas, cfg.seed)?;
    let mut report = Report::new(cfg);
    report.grid = json!(out.checkpoints);
    report.estimates = json!(out.median_ratio);
    report.verdicts = json!({
        "median_decreasing": out.median_decreasing(),
        "fraction_final_below_first": out.fraction_final_below_first,
    });
    report.detail("max_ratio", &out.max_ratio)?;
    report.detail("condition_sum", out.condition_sum)?;
    report.detail("replicas", replicas)?;
    report.emit(cfg.output.as_deref())?;
    Ok(true)
}

fn check(cfg: &RunConfig) -> CliResult<bool> {
    let ids: Vec<usize> = cfg.settings.get_list("criteria")?.unwrap_or_default();
    if let Some(bad) = ids.iter().find(|&&i| !(1..=17).contains(&i)) {
        return Err(cfg.settings.invalid("criteria", format!("no criterion {bad} (expected 1..=17)")));
    }
    let scope = Scope { q: cfg.q, d: cfg.d, mu: cfg.mu };
    let results = run_suite(&ids, &scope, cfg.seed, |r| eprintln!("{}", r.line()));
    let passed = all_passed(&results);
    let mut report = Report::new(cfg);
    report.grid = json!(results.iter().map(|r| r.id).collect::<Vec<_>>());
    report.estimates = json!(results.iter().map(|r| r.metric).collect::<Vec<_>>());
    report.verdicts = json!(results.iter().map(|r| r.verdict).collect::<Vec<Verdict>>());
    report.detail("criteria", &results)?;
    report.detail("passed", passed)?;
    report.emit(cfg.output.as_deref())?;
    Ok(passed)
}
