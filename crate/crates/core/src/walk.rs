//! Random walks on the hypergroup, moment functions and the limit-theorem experiments.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{character_or_bochner, fallback_rng, Automorphism};
use crate::ball::{conv_sample, EmpiricalMeasure};
use crate::cone::{ConePoint, HermitianMatrix, HypergroupParams};
use crate::error::{Error, Result};
use crate::jack::{BesselFunction, Character};
use crate::seeding::replica_rng;
use crate::stats::{median, Estimate, Welford};
use crate::wishart::{fourier_closed, sample_scaled, WishartSpec};

/// Tolerance for character evaluations inside the experiments.
const CHAR_TOL: f64 = 1e-10;

/// Law of the i.i.d. steps of a walk.
#[derive(Clone, Debug)]
pub enum StepLaw {
    PointMass(ConePoint),
    Wishart(WishartSpec),
    Empirical(EmpiricalMeasure),
}

impl StepLaw {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<ConePoint> {
        match self {
            StepLaw::PointMass(x) => Ok(x.clone()),
            StepLaw::Wishart(spec) => sample_scaled(spec, rng),
            StepLaw::Empirical(m) => Ok(m.sample(rng).clone()),
        }
    }

    pub fn q(&self) -> usize {
        match self {
            StepLaw::PointMass(x) => x.q(),
            StepLaw::Wishart(spec) => spec.params().q(),
            StepLaw::Empirical(m) => m.params.q(),
        }
    }

    /// E[Y²] in closed form (exact for all built-in laws).
    pub fn second_moment(&self) -> HermitianMatrix {
        match self {
            StepLaw::PointMass(x) => x.square(),
            StepLaw::Wishart(spec) => spec.second_moment(),
            StepLaw::Empirical(m) => {
                let q = m.params.q();
                let mut acc = HermitianMatrix::zeros(q, m.params.field());
                for (x, w) in m.points.iter().zip(&m.weights) {
                    acc = acc.add(&x.square().scale(*w));
                }
                acc
            }
        }
    }

    /// Fourier transform μ̂(s) of the step law.
    pub fn fourier(&self, p: &HypergroupParams, s: &ConePoint) -> Result<f64> {
        match self {
            StepLaw::PointMass(x) => Ok(Character::new(p, s)?.eval(x, CHAR_TOL)?.value),
            StepLaw::Wishart(spec) => Ok(fourier_closed(&spec.covariance(), s)),
            StepLaw::Empirical(m) => {
                let c = Character::new(p, s)?;
                let mut out = 0.0;
                for (x, w) in m.points.iter().zip(&m.weights) {
                    out += w * c.eval(x, CHAR_TOL)?.value;
                }
                Ok(out)
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct WalkConfig {
    pub params: HypergroupParams,
    pub step_law: StepLaw,
    pub n_steps: usize,
    pub n_replicas: usize,
    pub seed: u64,
}

impl WalkConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.ensure_hypergroup()?;
        if self.n_steps == 0 || self.n_replicas == 0 {
            return Err(Error::InvalidParams("n_steps and n_replicas must be at least 1".into()));
        }
        if self.step_law.q() != self.params.q() {
            return Err(Error::Shape(format!(
                "step law lives on q = {}, walk on q = {}",
                self.step_law.q(),
                self.params.q()
            )));
        }
        Ok(())
    }
}

/// Runs replica `index` for `n_steps` steps, calling `visit(n, S_n, Y_n)` after each step.
fn run_replica(
    cfg: &WalkConfig,
    index: u64,
    mut visit: impl FnMut(usize, &ConePoint, &ConePoint) -> Result<()>,
) -> Result<()> {
    let mut rng = replica_rng(cfg.seed, index);
    let p = &cfg.params;
    let mut s = ConePoint::zero(p.q(), p.field());
    for n in 1..=cfg.n_steps {
        let y = cfg.step_law.sample(&mut rng)?;
        s = conv_sample(p, &s, &y, &mut rng)?;
        visit(n, &s, &y)?;
    }
    Ok(())
}

/// Full paths S_0 = 0, S_1, …, S_n for every replica.
pub fn walk_simulate(cfg: &WalkConfig) -> Result<Vec<Vec<ConePoint>>> {
    cfg.validate()?;
    (0..cfg.n_replicas as u64)
        .into_par_iter()
        .map(|i| {
            let mut path = Vec::with_capacity(cfg.n_steps + 1);
            path.push(ConePoint::zero(cfg.params.q(), cfg.params.field()));
            run_replica(cfg, i, |_, s, _| {
                path.push(s.clone());
                Ok(())
            })?;
            Ok(path)
        })
        .collect()
}

/// m_2^{s1,s2}(r) = ℜ tr(s1 r² s2) / (2μ).
pub fn moment_m2(p: &HypergroupParams, s1: &HermitianMatrix, s2: &HermitianMatrix, r: &ConePoint) -> f64 {
    s1.matmul(r.square().as_matrix()).matmul(s2).trace().re / (2.0 * p.mu())
}

/// Directions s_1, …, s_k of a moment function m_k^{s_1,…,s_k}.
#[derive(Clone, Debug)]
pub struct MomentSpec {
    directions: Vec<HermitianMatrix>,
}

impl MomentSpec {
    pub fn new(directions: Vec<HermitianMatrix>) -> Result<Self> {
        let k = directions.len();
        if k != 2 && k != 4 {
            return Err(Error::InvalidParams(format!("moment order {k} is not supported (use 2 or 4)")));
        }
        let q = directions[0].q();
        if directions.iter().any(|s| s.q() != q) {
            return Err(Error::Shape("moment directions differ in size".into()));
        }
        Ok(MomentSpec { directions })
    }

    pub fn order(&self) -> usize {
        self.directions.len()
    }

    pub fn directions(&self) -> &[HermitianMatrix] {
        &self.directions
    }

    /// Default finite-difference step for a point of norm `norm`.
    pub fn default_step(&self, norm: f64) -> f64 {
        match self.order() {
            2 => 1e-3 / (1.0 + norm),
            _ => 0.1 / (1.0 + norm),
        }
    }
}

/// Finite-difference value of a moment function with an error estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MomentValue {
    pub value: f64,
    pub error: f64,
}

/// i^k ∂_{s_1}⋯∂_{s_k} φ_s(r) at s = 0 by central differences over all sign patterns
/// (exact for the multilinear term up to O(h²)), with one Richardson step h → h/2.
pub fn moment_numeric(p: &HypergroupParams, spec: &MomentSpec, r: &ConePoint, h: f64) -> Result<MomentValue> {
    if !(h > 0.0) {
        return Err(Error::InvalidParams(format!("step h = {h} must be positive")));
    }
    if spec.directions[0].q() != r.q() || r.q() != p.q() {
        return Err(Error::Shape("moment directions and point differ in size".into()));
    }
    let bessel = BesselFunction::new(p.q(), p.field(), p.mu())?;
    let r2 = r.square();
    let k = spec.order();
    let diff = |h: f64| -> Result<f64> {
        let mut acc = 0.0;
        for mask in 0..(1u32 << k) {
            let mut s = HermitianMatrix::zeros(p.q(), p.field());
            let mut sign = 1.0;
            for (i, dir) in spec.directions.iter().enumerate() {
                let e = if mask >> i & 1 == 1 { -1.0 } else { 1.0 };
                sign *= e;
                s = s.add(&dir.scale(e * h));
            }
            let arg = r2.congruence(s.as_matrix()).scale(0.25);
            acc += sign * bessel.eval(&arg, 1e-17)?.value;
        }
        Ok(acc / ((1u32 << k) as f64 * h.powi(k as i32)))
    };
    let coarse = diff(h)?;
    let fine = diff(0.5 * h)?;
    let value = (4.0 * fine - coarse) / 3.0;
    let sign = if k % 4 == 2 { -1.0 } else { 1.0 };
    Ok(MomentValue { value: sign * value, error: (value - fine).abs() })
}

/// Componentwise mean of Z² − (x² + y²) over draws Z ~ δ_x ∗ δ_y; entries are
/// listed row-major with real and imaginary parts.
pub fn second_moment_additivity<R: Rng + ?Sized>(
    p: &HypergroupParams,
    x: &ConePoint,
    y: &ConePoint,
    n: usize,
    rng: &mut R,
) -> Result<Vec<Estimate>> {
    let target = x.square().add(&y.square());
    let q = p.q();
    let mut acc = vec![Welford::new(); 2 * q * q];
    for _ in 0..n {
        let z = conv_sample(p, x, y, rng)?;
        let dev = z.square().sub(&target);
        for i in 0..q {
            for j in 0..q {
                let e = dev.get(i, j);
                acc[2 * (i * q + j)].push(e.re);
                acc[2 * (i * q + j) + 1].push(e.im);
            }
        }
    }
    Ok(acc.iter().map(Welford::estimate).collect())
}

/// Plug-in covariance σ² = E[Y²]/(2μ) from a sum of squared steps.
fn sigma2_from(p: &HypergroupParams, sum_sq: &HermitianMatrix, count: usize) -> HermitianMatrix {
    sum_sq.scale(1.0 / (2.0 * p.mu() * count as f64))
}

#[derive(Clone, Debug)]
pub struct CltReport {
    pub checkpoints: Vec<usize>,
    pub grid: Vec<ConePoint>,
    /// Plug-in σ² = (1/2μ)·mean Y² over all steps drawn.
    pub sigma2: HermitianMatrix,
    /// Closed-form σ² of the step law.
    pub sigma2_exact: HermitianMatrix,
    /// e^{−tr(sσ²s)/2} with the plug-in σ².
    pub targets: Vec<f64>,
    /// Fourier estimates of T_{n^{−1/2}I}(S_n), one row per checkpoint.
    pub estimates: Vec<Vec<Estimate>>,
}

impl CltReport {
    /// Per-grid-point deviations |estimate − target| at checkpoint index `i`.
    pub fn deviations(&self, i: usize) -> Vec<f64> {
        self.estimates[i].iter().zip(&self.targets).map(|(e, t)| (e.estimate - t).abs()).collect()
    }

    pub fn sup_deviation(&self, i: usize) -> f64 {
        self.deviations(i).into_iter().fold(0.0, f64::max)
    }
}

/// Simulates the walk up to the largest checkpoint and compares the Fourier transform of
/// the rescaled walk T_{n^{−1/2}I}(S_n) with e^{−tr(sσ²s)/2} on `s_grid`. All checkpoints
/// are read off the same paths.
pub fn clt_experiment(
    p: &HypergroupParams,
    step_law: &StepLaw,
    checkpoints: &[usize],
    replicas: usize,
    s_grid: &[ConePoint],
    seed: u64,
) -> Result<CltReport> {
    let n_max = checkpoints.iter().copied().max().unwrap_or(0);
    let cfg = WalkConfig { params: *p, step_law: step_law.clone(), n_steps: n_max, n_replicas: replicas, seed };
    cfg.validate()?;
    let chars = s_grid.iter().map(|s| Character::new(p, s)).collect::<Result<Vec<_>>>()?;
    let per_replica: Vec<(Vec<Vec<f64>>, HermitianMatrix)> = (0..replicas as u64)
        .into_par_iter()
        .map(|i| {
            let mut values = Vec::with_capacity(checkpoints.len());
            let mut sum_sq = HermitianMatrix::zeros(p.q(), p.field());
            let mut at = vec![None; n_max + 1];
            let mut fallback = fallback_rng(seed, i);
            run_replica(&cfg, i, |n, s, y| {
                sum_sq = sum_sq.add(&y.square());
                if checkpoints.contains(&n) {
                    let scaled = Automorphism::dilation(p.q(), p.field(), 1.0 / (n as f64).sqrt()).apply(s)?;
                    at[n] = Some(
                        chars
                            .iter()
                            .map(|c| character_or_bochner(p, c, &scaled, CHAR_TOL, &mut fallback))
                            .collect::<Result<Vec<_>>>()?,
                    );
                }
                Ok(())
            })?;
            for &n in checkpoints {
                values.push(at[n].clone().expect("checkpoint visited"));
            }
            Ok((values, sum_sq))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut sum_sq = HermitianMatrix::zeros(p.q(), p.field());
    for (_, s) in &per_replica {
        sum_sq = sum_sq.add(s);
    }
    let sigma2 = sigma2_from(p, &sum_sq, replicas * n_max);
    let sigma2_exact = step_law.second_moment().scale(1.0 / (2.0 * p.mu()));
    let cov = ConePoint::from_hermitian_unchecked(sigma2.clone());
    let targets = s_grid.iter().map(|s| fourier_closed(&cov, s)).collect();
    let estimates = (0..checkpoints.len())
        .map(|c| {
            (0..s_grid.len())
                .map(|g| per_replica.iter().map(|(v, _)| v[c][g]).collect::<Welford>().estimate())
                .collect()
        })
        .collect();
    Ok(CltReport {
        checkpoints: checkpoints.to_vec(),
        grid: s_grid.to_vec(),
        sigma2,
        sigma2_exact,
        targets,
        estimates,
    })
}

/// Normalizing sequence a_n of the strong law.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Normalization {
    /// a_n = n.
    Linear,
    /// a_n = n^{1/λ} with λ ∈ (0, 2).
    Power(f64),
}

impl Normalization {
    pub fn a(&self, n: usize) -> f64 {
        match *self {
            Normalization::Linear => n as f64,
            Normalization::Power(lam) => (n as f64).powf(1.0 / lam),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Normalization::Power(lam) if !(lam > 0.0 && lam < 2.0) => {
                Err(Error::InvalidParams(format!("exponent lambda = {lam} must lie in (0, 2)")))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SllnReport {
    pub checkpoints: Vec<usize>,
    /// ‖S_n‖/a_n per replica (rows) and checkpoint (columns).
    pub ratios: Vec<Vec<f64>>,
    pub max_ratio: Vec<f64>,
    pub median_ratio: Vec<f64>,
    /// Fraction of replicas whose last ratio is below their first.
    pub fraction_final_below_first: f64,
    /// Partial sum Σ_{n ≤ n_max} E‖Y‖²/a_n² of the summability condition.
    pub condition_sum: f64,
}

impl SllnReport {
    /// Whether the median ratio decreases strictly from checkpoint to checkpoint.
    pub fn median_decreasing(&self) -> bool {
        self.median_ratio.windows(2).all(|w| w[1] < w[0])
    }
}

/// Geometric checkpoints 1, 2, 4, … up to and including `n_max`.
pub fn geometric_checkpoints(n_max: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut n = 1;
    while n < n_max {
        out.push(n);
        n *= 2;
    }
    out.push(n_max);
    out
}

pub fn slln_experiment(
    p: &HypergroupParams,
    step_law: &StepLaw,
    normalization: Normalization,
    n_max: usize,
    replicas: usize,
    seed: u64,
) -> Result<SllnReport> {
    normalization.validate()?;
    let checkpoints = geometric_checkpoints(n_max);
    let cfg = WalkConfig { params: *p, step_law: step_law.clone(), n_steps: n_max, n_replicas: replicas, seed };
    cfg.validate()?;
    let ratios: Vec<Vec<f64>> = (0..replicas as u64)
        .into_par_iter()
        .map(|i| {
            let mut row = Vec::with_capacity(checkpoints.len());
            run_replica(&cfg, i, |n, s, _| {
                if checkpoints.contains(&n) {
                    row.push(s.norm() / normalization.a(n));
                }
                Ok(())
            })?;
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    let cols = checkpoints.len();
    let column = |c: usize| ratios.iter().map(|r| r[c]).collect::<Vec<f64>>();
    let max_ratio = (0..cols).map(|c| column(c).into_iter().fold(0.0, f64::max)).collect();
    let median_ratio = (0..cols).map(|c| median(&column(c))).collect();
    let below = ratios.iter().filter(|r| r[cols - 1] < r[0]).count();
    let moment = step_law.second_moment().trace_re();
    let condition_sum = (1..=n_max).map(|n| moment / normalization.a(n).powi(2)).sum();
    Ok(SllnReport {
        checkpoints,
        ratios,
        max_ratio,
        median_ratio,
        fraction_final_below_first: below as f64 / replicas as f64,
        condition_sum,
    })
}

#[derive(Clone, Debug)]
pub struct MartingaleReport {
    pub checkpoints: Vec<usize>,
    /// μ̂(s) of the step law.
    pub step_fourier: f64,
    /// Estimates of E[φ_s(S_n)].
    pub estimates: Vec<Estimate>,
    /// μ̂(s)^n.
    pub targets: Vec<f64>,
    /// Largest |z| over the components of mean(S_n² − n·E[Y²]), per checkpoint.
    pub second_moment_z: Vec<f64>,
}

impl MartingaleReport {
    pub fn fourier_passes(&self, k: f64) -> bool {
        self.estimates.iter().zip(&self.targets).all(|(e, &t)| e.agrees_with(t, k))
    }

    pub fn second_moment_passes(&self, k: f64) -> bool {
        self.second_moment_z.iter().all(|&z| z <= k)
    }
}

/// Smallest |μ̂(s)|^n accepted by [`martingale_check`].
pub const MIN_FOURIER_PRODUCT: f64 = 1e-3;

/// Checks E[φ_s(S_n)] = μ̂(s)^n and E[S_n²] = n·E[Y²] at each checkpoint.
pub fn martingale_check(
    p: &HypergroupParams,
    step_law: &StepLaw,
    s: &ConePoint,
    checkpoints: &[usize],
    replicas: usize,
    seed: u64,
) -> Result<MartingaleReport> {
    let n_max = checkpoints.iter().copied().max().unwrap_or(0);
    let step_fourier = step_law.fourier(p, s)?;
    if step_fourier.abs().powi(n_max as i32) < MIN_FOURIER_PRODUCT {
        return Err(Error::FourierTooSmall(step_fourier.abs().powi(n_max as i32)));
    }
    let cfg = WalkConfig { params: *p, step_law: step_law.clone(), n_steps: n_max.max(1), n_replicas: replicas, seed };
    cfg.validate()?;
    let c = Character::new(p, s)?;
    let m2 = step_law.second_moment();
    let q = p.q();
    // Per replica and checkpoint: φ_s(S_n) followed by the components of S_n² − n·E[Y²].
    let rows: Vec<Vec<Vec<f64>>> = (0..replicas as u64)
        .into_par_iter()
        .map(|i| {
            let mut rows = Vec::new();
            if checkpoints.contains(&0) {
                let mut row = vec![1.0];
                row.extend(std::iter::repeat_n(0.0, 2 * q * q));
                rows.push(row);
            }
            let mut fallback = fallback_rng(seed, i);
            run_replica(&cfg, i, |n, sn, _| {
                if checkpoints.contains(&n) {
                    let mut row = vec![character_or_bochner(p, &c, sn, CHAR_TOL, &mut fallback)?];
                    let dev = sn.square().sub(&m2.scale(n as f64));
                    for a in 0..q {
                        for b in 0..q {
                            row.push(dev.get(a, b).re);
                            row.push(dev.get(a, b).im);
                        }
                    }
                    rows.push(row);
                }
                Ok(())
            })?;
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut sorted = checkpoints.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut estimates = Vec::new();
    let mut second_moment_z = Vec::new();
    for (k, _) in sorted.iter().enumerate() {
        let width = rows[0][k].len();
        let stats: Vec<Estimate> =
            (0..width).map(|j| rows.iter().map(|r| r[k][j]).collect::<Welford>().estimate()).collect();
        estimates.push(stats[0]);
        second_moment_z.push(stats[1..].iter().map(|e| e.z_score(0.0)).fold(0.0, f64::max));
    }
    let targets = sorted.iter().map(|&n| step_fourier.powi(n as i32)).collect();
    Ok(MartingaleReport { checkpoints: sorted, step_fourier, estimates, targets, second_moment_z })
}
