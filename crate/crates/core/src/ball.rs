//! The probability measure on the matrix ball D_q with density proportional to
//! Δ(I − vv*)^{μ−ρ}, and the convolution δ_r ∗ δ_s built from it.

use std::f64::consts::PI;
use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use nalgebra::Cholesky;
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::cone::{
    ln_gamma_cone, loewner_leq, sqrt_of_hermitian, CMat, ConePoint, Field, HermitianMatrix, HypergroupParams,
    SquareMatrix,
};
use crate::error::{Error, Result};
use crate::random::gaussian;
use crate::stats::{weighted_estimate, Estimate, Welford};
use crate::wishart::bartlett_factor;

/// A matrix v with vv* < I.
#[derive(Clone, Debug, PartialEq)]
pub struct BallPoint(SquareMatrix);

impl BallPoint {
    pub fn new(v: SquareMatrix) -> Result<Self> {
        let norm = v.spectral_norm();
        if !(norm < 1.0) {
            return Err(Error::InvalidParams(format!("spectral norm {norm} of ball point is not below 1")));
        }
        Ok(BallPoint(v))
    }

    pub fn as_matrix(&self) -> &SquareMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> SquareMatrix {
        self.0
    }
}

/// Unnormalized ball density Δ(I − vv*)^{μ−ρ}, zero outside the open ball.
pub fn ball_weight(p: &HypergroupParams, v: &SquareMatrix) -> f64 {
    let q = p.q();
    let gram = HermitianMatrix::hermitize(SquareMatrix::identity(q, p.field()).sub(&v.matmul(&v.adjoint())));
    let Ok(eig) = gram.eigenvalues() else { return 0.0 };
    if eig[0] <= 0.0 {
        return 0.0;
    }
    let ln_det: f64 = eig.iter().map(|x| x.ln()).sum();
    ((p.mu() - p.rho()) * ln_det).exp()
}

/// Exact draw from the ball measure.
///
/// With B = TT* Wishart of shape μ − dq/2 and Z a q×q standard Gaussian matrix,
/// v = L⁻¹Z where LL* = B + ZZ* has density ∝ Δ(I − vv*)^{μ−ρ} on D_q. This
/// covers the whole range μ > ρ − 1 without weights.
pub fn sample_ball<R: Rng + ?Sized>(p: &HypergroupParams, rng: &mut R) -> Result<BallPoint> {
    p.ensure_hypergroup()?;
    let (q, field) = (p.q(), p.field());
    let shape = p.mu() - 0.5 * (p.d() * q) as f64;
    let t = bartlett_factor(q, field, shape, rng)?;
    let z = gaussian(q, field, rng).into_data();
    let t = t.into_data();
    let mut s: CMat = &t * t.adjoint() + &z * z.adjoint();
    // Exact symmetry helps the factorization.
    for i in 0..q {
        for j in 0..i {
            let m = 0.5 * (s[(i, j)] + s[(j, i)].conj());
            s[(i, j)] = m;
            s[(j, i)] = m.conj();
        }
        s[(i, i)] = Complex64::new(s[(i, i)].re, 0.0);
    }
    let chol = Cholesky::new(s).ok_or_else(|| Error::Singular("ball sampler Gram matrix".into()))?;
    let v = chol
        .l_dirty()
        .solve_lower_triangular(&z)
        .ok_or_else(|| Error::Singular("ball sampler triangular solve".into()))?;
    Ok(BallPoint(SquareMatrix::wrap(field, v)))
}

/// Rejection sampler with uniform proposals on [−1, 1]^{dq²}; needs μ ≥ ρ so the
/// density is bounded by its value 1 at v = 0.
pub fn sample_ball_rejection<R: Rng + ?Sized>(
    p: &HypergroupParams,
    budget: usize,
    rng: &mut R,
) -> Result<BallPoint> {
    if p.mu() < p.rho() {
        return Err(Error::InvalidParams(format!(
            "rejection sampling needs a bounded density, mu = {} < rho = {}",
            p.mu(),
            p.rho()
        )));
    }
    for _ in 0..budget {
        let v = uniform_box(p.q(), p.field(), rng);
        let w = ball_weight(p, &v);
        if w > 0.0 && rng.random::<f64>() < w {
            return Ok(BallPoint(v));
        }
    }
    Err(Error::RejectionBudget { budget, acceptance: 1.0 / budget as f64 })
}

fn uniform_box<R: Rng + ?Sized>(q: usize, field: Field, rng: &mut R) -> SquareMatrix {
    let data = CMat::from_fn(q, q, |_, _| {
        let re = rng.random_range(-1.0..1.0);
        let im = if field == Field::Complex { rng.random_range(-1.0..1.0) } else { 0.0 };
        Complex64::new(re, im)
    });
    SquareMatrix::wrap(field, data)
}

/// Monte Carlo estimate of κ_μ = ∫_D Δ(I − vv*)^{μ−ρ} dv from uniform proposals
/// on the box [−1, 1]^{dq²} (volume 2^{dq²}).
pub fn kappa<R: Rng + ?Sized>(p: &HypergroupParams, n_samples: usize, rng: &mut R) -> Estimate {
    let dim = (p.d() * p.q() * p.q()) as i32;
    let volume = 2f64.powi(dim);
    let w: Welford = (0..n_samples).map(|_| ball_weight(p, &uniform_box(p.q(), p.field(), rng))).collect();
    let e = w.estimate();
    Estimate { estimate: volume * e.estimate, stderr: volume * e.stderr }
}

/// κ_μ = π^{dq²/2} Γ_Ω(μ − dq/2) / Γ_Ω(μ).
pub fn kappa_closed_form(p: &HypergroupParams) -> Result<f64> {
    p.ensure_hypergroup()?;
    let dq = (p.d() * p.q()) as f64;
    let ln = 0.5 * dq * p.q() as f64 * PI.ln() + ln_gamma_cone(p, p.mu() - 0.5 * dq)? - ln_gamma_cone(p, p.mu())?;
    Ok(ln.exp())
}

/// κ_μ for q = 1 by adaptive double-exponential quadrature in the radial variable.
pub fn kappa_quadrature(p: &HypergroupParams) -> Result<f64> {
    if p.q() != 1 {
        return Err(Error::InvalidParams("quadrature of the ball integral is only offered for q = 1".into()));
    }
    p.ensure_hypergroup()?;
    let e = p.mu() - p.rho();
    // In x = 1 − |v| the integrand is x^e·g(x) with g smooth; y = x^{e+1} absorbs the
    // boundary singularity: ∫_0^1 x^e g(x) dx = (e+1)^{−1} ∫_0^1 g(y^{1/(e+1)}) dy.
    let k = 1.0 / (e + 1.0);
    let reduced = |g: &dyn Fn(f64) -> f64| {
        k * quadrature::double_exponential::integrate(|y: f64| g(y.powf(k)), 0.0, 1.0, 1e-13).integral
    };
    let out = match p.field() {
        Field::Real => 2.0 * reduced(&|x: f64| (2.0 - x).powf(e)),
        Field::Complex => 2.0 * PI * reduced(&|x: f64| (1.0 - x) * (2.0 - x).powf(e)),
    };
    Ok(out)
}

/// Bochner-type estimate of φ_s(r) = E_v[e^{−i(rv|s)}] for v from the ball measure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BochnerEstimate {
    pub re: Estimate,
    /// Imaginary part of the average; the exact value is zero.
    pub im: Estimate,
}

pub fn phi_bochner<R: Rng + ?Sized>(
    p: &HypergroupParams,
    s: &ConePoint,
    r: &ConePoint,
    n_samples: usize,
    rng: &mut R,
) -> Result<BochnerEstimate> {
    check_q(p, r)?;
    check_q(p, s)?;
    if s.norm() == 0.0 || r.norm() == 0.0 {
        return Ok(BochnerEstimate { re: Estimate::exact(1.0), im: Estimate::exact(0.0) });
    }
    // (rv|s) = ℜ tr((rv)* s) = ℜ tr(v* · rs).
    let rs = r.matmul(s.as_matrix());
    let (mut re, mut im) = (Welford::new(), Welford::new());
    for _ in 0..n_samples {
        let v = sample_ball(p, rng)?;
        let phase = v.as_matrix().inner(&rs);
        re.push(phase.cos());
        im.push(-phase.sin());
    }
    Ok(BochnerEstimate { re: re.estimate(), im: im.estimate() })
}

/// Process-wide tally of the norm bound ‖z‖ ≤ ‖r‖ + ‖s‖ over every convolution
/// point computed, so a harness can audit all samples drawn during a run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct NormAudit {
    pub samples: u64,
    pub violations: u64,
    /// Largest ‖z‖ − ‖r‖ − ‖s‖ seen (negative when every sample is strictly inside).
    pub worst_excess: f64,
}

/// Slack allowed in the audited bound.
pub const NORM_AUDIT_TOL: f64 = 1e-9;

static AUDIT_SAMPLES: AtomicU64 = AtomicU64::new(0);
static AUDIT_VIOLATIONS: AtomicU64 = AtomicU64::new(0);
// f64 bits of the worst excess, stored shifted so that the integer order matches the float order.
static AUDIT_WORST: AtomicU64 = AtomicU64::new(0);

fn order_key(x: f64) -> u64 {
    let b = x.to_bits();
    if b >> 63 == 1 { !b } else { b | 1 << 63 }
}

fn from_order_key(k: u64) -> f64 {
    if k >> 63 == 1 { f64::from_bits(k & !(1 << 63)) } else { f64::from_bits(!k) }
}

fn audit(r: &ConePoint, s: &ConePoint, z: &ConePoint) {
    let excess = z.norm() - r.norm() - s.norm();
    AUDIT_SAMPLES.fetch_add(1, Ordering::Relaxed);
    if excess > NORM_AUDIT_TOL {
        AUDIT_VIOLATIONS.fetch_add(1, Ordering::Relaxed);
    }
    AUDIT_WORST.fetch_max(order_key(excess), Ordering::Relaxed);
}

pub fn norm_audit() -> NormAudit {
    let worst = AUDIT_WORST.load(Ordering::Relaxed);
    NormAudit {
        samples: AUDIT_SAMPLES.load(Ordering::Relaxed),
        violations: AUDIT_VIOLATIONS.load(Ordering::Relaxed),
        worst_excess: if worst == 0 { f64::NEG_INFINITY } else { from_order_key(worst) },
    }
}

pub fn reset_norm_audit() {
    AUDIT_SAMPLES.store(0, Ordering::Relaxed);
    AUDIT_VIOLATIONS.store(0, Ordering::Relaxed);
    AUDIT_WORST.store(0, Ordering::Relaxed);
}

/// The convolution point √(r² + s² + svr + rv*s) for a given ball point v.
pub fn conv_point(r: &ConePoint, s: &ConePoint, v: &BallPoint) -> Result<ConePoint> {
    let svr = s.matmul(v.as_matrix()).matmul(r.as_matrix());
    let inner = r.square().add(&s.square()).add(&HermitianMatrix::hermitize(svr.add(&svr.adjoint())));
    let z = sqrt_of_hermitian(&inner)?;
    audit(r, s, &z);
    Ok(z)
}

/// One draw from δ_r ∗_μ δ_s.
pub fn conv_sample<R: Rng + ?Sized>(
    p: &HypergroupParams,
    r: &ConePoint,
    s: &ConePoint,
    rng: &mut R,
) -> Result<ConePoint> {
    check_q(p, r)?;
    check_q(p, s)?;
    if r.norm() == 0.0 {
        return Ok(s.clone());
    }
    if s.norm() == 0.0 {
        return Ok(r.clone());
    }
    let v = sample_ball(p, rng)?;
    conv_point(r, s, &v)
}

/// Monte Carlo mean of `f` under δ_r ∗_μ δ_s.
pub fn conv_expect<R: Rng + ?Sized>(
    p: &HypergroupParams,
    f: impl Fn(&ConePoint) -> Result<f64>,
    r: &ConePoint,
    s: &ConePoint,
    n_samples: usize,
    rng: &mut R,
) -> Result<Estimate> {
    let mut w = Welford::new();
    for _ in 0..n_samples {
        w.push(f(&conv_sample(p, r, s, rng)?)?);
    }
    Ok(w.estimate())
}

/// Samples of δ_r ∗_μ δ_s as an equally weighted empirical measure.
pub fn conv_measure<R: Rng + ?Sized>(
    p: &HypergroupParams,
    r: &ConePoint,
    s: &ConePoint,
    n_samples: usize,
    seed: u64,
    rng: &mut R,
) -> Result<EmpiricalMeasure> {
    let points = (0..n_samples).map(|_| conv_sample(p, r, s, rng)).collect::<Result<Vec<_>>>()?;
    EmpiricalMeasure::uniform(*p, points, seed)
}

/// Whether (1 − c)r ≤ z ≤ (1 + c)r in the Loewner order, up to `tol`.
pub fn support_window_check(
    _p: &HypergroupParams,
    r: &ConePoint,
    c: f64,
    z: &ConePoint,
    tol: f64,
) -> Result<bool> {
    let lo = r.as_hermitian().scale(1.0 - c);
    let hi = r.as_hermitian().scale(1.0 + c);
    Ok(loewner_leq(&lo, z, tol)? && loewner_leq(z, &hi, tol)?)
}

fn check_q(p: &HypergroupParams, x: &SquareMatrix) -> Result<()> {
    if x.q() != p.q() {
        return Err(Error::Shape(format!("argument is {0}x{0}, expected q = {1}", x.q(), p.q())));
    }
    Ok(())
}

/// Weighted sample of points in the cone, with provenance.
#[derive(Clone, Debug)]
pub struct EmpiricalMeasure {
    pub params: HypergroupParams,
    pub points: Vec<ConePoint>,
    pub weights: Vec<f64>,
    pub seed: u64,
    /// Number of proposals drawn to produce the points.
    pub n_raw: u64,
}

impl EmpiricalMeasure {
    pub fn uniform(params: HypergroupParams, points: Vec<ConePoint>, seed: u64) -> Result<Self> {
        let n = points.len();
        Self::weighted(params, points, vec![1.0; n], seed, n as u64)
    }

    /// Weights are normalized to sum to one.
    pub fn weighted(
        params: HypergroupParams,
        points: Vec<ConePoint>,
        weights: Vec<f64>,
        seed: u64,
        n_raw: u64,
    ) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::Shape(format!("{} points but {} weights", points.len(), weights.len())));
        }
        if points.is_empty() {
            return Err(Error::InvalidParams("empirical measure needs at least one point".into()));
        }
        if let Some(x) = points.iter().find(|x| x.q() != params.q()) {
            return Err(Error::Shape(format!("point is {0}x{0}, expected q = {1}", x.q(), params.q())));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidParams("weights must be finite and nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidParams("weights sum to zero".into()));
        }
        let weights = weights.into_iter().map(|w| w / total).collect();
        Ok(EmpiricalMeasure { params, points, weights, seed, n_raw })
    }

    pub fn point_mass(params: HypergroupParams, x: ConePoint) -> Result<Self> {
        Self::uniform(params, vec![x], 0)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Weighted mean of `f` with a standard error.
    pub fn expect(&self, f: impl Fn(&ConePoint) -> Result<f64>) -> Result<Estimate> {
        let xs = self.points.iter().map(f).collect::<Result<Vec<_>>>()?;
        Ok(weighted_estimate(&xs, &self.weights))
    }

    /// Image under a map of the cone, keeping weights and provenance.
    pub fn map(&self, f: impl Fn(&ConePoint) -> Result<ConePoint>) -> Result<Self> {
        let points = self.points.iter().map(f).collect::<Result<Vec<_>>>()?;
        Ok(EmpiricalMeasure { points, ..self.clone() })
    }

    /// Draw one point according to the weights.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &ConePoint {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (x, w) in self.points.iter().zip(&self.weights) {
            acc += w;
            if u < acc {
                return x;
            }
        }
        self.points.last().expect("nonempty")
    }

    fn column_names(&self) -> Vec<String> {
        let q = self.params.q();
        let mut out = Vec::new();
        for i in 1..=q {
            for j in 1..=q {
                match self.params.field() {
                    Field::Real => out.push(format!("x{i}_{j}")),
                    Field::Complex => {
                        out.push(format!("x{i}_{j}_re"));
                        out.push(format!("x{i}_{j}_im"));
                    }
                }
            }
        }
        out.push("weight".into());
        out
    }

    /// CSV with a `#` metadata line (q, d, mu, seed, n_raw, version), a header row and
    /// one row per point: entries row-major with d components each, then the weight.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut out = out;
        writeln!(
            out,
            "# q={},d={},mu={},seed={},n_raw={},version={}",
            self.params.q(),
            self.params.d(),
            self.params.mu(),
            self.seed,
            self.n_raw,
            env!("CARGO_PKG_VERSION")
        )?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.column_names()).map_err(csv_error)?;
        for (x, weight) in self.points.iter().zip(&self.weights) {
            let mut row = Vec::new();
            for z in x.data().transpose().iter() {
                row.push(format!("{:e}", z.re));
                if self.params.field() == Field::Complex {
                    row.push(format!("{:e}", z.im));
                }
            }
            row.push(format!("{weight:e}"));
            w.write_record(&row).map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: BufRead>(mut input: R) -> Result<Self> {
        let mut first = String::new();
        input.read_line(&mut first)?;
        let meta = parse_metadata(&first)?;
        let params = HypergroupParams::wishart_shape(meta.q, meta.d, meta.mu)?;
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let d = params.d();
        let q = params.q();
        let (mut points, mut weights) = (Vec::new(), Vec::new());
        for (k, rec) in reader.records().enumerate() {
            let line = k + 3;
            let rec = rec.map_err(|e| Error::Parse { line, message: e.to_string() })?;
            if rec.len() != d * q * q + 1 {
                return Err(Error::Parse { line, message: format!("expected {} fields, got {}", d * q * q + 1, rec.len()) });
            }
            let vals = rec
                .iter()
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse { line, message: e.to_string() })?;
            let data = CMat::from_fn(q, q, |i, j| {
                let at = (i * q + j) * d;
                Complex64::new(vals[at], if d == 2 { vals[at + 1] } else { 0.0 })
            });
            let m = SquareMatrix::from_data(params.field(), data)
                .map_err(|e| Error::Parse { line, message: e.to_string() })?;
            points.push(ConePoint::from_matrix(m).map_err(|e| Error::Parse { line, message: e.to_string() })?);
            weights.push(vals[d * q * q]);
        }
        let n_raw = meta.n_raw.unwrap_or(points.len() as u64);
        Self::weighted(params, points, weights, meta.seed, n_raw)
    }

    pub fn write_csv_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_csv(f)
    }

    pub fn read_csv_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

struct Metadata {
    q: usize,
    d: usize,
    mu: f64,
    seed: u64,
    n_raw: Option<u64>,
}

fn parse_metadata(line: &str) -> Result<Metadata> {
    let err = |message: String| Error::Parse { line: 1, message };
    let body = line.trim().strip_prefix('#').ok_or_else(|| err("missing '#' metadata line".into()))?;
    let (mut q, mut d, mut mu, mut seed, mut n_raw) = (None, None, None, 0, None);
    for item in body.split(',') {
        let (k, v) = item.split_once('=').ok_or_else(|| err(format!("malformed metadata item '{item}'")))?;
        let v = v.trim();
        let bad = |e: &dyn std::fmt::Display| err(format!("bad value for {}: {e}", k.trim()));
        match k.trim() {
            "q" => q = Some(v.parse().map_err(|e| bad(&e))?),
            "d" => d = Some(v.parse().map_err(|e| bad(&e))?),
            "mu" => mu = Some(v.parse().map_err(|e| bad(&e))?),
            "seed" => seed = v.parse().map_err(|e| bad(&e))?,
            "n_raw" => n_raw = Some(v.parse().map_err(|e| bad(&e))?),
            _ => {}
        }
    }
    Ok(Metadata {
        q: q.ok_or_else(|| err("metadata lacks q".into()))?,
        d: d.ok_or_else(|| err("metadata lacks d".into()))?,
        mu: mu.ok_or_else(|| err("metadata lacks mu".into()))?,
        seed,
        n_raw,
    })
}
