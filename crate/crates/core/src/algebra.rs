//! Automorphisms T_a, Fourier–Stieltjes transforms of empirical measures,
//! subhypergroups H_{k,u} and quotient projections.

use nalgebra::SVD;
use rand::Rng;

use crate::ball::{conv_point, phi_bochner, sample_ball, EmpiricalMeasure};
use crate::cone::{sqrt_of_hermitian_scaled, CMat, ConePoint, Field, HermitianMatrix, HypergroupParams, SquareMatrix};
use crate::error::{Error, Result};
use crate::jack::Character;
use crate::seeding::replica_rng;
use crate::stats::{two_sample_z, weighted_estimate, Estimate, Welford};

/// Relative singular-value threshold for rank decisions.
pub const RANK_TOL: f64 = 1e-10;

/// The map T_a(r) = √(a r² a*). An automorphism when a is invertible, a
/// homomorphic projection otherwise.
#[derive(Clone, Debug, PartialEq)]
pub struct Automorphism {
    a: SquareMatrix,
}

impl Automorphism {
    pub fn new(a: SquareMatrix) -> Self {
        Automorphism { a }
    }

    /// Like [`Automorphism::new`] but rejects singular `a`.
    pub fn invertible(a: SquareMatrix) -> Result<Self> {
        if !a.is_invertible() {
            return Err(Error::Singular("automorphisms need an invertible matrix".into()));
        }
        Ok(Automorphism { a })
    }

    pub fn identity(q: usize, field: Field) -> Self {
        Automorphism { a: SquareMatrix::identity(q, field) }
    }

    /// Scalar dilation T_{cI}.
    pub fn dilation(q: usize, field: Field, c: f64) -> Self {
        Automorphism { a: SquareMatrix::identity(q, field).scale(c) }
    }

    pub fn matrix(&self) -> &SquareMatrix {
        &self.a
    }

    pub fn is_invertible(&self) -> bool {
        self.a.is_invertible()
    }

    /// T_{a*}, the map acting dually on characters.
    pub fn adjoint(&self) -> Automorphism {
        Automorphism { a: self.a.adjoint() }
    }

    /// T_a ∘ T_b = T_{ab}.
    pub fn compose(&self, other: &Automorphism) -> Automorphism {
        Automorphism { a: self.a.matmul(&other.a) }
    }

    pub fn apply(&self, r: &ConePoint) -> Result<ConePoint> {
        automorphism_apply(self, r)
    }
}

pub fn automorphism_apply(t: &Automorphism, r: &ConePoint) -> Result<ConePoint> {
    if t.a.q() != r.q() {
        return Err(Error::Shape(format!("map is {0}x{0}, point is {1}x{1}", t.a.q(), r.q())));
    }
    let r2 = r.square();
    let scale = t.a.spectral_norm().powi(2) * r2.norm();
    sqrt_of_hermitian_scaled(&r2.congruence(&t.a), scale)
}

/// Projection T_a for a possibly singular `a`.
pub fn project_quotient(t: &Automorphism, r: &ConePoint) -> Result<ConePoint> {
    automorphism_apply(t, r)
}

/// Ball draws used for a sample point whose character argument is beyond the series cap.
pub const BOCHNER_FALLBACK_DRAWS: usize = 1024;

/// φ_s(x) from the series, or from the Bochner representation with
/// [`BOCHNER_FALLBACK_DRAWS`] ball draws when the series would exceed its degree cap.
/// The fallback is unbiased, so Monte Carlo means over x stay unbiased and their
/// standard errors absorb the extra noise.
pub fn character_or_bochner<R: Rng + ?Sized>(
    p: &HypergroupParams,
    c: &Character,
    x: &ConePoint,
    tol: f64,
    rng: &mut R,
) -> Result<f64> {
    match c.eval(x, tol) {
        Ok(v) => Ok(v.value),
        Err(Error::SeriesCap { .. }) => Ok(phi_bochner(p, c.s(), x, BOCHNER_FALLBACK_DRAWS, rng)?.re.estimate),
        Err(e) => Err(e),
    }
}

/// Stream for fallback draws tied to `seed` and `index`, disjoint from the walk streams.
pub fn fallback_rng(seed: u64, index: u64) -> rand_chacha::ChaCha8Rng {
    replica_rng(seed ^ FALLBACK_STREAM, index)
}

/// Hypergroup Fourier transform of `m` at `s`: weighted mean of φ_s with a standard error.
/// Points beyond the series cap use the Bochner fallback from a stream fixed by
/// `m.seed` and the point index.
pub fn fourier_empirical(p: &HypergroupParams, m: &EmpiricalMeasure, s: &ConePoint) -> Result<Estimate> {
    let c = Character::new(p, s)?;
    let xs = m
        .points
        .iter()
        .enumerate()
        .map(|(i, x)| character_or_bochner(p, &c, x, 1e-12, &mut fallback_rng(m.seed, i as u64)))
        .collect::<Result<Vec<_>>>()?;
    Ok(weighted_estimate(&xs, &m.weights))
}

const FALLBACK_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

/// Fourier transforms estimated on a grid of s, with their targets.
#[derive(Clone, Debug)]
pub struct FourierPanel {
    pub grid: Vec<ConePoint>,
    pub estimates: Vec<Estimate>,
    pub targets: Vec<f64>,
}

impl FourierPanel {
    /// Empirical transform of `m` on `grid`, compared with `target(s)`.
    pub fn of_measure(
        p: &HypergroupParams,
        m: &EmpiricalMeasure,
        grid: &[ConePoint],
        target: impl Fn(&ConePoint) -> f64,
    ) -> Result<Self> {
        let estimates = grid.iter().map(|s| fourier_empirical(p, m, s)).collect::<Result<Vec<_>>>()?;
        Ok(FourierPanel { grid: grid.to_vec(), estimates, targets: grid.iter().map(target).collect() })
    }

    pub fn z_scores(&self) -> Vec<f64> {
        self.estimates.iter().zip(&self.targets).map(|(e, &t)| e.z_score(t)).collect()
    }

    pub fn max_z(&self) -> f64 {
        self.z_scores().into_iter().fold(0.0, f64::max)
    }

    pub fn max_abs_deviation(&self) -> f64 {
        self.estimates.iter().zip(&self.targets).map(|(e, t)| (e.estimate - t).abs()).fold(0.0, f64::max)
    }

    /// Every grid point within `k` standard errors of its target.
    pub fn passes(&self, k: f64) -> bool {
        self.estimates.iter().zip(&self.targets).all(|(e, &t)| e.agrees_with(t, k))
    }
}

/// The subhypergroup H_{k,u} = {u·blockdiag(r, 0)·u* : r ∈ Π_k}.
#[derive(Clone, Debug, PartialEq)]
pub struct Subhypergroup {
    k: usize,
    u: SquareMatrix,
}

impl Subhypergroup {
    pub fn new(k: usize, u: SquareMatrix) -> Result<Self> {
        if k > u.q() {
            return Err(Error::InvalidParams(format!("k = {k} exceeds q = {}", u.q())));
        }
        if !u.is_unitary(1e-12 * u.q() as f64) {
            return Err(Error::InvalidParams("embedding matrix is not unitary".into()));
        }
        Ok(Subhypergroup { k, u })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn u(&self) -> &SquareMatrix {
        &self.u
    }

    pub fn embed(&self, r_small: &ConePoint) -> Result<ConePoint> {
        embed_sub(self, r_small)
    }

    /// u*·z·u, the point in the basis adapted to the subhypergroup.
    fn rotate_in(&self, z: &ConePoint) -> HermitianMatrix {
        z.as_hermitian().congruence(&self.u.adjoint())
    }

    /// Whether z lies in H_{k,u}: rows and columns past k of u*zu vanish within `tol·(1+‖z‖)`.
    pub fn contains(&self, z: &ConePoint, tol: f64) -> bool {
        let w = self.rotate_in(z);
        let q = z.q();
        let bound = tol * (1.0 + z.norm());
        (0..q).all(|i| (0..q).all(|j| (i < self.k && j < self.k) || w.get(i, j).norm() <= bound))
    }

    /// The k×k block of u*zu, the preimage of z under the embedding when z ∈ H_{k,u}.
    pub fn extract(&self, z: &ConePoint) -> Result<ConePoint> {
        let w = self.rotate_in(z);
        ConePoint::from_matrix(w.leading_block(self.k)?)
    }
}

pub fn embed_sub(h: &Subhypergroup, r_small: &ConePoint) -> Result<ConePoint> {
    if r_small.q() != h.k {
        return Err(Error::Shape(format!("expected a {0}x{0} point, got {1}x{1}", h.k, r_small.q())));
    }
    let q = h.u.q();
    let field = h.u.field().join(r_small.field());
    let big = r_small.promote(field).embed_leading(q)?;
    let u = h.u.promote(field);
    ConePoint::from_matrix(u.matmul(&big).matmul(&u.adjoint()))
}

/// Kernel {r : T_a(r) = 0} of the projection T_a, as H_{q−k, w} where k = rank a and
/// the first q − k columns of w span the null space of a.
pub fn quotient_kernel(a: &SquareMatrix) -> Result<Subhypergroup> {
    let q = a.q();
    let svd = SVD::new(a.data().clone(), false, true);
    let v_t = svd.v_t.ok_or_else(|| Error::Singular("SVD did not return right singular vectors".into()))?;
    let v = v_t.adjoint();
    let max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let (mut null, mut range): (Vec<usize>, Vec<usize>) = (Vec::new(), Vec::new());
    for (i, &sv) in svd.singular_values.iter().enumerate() {
        if sv <= RANK_TOL * max || max == 0.0 {
            null.push(i);
        } else {
            range.push(i);
        }
    }
    let order: Vec<usize> = null.iter().chain(&range).copied().collect();
    let w = CMat::from_fn(q, q, |i, j| v[(i, order[j])]);
    Subhypergroup::new(null.len(), SquareMatrix::wrap(a.field(), w))
}

/// Complex conjugation τ(x) = x̄ = xᵀ on Hermitian matrices.
pub fn transpose_map(x: &ConePoint) -> ConePoint {
    x.conj()
}

/// Paired comparison of two laws on the cone through a panel of statistics:
/// tr z, tr z², log Δ(z + εI) and φ_s(z) over an s-grid.
#[derive(Clone, Debug)]
pub struct LawComparison {
    pub names: Vec<String>,
    pub first: Vec<Estimate>,
    pub second: Vec<Estimate>,
    /// Mean difference of each statistic with its standard error.
    pub differences: Vec<Estimate>,
}

impl LawComparison {
    pub fn z_scores(&self) -> Vec<f64> {
        self.differences.iter().map(|d| d.z_score(0.0)).collect()
    }

    pub fn max_z(&self) -> f64 {
        self.z_scores().into_iter().fold(0.0, f64::max)
    }

    pub fn passes(&self, k: f64) -> bool {
        self.differences.iter().all(|d| d.agrees_with(0.0, k))
    }

    /// Two-sample z scores between the marginal estimates (ignores pairing).
    pub fn unpaired_z(&self) -> Vec<f64> {
        self.first.iter().zip(&self.second).map(|(a, b)| two_sample_z(a, b)).collect()
    }
}

/// Shift used in the log-determinant statistic.
pub const LOG_DET_SHIFT: f64 = 1e-2;

/// Statistic names matching [`panel_statistics`].
pub fn panel_names(n_chars: usize) -> Vec<String> {
    let mut names = vec!["tr".to_string(), "tr_sq".to_string(), "log_det".to_string()];
    names.extend((0..n_chars).map(|i| format!("phi_{i}")));
    names
}

pub fn panel_statistics(z: &ConePoint, chars: &[Character]) -> Result<Vec<f64>> {
    let shifted = z.add(&HermitianMatrix::identity(z.q(), z.field()).scale(LOG_DET_SHIFT));
    let eig = shifted.eigenvalues()?;
    let mut out = vec![z.trace_re(), z.square().trace_re(), eig.iter().map(|x| x.ln()).sum()];
    for c in chars {
        out.push(c.eval(z, 1e-10)?.value);
    }
    Ok(out)
}

/// Compare paired samples (a_i, b_i) of two laws on the statistic panel.
pub fn compare_paired(pairs: &[(ConePoint, ConePoint)], chars: &[Character]) -> Result<LawComparison> {
    let names = panel_names(chars.len());
    let m = names.len();
    let (mut fa, mut fb, mut fd) = (vec![Welford::new(); m], vec![Welford::new(); m], vec![Welford::new(); m]);
    for (a, b) in pairs {
        let sa = panel_statistics(a, chars)?;
        let sb = panel_statistics(b, chars)?;
        for i in 0..m {
            fa[i].push(sa[i]);
            fb[i].push(sb[i]);
            fd[i].push(sa[i] - sb[i]);
        }
    }
    Ok(LawComparison {
        names,
        first: fa.iter().map(Welford::estimate).collect(),
        second: fb.iter().map(Welford::estimate).collect(),
        differences: fd.iter().map(Welford::estimate).collect(),
    })
}

/// Compare independent samples of two laws on the statistic panel.
pub fn compare_independent(a: &[ConePoint], b: &[ConePoint], chars: &[Character]) -> Result<LawComparison> {
    let names = panel_names(chars.len());
    let m = names.len();
    let collect = |xs: &[ConePoint]| -> Result<Vec<Estimate>> {
        let mut acc = vec![Welford::new(); m];
        for x in xs {
            for (w, v) in acc.iter_mut().zip(panel_statistics(x, chars)?) {
                w.push(v);
            }
        }
        Ok(acc.iter().map(Welford::estimate).collect())
    };
    let first = collect(a)?;
    let second = collect(b)?;
    let differences = first
        .iter()
        .zip(&second)
        .map(|(x, y)| Estimate { estimate: x.estimate - y.estimate, stderr: x.stderr.hypot(y.stderr) })
        .collect();
    Ok(LawComparison { names, first, second, differences })
}

/// Checks that τ = complex conjugation preserves the convolution: draws with a common
/// ball point v, compares τ(x ∗_v y) with τx ∗_v τy. Because τ(x ∗_v y) = τx ∗_{v̄} τy
/// and v̄ has the same law as v, the paired differences have mean zero.
pub fn transpose_automorphism_check<R: Rng + ?Sized>(
    p: &HypergroupParams,
    x: &ConePoint,
    y: &ConePoint,
    s_grid: &[ConePoint],
    n: usize,
    rng: &mut R,
) -> Result<LawComparison> {
    if p.field() != Field::Complex {
        return Err(Error::InvalidParams("the transpose automorphism check needs d = 2".into()));
    }
    let chars = s_grid.iter().map(|s| Character::new(p, s)).collect::<Result<Vec<_>>>()?;
    let (tx, ty) = (transpose_map(x), transpose_map(y));
    let mut pairs = Vec::with_capacity(n);
    for _ in 0..n {
        let v = sample_ball(p, rng)?;
        pairs.push((transpose_map(&conv_point(x, y, &v)?), conv_point(&tx, &ty, &v)?));
    }
    compare_paired(&pairs, &chars)
}

/// Paired check of T_a(x ∗ y) against T_a x ∗ T_a y with common ball points.
pub fn automorphism_covariance_check<R: Rng + ?Sized>(
    p: &HypergroupParams,
    t: &Automorphism,
    x: &ConePoint,
    y: &ConePoint,
    s_grid: &[ConePoint],
    n: usize,
    rng: &mut R,
) -> Result<LawComparison> {
    let chars = s_grid.iter().map(|s| Character::new(p, s)).collect::<Result<Vec<_>>>()?;
    let (tx, ty) = (t.apply(x)?, t.apply(y)?);
    let mut pairs = Vec::with_capacity(n);
    for _ in 0..n {
        let v = sample_ball(p, rng)?;
        pairs.push((t.apply(&conv_point(x, y, &v)?)?, conv_point(&tx, &ty, &v)?));
    }
    compare_paired(&pairs, &chars)
}

/// Block-diagonal projector diag(1, …, 1, 0, …, 0) with `k` ones.
pub fn leading_projector(q: usize, k: usize, field: Field) -> SquareMatrix {
    let diag: Vec<f64> = (0..q).map(|i| if i < k { 1.0 } else { 0.0 }).collect();
    SquareMatrix::diagonal(field, &diag)
}

