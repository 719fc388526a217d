//! Squared Wishart distributions on the cone: samplers, densities, Fourier
//! transforms and the translated density of δ_x ∗ W(s²).

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::algebra::{automorphism_apply, Automorphism, FourierPanel};
use crate::ball::conv_sample;
use crate::cone::{
    psd_sqrt, sqrt_of_hermitian, CMat, ConePoint, Field, HermitianMatrix, HypergroupParams, SquareMatrix,
};
use crate::error::{Error, Result};
use crate::jack::BesselFunction;
use crate::random::gaussian_scalar;
use crate::stats::Welford;

/// The law W(t·scale_sq): image of the standard squared Wishart law under T_s, s = √(t·scale_sq).
#[derive(Clone, Debug)]
pub struct WishartSpec {
    params: HypergroupParams,
    scale_sq: ConePoint,
    t: f64,
}

impl WishartSpec {
    pub fn new(params: HypergroupParams, scale_sq: ConePoint, t: f64) -> Result<Self> {
        if scale_sq.q() != params.q() {
            return Err(Error::Shape(format!("scale is {0}x{0}, expected q = {1}", scale_sq.q(), params.q())));
        }
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidParams(format!("time parameter t = {t} must be nonnegative")));
        }
        Ok(WishartSpec { params, scale_sq, t })
    }

    pub fn standard(params: HypergroupParams) -> Self {
        let id = ConePoint::identity(params.q(), params.field());
        WishartSpec { params, scale_sq: id, t: 1.0 }
    }

    pub fn params(&self) -> &HypergroupParams {
        &self.params
    }

    pub fn scale_sq(&self) -> &ConePoint {
        &self.scale_sq
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Covariance t·scale_sq.
    pub fn covariance(&self) -> ConePoint {
        ConePoint::from_hermitian_unchecked(self.scale_sq.as_hermitian().scale(self.t))
    }

    /// s = √(t·scale_sq).
    pub fn scale(&self) -> Result<ConePoint> {
        psd_sqrt(&self.covariance())
    }

    /// E[r²] = 2μ·t·scale_sq.
    pub fn second_moment(&self) -> HermitianMatrix {
        self.scale_sq.as_hermitian().scale(2.0 * self.params.mu() * self.t)
    }
}

/// Lower triangular T with t_jj² ~ Gamma(shape − (d/2)(j−1), scale 2) and standard
/// normal components below the diagonal, so that TT* is Wishart with the given shape.
pub fn bartlett_factor<R: Rng + ?Sized>(q: usize, field: Field, shape: f64, rng: &mut R) -> Result<SquareMatrix> {
    let half_d = 0.5 * field.d() as f64;
    let mut data = CMat::zeros(q, q);
    for j in 0..q {
        let k = shape - half_d * j as f64;
        let gamma = Gamma::new(k, 2.0)
            .map_err(|_| Error::InvalidParams(format!("Wishart shape parameter {k} must be positive")))?;
        data[(j, j)] = gamma.sample(rng).sqrt().into();
        for i in j + 1..q {
            data[(i, j)] = gaussian_scalar(field, rng);
        }
    }
    Ok(SquareMatrix::wrap(field, data))
}

fn check_shape(p: &HypergroupParams) -> Result<()> {
    let min = 0.5 * p.d() as f64 * (p.q() as f64 - 1.0);
    if !(p.mu() > min) {
        return Err(Error::InvalidParams(format!(
            "Wishart sampling needs mu > (d/2)(q-1) = {min}, got {}",
            p.mu()
        )));
    }
    Ok(())
}

/// Standard squared Wishart variate r = √(TT*) with T from [`bartlett_factor`].
pub fn sample_standard<R: Rng + ?Sized>(p: &HypergroupParams, rng: &mut R) -> Result<ConePoint> {
    check_shape(p)?;
    let t = bartlett_factor(p.q(), p.field(), p.mu(), rng)?;
    sqrt_of_hermitian(&HermitianMatrix::hermitize(t.matmul(&t.adjoint())))
}

/// Squared Wishart variate √(XX*) with X a q×(2μ/d) Gaussian matrix; needs 2μ/d integral.
pub fn sample_gaussian_matrix<R: Rng + ?Sized>(p: &HypergroupParams, rng: &mut R) -> Result<ConePoint> {
    let cols = 2.0 * p.mu() / p.d() as f64;
    if (cols - cols.round()).abs() > 1e-12 || cols < 1.0 {
        return Err(Error::InvalidParams(format!("2mu/d = {cols} is not a positive integer")));
    }
    let cols = cols.round() as usize;
    let x = CMat::from_fn(p.q(), cols, |_, _| gaussian_scalar(p.field(), rng));
    let xx = SquareMatrix::from_data(p.field(), &x * x.adjoint())?;
    sqrt_of_hermitian(&HermitianMatrix::hermitize(xx))
}

pub fn sample_scaled<R: Rng + ?Sized>(spec: &WishartSpec, rng: &mut R) -> Result<ConePoint> {
    let r = sample_standard(&spec.params, rng)?;
    let s = spec.scale()?;
    automorphism_apply(&Automorphism::new(s.as_matrix().clone()), &r)
}

fn regular_scale(spec: &WishartSpec) -> Result<(ConePoint, SquareMatrix)> {
    let s = spec.scale()?;
    if !s.is_invertible() {
        return Err(Error::Singular("density needs a regular scale; use the embedded subhypergroup law".into()));
    }
    let inv = s.data().clone().try_inverse().ok_or_else(|| Error::Singular("scale is not invertible".into()))?;
    let inv = SquareMatrix::wrap(s.field(), inv);
    Ok((s, inv))
}

/// ω_μ-density (2π)^{−qμ} Δ(s)^{−2μ} e^{−tr(s⁻¹r²s⁻¹)/2} of W(s²), s = √(t·scale_sq).
pub fn density(spec: &WishartSpec, r: &ConePoint) -> Result<f64> {
    let p = &spec.params;
    let (s, s_inv) = regular_scale(spec)?;
    let ln_det = s.determinant().re.ln();
    let quad = r.square().congruence(&s_inv).trace_re();
    let q = p.q() as f64;
    Ok((-2.0 * p.mu() * ln_det - q * p.mu() * (2.0 * std::f64::consts::PI).ln() - 0.5 * quad).exp())
}

/// Fourier transform e^{−tr(cov·s²)/2} of W(cov).
pub fn fourier_closed(cov: &ConePoint, s: &HermitianMatrix) -> f64 {
    (-0.5 * cov.as_matrix().inner(s.square().as_matrix())).exp()
}

/// ω_μ-density of δ_x ∗ W(s²) at y:
/// (2π)^{−qμ} Δ(s)^{−2μ} e^{−tr(x′² + y′²)/2} 𝒥_μ(−¼ x′ y′² x′) with x′² = s⁻¹x²s⁻¹, y′² = s⁻¹y²s⁻¹.
pub fn translated_density(
    p: &HypergroupParams,
    x: &ConePoint,
    s: &ConePoint,
    y: &ConePoint,
    tol: f64,
) -> Result<f64> {
    let spec = WishartSpec::new(*p, ConePoint::from_hermitian_unchecked(s.square()), 1.0)?;
    let (s, s_inv) = regular_scale(&spec)?;
    let x2 = x.square().congruence(&s_inv);
    let y2 = y.square().congruence(&s_inv);
    let xp = sqrt_of_hermitian(&x2)?;
    let arg = y2.congruence(xp.as_matrix()).scale(-0.25);
    let bessel = BesselFunction::new(p.q(), p.field(), p.mu())?.eval(&arg, tol)?;
    let q = p.q() as f64;
    let ln = -2.0 * p.mu() * s.determinant().re.ln()
        - q * p.mu() * (2.0 * std::f64::consts::PI).ln()
        - 0.5 * (x2.trace_re() + y2.trace_re());
    Ok(ln.exp() * bessel.value)
}

/// Lebesgue density of ω_μ on (0, ∞) for q = 1: 2π^μ/Γ(μ)·r^{2μ−1}.
pub fn haar_radial_density(p: &HypergroupParams, r: f64) -> Result<f64> {
    if p.q() != 1 {
        return Err(Error::InvalidParams("radial Haar density is only defined for q = 1".into()));
    }
    let mu = p.mu();
    let ln_c = std::f64::consts::LN_2 + mu * std::f64::consts::PI.ln() - statrs::function::gamma::ln_gamma(mu);
    Ok(if r <= 0.0 { 0.0 } else { (ln_c + (2.0 * mu - 1.0) * r.ln()).exp() })
}

/// Draws X ~ W(a2), Y ~ W(b2), Z = X ∗ Y and compares the hypergroup Fourier
/// transform of Z with the closed form of W(a2 + b2) on `s_grid`.
pub fn semigroup_check<R: Rng + ?Sized>(
    p: &HypergroupParams,
    a2: &ConePoint,
    b2: &ConePoint,
    n: usize,
    s_grid: &[ConePoint],
    rng: &mut R,
) -> Result<FourierPanel> {
    let wa = WishartSpec::new(*p, a2.clone(), 1.0)?;
    let wb = WishartSpec::new(*p, b2.clone(), 1.0)?;
    let chars = s_grid.iter().map(|s| crate::jack::Character::new(p, s)).collect::<Result<Vec<_>>>()?;
    let mut acc = vec![Welford::new(); s_grid.len()];
    for _ in 0..n {
        let x = sample_scaled(&wa, rng)?;
        let y = sample_scaled(&wb, rng)?;
        let z = conv_sample(p, &x, &y, rng)?;
        for (w, c) in acc.iter_mut().zip(&chars) {
            w.push(crate::algebra::character_or_bochner(p, c, &z, 1e-10, rng)?);
        }
    }
    let cov = ConePoint::from_hermitian_unchecked(a2.add(b2));
    Ok(FourierPanel {
        grid: s_grid.to_vec(),
        estimates: acc.iter().map(Welford::estimate).collect(),
        targets: s_grid.iter().map(|s| fourier_closed(&cov, s)).collect(),
    })
}

/// Random scale `gg*/q` of rank `k` for tests and checks.
pub fn random_covariance<R: Rng + ?Sized>(q: usize, k: usize, field: Field, rng: &mut R) -> ConePoint {
    if k >= q {
        crate::random::cone_point(q, field, rng)
    } else {
        crate::random::cone_point_of_rank(q, k, field, rng)
    }
}

