use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock, RwLock};

use statrs::function::gamma::ln_gamma;

use super::partition::Partition;
use super::table::{monomial_exponents, with_table};
use crate::cone::{eigenvalues, ConePoint, Field, HermitianMatrix, HypergroupParams};
use crate::error::{Error, Result};

/// Highest degree the series is ever expanded to.
pub const MAX_DEGREE: usize = 60;

/// Result of a truncated series evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BesselEval {
    pub value: f64,
    /// Rigorous bound on the absolute value of the dropped tail.
    pub truncation_bound: f64,
    pub degree_used: u32,
}

/// One degree of 𝒥_μ as Σ_κ A_κ m_κ(ξ).
struct SeriesLayer {
    coef: Vec<f64>,
    /// Flattened exponent vectors (length q each) of the monomials, per κ.
    exps: Vec<Vec<u8>>,
    ln_min_pochhammer: f64,
}

struct Series {
    q: usize,
    d: usize,
    mu: f64,
    layers: Vec<SeriesLayer>,
}

impl Series {
    fn ensure(&mut self, k: usize) {
        if self.layers.len() > k {
            return;
        }
        let (q, mu, half_d) = (self.q, self.mu, 0.5 * self.d as f64);
        let alpha = 2.0 / self.d as f64;
        let start = self.layers.len();
        let new_layers: Vec<SeriesLayer> = with_table(q, alpha, k, |table| {
            (start..=k)
                .map(|deg| {
                    let layer = table.layer(deg);
                    let ln_fact = ln_gamma(deg as f64 + 1.0);
                    let sign = if deg % 2 == 0 { 1.0 } else { -1.0 };
                    let ln_poch: Vec<f64> = layer
                        .parts
                        .iter()
                        .map(|lam| {
                            lam.parts()
                                .iter()
                                .enumerate()
                                .map(|(j, &part)| {
                                    let base = mu - half_d * j as f64;
                                    ln_gamma(base + part as f64) - ln_gamma(base)
                                })
                                .sum()
                        })
                        .collect();
                    let n = layer.len();
                    let weights: Vec<f64> =
                        (0..n).map(|a| (layer.ln_u[a] - ln_poch[a] - ln_fact).exp()).collect();
                    let coef = (0..n)
                        .map(|b| sign * (0..=b).map(|a| weights[a] * layer.p(a, b)).sum::<f64>())
                        .collect();
                    let exps = layer
                        .parts
                        .iter()
                        .map(|kappa| {
                            monomial_exponents(kappa, q).into_iter().flatten().map(|e| e as u8).collect()
                        })
                        .collect();
                    let ln_min_pochhammer = ln_poch.iter().copied().fold(f64::INFINITY, f64::min);
                    SeriesLayer { coef, exps, ln_min_pochhammer }
                })
                .collect()
        });
        self.layers.extend(new_layers);
    }
}

fn shared_series(q: usize, d: usize, mu: f64) -> Arc<RwLock<Series>> {
    type Key = (usize, usize, u64);
    static CACHE: OnceLock<Mutex<HashMap<Key, Arc<RwLock<Series>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard
        .entry((q, d, mu.to_bits()))
        .or_insert_with(|| Arc::new(RwLock::new(Series { q, d, mu, layers: Vec::new() })))
        .clone()
}

/// The Bessel function 𝒥_μ on Hermitian q×q matrices over a field,
/// 𝒥_μ(x) = Σ_λ (−1)^{|λ|} C_λ(x) / ((μ)_λ |λ|!).
///
/// Coefficient tables are shared process-wide, so handles are cheap to create.
#[derive(Clone)]
pub struct BesselFunction {
    q: usize,
    field: Field,
    mu: f64,
    /// μ − (d/2)(q − 1), the smallest Pochhammer base.
    a_min: f64,
    series: Arc<RwLock<Series>>,
}

impl std::fmt::Debug for BesselFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BesselFunction").field("q", &self.q).field("field", &self.field).field("mu", &self.mu).finish()
    }
}

impl BesselFunction {
    pub fn new(q: usize, field: Field, mu: f64) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidParams("q must be positive".into()));
        }
        let a_min = mu - 0.5 * field.d() as f64 * (q as f64 - 1.0);
        if !(a_min > 0.0) || !mu.is_finite() {
            return Err(Error::InvalidParams(format!(
                "Bessel index mu = {mu} must exceed (d/2)(q-1) = {}",
                mu - a_min
            )));
        }
        Ok(BesselFunction { q, field, mu, a_min, series: shared_series(q, field.d(), mu) })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn eval(&self, x: &HermitianMatrix, tol: f64) -> Result<BesselEval> {
        self.check_shape(x)?;
        self.eval_eigenvalues(&eigenvalues(x)?, tol)
    }

    /// Evaluate from the eigenvalues ξ of the argument.
    pub fn eval_eigenvalues(&self, xi: &[f64], tol: f64) -> Result<BesselEval> {
        if xi.len() != self.q {
            return Err(Error::Shape(format!("expected {} eigenvalues, got {}", self.q, xi.len())));
        }
        if !(tol > 0.0) {
            return Err(Error::InvalidParams(format!("tolerance {tol} must be positive")));
        }
        let total: f64 = xi.iter().map(|x| x.abs()).sum();
        if total == 0.0 {
            return Ok(BesselEval { value: 1.0, truncation_bound: 0.0, degree_used: 0 });
        }
        let degree = match (0..=MAX_DEGREE).find(|&k| self.tail_bound(total, k) <= tol) {
            Some(k) => k,
            None => {
                let needed = (MAX_DEGREE + 1..100_000).find(|&k| self.tail_bound(total, k) <= tol).unwrap_or(100_000);
                return Err(Error::SeriesCap { needed, cap: MAX_DEGREE });
            }
        };
        self.partial_sum(xi, degree)
    }

    /// Series truncated after degree `degree`, with the bound on what was dropped.
    pub fn partial_sum(&self, xi: &[f64], degree: usize) -> Result<BesselEval> {
        if xi.len() != self.q {
            return Err(Error::Shape(format!("expected {} eigenvalues, got {}", self.q, xi.len())));
        }
        if degree > MAX_DEGREE {
            return Err(Error::SeriesCap { needed: degree, cap: MAX_DEGREE });
        }
        self.ensure(degree);
        let q = self.q;
        let stride = degree + 1;
        let mut pw = vec![1.0; q * stride];
        for (i, &x) in xi.iter().enumerate() {
            for e in 1..stride {
                pw[i * stride + e] = pw[i * stride + e - 1] * x;
            }
        }
        let series = self.series.read().unwrap_or_else(|e| e.into_inner());
        let mut value = 0.0;
        for layer in &series.layers[..=degree] {
            let mut term = 0.0;
            for (coef, exps) in layer.coef.iter().zip(&layer.exps) {
                let m: f64 = exps
                    .chunks_exact(q)
                    .map(|e| e.iter().enumerate().map(|(i, &k)| pw[i * stride + k as usize]).product::<f64>())
                    .sum();
                term += coef * m;
            }
            value += term;
        }
        drop(series);
        let total: f64 = xi.iter().map(|x| x.abs()).sum();
        Ok(BesselEval { value, truncation_bound: self.tail_bound(total, degree), degree_used: degree as u32 })
    }

    fn ensure(&self, degree: usize) {
        {
            let s = self.series.read().unwrap_or_else(|e| e.into_inner());
            if s.layers.len() > degree {
                return;
            }
        }
        self.series.write().unwrap_or_else(|e| e.into_inner()).ensure(degree);
    }

    /// Bound on Σ_{k > K} of the degree-k terms when Σ|ξ| = `total`.
    ///
    /// Degree k is bounded by t_k = total^k / (k! min_{λ ⊢ k} (μ)_λ), and removing a corner
    /// cell gives t_{k+1} ≤ r_k t_k with r_k = total / ((k+1)(a_min + ⌈(k+1)/q⌉ − 1)),
    /// which decreases in k, so the tail is geometric once r_K < 1.
    fn tail_bound(&self, total: f64, degree: usize) -> f64 {
        if total == 0.0 {
            return 0.0;
        }
        let ln_t = self.ln_term_bound(total, degree);
        let r = self.ratio(total, degree);
        if r >= 1.0 {
            return f64::INFINITY;
        }
        (ln_t + (r / (1.0 - r)).ln()).exp()
    }

    fn ratio(&self, total: f64, k: usize) -> f64 {
        let next = (k + 1) as f64;
        let ceil = (k + 1).div_ceil(self.q) as f64;
        total / (next * (self.a_min + ceil - 1.0))
    }

    fn ln_term_bound(&self, total: f64, k: usize) -> f64 {
        let ln_min_poch = if k <= MAX_DEGREE {
            self.ensure(k);
            self.series.read().unwrap_or_else(|e| e.into_inner()).layers[k].ln_min_pochhammer
        } else {
            // Beyond the tables, chain the corner-removal bound from the last tabulated layer.
            let mut acc = self.ln_term_bound(total, MAX_DEGREE);
            for j in MAX_DEGREE..k {
                acc += self.ratio(total, j).ln();
            }
            return acc;
        };
        k as f64 * total.ln() - ln_gamma(k as f64 + 1.0) - ln_min_poch
    }

    fn check_shape(&self, x: &HermitianMatrix) -> Result<()> {
        if x.q() != self.q {
            return Err(Error::Shape(format!("expected a {0}x{0} matrix, got {1}x{1}", self.q, x.q())));
        }
        if x.field().d() > self.field.d() {
            return Err(Error::Shape("complex argument for a real Bessel function".into()));
        }
        Ok(())
    }
}

/// 𝒥_μ(x) for the cone of `p` (its q and field; the index is `mu`).
#[allow(non_snake_case)]
pub fn bessel_J(p: &HypergroupParams, mu: f64, x: &HermitianMatrix, tol: f64) -> Result<BesselEval> {
    BesselFunction::new(p.q(), p.field(), mu)?.eval(x, tol)
}

/// Character φ_s(r) = 𝒥_μ(¼ s r² s) of the hypergroup.
pub fn character_phi(p: &HypergroupParams, s: &ConePoint, r: &ConePoint, tol: f64) -> Result<BesselEval> {
    Character::new(p, s)?.eval(r, tol)
}

/// φ_s for a fixed s, evaluated at many points.
#[derive(Clone, Debug)]
pub struct Character {
    s: ConePoint,
    bessel: BesselFunction,
}

impl Character {
    pub fn new(p: &HypergroupParams, s: &ConePoint) -> Result<Self> {
        if s.q() != p.q() {
            return Err(Error::Shape(format!("s is {0}x{0}, expected q = {1}", s.q(), p.q())));
        }
        Ok(Character { s: s.clone(), bessel: BesselFunction::new(p.q(), p.field(), p.mu())? })
    }

    pub fn s(&self) -> &ConePoint {
        &self.s
    }

    /// Argument ¼ s r² s of the Bessel function.
    pub fn argument(&self, r: &ConePoint) -> HermitianMatrix {
        r.square().congruence(self.s.as_matrix()).scale(0.25)
    }

    pub fn eval(&self, r: &ConePoint, tol: f64) -> Result<BesselEval> {
        if r.q() != self.s.q() {
            return Err(Error::Shape(format!("r is {0}x{0}, expected q = {1}", r.q(), self.s.q())));
        }
        self.bessel.eval(&self.argument(r), tol)
    }
}

/// Normalized Jack polynomial C_λ^{(α)}(x) with Σ_{|λ| = k} C_λ = (Σ x_i)^k.
#[allow(non_snake_case)]
pub fn jack_C(lam: &Partition, alpha: f64, x: &[f64]) -> f64 {
    jack_with(lam, alpha, x, true)
}

/// Monic Jack polynomial P_λ^{(α)}(x) (coefficient of m_λ equal to one).
#[allow(non_snake_case)]
pub fn jack_P(lam: &Partition, alpha: f64, x: &[f64]) -> f64 {
    jack_with(lam, alpha, x, false)
}

fn jack_with(lam: &Partition, alpha: f64, x: &[f64], normalized: bool) -> f64 {
    let q = x.len();
    if lam.len() > q {
        return 0.0;
    }
    let k = lam.weight() as usize;
    with_table(q, alpha, k, |table| {
        let layer = table.layer(k);
        let a = layer.index_of(lam).expect("partition fits in q parts");
        let mut out = 0.0;
        for (b, kappa) in layer.parts.iter().enumerate().skip(a) {
            let c = layer.p(a, b);
            if c != 0.0 {
                out += c * super::table::monomial(kappa, x);
            }
        }
        if normalized {
            out * layer.ln_u[a].exp()
        } else {
            out
        }
    })
}

/// Spherical polynomial Z_λ(x) = C_λ^{(2/d)} evaluated at the eigenvalues of x.
#[allow(non_snake_case)]
pub fn zonal_Z(p: &HypergroupParams, lam: &Partition, x: &HermitianMatrix) -> Result<f64> {
    if x.q() != p.q() {
        return Err(Error::Shape(format!("expected a {0}x{0} matrix, got {1}x{1}", p.q(), x.q())));
    }
    Ok(jack_C(lam, p.alpha(), &eigenvalues(x)?))
}
