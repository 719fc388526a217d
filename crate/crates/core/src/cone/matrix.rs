use std::ops::Deref;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::params::Field;
use super::spectral;
use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;

/// Relative tolerance εₚₛd for cone membership.
pub const PSD_TOL: f64 = 1e-9;

/// Relative tolerance for the conjugate-symmetry check in [`HermitianMatrix::new`].
pub const HERMITIAN_TOL: f64 = 1e-9;

/// A `q×q` matrix over ℝ or ℂ; real matrices carry zero imaginary parts.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareMatrix {
    field: Field,
    data: CMat,
}

impl SquareMatrix {
    pub fn from_data(field: Field, data: CMat) -> Result<Self> {
        if data.nrows() != data.ncols() || data.nrows() == 0 {
            return Err(Error::Shape(format!(
                "expected a non-empty square matrix, got {}x{}",
                data.nrows(),
                data.ncols()
            )));
        }
        if field == Field::Real {
            let scale = 1.0 + data.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if data.iter().any(|z| z.im.abs() > HERMITIAN_TOL * scale) {
                return Err(Error::InvalidParams(
                    "real matrix has non-zero imaginary parts".into(),
                ));
            }
        }
        Ok(Self::wrap(field, data))
    }

    /// Wraps without checks; imaginary parts are dropped for real matrices.
    pub(crate) fn wrap(field: Field, mut data: CMat) -> Self {
        if field == Field::Real {
            data.iter_mut().for_each(|z| z.im = 0.0);
        }
        SquareMatrix { field, data }
    }

    pub fn zeros(q: usize, field: Field) -> Self {
        SquareMatrix { field, data: CMat::zeros(q, q) }
    }

    pub fn identity(q: usize, field: Field) -> Self {
        SquareMatrix { field, data: CMat::identity(q, q) }
    }

    /// Real matrix from row-major entries.
    pub fn from_real_rows(q: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != q * q {
            return Err(Error::Shape(format!("expected {} entries, got {}", q * q, entries.len())));
        }
        let data = CMat::from_fn(q, q, |i, j| Complex64::new(entries[i * q + j], 0.0));
        Self::from_data(Field::Real, data)
    }

    /// Complex matrix from row-major entries.
    pub fn from_complex_rows(q: usize, entries: &[Complex64]) -> Result<Self> {
        if entries.len() != q * q {
            return Err(Error::Shape(format!("expected {} entries, got {}", q * q, entries.len())));
        }
        Self::from_data(Field::Complex, CMat::from_fn(q, q, |i, j| entries[i * q + j]))
    }

    pub fn diagonal(field: Field, diag: &[f64]) -> Self {
        let q = diag.len();
        let mut data = CMat::zeros(q, q);
        for (i, &x) in diag.iter().enumerate() {
            data[(i, i)] = Complex64::new(x, 0.0);
        }
        SquareMatrix { field, data }
    }

    pub fn q(&self) -> usize {
        self.data.nrows()
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn data(&self) -> &CMat {
        &self.data
    }

    pub fn into_data(self) -> CMat {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[(i, j)]
    }

    pub fn matmul(&self, other: &SquareMatrix) -> SquareMatrix {
        SquareMatrix { field: self.field.join(other.field), data: &self.data * &other.data }
    }

    pub fn adjoint(&self) -> SquareMatrix {
        SquareMatrix { field: self.field, data: self.data.adjoint() }
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> SquareMatrix {
        SquareMatrix { field: self.field, data: self.data.map(|z| z.conj()) }
    }

    pub fn add(&self, other: &SquareMatrix) -> SquareMatrix {
        SquareMatrix { field: self.field.join(other.field), data: &self.data + &other.data }
    }

    pub fn sub(&self, other: &SquareMatrix) -> SquareMatrix {
        SquareMatrix { field: self.field.join(other.field), data: &self.data - &other.data }
    }

    pub fn scale(&self, c: f64) -> SquareMatrix {
        SquareMatrix { field: self.field, data: self.data.map(|z| z * c) }
    }

    pub fn trace(&self) -> Complex64 {
        self.data.trace()
    }

    /// Frobenius norm ‖x‖ = (ℜ tr x*x)^{1/2}.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Euclidean inner product (x|y) = ℜ tr(x* y).
    pub fn inner(&self, other: &SquareMatrix) -> f64 {
        self.data.iter().zip(other.data.iter()).map(|(a, b)| (a.conj() * b).re).sum()
    }

    pub fn determinant(&self) -> Complex64 {
        self.data.determinant()
    }

    /// Singular values in descending order.
    pub fn singular_values(&self) -> Vec<f64> {
        let gram = HermitianMatrix::hermitize(self.adjoint().matmul(self));
        let mut sv: Vec<f64> = spectral::eigenvalues(&gram)
            .map(|ev| ev.into_iter().map(|x| x.max(0.0).sqrt()).collect())
            .unwrap_or_else(|_| {
                gram.data.clone().symmetric_eigenvalues().iter().map(|x| x.max(0.0).sqrt()).collect()
            });
        sv.sort_by(|a, b| b.total_cmp(a));
        sv
    }

    pub fn spectral_norm(&self) -> f64 {
        self.singular_values()[0]
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let q = self.q();
        let prod = self.adjoint().matmul(self);
        (prod.data - CMat::identity(q, q)).iter().all(|z| z.norm() <= tol)
    }

    pub fn is_invertible(&self) -> bool {
        let sv = self.singular_values();
        sv[sv.len() - 1] > 1e-12 * sv[0]
    }

    /// `blockdiag(self, 0)` of size `q`.
    pub fn embed_leading(&self, q: usize) -> Result<SquareMatrix> {
        let k = self.q();
        if k > q {
            return Err(Error::Shape(format!("cannot embed {k}x{k} into {q}x{q}")));
        }
        let mut data = CMat::zeros(q, q);
        data.view_mut((0, 0), (k, k)).copy_from(&self.data);
        Ok(SquareMatrix { field: self.field, data })
    }

    /// Leading `k×k` block.
    pub fn leading_block(&self, k: usize) -> Result<SquareMatrix> {
        if k == 0 || k > self.q() {
            return Err(Error::Shape(format!("no {k}x{k} leading block in a {}x{} matrix", self.q(), self.q())));
        }
        Ok(SquareMatrix { field: self.field, data: self.data.view((0, 0), (k, k)).into_owned() })
    }

    /// Leading principal minors Δ_1, …, Δ_q.
    pub fn leading_minors(&self) -> Vec<Complex64> {
        (1..=self.q()).map(|i| self.data.view((0, 0), (i, i)).into_owned().determinant()).collect()
    }

    /// Same entries viewed over the larger field.
    pub fn promote(&self, field: Field) -> SquareMatrix {
        SquareMatrix { field: self.field.join(field), data: self.data.clone() }
    }
}

/// Hermitian `q×q` matrix: entry (i,j) is the conjugate of entry (j,i).
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(SquareMatrix);

impl HermitianMatrix {
    pub fn new(m: SquareMatrix) -> Result<Self> {
        let asym = (&m.data - m.data.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if asym > HERMITIAN_TOL * (1.0 + m.norm()) {
            return Err(Error::NotHermitian { asymmetry: asym });
        }
        Ok(Self::hermitize(m))
    }

    /// Replaces `m` by `(m + m*)/2` without checking.
    pub fn hermitize(m: SquareMatrix) -> Self {
        let SquareMatrix { field, data } = m;
        let q = data.nrows();
        let mut out = data.clone();
        for i in 0..q {
            out[(i, i)] = Complex64::new(data[(i, i)].re, 0.0);
            for j in (i + 1)..q {
                let z = (data[(i, j)] + data[(j, i)].conj()) * 0.5;
                out[(i, j)] = z;
                out[(j, i)] = z.conj();
            }
        }
        HermitianMatrix(SquareMatrix::wrap(field, out))
    }

    pub fn zeros(q: usize, field: Field) -> Self {
        HermitianMatrix(SquareMatrix::zeros(q, field))
    }

    pub fn identity(q: usize, field: Field) -> Self {
        HermitianMatrix(SquareMatrix::identity(q, field))
    }

    pub fn diagonal(field: Field, diag: &[f64]) -> Self {
        HermitianMatrix(SquareMatrix::diagonal(field, diag))
    }

    pub fn as_matrix(&self) -> &SquareMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> SquareMatrix {
        self.0
    }

    pub fn add(&self, other: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(self.0.add(&other.0))
    }

    pub fn sub(&self, other: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(self.0.sub(&other.0))
    }

    pub fn scale(&self, c: f64) -> HermitianMatrix {
        HermitianMatrix(self.0.scale(c))
    }

    pub fn trace_re(&self) -> f64 {
        self.0.trace().re
    }

    /// `h²`.
    pub fn square(&self) -> HermitianMatrix {
        Self::hermitize(self.0.matmul(&self.0))
    }

    /// Congruence `a h a*`.
    pub fn congruence(&self, a: &SquareMatrix) -> HermitianMatrix {
        Self::hermitize(a.matmul(&self.0).matmul(&a.adjoint()))
    }

    /// Entrywise conjugate (equivalently the transpose).
    pub fn conj(&self) -> HermitianMatrix {
        HermitianMatrix(self.0.conj())
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        spectral::eigenvalues(self)
    }
}

impl Deref for HermitianMatrix {
    type Target = SquareMatrix;
    fn deref(&self) -> &SquareMatrix {
        &self.0
    }
}

/// A point of the cone `Π_q` of positive semidefinite matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct ConePoint(HermitianMatrix);

impl ConePoint {
    /// Accepts `h` when its eigenvalues are ≥ −εₚₛd(1+‖h‖); slightly negative
    /// eigenvalues are clamped to zero.
    pub fn new(h: HermitianMatrix) -> Result<Self> {
        let eig = spectral::eig_herm(&h)?;
        let tol = PSD_TOL * (1.0 + h.norm());
        let min = eig.values[0];
        if min < -tol {
            return Err(Error::NotPsd { min_eigenvalue: min });
        }
        if min < 0.0 {
            let clamped: Vec<f64> = eig.values.iter().map(|x| x.max(0.0)).collect();
            return Ok(ConePoint(spectral::reconstruct(&eig.basis, &clamped, h.field())));
        }
        Ok(ConePoint(h))
    }

    pub fn from_matrix(m: SquareMatrix) -> Result<Self> {
        Self::new(HermitianMatrix::new(m)?)
    }

    pub(crate) fn from_hermitian_unchecked(h: HermitianMatrix) -> Self {
        ConePoint(h)
    }

    pub fn zero(q: usize, field: Field) -> Self {
        ConePoint(HermitianMatrix::zeros(q, field))
    }

    pub fn identity(q: usize, field: Field) -> Self {
        ConePoint(HermitianMatrix::identity(q, field))
    }

    pub fn diagonal(field: Field, diag: &[f64]) -> Result<Self> {
        if let Some(&x) = diag.iter().find(|&&x| x < 0.0) {
            return Err(Error::NotPsd { min_eigenvalue: x });
        }
        Ok(ConePoint(HermitianMatrix::diagonal(field, diag)))
    }

    /// Nonnegative multiple `c·r`.
    pub fn scale(&self, c: f64) -> Result<ConePoint> {
        if c < 0.0 {
            return Err(Error::InvalidParams(format!("cone scaling factor {c} is negative")));
        }
        Ok(ConePoint(self.0.scale(c)))
    }

    pub fn as_hermitian(&self) -> &HermitianMatrix {
        &self.0
    }

    pub fn into_hermitian(self) -> HermitianMatrix {
        self.0
    }

    /// Entrywise conjugate; stays in the cone.
    pub fn conj(&self) -> ConePoint {
        ConePoint(self.0.conj())
    }
}

impl Deref for ConePoint {
    type Target = HermitianMatrix;
    fn deref(&self) -> &HermitianMatrix {
        &self.0
    }
}
