//! Cyclic Jacobi eigen-solver for small Hermitian matrices and the spectral
//! routines built on it (PSD square root, Loewner order).

use num_complex::Complex64;

use super::matrix::{CMat, ConePoint, HermitianMatrix, SquareMatrix, PSD_TOL};
use super::params::Field;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 60;

/// Spectral decomposition `h = basis · diag(values) · basis*`.
#[derive(Clone, Debug)]
pub struct Eigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Unitary; column `i` is the eigenvector of `values[i]`.
    pub basis: SquareMatrix,
}

pub fn eig_herm(h: &HermitianMatrix) -> Result<Eigen> {
    let (values, vectors) = jacobi(h.data(), true)?;
    let vectors = vectors.expect("basis requested");
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let q = values.len();
    let basis = CMat::from_fn(q, q, |i, j| vectors[(i, order[j])]);
    Ok(Eigen {
        values: order.iter().map(|&i| values[i]).collect(),
        basis: SquareMatrix::wrap(h.field(), basis),
    })
}

/// Ascending eigenvalues without accumulating the basis.
pub fn eigenvalues(h: &HermitianMatrix) -> Result<Vec<f64>> {
    let (mut values, _) = jacobi(h.data(), false)?;
    values.sort_by(f64::total_cmp);
    Ok(values)
}

fn jacobi(input: &CMat, want_vectors: bool) -> Result<(Vec<f64>, Option<CMat>)> {
    let n = input.nrows();
    let mut a = input.clone();
    let mut v = want_vectors.then(|| CMat::identity(n, n));
    let total: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if n == 1 || total == 0.0 {
        return Ok(((0..n).map(|i| a[(i, i)].re).collect(), v));
    }
    let off_norm = |a: &CMat| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += a[(i, j)].norm_sqr();
            }
        }
        (2.0 * s).sqrt()
    };
    let target = f64::EPSILON * total;
    for _ in 0..MAX_SWEEPS {
        if off_norm(&a) <= target {
            return Ok(((0..n).map(|i| a[(i, i)].re).collect(), v));
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let b = a[(p, q)];
                let babs = b.norm();
                if babs == 0.0 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let phase = b / babs;
                let theta = (aqq - app) / (2.0 * babs);
                let t = if theta == 0.0 {
                    1.0
                } else if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // U = diag(1, conj(phase)) · [[c, s], [-s, c]] acting on columns p, q
                let upp = Complex64::new(c, 0.0);
                let upq = Complex64::new(s, 0.0);
                let uqp = -phase.conj() * s;
                let uqq = phase.conj() * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * upp + akq * uqp;
                    a[(k, q)] = akp * upq + akq * uqq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = upp.conj() * apk + uqp.conj() * aqk;
                    a[(q, k)] = upq.conj() * apk + uqq.conj() * aqk;
                }
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
                a[(p, p)].im = 0.0;
                a[(q, q)].im = 0.0;
                if let Some(v) = v.as_mut() {
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = vkp * upp + vkq * uqp;
                        v[(k, q)] = vkp * upq + vkq * uqq;
                    }
                }
            }
        }
    }
    let off = off_norm(&a);
    if off <= 1e3 * target {
        return Ok(((0..n).map(|i| a[(i, i)].re).collect(), v));
    }
    Err(Error::NoConvergence { sweeps: MAX_SWEEPS, off_norm: off })
}

/// `basis · diag(values) · basis*`.
pub fn reconstruct(basis: &SquareMatrix, values: &[f64], field: Field) -> HermitianMatrix {
    let u = basis.data();
    let q = values.len();
    let mut out = CMat::zeros(q, q);
    for i in 0..q {
        for j in i..q {
            let mut z = Complex64::new(0.0, 0.0);
            for (k, &lam) in values.iter().enumerate() {
                z += u[(i, k)] * u[(j, k)].conj() * lam;
            }
            out[(i, j)] = z;
            out[(j, i)] = z.conj();
        }
    }
    HermitianMatrix::hermitize(SquareMatrix::wrap(field, out))
}

/// Unique positive semidefinite square root.
pub fn psd_sqrt(s: &ConePoint) -> Result<ConePoint> {
    sqrt_of_hermitian(s.as_hermitian())
}

/// Eigenvalues below this multiple of ‖h‖ are within the backward error of the
/// eigensolver and are taken as exact zeros before the square root, which would
/// otherwise lift round-off of order 1e−16 to order 1e−8.
pub const SQRT_ZERO_FLOOR: f64 = 64.0 * f64::EPSILON;

/// Square root of a Hermitian matrix that is positive semidefinite up to the
/// cone tolerance; eigenvalues in (−εₚₛd(1+‖h‖), 0) are treated as zero.
pub fn sqrt_of_hermitian(h: &HermitianMatrix) -> Result<ConePoint> {
    sqrt_of_hermitian_scaled(h, h.norm())
}

/// Like [`sqrt_of_hermitian`], with the zero floor taken relative to `scale`
/// instead of ‖h‖. Used when h is a product whose factors set the round-off level,
/// so that an h made only of cancellation noise maps to exactly zero.
pub fn sqrt_of_hermitian_scaled(h: &HermitianMatrix, scale: f64) -> Result<ConePoint> {
    let eig = eig_herm(h)?;
    let tol = PSD_TOL * (1.0 + h.norm());
    if eig.values[0] < -tol {
        return Err(Error::NotPsd { min_eigenvalue: eig.values[0] });
    }
    let floor = SQRT_ZERO_FLOOR * scale.max(h.norm());
    let roots: Vec<f64> = eig.values.iter().map(|&x| if x <= floor { 0.0 } else { x.sqrt() }).collect();
    Ok(ConePoint::from_hermitian_unchecked(reconstruct(&eig.basis, &roots, h.field())))
}

/// `a ≤ b` in the Loewner order, up to `tol` on the smallest eigenvalue of `b − a`.
pub fn loewner_leq(a: &HermitianMatrix, b: &HermitianMatrix, tol: f64) -> Result<bool> {
    if a.q() != b.q() {
        return Err(Error::Shape(format!("{}x{} vs {}x{}", a.q(), a.q(), b.q(), b.q())));
    }
    let diff = b.sub(a);
    Ok(eigenvalues(&diff)?[0] >= -tol)
}
