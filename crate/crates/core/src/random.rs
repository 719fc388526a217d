//! Random matrix generators used by the experiments and property tests.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::cone::{CMat, ConePoint, Field, HermitianMatrix, SquareMatrix};

/// Scalar whose `d` real components are independent standard normals.
pub fn gaussian_scalar<R: Rng + ?Sized>(field: Field, rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    match field {
        Field::Real => Complex64::new(re, 0.0),
        Field::Complex => Complex64::new(re, rng.sample(StandardNormal)),
    }
}

/// `q×q` matrix with i.i.d. standard normal components.
pub fn gaussian<R: Rng + ?Sized>(q: usize, field: Field, rng: &mut R) -> SquareMatrix {
    SquareMatrix::wrap(field, CMat::from_fn(q, q, |_, _| gaussian_scalar(field, rng)))
}

/// Hermitian matrix `scale·(g + g*)/2` with `g` Gaussian.
pub fn hermitian<R: Rng + ?Sized>(q: usize, field: Field, scale: f64, rng: &mut R) -> HermitianMatrix {
    HermitianMatrix::hermitize(gaussian(q, field, rng).scale(scale))
}

/// Cone point `g g*/q` with `g` Gaussian (full rank almost surely, norm of order 1).
pub fn cone_point<R: Rng + ?Sized>(q: usize, field: Field, rng: &mut R) -> ConePoint {
    let g = gaussian(q, field, rng);
    ConePoint::from_hermitian_unchecked(HermitianMatrix::hermitize(g.matmul(&g.adjoint()).scale(1.0 / q as f64)))
}

/// Cone point with prescribed rank `k ≤ q`.
pub fn cone_point_of_rank<R: Rng + ?Sized>(q: usize, k: usize, field: Field, rng: &mut R) -> ConePoint {
    let g = gaussian(q, field, rng);
    let mut data = g.into_data();
    for j in k..q {
        data.column_mut(j).fill(Complex64::new(0.0, 0.0));
    }
    let g = SquareMatrix::wrap(field, data);
    ConePoint::from_hermitian_unchecked(HermitianMatrix::hermitize(g.matmul(&g.adjoint()).scale(1.0 / q as f64)))
}

/// Haar-distributed unitary (orthogonal for real fields) via QR with phase correction.
pub fn unitary<R: Rng + ?Sized>(q: usize, field: Field, rng: &mut R) -> SquareMatrix {
    let g = gaussian(q, field, rng).into_data();
    let qr = g.qr();
    let (mut qm, r) = qr.unpack();
    for j in 0..q {
        let rjj = r[(j, j)];
        let n = rjj.norm();
        if n > 0.0 {
            let ph = rjj / n;
            for i in 0..q {
                qm[(i, j)] *= ph;
            }
        }
    }
    SquareMatrix::wrap(field, qm)
}

/// Invertible matrix `I/2 + g/√q`, moderately conditioned.
pub fn invertible<R: Rng + ?Sized>(q: usize, field: Field, rng: &mut R) -> SquareMatrix {
    loop {
        let a = SquareMatrix::identity(q, field)
            .scale(0.5)
            .add(&gaussian(q, field, rng).scale(1.0 / (q as f64).sqrt()));
        let sv = a.singular_values();
        if sv[q - 1] > 0.05 * sv[0] {
            return a;
        }
    }
}
