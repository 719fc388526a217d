use std::f64::consts::PI;

use conebessel::algebra::{Automorphism, FourierPanel};
use conebessel::ball::{conv_sample, EmpiricalMeasure};
use conebessel::cone::{gamma_cone, ConePoint, Field, HermitianMatrix, HypergroupParams};
use conebessel::random;
use conebessel::stats::{ks_against_cdf, ks_critical, ks_two_sample, two_sample_z, Welford};
use conebessel::wishart::{
    density, fourier_closed, haar_radial_density, sample_gaussian_matrix, sample_scaled, sample_standard,
    semigroup_check, translated_density, WishartSpec,
};
use quadrature::double_exponential::integrate;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn grid(q: usize, field: Field, rng: &mut ChaCha8Rng, n: usize) -> Vec<ConePoint> {
    (0..n).map(|i| random::cone_point(q, field, rng).scale(0.1 + 0.1 * i as f64).unwrap()).collect()
}

#[test]
fn rank_one_is_chi() {
    let mut rng = rng(1);
    for dof in [3usize, 5] {
        let p = HypergroupParams::new(1, 1, dof as f64 / 2.0).unwrap();
        let n = 20_000;
        let a: Vec<f64> = (0..n).map(|_| sample_standard(&p, &mut rng).unwrap().get(0, 0).re).collect();
        let b: Vec<f64> = (0..n)
            .map(|_| (0..dof).map(|_| StandardNormal.sample(&mut rng)).map(|x: f64| x * x).sum::<f64>().sqrt())
            .collect();
        assert!(ks_two_sample(&a, &b) < ks_critical(0.001, n, n));
    }
}

#[test]
fn second_moment_and_fourier_transform() {
    let mut rng = rng(2);
    for (q, d, mu) in [(2, 1, 2.7), (2, 2, 3.4), (3, 1, 3.1)] {
        let p = HypergroupParams::new(q, d, mu).unwrap();
        let n = 20_000;
        let pts: Vec<ConePoint> = (0..n).map(|_| sample_standard(&p, &mut rng).unwrap()).collect();
        for i in 0..q {
            for j in 0..q {
                let w: Welford = pts.iter().map(|r| r.square().get(i, j).re).collect();
                let want = if i == j { 2.0 * mu } else { 0.0 };
                assert!(w.estimate().agrees_with(want, 3.5), "({i},{j}) {:?}", w.estimate());
            }
        }
        let m = EmpiricalMeasure::uniform(p, pts, 2).unwrap();
        let id = ConePoint::identity(q, p.field());
        let panel = FourierPanel::of_measure(&p, &m, &grid(q, p.field(), &mut rng, 4), |s| fourier_closed(&id, s)).unwrap();
        assert!(panel.passes(3.5), "{:?}", panel.z_scores());
    }
}

#[test]
fn bartlett_matches_gaussian_matrix_construction() {
    let mut rng = rng(3);
    for (d, cols) in [(1usize, 3usize), (1, 5), (2, 3)] {
        let mu = (cols * d) as f64 / 2.0;
        let p = HypergroupParams::wishart_shape(2, d, mu).unwrap();
        let n = 20_000;
        let stat = |r: &ConePoint| [r.trace_re(), r.square().trace_re(), r.determinant().re];
        let mut a = [Welford::new(), Welford::new(), Welford::new()];
        let mut b = a;
        for _ in 0..n {
            for (w, v) in a.iter_mut().zip(stat(&sample_standard(&p, &mut rng).unwrap())) {
                w.push(v);
            }
            for (w, v) in b.iter_mut().zip(stat(&sample_gaussian_matrix(&p, &mut rng).unwrap())) {
                w.push(v);
            }
        }
        for i in 0..3 {
            assert!(two_sample_z(&a[i].estimate(), &b[i].estimate()) < 3.5);
        }
    }
    let p = HypergroupParams::new(2, 1, 2.2).unwrap();
    assert!(sample_gaussian_matrix(&p, &mut rng).is_err());
}

#[test]
fn scaled_special_cases() {
    let mut rng = rng(4);
    let p = HypergroupParams::new(2, 2, 3.5).unwrap();
    let zero = WishartSpec::new(p, ConePoint::zero(2, Field::Complex), 1.0).unwrap();
    for _ in 0..5 {
        assert!(sample_scaled(&zero, &mut rng).unwrap().norm() < 1e-12);
    }
    let std = WishartSpec::standard(p);
    let a = sample_scaled(&std, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    let b = sample_standard(&p, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    assert!(a.sub(&b).norm() < 1e-10);
}

#[test]
fn singular_scale_is_embedded_standard_law() {
    let mut rng = rng(5);
    let p = HypergroupParams::new(3, 1, 4.0).unwrap();
    let proj = ConePoint::diagonal(Field::Real, &[1.0, 1.0, 0.0]).unwrap();
    let spec = WishartSpec::new(p, proj, 1.0).unwrap();
    let small = p.restrict(2).unwrap();
    let n = 20_000;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for _ in 0..n {
        let r = sample_scaled(&spec, &mut rng).unwrap();
        for i in 0..3 {
            assert!(r.get(2, i).norm() < 1e-7 && r.get(i, 2).norm() < 1e-7);
        }
        a.push(r.leading_block(2).unwrap().trace().re);
        b.push(sample_standard(&small, &mut rng).unwrap().trace_re());
    }
    assert!(ks_two_sample(&a, &b) < ks_critical(0.001, n, n));
}

#[test]
fn rank_one_density_is_normalized() {
    for mu in [0.8, 2.0, 3.5] {
        let p = HypergroupParams::new(1, 1, mu).unwrap();
        for scale in [1.0, 2.5] {
            let spec = WishartSpec::new(p, ConePoint::diagonal(Field::Real, &[scale]).unwrap(), 1.0).unwrap();
            let f = |r: f64| {
                density(&spec, &ConePoint::diagonal(Field::Real, &[r]).unwrap()).unwrap()
                    * haar_radial_density(&p, r).unwrap()
            };
            let total = integrate(f, 0.0, 40.0 * scale.sqrt(), 1e-12).integral;
            assert!((total - 1.0).abs() < 1e-8, "mu={mu}: {total}");
        }
    }
}

/// Weyl constant c with dx = c·|λ1 − λ2|^d dλ1 dλ2 (λ1 > λ2) for the Euclidean
/// measure on 2×2 Hermitian matrices, from the Gaussian normalization (2π)^{dim/2}.
fn weyl_constant(d: usize) -> f64 {
    let dim = 2 + d;
    let inner = integrate(
        |a: f64| {
            integrate(|b: f64| (-(a * a + b * b) / 2.0).exp() * (a - b).abs().powi(d as i32), -12.0, a, 1e-12)
                .integral
        },
        -12.0,
        12.0,
        1e-10,
    )
    .integral;
    (2.0 * PI).powf(dim as f64 / 2.0) / inner
}

#[test]
fn two_by_two_density_is_normalized() {
    for (d, mu) in [(1usize, 2.3), (2, 3.4)] {
        let p = HypergroupParams::new(2, d, mu).unwrap();
        let c = weyl_constant(d);
        let gamma = p.gamma();
        let spec = WishartSpec::standard(p);
        // ω_μ(f) = π^{qμ}/Γ_Ω(μ) ∫ f(√w) Δ(w)^γ dw, evaluated in eigenvalues of w.
        let body = |l1: f64, l2: f64| {
            let r = ConePoint::diagonal(p.field(), &[l1.sqrt(), l2.sqrt()]).unwrap();
            density(&spec, &r).unwrap() * (l1 * l2).powf(gamma) * (l1 - l2).abs().powi(d as i32)
        };
        let total = integrate(|l1: f64| integrate(|l2: f64| body(l1, l2), 0.0, l1, 1e-10).integral, 0.0, 90.0, 1e-9)
            .integral;
        let total = total * c * PI.powf(2.0 * mu) / gamma_cone(&p, mu).unwrap();
        assert!((total - 1.0).abs() < 1e-4, "d={d}: {total}");
    }
}

#[test]
fn translated_density_checks() {
    let mut rng = rng(6);
    let mu = 1.7;
    let p = HypergroupParams::new(1, 1, mu).unwrap();
    let one = ConePoint::identity(1, Field::Real);
    let pt = |x: f64| ConePoint::diagonal(Field::Real, &[x]).unwrap();
    // x = 0 reduces to the Wishart density.
    for y in [0.3, 1.0, 2.2] {
        let a = translated_density(&p, &pt(0.0), &one, &pt(y), 1e-12).unwrap();
        let b = density(&WishartSpec::standard(p), &pt(y)).unwrap();
        assert!((a - b).abs() < 1e-12);
    }
    for x in [0.5, 1.0, 2.0] {
        let f = |y: f64| translated_density(&p, &pt(x), &one, &pt(y), 1e-12).unwrap() * haar_radial_density(&p, y).unwrap();
        let total = integrate(f, 0.0, 14.0, 1e-11).integral;
        assert!((total - 1.0).abs() < 1e-6, "x={x}: {total}");
        let n = 20_000;
        let spec = WishartSpec::standard(p);
        let sample: Vec<f64> = (0..n)
            .map(|_| {
                let w = sample_scaled(&spec, &mut rng).unwrap();
                conv_sample(&p, &pt(x), &w, &mut rng).unwrap().get(0, 0).re
            })
            .collect();
        let cdf = |y: f64| if y <= 0.0 { 0.0 } else { integrate(f, 0.0, y, 1e-9).integral };
        let ks = ks_against_cdf(&sample, cdf);
        assert!(ks < 0.015, "x={x}: KS {ks}");
    }
}

#[test]
fn semigroup_and_pushforward() {
    let mut rng = rng(7);
    for (q, d, mu) in [(1, 1, 1.5), (2, 2, 3.5)] {
        let p = HypergroupParams::new(q, d, mu).unwrap();
        let g = grid(q, p.field(), &mut rng, 3);
        let id = ConePoint::identity(q, p.field());
        let panel = semigroup_check(&p, &id, &id, 10_000, &g, &mut rng).unwrap();
        assert!(panel.passes(3.5), "{:?}", panel.z_scores());
        let a2 = random::cone_point(q, p.field(), &mut rng);
        let zero = ConePoint::zero(q, p.field());
        let panel = semigroup_check(&p, &a2, &zero, 10_000, &g, &mut rng).unwrap();
        assert!(panel.passes(3.5));
        // T_c(W(b²)) = W(c b² c*).
        let b2 = random::cone_point(q, p.field(), &mut rng);
        let c = random::invertible(q, p.field(), &mut rng);
        let t = Automorphism::new(c.clone());
        let spec = WishartSpec::new(p, b2.clone(), 1.0).unwrap();
        let pts = (0..10_000).map(|_| t.apply(&sample_scaled(&spec, &mut rng).unwrap())).collect::<Result<Vec<_>, _>>().unwrap();
        let m = EmpiricalMeasure::uniform(p, pts, 7).unwrap();
        let cov = ConePoint::from_matrix(b2.congruence(&c).into_matrix()).unwrap();
        let panel = FourierPanel::of_measure(&p, &m, &g, |s| fourier_closed(&cov, s)).unwrap();
        assert!(panel.passes(3.5), "{:?}", panel.z_scores());
    }
}

#[test]
fn unitary_invariance_and_small_time_concentration() {
    let mut rng = rng(8);
    let p = HypergroupParams::new(2, 2, 3.5).unwrap();
    let n = 20_000;
    let mut a = Welford::new();
    let mut b = Welford::new();
    let u = random::unitary(2, Field::Complex, &mut rng);
    for _ in 0..n {
        let r = sample_standard(&p, &mut rng).unwrap();
        a.push(r.congruence(&u).get(0, 0).re);
        b.push(sample_standard(&p, &mut rng).unwrap().get(0, 0).re);
    }
    assert!(two_sample_z(&a.estimate(), &b.estimate()) < 3.5);

    let p = HypergroupParams::new(1, 1, 1.0).unwrap();
    let mut ratios = Vec::new();
    for t in [0.1, 0.05, 0.025] {
        let spec = WishartSpec::new(p, ConePoint::identity(1, Field::Real), t).unwrap();
        let outside = (0..50_000).filter(|_| sample_scaled(&spec, &mut rng).unwrap().norm() > 0.5).count();
        ratios.push(outside as f64 / 50_000.0 / t);
    }
    assert!(ratios.windows(2).all(|w| w[1] < w[0]), "{ratios:?}");
}

#[test]
fn closed_form_trivial_cases() {
    let mut rng = rng(9);
    let cov = random::cone_point(2, Field::Real, &mut rng);
    assert_eq!(fourier_closed(&cov, &HermitianMatrix::zeros(2, Field::Real)), 1.0);
    let s = random::hermitian(2, Field::Real, 1.0, &mut rng);
    assert_eq!(fourier_closed(&ConePoint::zero(2, Field::Real), &s), 1.0);
    let p = HypergroupParams::new(2, 1, 3.0).unwrap();
    let singular = WishartSpec::new(p, ConePoint::diagonal(Field::Real, &[1.0, 0.0]).unwrap(), 1.0).unwrap();
    assert!(density(&singular, &cov).is_err());
}
