//! Jack polynomials against an independent construction: Gram–Schmidt of the
//! monomial basis under the power-sum scalar product ⟨p_ρ, p_σ⟩ = δ_ρσ z_ρ α^{ℓ(ρ)}.

use conebessel::cone::{Field, HermitianMatrix, HypergroupParams};
use conebessel::jack::{jack_C, jack_P, monomial, partitions, zonal_Z, Partition};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Coefficient of x^κ in p_ρ: ways to send each part of ρ to a variable so that
/// variable i receives total κ_i.
fn assignments(rho: &[u32], remaining: &mut Vec<u32>) -> f64 {
    let Some((&first, rest)) = rho.split_first() else {
        return if remaining.iter().all(|&r| r == 0) { 1.0 } else { 0.0 };
    };
    let mut total = 0.0;
    for i in 0..remaining.len() {
        if remaining[i] >= first {
            remaining[i] -= first;
            total += assignments(rest, remaining);
            remaining[i] += first;
        }
    }
    total
}

fn z_rho(rho: &[u32]) -> f64 {
    let mut out = 1.0;
    let mut i = 0;
    while i < rho.len() {
        let mut j = i;
        while j < rho.len() && rho[j] == rho[i] {
            j += 1;
        }
        let m = (j - i) as u32;
        out *= (rho[i] as f64).powi(m as i32) * (1..=m).map(f64::from).product::<f64>();
        i = j;
    }
    out
}

struct Oracle {
    parts: Vec<Partition>,
    /// P_λ in the monomial basis, rows indexed like `parts`.
    p: Vec<Vec<f64>>,
    /// C_λ = c_λ P_λ.
    c: Vec<f64>,
}

fn oracle(k: u32, alpha: f64) -> Oracle {
    let parts = partitions(k, k as usize);
    let n = parts.len();
    // M[ρ][κ]: p_ρ = Σ_κ M[ρ][κ] m_κ.
    let m = DMatrix::<f64>::from_fn(n, n, |a, b| {
        let mut rem: Vec<u32> = (0..k as usize).map(|i| parts[b].part(i)).collect();
        assignments(parts[a].parts(), &mut rem)
    });
    let minv = m.clone().try_inverse().expect("power sums form a basis");
    let weights: Vec<f64> = parts.iter().map(|r| z_rho(r.parts()) * alpha.powi(r.len() as i32)).collect();
    let gram = DMatrix::<f64>::from_fn(n, n, |a, b| (0..n).map(|r| minv[(a, r)] * minv[(b, r)] * weights[r]).sum::<f64>());
    let inner = |x: &[f64], y: &[f64]| -> f64 {
        let mut s = 0.0;
        for a in 0..n {
            for b in 0..n {
                s += x[a] * gram[(a, b)] * y[b];
            }
        }
        s
    };
    // parts are lexicographically descending; orthogonalize from the smallest.
    let mut p: Vec<Vec<f64>> = vec![Vec::new(); n];
    for lam in (0..n).rev() {
        let mut v = vec![0.0; n];
        v[lam] = 1.0;
        for mu in lam + 1..n {
            let coef = inner(&v, &p[mu]) / inner(&p[mu], &p[mu]);
            for j in 0..n {
                v[j] -= coef * p[mu][j];
            }
        }
        p[lam] = v;
    }
    // p_1^k = Σ c_λ P_λ, solved from the top of the lexicographic order.
    let ones = n - 1;
    let mut c = vec![0.0; n];
    for lam in 0..n {
        let mut target = m[(ones, lam)];
        for mu in 0..lam {
            target -= c[mu] * p[mu][lam];
        }
        c[lam] = target / p[lam][lam];
    }
    Oracle { parts, p, c }
}

fn eval_oracle(o: &Oracle, row: usize, x: &[f64]) -> f64 {
    o.parts.iter().zip(&o.p[row]).map(|(kappa, coef)| coef * monomial(kappa, x)).sum()
}

#[test]
fn jack_p_matches_gram_schmidt() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for alpha in [0.5, 1.0, 1.3, 2.0] {
        for k in 1..=6 {
            let o = oracle(k, alpha);
            for q in 1..=3usize {
                let x: Vec<f64> = (0..q).map(|_| rng.random_range(-1.5..1.5)).collect();
                for (row, lam) in o.parts.iter().enumerate() {
                    let got = jack_P(lam, alpha, &x);
                    let want = if lam.len() > q { 0.0 } else { eval_oracle(&o, row, &x) };
                    let scale = 1.0 + want.abs();
                    assert!((got - want).abs() < 1e-10 * scale, "P_{lam} alpha={alpha} q={q}: {got} vs {want}");
                    let got_c = jack_C(lam, alpha, &x);
                    let want_c = o.c[row] * want;
                    assert!(
                        (got_c - want_c).abs() < 1e-10 * (1.0 + want_c.abs()),
                        "C_{lam} alpha={alpha} q={q}: {got_c} vs {want_c}"
                    );
                }
            }
        }
    }
}

#[test]
fn pinned_small_values() {
    let two = Partition::new(vec![2]).unwrap();
    assert!((jack_C(&two, 2.0, &[1.0, 1.0]) - 8.0 / 3.0).abs() < 1e-14);
    let one = Partition::new(vec![1]).unwrap();
    assert!((jack_C(&one, 0.7, &[0.2, -1.0, 3.0]) - 2.2).abs() < 1e-14);
}

fn random_hermitian(q: usize, field: Field, rng: &mut ChaCha8Rng) -> HermitianMatrix {
    conebessel::random::hermitian(q, field, 1.0, rng)
}

/// Σ_{|λ|=k} Z_λ(x) = (tr x)^k. For indefinite x the terms are of size (tr|x|)^k, so
/// round-off is measured against that scale; on the cone the two scales coincide.
#[test]
fn trace_identity_for_zonal_polynomials() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for q in 1..=3 {
        for d in 1..=2 {
            let p = HypergroupParams::wishart_shape(q, d, 10.0).unwrap();
            for i in 0..40 {
                let x = if i % 2 == 0 {
                    random_hermitian(q, p.field(), &mut rng)
                } else {
                    conebessel::random::cone_point(q, p.field(), &mut rng).as_hermitian().clone()
                };
                let tr = x.trace_re();
                let abs_tr: f64 = x.eigenvalues().unwrap().iter().map(|e| e.abs()).sum();
                for k in 0..=6 {
                    let sum: f64 = partitions(k, q).iter().map(|lam| zonal_Z(&p, lam, &x).unwrap()).sum();
                    let want = tr.powi(k as i32);
                    assert!(
                        (sum - want).abs() <= 1e-8 * abs_tr.powi(k as i32),
                        "q={q} d={d} k={k}: {sum} vs {want}"
                    );
                }
            }
        }
    }
}

#[test]
fn zonal_is_unitarily_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let p = HypergroupParams::wishart_shape(3, 2, 5.0).unwrap();
    let x = random_hermitian(3, Field::Complex, &mut rng);
    let u = conebessel::random::unitary(3, Field::Complex, &mut rng);
    let y = x.congruence(&u);
    for lam in partitions(4, 3) {
        let a = zonal_Z(&p, &lam, &x).unwrap();
        let b = zonal_Z(&p, &lam, &y).unwrap();
        assert!((a - b).abs() < 1e-11 * (1.0 + a.abs()));
    }
    let z1 = zonal_Z(&p, &Partition::new(vec![1]).unwrap(), &x).unwrap();
    assert!((z1 - x.trace_re()).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jack_is_homogeneous(c in 0.1f64..3.0, a in -2.0f64..2.0, b in -2.0f64..2.0, e in -2.0f64..2.0, k in 0u32..6) {
        for lam in partitions(k, 3) {
            let x = [a, b, e];
            let scaled = [c * a, c * b, c * e];
            let lhs = jack_C(&lam, 2.0, &scaled);
            let rhs = c.powi(k as i32) * jack_C(&lam, 2.0, &x);
            prop_assert!((lhs - rhs).abs() <= 1e-11 * (1.0 + rhs.abs()));
        }
    }

    #[test]
    fn jack_is_symmetric(a in -2.0f64..2.0, b in -2.0f64..2.0, e in -2.0f64..2.0, k in 0u32..6) {
        for lam in partitions(k, 3) {
            let v1 = jack_C(&lam, 1.0, &[a, b, e]);
            let v2 = jack_C(&lam, 1.0, &[e, a, b]);
            let v3 = jack_C(&lam, 1.0, &[b, a, e]);
            prop_assert!((v1 - v2).abs() <= 1e-11 * (1.0 + v1.abs()));
            prop_assert!((v1 - v3).abs() <= 1e-11 * (1.0 + v1.abs()));
        }
    }
}
