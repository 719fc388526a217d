use conebessel::ball::conv_sample;
use conebessel::cone::{ConePoint, Field, HermitianMatrix, HypergroupParams};
use conebessel::random;
use conebessel::stats::{ks_critical, ks_two_sample};
use conebessel::walk::{
    clt_experiment, geometric_checkpoints, martingale_check, moment_m2, moment_numeric, second_moment_additivity,
    slln_experiment, walk_simulate, MomentSpec, Normalization, StepLaw, WalkConfig,
};
use conebessel::wishart::WishartSpec;
use conebessel::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[test]
fn point_mass_at_zero_stays_put() {
    let p = HypergroupParams::new(2, 1, 2.0).unwrap();
    let cfg = WalkConfig {
        params: p,
        step_law: StepLaw::PointMass(ConePoint::zero(2, Field::Real)),
        n_steps: 10,
        n_replicas: 3,
        seed: 1,
    };
    let paths = walk_simulate(&cfg).unwrap();
    assert_eq!(paths.len(), 3);
    assert!(paths.iter().all(|path| path.len() == 11 && path.iter().all(|s| s.norm() == 0.0)));
}

#[test]
fn one_step_law_is_the_step_law_and_runs_are_reproducible() {
    let p = HypergroupParams::new(2, 2, 3.5).unwrap();
    let x = random::cone_point(2, Field::Complex, &mut rng(2));
    let cfg = WalkConfig {
        params: p,
        step_law: StepLaw::PointMass(x.clone()),
        n_steps: 3,
        n_replicas: 50,
        seed: 9,
    };
    let paths = walk_simulate(&cfg).unwrap();
    assert!(paths.iter().all(|path| path[1].sub(&x).norm() < 1e-12));
    let again = walk_simulate(&cfg).unwrap();
    assert!(paths.iter().zip(&again).all(|(a, b)| a.iter().zip(b).all(|(u, v)| u == v)));

    // Wishart steps: S_1 has the step law.
    let spec = WishartSpec::standard(p);
    let cfg = WalkConfig { params: p, step_law: StepLaw::Wishart(spec.clone()), n_steps: 1, n_replicas: 5000, seed: 3 };
    let a: Vec<f64> = walk_simulate(&cfg).unwrap().iter().map(|path| path[1].trace_re()).collect();
    let mut r = rng(4);
    let b: Vec<f64> = (0..5000).map(|_| StepLaw::Wishart(spec.clone()).sample(&mut r).unwrap().trace_re()).collect();
    assert!(ks_two_sample(&a, &b) < ks_critical(0.001, 5000, 5000));
}

#[test]
fn invalid_configs_are_rejected() {
    let p = HypergroupParams::new(2, 1, 2.0).unwrap();
    let law = StepLaw::PointMass(ConePoint::identity(3, Field::Real));
    let cfg = WalkConfig { params: p, step_law: law, n_steps: 2, n_replicas: 2, seed: 0 };
    assert!(walk_simulate(&cfg).is_err());
    let law = StepLaw::PointMass(ConePoint::identity(2, Field::Real));
    let cfg = WalkConfig { params: p, step_law: law.clone(), n_steps: 0, n_replicas: 2, seed: 0 };
    assert!(walk_simulate(&cfg).is_err());
    assert!(slln_experiment(&p, &law, Normalization::Power(2.0), 8, 2, 0).is_err());
}

#[test]
fn second_moment_is_additive() {
    let mut rng = rng(5);
    for (q, d, mu) in [(1, 1, 1.2), (2, 1, 2.0), (2, 2, 3.5), (3, 1, 3.0)] {
        let p = HypergroupParams::new(q, d, mu).unwrap();
        let x = random::cone_point(q, p.field(), &mut rng);
        let y = random::cone_point(q, p.field(), &mut rng);
        let devs = second_moment_additivity(&p, &x, &y, 20_000, &mut rng).unwrap();
        assert!(devs.iter().all(|e| e.agrees_with(0.0, 4.0)), "{devs:?}");
    }
}

#[test]
fn m2_closed_form_and_bound() {
    let mut rng = rng(6);
    let p = HypergroupParams::new(2, 2, 3.5).unwrap();
    for _ in 0..20 {
        let r = random::cone_point(2, Field::Complex, &mut rng);
        let s1 = random::hermitian(2, Field::Complex, 1.0, &mut rng);
        let s2 = random::hermitian(2, Field::Complex, 1.0, &mut rng);
        let m = moment_m2(&p, &s1, &s2, &r);
        // Symmetric in (s1, s2) and bounded by ‖s1‖‖s2‖‖r‖²/(2μ).
        assert!((m - moment_m2(&p, &s2, &s1, &r)).abs() < 1e-12);
        assert!(m.abs() <= s1.norm() * s2.norm() * r.norm().powi(2) / (2.0 * p.mu()) + 1e-12);
        let mm = moment_m2(&p, &s1, &s1, &r);
        assert!(mm >= -1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn numeric_second_moment_matches_closed_form(seed in any::<u64>(), case in 0usize..3) {
        let (q, d, mu) = [(2, 1, 2.0), (2, 2, 3.5), (3, 1, 3.0)][case];
        let p = HypergroupParams::new(q, d, mu).unwrap();
        let mut rng = rng(seed);
        let r = random::cone_point(q, p.field(), &mut rng);
        let s1 = random::hermitian(q, p.field(), 1.0, &mut rng);
        let s2 = random::hermitian(q, p.field(), 1.0, &mut rng);
        let spec = MomentSpec::new(vec![s1.clone(), s2.clone()]).unwrap();
        let h = spec.default_step(r.norm());
        let got = moment_numeric(&p, &spec, &r, h).unwrap().value;
        let want = moment_m2(&p, &s1, &s2, &r);
        let scale = s1.norm() * s2.norm() * r.norm().powi(2) / (2.0 * mu);
        prop_assert!((got - want).abs() <= 1e-6 * scale, "{} vs {}", got, want);
    }
}

#[test]
fn numeric_fourth_moment_rank_one() {
    let one = HermitianMatrix::identity(1, Field::Real);
    let spec = MomentSpec::new(vec![one.clone(), one.clone(), one.clone(), one]).unwrap();
    for mu in [0.7, 1.5, 3.0] {
        let p = HypergroupParams::new(1, 1, mu).unwrap();
        for r in [0.5, 1.0, 2.0] {
            let x = ConePoint::diagonal(Field::Real, &[r]).unwrap();
            let got = moment_numeric(&p, &spec, &x, spec.default_step(r)).unwrap();
            let want = 3.0 * r.powi(4) / (4.0 * mu * (mu + 1.0));
            assert!((got.value - want).abs() < 1e-4 * want, "mu={mu} r={r}: {} vs {want}", got.value);
        }
    }
    assert!(MomentSpec::new(vec![HermitianMatrix::identity(1, Field::Real); 3]).is_err());
}

#[test]
fn clt_plug_in_covariance_for_point_mass() {
    let p = HypergroupParams::new(2, 1, 2.5).unwrap();
    let x = random::cone_point(2, Field::Real, &mut rng(7));
    let law = StepLaw::PointMass(x.clone());
    let grid = vec![ConePoint::identity(2, Field::Real).scale(0.3).unwrap()];
    let report = clt_experiment(&p, &law, &[4, 16], 400, &grid, 7).unwrap();
    let exact = x.square().scale(1.0 / (2.0 * p.mu()));
    assert!(report.sigma2.sub(&exact).norm() < 1e-12);
    assert!(report.sigma2_exact.sub(&exact).norm() < 1e-12);
    assert_eq!(report.estimates.len(), 2);
    assert!(report.sup_deviation(1) < 0.1);
}

#[test]
fn slln_trivial_and_decreasing() {
    let p = HypergroupParams::new(2, 2, 3.5).unwrap();
    let zero = StepLaw::PointMass(ConePoint::zero(2, Field::Complex));
    let report = slln_experiment(&p, &zero, Normalization::Linear, 16, 4, 1).unwrap();
    assert!(report.max_ratio.iter().all(|&r| r == 0.0));
    assert_eq!(report.checkpoints, vec![1, 2, 4, 8, 16]);
    assert_eq!(geometric_checkpoints(12), vec![1, 2, 4, 8, 12]);

    let law = StepLaw::Wishart(WishartSpec::standard(p));
    let report = slln_experiment(&p, &law, Normalization::Linear, 256, 50, 2).unwrap();
    assert!(report.median_decreasing(), "{:?}", report.median_ratio);
    assert!(report.fraction_final_below_first > 0.9);
}

#[test]
fn martingale_identities() {
    let p = HypergroupParams::new(2, 1, 2.5).unwrap();
    let x = random::cone_point(2, Field::Real, &mut rng(8));
    let law = StepLaw::PointMass(x.clone());
    let s = ConePoint::identity(2, Field::Real).scale(0.4).unwrap();
    let report = martingale_check(&p, &law, &s, &[1, 2, 8], 4000, 8).unwrap();
    // n = 1 is exact for a point mass.
    assert!(report.estimates[0].stderr < 1e-12 && (report.estimates[0].estimate - report.targets[0]).abs() < 1e-10);
    assert!(report.fourier_passes(4.0), "{:?} vs {:?}", report.estimates, report.targets);
    assert!(report.second_moment_passes(4.0), "{:?}", report.second_moment_z);

    let far = ConePoint::identity(2, Field::Real).scale(3.0).unwrap();
    assert!(matches!(martingale_check(&p, &law, &far, &[200], 10, 0), Err(Error::FourierTooSmall(_))));
}

#[test]
fn conv_with_zero_is_identity() {
    let p = HypergroupParams::new(3, 2, 5.5).unwrap();
    let mut rng = rng(9);
    let x = random::cone_point(3, Field::Complex, &mut rng);
    let z = conv_sample(&p, &x, &ConePoint::zero(3, Field::Complex), &mut rng).unwrap();
    assert_eq!(z, x);
}
