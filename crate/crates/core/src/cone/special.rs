use statrs::function::gamma::{gamma, ln_gamma};

use super::matrix::SquareMatrix;
use super::params::HypergroupParams;
use crate::error::{Error, Result};
use crate::jack::Partition;

/// Rising factorial (a)_k = a(a+1)…(a+k−1).
pub fn rising(a: f64, k: u32) -> f64 {
    (0..k).map(|i| a + i as f64).product()
}

/// Generalized Pochhammer symbol (μ)_λ = ∏_j (μ − (d/2)(j−1))_{λ_j}.
pub fn pochhammer_general(p: &HypergroupParams, mu: f64, lam: &Partition) -> Result<f64> {
    if lam.len() > p.q() {
        return Err(Error::Shape(format!("partition {lam} has more than q = {} parts", p.q())));
    }
    let half_d = 0.5 * p.d() as f64;
    let mut out = 1.0;
    for (j, &part) in lam.parts().iter().enumerate() {
        let base = mu - half_d * j as f64;
        let f = rising(base, part);
        if f == 0.0 {
            return Err(Error::PochhammerPole { base, length: part });
        }
        out *= f;
    }
    Ok(out)
}

/// Cone gamma function Γ_Ω(μ) = (2π)^{(n−q)/2} ∏_{j=1}^q Γ(μ − (d/2)(j−1)).
pub fn gamma_cone(p: &HypergroupParams, mu: f64) -> Result<f64> {
    Ok(ln_gamma_cone(p, mu)?.exp())
}

pub fn ln_gamma_cone(p: &HypergroupParams, mu: f64) -> Result<f64> {
    let half_d = 0.5 * p.d() as f64;
    let mut out = 0.5 * (p.n() - p.q() as f64) * (2.0 * std::f64::consts::PI).ln();
    for j in 0..p.q() {
        let arg = mu - half_d * j as f64;
        if arg <= 0.0 {
            return Err(Error::GammaPole(arg));
        }
        out += ln_gamma(arg);
    }
    Ok(out)
}

/// Scalar Γ, re-exported for callers that already depend on this module.
pub fn gamma_fn(x: f64) -> f64 {
    gamma(x)
}

/// Power function Δ_λ(x) = Δ_1^{λ1−λ2} ⋯ Δ_q^{λq} of the leading principal minors.
pub fn power_function(x: &SquareMatrix, lam: &Partition) -> Result<f64> {
    if lam.len() > x.q() {
        return Err(Error::Shape(format!("partition {lam} has more than q = {} parts", x.q())));
    }
    let minors = x.leading_minors();
    let parts = lam.parts();
    let mut out = 1.0;
    for (i, &part) in parts.iter().enumerate() {
        let next = parts.get(i + 1).copied().unwrap_or(0);
        out *= minors[i].re.powi((part - next) as i32);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::Field;

    fn part(p: &[u32]) -> Partition {
        Partition::new(p.to_vec()).unwrap()
    }

    #[test]
    fn pochhammer_examples() {
        let p1 = HypergroupParams::new(2, 1, 3.3).unwrap();
        assert_eq!(pochhammer_general(&p1, 3.3, &part(&[1])).unwrap(), 3.3);
        let v = pochhammer_general(&p1, 3.3, &part(&[1, 1])).unwrap();
        assert!((v - 3.3 * 2.8).abs() < 1e-12);
        let p2 = HypergroupParams::new(2, 2, 4.0).unwrap();
        assert_eq!(pochhammer_general(&p2, 4.0, &part(&[2])).unwrap(), 20.0);
        // trailing zeros are neutral
        let a = pochhammer_general(&p1, 3.3, &part(&[3, 1])).unwrap();
        let b = pochhammer_general(&p1, 3.3, &Partition::new(vec![3, 1, 0]).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn pochhammer_pole() {
        let p = HypergroupParams::new(2, 1, 3.0).unwrap();
        // second factor base 2.5; mu = -1 hits a pole in the first factor
        assert!(matches!(pochhammer_general(&p, -1.0, &part(&[2])), Err(Error::PochhammerPole { .. })));
    }

    #[test]
    fn gamma_cone_examples() {
        let p = HypergroupParams::new(1, 1, 2.5).unwrap();
        assert!((gamma_cone(&p, 2.5).unwrap() - gamma(2.5)).abs() < 1e-12);
        let p = HypergroupParams::new(2, 1, 2.0).unwrap();
        let expect = (2.0 * std::f64::consts::PI).sqrt() * gamma(2.0) * gamma(1.5);
        assert!((gamma_cone(&p, 2.0).unwrap() - expect).abs() < 1e-12 * expect);
        let p = HypergroupParams::wishart_shape(2, 2, 3.0).unwrap();
        let expect = 2.0 * std::f64::consts::PI * gamma(3.0) * gamma(2.0);
        assert!((gamma_cone(&p, 3.0).unwrap() - expect).abs() < 1e-12 * expect);
        assert!(matches!(gamma_cone(&p, 1.0), Err(Error::GammaPole(_))));
    }

    #[test]
    fn power_function_examples() {
        let x = SquareMatrix::diagonal(Field::Real, &[3.0, 5.0]);
        assert!((power_function(&x, &part(&[1])).unwrap() - 3.0).abs() < 1e-12);
        assert!((power_function(&x, &part(&[1, 1])).unwrap() - 15.0).abs() < 1e-12);
        let y = SquareMatrix::from_real_rows(2, &[2.0, -1.5, 0.7, -4.0]).unwrap();
        let d1 = 2.0;
        let d2 = 2.0 * -4.0 - (-1.5 * 0.7);
        assert!((power_function(&y, &part(&[2, 1])).unwrap() - d1 * d2).abs() < 1e-12);
        assert!((power_function(&y, &part(&[3, 1])).unwrap() - d1 * d1 * d2).abs() < 1e-12);
    }
}
