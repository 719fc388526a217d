use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Underlying division algebra: ℝ (d = 1) or ℂ (d = 2).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    pub fn from_d(d: usize) -> Result<Field> {
        match d {
            1 => Ok(Field::Real),
            2 => Ok(Field::Complex),
            4 => Err(Error::InvalidParams(
                "quaternion field (d = 4) is not supported; use d = 1 (real) or d = 2 (complex)".into(),
            )),
            _ => Err(Error::InvalidParams(format!("field dimension d = {d} must be 1 or 2"))),
        }
    }

    pub fn d(self) -> usize {
        match self {
            Field::Real => 1,
            Field::Complex => 2,
        }
    }

    /// Smallest field containing both.
    pub fn join(self, other: Field) -> Field {
        if self == Field::Complex || other == Field::Complex {
            Field::Complex
        } else {
            Field::Real
        }
    }
}

/// Index data `(q, d, μ)` of the hypergroup `X_{q,μ}` on the cone `Π_q(𝔽)`.
///
/// Constructed through [`HypergroupParams::new`] the index satisfies `μ > ρ − 1`, the
/// range in which the explicit convolution exists. [`HypergroupParams::wishart_shape`]
/// accepts the wider range `μ > (d/2)(q − 1)` where squared Wishart laws still make
/// sense; convolution-dependent operations reject such parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypergroupParams {
    q: usize,
    field: Field,
    mu: f64,
}

impl HypergroupParams {
    pub fn new(q: usize, d: usize, mu: f64) -> Result<Self> {
        let p = Self::wishart_shape(q, d, mu)?;
        p.ensure_hypergroup()?;
        Ok(p)
    }

    pub fn with_field(q: usize, field: Field, mu: f64) -> Result<Self> {
        Self::new(q, field.d(), mu)
    }

    pub fn wishart_shape(q: usize, d: usize, mu: f64) -> Result<Self> {
        let field = Field::from_d(d)?;
        if q == 0 {
            return Err(Error::InvalidParams("matrix size q must be at least 1".into()));
        }
        if !mu.is_finite() {
            return Err(Error::InvalidParams(format!("index mu = {mu} is not finite")));
        }
        let p = HypergroupParams { q, field, mu };
        let min_shape = p.mu - 0.5 * d as f64 * (q as f64 - 1.0);
        if min_shape <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "index mu = {mu} must exceed (d/2)(q-1) = {}",
                mu - min_shape
            )));
        }
        Ok(p)
    }

    /// Fails unless `μ > ρ − 1`.
    pub fn ensure_hypergroup(&self) -> Result<()> {
        if self.mu > self.rho() - 1.0 {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!(
                "index mu = {} must satisfy mu > rho - 1 = {} (q = {}, d = {})",
                self.mu,
                self.rho() - 1.0,
                self.q,
                self.d()
            )))
        }
    }

    pub fn is_hypergroup(&self) -> bool {
        self.mu > self.rho() - 1.0
    }

    /// Same field and index on a smaller cone.
    pub fn restrict(&self, k: usize) -> Result<Self> {
        Self::wishart_shape(k, self.d(), self.mu)
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn d(&self) -> usize {
        self.field.d()
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// ρ = d(q − 1/2) + 1.
    pub fn rho(&self) -> f64 {
        self.d() as f64 * (self.q as f64 - 0.5) + 1.0
    }

    /// Real dimension of `H_q`: n = q + (d/2) q (q − 1).
    pub fn n(&self) -> f64 {
        let q = self.q as f64;
        q + 0.5 * self.d() as f64 * q * (q - 1.0)
    }

    /// γ = μ − n/q.
    pub fn gamma(&self) -> f64 {
        self.mu - self.n() / self.q as f64
    }

    /// Jack index α = 2/d.
    pub fn alpha(&self) -> f64 {
        2.0 / self.d() as f64
    }

    /// Exponent μ − ρ of the ball density.
    pub fn ball_exponent(&self) -> f64 {
        self.mu - self.rho()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_constants() {
        let p = HypergroupParams::new(2, 1, 3.0).unwrap();
        assert_eq!(p.rho(), 2.5);
        assert_eq!(p.n(), 3.0);
        assert_eq!(p.gamma(), 1.5);
        assert_eq!(p.alpha(), 2.0);

        let p = HypergroupParams::new(3, 2, 6.0).unwrap();
        assert_eq!(p.rho(), 6.0);
        assert_eq!(p.n(), 9.0);
        assert_eq!(p.gamma(), 3.0);
        assert_eq!(p.alpha(), 1.0);
    }

    #[test]
    fn rejects_small_index_and_quaternions() {
        // rho - 1 = 1/2 for q = d = 1
        assert!(HypergroupParams::new(1, 1, 0.5).is_err());
        assert!(HypergroupParams::new(1, 1, 0.5001).is_ok());
        let err = HypergroupParams::new(2, 4, 10.0).unwrap_err().to_string();
        assert!(err.contains("quaternion"), "{err}");
        assert!(HypergroupParams::new(0, 1, 2.0).is_err());
        // Wishart shapes reach below rho - 1
        let w = HypergroupParams::wishart_shape(2, 1, 1.0).unwrap();
        assert!(!w.is_hypergroup());
        assert!(HypergroupParams::wishart_shape(2, 1, 0.5).is_err());
    }
}
