//! Shared domain types: monomial potentials, phase-space points and the
//! similarity parameters.
//!
//! Mass is fixed to one everywhere except in [`crate::semiclassics`], so the
//! Hamiltonian is `H = p^2/2 + V(q)` with `V(q) = g q^n / n`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("position q = {q} outside the domain of q^{n} (requires q > 0)")]
    Domain { q: f64, n: f64 },
    #[error("exponent n = 0 does not define a monomial potential")]
    Undefined,
    #[error("invalid coupling g = {0} (must be finite and nonzero)")]
    Coupling(f64),
    #[error("hbar must be finite and positive, got {0}")]
    Hbar(f64),
}

/// `V(q) = g q^n / n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonomialPotential {
    pub g: f64,
    pub n: f64,
}

impl MonomialPotential {
    pub fn new(g: f64, n: f64) -> Result<Self, ModelError> {
        if !g.is_finite() || g == 0.0 {
            return Err(ModelError::Coupling(g));
        }
        if n == 0.0 || !n.is_finite() {
            return Err(ModelError::Undefined);
        }
        Ok(Self { g, n })
    }

    pub fn harmonic(g: f64) -> Self {
        Self { g, n: 2.0 }
    }

    /// Positive integer exponent, if any. Polynomial potentials live on the
    /// whole line; everything else is restricted to `q > 0`.
    pub fn integer_exponent(&self) -> Option<u32> {
        if self.n >= 1.0 && self.n.fract() == 0.0 && self.n <= u32::MAX as f64 {
            Some(self.n as u32)
        } else {
            None
        }
    }

    pub fn is_harmonic(&self) -> bool {
        self.n == 2.0
    }

    pub fn admissible(&self, q: f64) -> bool {
        q.is_finite() && (self.integer_exponent().is_some() || q > 0.0)
    }

    fn check(&self, q: f64) -> Result<(), ModelError> {
        if self.n == 0.0 {
            return Err(ModelError::Undefined);
        }
        if !self.admissible(q) {
            return Err(ModelError::Domain { q, n: self.n });
        }
        Ok(())
    }

    /// `q^k` for an exponent that may be fractional or negative; integer
    /// powers go through `powi` so negative `q` works for polynomials.
    fn pow(q: f64, k: f64) -> f64 {
        if k.fract() == 0.0 && k.abs() < i32::MAX as f64 {
            q.powi(k as i32)
        } else {
            q.powf(k)
        }
    }

    pub fn value(&self, q: f64) -> Result<f64, ModelError> {
        self.check(q)?;
        Ok(self.g * Self::pow(q, self.n) / self.n)
    }

    /// `(V', V'')`.
    pub fn derivs(&self, q: f64) -> Result<(f64, f64), ModelError> {
        self.check(q)?;
        let d1 = self.g * Self::pow(q, self.n - 1.0);
        // V'' vanishes identically for the linear potential; avoid 0 * q^-1.
        let d2 = if self.n == 1.0 {
            0.0
        } else {
            self.g * (self.n - 1.0) * Self::pow(q, self.n - 2.0)
        };
        Ok((d1, d2))
    }

    pub fn energy(&self, x: &PhasePoint) -> Result<f64, ModelError> {
        Ok(0.5 * x.p * x.p + self.value(x.q)?)
    }
}

/// Free-function forms of the potential evaluation.
pub fn potential_eval(pot: &MonomialPotential, q: f64) -> Result<f64, ModelError> {
    pot.value(q)
}

pub fn potential_derivs(pot: &MonomialPotential, q: f64) -> Result<(f64, f64), ModelError> {
    pot.derivs(q)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub q: f64,
    pub p: f64,
}

impl PhasePoint {
    pub fn new(q: f64, p: f64) -> Self {
        Self { q, p }
    }
}

/// A point `(q, p, lambda_q, lambda_p)` of the extended phase space. The
/// lambdas are the conjugates of `q` and `p` under the extended brackets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtendedPoint {
    pub q: f64,
    pub p: f64,
    pub lq: f64,
    pub lp: f64,
}

impl ExtendedPoint {
    pub fn new(q: f64, p: f64, lq: f64, lp: f64) -> Self {
        Self { q, p, lq, lp }
    }

    pub fn from_phase(x: PhasePoint) -> Self {
        Self::new(x.q, x.p, 0.0, 0.0)
    }

    pub fn phase(&self) -> PhasePoint {
        PhasePoint::new(self.q, self.p)
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.q, self.p, self.lq, self.lp]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    /// Largest componentwise absolute difference.
    pub fn max_abs_diff(&self, other: &ExtendedPoint) -> f64 {
        self.to_array()
            .iter()
            .zip(other.to_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HbarContext {
    hbar: f64,
}

impl HbarContext {
    pub fn new(hbar: f64) -> Result<Self, ModelError> {
        if hbar.is_finite() && hbar > 0.0 {
            Ok(Self { hbar })
        } else {
            Err(ModelError::Hbar(hbar))
        }
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }
}

/// Finite scale `alpha = e^beta`, its logarithm `beta`, and the time-scaling
/// parameter `alpha_tilde = beta (n - 2) / 2` for exponent `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LmsParams {
    pub alpha: f64,
    pub beta: f64,
    pub alpha_tilde: f64,
    pub n: f64,
}

impl LmsParams {
    pub fn from_beta(beta: f64, n: f64) -> Self {
        Self {
            alpha: beta.exp(),
            beta,
            alpha_tilde: beta * (n - 2.0) / 2.0,
            n,
        }
    }

    /// Panics on non-positive `alpha`: the scale is a multiplicative group
    /// element.
    pub fn from_alpha(alpha: f64, n: f64) -> Self {
        assert!(alpha > 0.0, "scale factor must be positive, got {alpha}");
        Self::from_beta(alpha.ln(), n)
    }

    pub fn is_consistent(&self) -> bool {
        let a = self.beta.exp();
        (a - self.alpha).abs() <= 1e-14 * a
            && (self.alpha_tilde - self.beta * (self.n - 2.0) / 2.0).abs()
                <= 1e-14 * self.alpha_tilde.abs().max(1.0)
    }
}

pub fn lms_params_from_beta(beta: f64, n: f64) -> LmsParams {
    LmsParams::from_beta(beta, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn potential_examples() {
        let v = MonomialPotential::new(1.0, 2.0).unwrap();
        assert_eq!(v.value(2.0).unwrap(), 2.0);
        let v = MonomialPotential::new(1.0, -2.0).unwrap();
        assert_eq!(v.value(1.0).unwrap(), -0.5);
        let v = MonomialPotential::new(3.0, 4.0).unwrap();
        assert_eq!(v.value(0.0).unwrap(), 0.0);
    }

    #[test]
    fn domain_and_undefined() {
        let v = MonomialPotential { g: 1.0, n: -1.0 };
        assert!(matches!(v.value(0.0), Err(ModelError::Domain { .. })));
        assert!(matches!(v.value(-1.0), Err(ModelError::Domain { .. })));
        let v = MonomialPotential { g: 1.0, n: 1.5 };
        assert!(v.value(-0.1).is_err());
        assert!(v.value(0.1).is_ok());
        let v = MonomialPotential { g: 1.0, n: 0.0 };
        assert_eq!(v.value(1.0), Err(ModelError::Undefined));
        assert_eq!(MonomialPotential::new(1.0, 0.0), Err(ModelError::Undefined));
        assert!(MonomialPotential::new(0.0, 2.0).is_err());
        // polynomial powers accept negative q
        assert_eq!(MonomialPotential::harmonic(1.0).value(-3.0).unwrap(), 4.5);
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(MonomialPotential::harmonic(1.0).derivs(3.0).unwrap(), (3.0, 1.0));
        // V = -q^-2 for g = 2: V' = 2 q^-3, V'' = -6 q^-4
        assert_eq!(
            MonomialPotential::new(2.0, -2.0).unwrap().derivs(1.0).unwrap(),
            (2.0, -6.0)
        );
        assert_eq!(
            MonomialPotential::new(1.0, 1.0).unwrap().derivs(5.0).unwrap(),
            (1.0, 0.0)
        );
    }

    #[test]
    fn lms_param_examples() {
        let p = lms_params_from_beta(0.0, 4.0);
        assert_eq!((p.alpha, p.alpha_tilde), (1.0, 0.0));
        let p = lms_params_from_beta(0.1, -2.0);
        assert!((p.alpha_tilde + 0.2).abs() < 1e-15);
        let p = lms_params_from_beta(1.0, 4.0);
        assert_eq!(p.alpha, std::f64::consts::E);
        assert_eq!(p.alpha_tilde, 1.0);
        assert!(p.is_consistent());
    }

    #[test]
    fn homogeneity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [-2.0, -1.0, 1.0, 2.0, 3.0, 4.0] {
            let v = MonomialPotential::new(1.3, n).unwrap();
            for _ in 0..50 {
                let q: f64 = rng.gen_range(0.1..3.0);
                let a: f64 = rng.gen_range(0.2..4.0);
                let lhs = v.value(a * q).unwrap();
                let rhs = a.powf(n) * v.value(q).unwrap();
                assert!((lhs - rhs).abs() < 1e-12 * rhs.abs(), "n={n} q={q} a={a}");
            }
        }
    }

    #[test]
    fn derivatives_match_central_differences() {
        for n in [-2.0, -1.0, 1.0, 1.5, 2.0, 3.0, 4.0] {
            let v = MonomialPotential::new(0.7, n).unwrap();
            for q in [0.4, 1.0, 2.3] {
                let h = 1e-5 * q;
                let fd1 = (v.value(q + h).unwrap() - v.value(q - h).unwrap()) / (2.0 * h);
                let (d1, d2) = v.derivs(q).unwrap();
                let fd2 = (v.derivs(q + h).unwrap().0 - v.derivs(q - h).unwrap().0) / (2.0 * h);
                assert!((fd1 - d1).abs() <= 1e-6 * d1.abs().max(1e-12), "n={n}");
                assert!((fd2 - d2).abs() <= 1e-6 * d2.abs().max(1.0), "n={n}");
            }
        }
    }
}
