//! Conserved charges of the extended dynamics and the extended Poisson
//! bracket.
//!
//! With `L = lambda_q p - lambda_p V'(q)` the similarity charge is
//!
//! ```text
//! D = t L - 2/(2-n) lambda_q q - n/(2-n) lambda_p p        (n != 2)
//! ```
//!
//! and `{L, D(t=0)} = L`, which makes every member of the tower
//! `L_m = L (t + D0/L)^(1+m)` a constant of motion.

use thiserror::Error;

use crate::dynamics::ExtendedTrajectory;
use crate::model::{ExtendedPoint, ModelError, MonomialPotential};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChargeError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("the similarity charge has no finite form at n = 2; use lms_charge_harmonic")]
    HarmonicCase,
    #[error("Liouvillian {0:e} is too close to zero for the Virasoro tower")]
    NullLiouvillian(f64),
    #[error("non-finite gradient component at {0:?}")]
    NonFiniteGradient(ExtendedPoint),
}

/// Threshold below which `L_m` is considered singular.
pub const NULL_LIOUVILLIAN_EPS: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChargeSample {
    pub t: f64,
    pub value: f64,
}

pub fn liouvillian_value(x: &ExtendedPoint, pot: &MonomialPotential) -> Result<f64, ChargeError> {
    let (d1, _) = pot.derivs(x.q)?;
    Ok(x.lq * x.p - x.lp * d1)
}

/// Coefficients `(a, b)` of `D0 = a lambda_q q + b lambda_p p`.
pub fn lms_charge_coefficients(n: f64) -> Result<(f64, f64), ChargeError> {
    if n == 2.0 {
        return Err(ChargeError::HarmonicCase);
    }
    Ok((-2.0 / (2.0 - n), -n / (2.0 - n)))
}

pub fn lms_charge(x: &ExtendedPoint, pot: &MonomialPotential, t: f64) -> Result<f64, ChargeError> {
    let (a, b) = lms_charge_coefficients(pot.n)?;
    let h = liouvillian_value(x, pot)?;
    Ok(t * h + a * x.lq * x.q + b * x.lp * x.p)
}

/// `lambda_q q + p lambda_p`, the oscillator charge (normalized to unit
/// coefficient).
pub fn lms_charge_harmonic(x: &ExtendedPoint) -> f64 {
    x.lq * x.q + x.p * x.lp
}

/// `L_m = L (t + D0/L)^(1+m)` for integer `m`.
pub fn virasoro_charge(x: &ExtendedPoint, pot: &MonomialPotential, t: f64, m: i32) -> Result<f64, ChargeError> {
    let h = liouvillian_value(x, pot)?;
    if h.abs() <= NULL_LIOUVILLIAN_EPS {
        return Err(ChargeError::NullLiouvillian(h));
    }
    // m = -1 and m = 0 reduce to L and D exactly
    match m {
        -1 => return Ok(h),
        0 => return lms_charge(x, pot, t),
        _ => {}
    }
    let d0 = lms_charge(x, pot, 0.0)?;
    let u = t + d0 / h;
    Ok(h * u.powi(1 + m))
}

/// Sample a charge along a trajectory.
pub fn monitor<F>(traj: &ExtendedTrajectory, mut charge: F) -> Result<Vec<ChargeSample>, ChargeError>
where
    F: FnMut(f64, &ExtendedPoint) -> Result<f64, ChargeError>,
{
    traj.iter().map(|(t, x)| Ok(ChargeSample { t, value: charge(t, x)? })).collect()
}

/// `max_t |C(t) - C(0)|`.
pub fn max_drift(samples: &[ChargeSample]) -> f64 {
    let Some(first) = samples.first() else { return 0.0 };
    samples.iter().map(|s| (s.value - first.value).abs()).fold(0.0, f64::max)
}

type Eval<'a> = Box<dyn Fn(&ExtendedPoint) -> f64 + Send + Sync + 'a>;
type Grad<'a> = Box<dyn Fn(&ExtendedPoint) -> [f64; 4] + Send + Sync + 'a>;

/// A real function on the extended phase space, optionally with an
/// analytic gradient in the order `(q, p, lambda_q, lambda_p)`.
pub struct ScalarField4<'a> {
    eval: Eval<'a>,
    grad: Option<Grad<'a>>,
}

impl<'a> ScalarField4<'a> {
    pub fn new(eval: impl Fn(&ExtendedPoint) -> f64 + Send + Sync + 'a) -> Self {
        Self { eval: Box::new(eval), grad: None }
    }

    pub fn with_gradient(
        eval: impl Fn(&ExtendedPoint) -> f64 + Send + Sync + 'a,
        grad: impl Fn(&ExtendedPoint) -> [f64; 4] + Send + Sync + 'a,
    ) -> Self {
        Self { eval: Box::new(eval), grad: Some(Box::new(grad)) }
    }

    /// Drop the analytic gradient, forcing finite differences.
    pub fn numeric(self) -> Self {
        Self { eval: self.eval, grad: None }
    }

    pub fn has_gradient(&self) -> bool {
        self.grad.is_some()
    }

    pub fn value(&self, x: &ExtendedPoint) -> f64 {
        (self.eval)(x)
    }

    /// Analytic gradient when available, central differences otherwise
    /// (step `1e-6` times the component scale).
    pub fn gradient(&self, x: &ExtendedPoint) -> Result<[f64; 4], ChargeError> {
        let g = match &self.grad {
            Some(g) => g(x),
            None => {
                let base = x.to_array();
                let mut g = [0.0; 4];
                for (i, gi) in g.iter_mut().enumerate() {
                    let h = 1e-6 * base[i].abs().max(1.0);
                    let mut up = base;
                    let mut dn = base;
                    up[i] += h;
                    dn[i] -= h;
                    *gi = (self.value(&ExtendedPoint::from_array(up)) - self.value(&ExtendedPoint::from_array(dn)))
                        / (2.0 * h);
                }
                g
            }
        };
        if g.iter().all(|v| v.is_finite()) {
            Ok(g)
        } else {
            Err(ChargeError::NonFiniteGradient(*x))
        }
    }

    pub fn coordinate(index: usize) -> ScalarField4<'static> {
        assert!(index < 4);
        ScalarField4::with_gradient(
            move |x| x.to_array()[index],
            move |_| {
                let mut g = [0.0; 4];
                g[index] = 1.0;
                g
            },
        )
    }
}

/// `{f, g} = f_q g_lq - f_lq g_q + f_p g_lp - f_lp g_p`.
pub fn epb(f: &ScalarField4<'_>, g: &ScalarField4<'_>, x: &ExtendedPoint) -> Result<f64, ChargeError> {
    let a = f.gradient(x)?;
    let b = g.gradient(x)?;
    Ok(a[0] * b[2] - a[2] * b[0] + a[1] * b[3] - a[3] * b[1])
}

/// The Liouvillian as a field, with analytic gradient.
pub fn liouvillian_field(pot: &MonomialPotential) -> ScalarField4<'_> {
    ScalarField4::with_gradient(
        move |x| liouvillian_value(x, pot).unwrap_or(f64::NAN),
        move |x| match pot.derivs(x.q) {
            Ok((d1, d2)) => [-x.lp * d2, x.lq, x.p, -d1],
            Err(_) => [f64::NAN; 4],
        },
    )
}

/// `D0`, the similarity charge at `t = 0`, with analytic gradient.
pub fn lms_charge_field(pot: &MonomialPotential) -> Result<ScalarField4<'static>, ChargeError> {
    let (a, b) = lms_charge_coefficients(pot.n)?;
    Ok(ScalarField4::with_gradient(
        move |x| a * x.lq * x.q + b * x.lp * x.p,
        move |x| [a * x.lq, b * x.lp, a * x.q, b * x.p],
    ))
}

pub fn virasoro_field(pot: &MonomialPotential, m: i32) -> ScalarField4<'_> {
    ScalarField4::new(move |x| virasoro_charge(x, pot, 0.0, m).unwrap_or(f64::NAN))
}

/// Whether the transformation generated by `generator` maps ordinary phase
/// space into itself: the induced shift of `(q, p)` is `{(q, p), C}`, i.e.
/// the lambda-gradient of `C`; it stays inside phase space when that gradient
/// does not depend on the lambdas. Checked by comparing it at the supplied
/// probe lambdas for each base point.
pub fn acts_within_phase_space(
    generator: &ScalarField4<'_>,
    base: &[ExtendedPoint],
    probe_lambdas: &[(f64, f64)],
    tol: f64,
) -> Result<bool, ChargeError> {
    for x in base {
        let g0 = generator.gradient(x)?;
        for &(lq, lp) in probe_lambdas {
            let y = ExtendedPoint::new(x.q, x.p, lq, lp);
            let g = generator.gradient(&y)?;
            let scale = 1.0 + g0[2].abs().max(g0[3].abs());
            if (g[2] - g0[2]).abs() > tol * scale || (g[3] - g0[3]).abs() > tol * scale {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pot(g: f64, n: f64) -> MonomialPotential {
        MonomialPotential::new(g, n).unwrap()
    }

    #[test]
    fn liouvillian_examples() {
        let x = ExtendedPoint::new(1.0, 1.0, 1.0, 1.0);
        assert_eq!(liouvillian_value(&x, &pot(1.0, 2.0)).unwrap(), 0.0);
        for v in [pot(1.0, 2.0), pot(2.0, -1.0), pot(0.3, 4.0)] {
            assert_eq!(liouvillian_value(&ExtendedPoint::new(1.3, -0.7, 0.0, 0.0), &v).unwrap(), 0.0);
        }
        assert_eq!(liouvillian_value(&ExtendedPoint::new(1.0, 0.0, 0.0, 1.0), &pot(1.0, 4.0)).unwrap(), -1.0);
    }

    #[test]
    fn lms_charge_examples() {
        let d = lms_charge(&ExtendedPoint::new(1.0, 1.0, 1.0, 0.0), &pot(1.0, 4.0), 0.0).unwrap();
        assert_eq!(d, 1.0);
        let x = ExtendedPoint::new(1.0, 2.0, 3.0, 4.0);
        let v = pot(1.0, -2.0);
        let d = lms_charge(&x, &v, 0.0).unwrap();
        assert!((d - 2.5).abs() < 1e-15);
        // inverse-square reduction t L + (lambda_p p - lambda_q q) / 2
        for t in [0.0, 0.4, -2.0] {
            let h = liouvillian_value(&x, &v).unwrap();
            let reduced = t * h + (x.lp * x.p - x.lq * x.q) / 2.0;
            assert!((lms_charge(&x, &v, t).unwrap() - reduced).abs() < 1e-14);
        }
        for n in [-2.0, -1.0, 1.0, 3.0, 4.0] {
            assert_eq!(lms_charge(&ExtendedPoint::new(0.8, 0.3, 0.0, 0.0), &pot(1.0, n), 0.0).unwrap(), 0.0);
        }
        assert_eq!(lms_charge(&x, &pot(1.0, 2.0), 0.0), Err(ChargeError::HarmonicCase));
    }

    #[test]
    fn harmonic_charge_examples() {
        assert_eq!(lms_charge_harmonic(&ExtendedPoint::new(1.0, 0.0, 1.0, 0.0)), 1.0);
        assert_eq!(lms_charge_harmonic(&ExtendedPoint::new(0.0, 1.0, 0.0, 1.0)), 1.0);
        assert_eq!(lms_charge_harmonic(&ExtendedPoint::new(1.0, 1.0, 1.0, -1.0)), 0.0);
    }

    #[test]
    fn virasoro_examples() {
        let v = pot(1.0, 4.0);
        let x = ExtendedPoint::new(1.1, 0.4, 0.7, -0.3);
        let h = liouvillian_value(&x, &v).unwrap();
        assert_eq!(virasoro_charge(&x, &v, 0.9, -1).unwrap(), h);
        assert_eq!(virasoro_charge(&x, &v, 0.9, 0).unwrap(), lms_charge(&x, &v, 0.9).unwrap());
        // n = 4, q = 1: L = lq p - lp and D0 = lq q + 2 lp p; this point has
        // L = 2, D0 = 1, so L_1 = 2 (1/2)^2
        let u = ExtendedPoint::new(1.0, 0.5, 2.0, -1.0);
        assert_eq!(liouvillian_value(&u, &v).unwrap(), 2.0);
        assert_eq!(lms_charge(&u, &v, 0.0).unwrap(), 1.0);
        assert_eq!(virasoro_charge(&u, &v, 0.0, 1).unwrap(), 0.5);

        let null = ExtendedPoint::new(1.0, 1.0, 0.0, 0.0);
        assert!(matches!(virasoro_charge(&null, &v, 0.0, 1), Err(ChargeError::NullLiouvillian(_))));
    }

    #[test]
    fn bracket_examples() {
        let q = ScalarField4::coordinate(0);
        let p = ScalarField4::coordinate(1);
        let lq = ScalarField4::coordinate(2);
        let x = ExtendedPoint::new(0.3, -1.2, 2.0, 0.5);
        assert_eq!(epb(&q, &lq, &x).unwrap(), 1.0);
        assert_eq!(epb(&q, &p, &x).unwrap(), 0.0);
        assert!((epb(&q.numeric(), &lq.numeric(), &x).unwrap() - 1.0).abs() < 1e-9);

        let v = pot(1.0, 4.0);
        let h = liouvillian_field(&v);
        let d0 = lms_charge_field(&v).unwrap();
        let r = epb(&h, &d0, &x).unwrap();
        assert!((r - liouvillian_value(&x, &v).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn only_two_tower_members_stay_in_phase_space() {
        let v = pot(1.0, 4.0);
        let base = [ExtendedPoint::new(1.1, 0.4, 0.7, -0.3), ExtendedPoint::new(0.6, -0.9, 1.5, 0.8)];
        let probes = [(2.0, 0.3), (-0.4, 1.7)];
        for m in [-1, 0] {
            assert!(acts_within_phase_space(&virasoro_field(&v, m), &base, &probes, 1e-6).unwrap(), "m={m}");
        }
        for m in [1, 2, -2] {
            assert!(!acts_within_phase_space(&virasoro_field(&v, m), &base, &probes, 1e-6).unwrap(), "m={m}");
        }
    }
}
