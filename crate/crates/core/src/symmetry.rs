//! Finite and infinitesimal similarity maps, action functionals and the
//! bracket comparison between ordinary and extended phase space.
//!
//! The finite map with scale `alpha` is
//!
//! ```text
//! q -> alpha q,   p -> alpha^(n/2) p,   t -> alpha^(1 - n/2) t,
//! lambda_q -> alpha^-1 lambda_q,   lambda_p -> alpha^(-n/2) lambda_p
//! ```
//!
//! It maps solutions to solutions, rescales the Lagrangian by `alpha^n`, the
//! action by `alpha^(1 + n/2)`, and leaves the extended action invariant.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::ExtendedTrajectory;
use crate::model::{ExtendedPoint, LmsParams, ModelError, MonomialPotential};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SymmetryError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("infinitesimal form has a pole at n = 2")]
    HarmonicCase,
    #[error("trajectory has {0} samples; at least {MIN_ACTION_SAMPLES} are needed for quadrature")]
    InsufficientResolution(usize),
    #[error("action scaling exponent is undefined: {0}")]
    DegenerateAction(String),
    #[error("scale factor must be positive, got {0}")]
    Scale(f64),
}

/// Minimum number of trajectory samples accepted by the action quadratures.
pub const MIN_ACTION_SAMPLES: usize = 101;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub measured_exponent: f64,
    pub expected_exponent: f64,
    pub residual: f64,
}

/// Exponents of `alpha` acting on `(q, p, lambda_q, lambda_p)` and on time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingExponents {
    pub q: f64,
    pub p: f64,
    pub lq: f64,
    pub lp: f64,
    pub t: f64,
}

impl ScalingExponents {
    pub fn for_exponent(n: f64) -> Self {
        let half = n / 2.0;
        Self { q: 1.0, p: half, lq: -1.0, lp: -half, t: 1.0 - half }
    }

    /// Each conjugate pair scales reciprocally, so the extended symplectic
    /// form is preserved. Exact: the exponents cancel in floating point.
    pub fn preserves_extended_form(&self) -> bool {
        self.q + self.lq == 0.0 && self.p + self.lp == 0.0
    }
}

fn check_scale(prm: &LmsParams) -> Result<f64, SymmetryError> {
    if prm.alpha.is_finite() && prm.alpha > 0.0 {
        Ok(prm.alpha)
    } else {
        Err(SymmetryError::Scale(prm.alpha))
    }
}

pub fn lms_map_point(x: &ExtendedPoint, prm: &LmsParams, n: f64) -> Result<ExtendedPoint, SymmetryError> {
    let a = check_scale(prm)?;
    let e = ScalingExponents::for_exponent(n);
    let y = ExtendedPoint::new(
        a.powf(e.q) * x.q,
        a.powf(e.p) * x.p,
        a.powf(e.lq) * x.lq,
        a.powf(e.lp) * x.lp,
    );
    Ok(y)
}

fn map_checked(x: &ExtendedPoint, prm: &LmsParams, pot: Option<&MonomialPotential>) -> Result<ExtendedPoint, SymmetryError> {
    let n = pot.map(|p| p.n).unwrap_or(prm.n);
    let y = lms_map_point(x, prm, n)?;
    if let Some(pot) = pot {
        if !pot.admissible(y.q) {
            return Err(ModelError::Domain { q: y.q, n: pot.n }.into());
        }
    }
    Ok(y)
}

/// Map every state and relabel the time axis by `alpha^(1 - n/2)`.
pub fn lms_map_trajectory(traj: &ExtendedTrajectory, prm: &LmsParams, n: f64) -> Result<ExtendedTrajectory, SymmetryError> {
    let a = check_scale(prm)?;
    let tf = a.powf(ScalingExponents::for_exponent(n).t);
    let states = traj
        .states
        .iter()
        .map(|x| lms_map_point(x, prm, n))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ExtendedTrajectory { times: traj.times.iter().map(|t| tf * t).collect(), states })
}

/// Same as [`lms_map_trajectory`] but rejects images outside the potential's
/// domain.
pub fn lms_map_trajectory_checked(
    traj: &ExtendedTrajectory,
    prm: &LmsParams,
    pot: &MonomialPotential,
) -> Result<ExtendedTrajectory, SymmetryError> {
    for x in &traj.states {
        map_checked(x, prm, Some(pot))?;
    }
    lms_map_trajectory(traj, prm, pot.n)
}

/// First-order variation in terms of `alpha_tilde = beta (n-2)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmsVariation {
    pub dq: f64,
    pub dp: f64,
    pub dlq: f64,
    pub dlp: f64,
    /// Coefficient of `t` in `delta t`.
    pub dt_rate: f64,
}

pub fn infinitesimal_lms(x: &ExtendedPoint, prm: &LmsParams, n: f64) -> Result<LmsVariation, SymmetryError> {
    if n == 2.0 {
        return Err(SymmetryError::HarmonicCase);
    }
    let at = prm.alpha_tilde;
    let d = 2.0 - n;
    Ok(LmsVariation {
        dq: -2.0 * at * x.q / d,
        dp: -n * at * x.p / d,
        dlq: 2.0 * at * x.lq / d,
        dlp: n * at * x.lp / d,
        dt_rate: -at,
    })
}

pub fn lagrangian(x: &ExtendedPoint, pot: &MonomialPotential) -> Result<f64, ModelError> {
    Ok(0.5 * x.p * x.p - pot.value(x.q)?)
}

/// Integrand of the extended action after eliminating `lambda_p'` and `q'`:
/// `-lambda_p' q' + g q^(n-2) lambda_p q = lambda_q p + lambda_p V'(q)`.
pub fn kvn_lagrangian(x: &ExtendedPoint, pot: &MonomialPotential) -> Result<f64, ModelError> {
    let (d1, _) = pot.derivs(x.q)?;
    Ok(x.lq * x.p + x.lp * d1)
}

/// Composite Simpson rule on arbitrary (monotone) abscissae. An odd number
/// of intervals is closed with the quadratic through the last three points.
pub fn simpson_nonuniform(x: &[f64], f: &[f64]) -> f64 {
    assert_eq!(x.len(), f.len());
    let n = x.len();
    if n < 2 {
        return 0.0;
    }
    if n == 2 {
        return 0.5 * (x[1] - x[0]) * (f[0] + f[1]);
    }
    let intervals = n - 1;
    let mut s = 0.0;
    let mut i = 0;
    while i + 2 < n {
        let h0 = x[i + 1] - x[i];
        let h1 = x[i + 2] - x[i + 1];
        let hs = h0 + h1;
        s += hs / 6.0 * ((2.0 - h1 / h0) * f[i] + hs * hs / (h0 * h1) * f[i + 1] + (2.0 - h0 / h1) * f[i + 2]);
        i += 2;
    }
    if intervals % 2 == 1 {
        let h0 = x[n - 2] - x[n - 3];
        let h1 = x[n - 1] - x[n - 2];
        s += f[n - 1] * (2.0 * h1 * h1 + 3.0 * h0 * h1) / (6.0 * (h0 + h1))
            + f[n - 2] * (h1 * h1 + 3.0 * h1 * h0) / (6.0 * h0)
            - f[n - 3] * h1 * h1 * h1 / (6.0 * h0 * (h0 + h1));
    }
    s
}

fn integrate_along<F>(traj: &ExtendedTrajectory, density: F) -> Result<f64, SymmetryError>
where
    F: Fn(&ExtendedPoint) -> Result<f64, ModelError>,
{
    if traj.len() < MIN_ACTION_SAMPLES {
        return Err(SymmetryError::InsufficientResolution(traj.len()));
    }
    let f = traj.states.iter().map(&density).collect::<Result<Vec<_>, _>>()?;
    Ok(simpson_nonuniform(&traj.times, &f))
}

/// `S = int (q'^2/2 - V(q)) dt` with `q' = p`.
pub fn action_standard(traj: &ExtendedTrajectory, pot: &MonomialPotential) -> Result<f64, SymmetryError> {
    integrate_along(traj, |x| lagrangian(x, pot))
}

/// Extended action `int (lambda_q p + lambda_p V'(q)) dt`.
pub fn action_kvn(traj: &ExtendedTrajectory, pot: &MonomialPotential) -> Result<f64, SymmetryError> {
    integrate_along(traj, |x| kvn_lagrangian(x, pot))
}

/// Exponent of `S' / S` under the finite map, expected `1 + n/2`.
pub fn check_action_scaling(
    traj: &ExtendedTrajectory,
    pot: &MonomialPotential,
    prm: &LmsParams,
) -> Result<ScalingReport, SymmetryError> {
    let a = check_scale(prm)?;
    if a.ln() == 0.0 {
        return Err(SymmetryError::DegenerateAction("ln(alpha) = 0".into()));
    }
    let s = action_standard(traj, pot)?;
    if s.abs() <= 1e-8 {
        return Err(SymmetryError::DegenerateAction(format!("|S| = {:e} too small", s.abs())));
    }
    let mapped = lms_map_trajectory_checked(traj, prm, pot)?;
    let s2 = action_standard(&mapped, pot)?;
    let ratio = s2 / s;
    if ratio <= 0.0 {
        return Err(SymmetryError::DegenerateAction(format!("S'/S = {ratio} is not positive")));
    }
    let measured = ratio.ln() / a.ln();
    let expected = 1.0 + pot.n / 2.0;
    Ok(ScalingReport { measured_exponent: measured, expected_exponent: expected, residual: (measured - expected).abs() })
}

/// `(standard, extended)` factors on the fundamental brackets: `{q', p'}`
/// picks up `alpha^(1+n/2)`, while `{q', lambda_q'}` and `{p', lambda_p'}`
/// stay exactly one. The standard factor is one only for `n = -2`.
pub fn bracket_change(prm: &LmsParams, n: f64) -> (f64, f64) {
    let e = ScalingExponents::for_exponent(n);
    let standard = (prm.beta * (e.q + e.p)).exp();
    let extended = (prm.beta * (e.q + e.lq)).exp() * (prm.beta * (e.p + e.lp)).exp();
    (standard, extended)
}

/// Diagonal Jacobian of the finite map in `(q, p, lambda_q, lambda_p)` order.
pub fn extended_jacobian(prm: &LmsParams, n: f64) -> [[f64; 4]; 4] {
    let e = ScalingExponents::for_exponent(n);
    let d = [e.q, e.p, e.lq, e.lp].map(|k| (prm.beta * k).exp());
    let mut j = [[0.0; 4]; 4];
    for i in 0..4 {
        j[i][i] = d[i];
    }
    j
}

/// Extended symplectic form pairing `(q, lambda_q)` and `(p, lambda_p)`.
pub fn extended_form() -> [[f64; 4]; 4] {
    let mut w = [[0.0; 4]; 4];
    w[0][2] = 1.0;
    w[2][0] = -1.0;
    w[1][3] = 1.0;
    w[3][1] = -1.0;
    w
}

/// `J^T W J` for a 4x4 matrix.
pub fn pullback_form(j: &[[f64; 4]; 4], w: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
    let mut out = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            let mut s = 0.0;
            for c in 0..4 {
                for d in 0..4 {
                    s += j[c][a] * w[c][d] * j[d][b];
                }
            }
            out[a][b] = s;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{integrate_sampled, uniform_times, IntegratorConfig};
    use std::f64::consts::PI;

    #[test]
    fn point_map_examples() {
        let x = ExtendedPoint::new(1.0, 1.0, 1.0, 1.0);
        let id = LmsParams::from_alpha(1.0, 4.0);
        assert_eq!(lms_map_point(&x, &id, 4.0).unwrap(), x);
        let y = lms_map_point(&x, &LmsParams::from_alpha(2.0, 2.0), 2.0).unwrap();
        assert!(y.max_abs_diff(&ExtendedPoint::new(2.0, 2.0, 0.5, 0.5)) < 1e-15);
        let y = lms_map_point(&x, &LmsParams::from_alpha(4.0, -2.0), -2.0).unwrap();
        assert!(y.max_abs_diff(&ExtendedPoint::new(4.0, 0.25, 0.25, 4.0)) < 1e-15);
    }

    #[test]
    fn trajectory_time_laws() {
        let tr = ExtendedTrajectory { times: vec![0.0, 1.0, 2.0], states: vec![ExtendedPoint::new(1.0, 0.0, 0.0, 0.0); 3] };
        let m = lms_map_trajectory(&tr, &LmsParams::from_alpha(3.0, 2.0), 2.0).unwrap();
        assert_eq!(m.times, tr.times);
        let m = lms_map_trajectory(&tr, &LmsParams::from_alpha(4.0, -1.0), -1.0).unwrap();
        for (a, b) in m.times.iter().zip([0.0, 8.0, 16.0]) {
            assert!((a - b).abs() < 1e-13);
        }
        let m = lms_map_trajectory(&tr, &LmsParams::from_alpha(1.0, 4.0), 4.0).unwrap();
        assert_eq!(m, tr);
    }

    #[test]
    fn infinitesimal_examples() {
        let x = ExtendedPoint::new(1.0, 1.0, 1.0, 1.0);
        let prm = |at: f64, n: f64| LmsParams { alpha: 1.0, beta: 2.0 * at / (n - 2.0), alpha_tilde: at, n };
        let v = infinitesimal_lms(&x, &prm(0.1, -2.0), -2.0).unwrap();
        assert!((v.dq + 0.05).abs() < 1e-16);
        let v = infinitesimal_lms(&x, &prm(0.0, 3.0), 3.0).unwrap();
        assert_eq!((v.dq, v.dp, v.dlq, v.dlp), (0.0, 0.0, 0.0, 0.0));
        let v = infinitesimal_lms(&x, &prm(0.1, 4.0), 4.0).unwrap();
        assert!((v.dq - 0.1).abs() < 1e-16 && (v.dp - 0.2).abs() < 1e-16);
        assert_eq!(infinitesimal_lms(&x, &LmsParams::from_beta(0.1, 2.0), 2.0), Err(SymmetryError::HarmonicCase));
    }

    #[test]
    fn infinitesimal_matches_finite_to_first_order() {
        let x = ExtendedPoint::new(1.3, -0.4, 0.6, 2.0);
        let beta = 1e-6;
        for n in [-2.0, -1.0, 1.0, 3.0, 4.0] {
            let prm = LmsParams::from_beta(beta, n);
            let y = lms_map_point(&x, &prm, n).unwrap();
            let v = infinitesimal_lms(&x, &prm, n).unwrap();
            for (fin, inf) in [(y.q - x.q, v.dq), (y.p - x.p, v.dp), (y.lq - x.lq, v.dlq), (y.lp - x.lp, v.dlp)] {
                assert!((fin - inf).abs() < 10.0 * beta * beta, "n={n}: {fin} vs {inf}");
            }
            // delta t = beta (2-n)/2 t = -alpha_tilde t
            assert!((v.dt_rate - beta * (2.0 - n) / 2.0).abs() < 1e-20);
        }
    }

    #[test]
    fn simpson_exact_on_quadratics() {
        // irregular spacing, both parities of the interval count
        let x: Vec<f64> = vec![0.0, 0.1, 0.35, 0.5, 0.9, 1.0, 1.4, 2.0];
        for k in 0..3 {
            let f: Vec<f64> = x.iter().map(|t| t.powi(k)).collect();
            let odd = simpson_nonuniform(&x, &f);
            let even = simpson_nonuniform(&x[..7], &f[..7]);
            assert!((odd - 2.0f64.powi(k + 1) / (k + 1) as f64).abs() < 1e-13, "k={k}");
            assert!((even - 1.4f64.powi(k + 1) / (k + 1) as f64).abs() < 1e-13, "k={k}");
        }
    }

    #[test]
    fn harmonic_action_examples() {
        let pot = MonomialPotential::harmonic(1.0);
        let cfg = IntegratorConfig::default();
        let tr = integrate_sampled(&ExtendedPoint::new(1.0, 0.0, 0.0, 0.0), &pot, &uniform_times(2.0 * PI, 401), &cfg).unwrap();
        assert!(action_standard(&tr, &pot).unwrap().abs() < 1e-6);
        assert_eq!(action_kvn(&tr, &pot).unwrap(), 0.0);

        // static point at the minimum
        let quartic = MonomialPotential::new(1.0, 4.0).unwrap();
        let still = ExtendedTrajectory { times: uniform_times(3.0, 201), states: vec![ExtendedPoint::new(0.0, 0.0, 0.0, 0.0); 201] };
        assert_eq!(action_standard(&still, &quartic).unwrap(), 0.0);
        let offset = ExtendedTrajectory { times: uniform_times(3.0, 201), states: vec![ExtendedPoint::new(0.5, 0.0, 0.0, 0.0); 201] };
        let s = action_standard(&offset, &quartic).unwrap();
        assert!((s + quartic.value(0.5).unwrap() * 3.0).abs() < 1e-14);

        let tr = integrate_sampled(&ExtendedPoint::new(0.8, 0.3, 0.0, 0.0), &quartic, &uniform_times(2.5, 501), &cfg).unwrap();
        let s1 = action_standard(&tr, &quartic).unwrap();
        let s2 = action_standard(&tr.time_reversed(), &quartic).unwrap();
        assert!((s1 - s2).abs() < 1e-12);

        let short = ExtendedTrajectory { times: vec![0.0, 1.0], states: vec![ExtendedPoint::new(0.0, 0.0, 0.0, 0.0); 2] };
        assert!(matches!(action_standard(&short, &quartic), Err(SymmetryError::InsufficientResolution(2))));
    }

    #[test]
    fn kvn_action_self_convergence() {
        let pot = MonomialPotential::harmonic(1.0);
        let cfg = IntegratorConfig::default();
        let x0 = ExtendedPoint::new(1.0, 0.0, 0.0, 1.0);
        let coarse = integrate_sampled(&x0, &pot, &uniform_times(2.0 * PI, 401), &cfg).unwrap();
        let fine = integrate_sampled(&x0, &pot, &uniform_times(2.0 * PI, 801), &cfg).unwrap();
        let a = action_kvn(&coarse, &pot).unwrap();
        let b = action_kvn(&fine, &pot).unwrap();
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }

    #[test]
    fn scaling_report_examples() {
        let cfg = IntegratorConfig::default();
        let pot = MonomialPotential::harmonic(1.0);
        let tr = integrate_sampled(&ExtendedPoint::new(1.0, 0.0, 0.0, 0.0), &pot, &uniform_times(1.0, 201), &cfg).unwrap();
        let r = check_action_scaling(&tr, &pot, &LmsParams::from_alpha(2.0, 2.0)).unwrap();
        assert!((r.measured_exponent - 2.0).abs() < 1e-10, "{r:?}");
        assert!(matches!(
            check_action_scaling(&tr, &pot, &LmsParams::from_alpha(1.0, 2.0)),
            Err(SymmetryError::DegenerateAction(_))
        ));

        let inv = MonomialPotential::new(-1.0, -2.0).unwrap();
        let tr = integrate_sampled(&ExtendedPoint::new(1.0, -0.5, 0.0, 0.0), &inv, &uniform_times(1.5, 201), &cfg).unwrap();
        let r = check_action_scaling(&tr, &inv, &LmsParams::from_alpha(1.7, -2.0)).unwrap();
        assert!(r.measured_exponent.abs() < 1e-10 && r.expected_exponent == 0.0);
    }

    #[test]
    fn bracket_examples() {
        let (s, e) = bracket_change(&LmsParams::from_beta(0.3, -2.0), -2.0);
        assert_eq!((s, e), (1.0, 1.0));
        let (s, e) = bracket_change(&LmsParams::from_beta(0.01, 2.0), 2.0);
        assert_eq!(s, 0.02f64.exp());
        assert!((s - 1.02).abs() < 3e-4);
        assert_eq!(e, 1.0);
        for n in [-1.0, 1.0, 3.0, 4.0, 2.5] {
            assert_eq!(bracket_change(&LmsParams::from_beta(0.7, n), n).1, 1.0);
            assert!(ScalingExponents::for_exponent(n).preserves_extended_form());
        }
    }

    #[test]
    fn jacobian_pullback() {
        let prm = LmsParams::from_alpha(1.3, 4.0);
        let j = extended_jacobian(&prm, 4.0);
        let w = extended_form();
        let pb = pullback_form(&j, &w);
        for a in 0..4 {
            for b in 0..4 {
                assert!((pb[a][b] - w[a][b]).abs() < 1e-15);
            }
        }
    }
}
