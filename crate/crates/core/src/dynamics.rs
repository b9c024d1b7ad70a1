//! Classical and extended equations of motion.
//!
//! The extended system is Hamilton's equations of the Liouvillian
//! `L = lambda_q p - lambda_p V'(q)` under the extended brackets:
//!
//! ```text
//! q' = p,  p' = -V'(q),  lambda_q' = lambda_p V''(q),  lambda_p' = -lambda_q
//! ```
//!
//! The lambda sector is the cotangent lift of the ordinary flow, so the
//! pairing `lambda . delta(q, p)` is invariant along it.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::integrator::{Dopri5, StepError};
use crate::model::{ExtendedPoint, ModelError, MonomialPotential, PhasePoint};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("trajectory reached the singular point: |q| = {q:e} < rmin at t = {t}")]
    SingularityAbort { t: f64, q: f64 },
    #[error("error control failed at t = {t}: {reason}")]
    StepFailure { t: f64, reason: String },
    #[error("invalid horizon {0}")]
    Horizon(f64),
    #[error("invalid integrator configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    /// Initial trial step.
    pub dt: f64,
    /// Local error target per step.
    pub tol: f64,
    /// Singularity guard radius for potentials that blow up at the origin.
    pub rmin: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { dt: 1e-2, tol: 1e-12, rmin: 1e-6 }
    }
}

impl IntegratorConfig {
    fn validate(&self) -> Result<(), DynamicsError> {
        for (name, v) in [("dt", self.dt), ("tol", self.tol), ("rmin", self.rmin)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(DynamicsError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    fn stepper(&self) -> Dopri5 {
        Dopri5 { h0: self.dt, tol: self.tol, ..Dopri5::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtendedTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<ExtendedPoint>,
}

impl ExtendedTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&ExtendedPoint> {
        self.states.last()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &ExtendedPoint)> {
        self.times.iter().copied().zip(self.states.iter())
    }

    /// Times strictly monotone (increasing, or decreasing for backward runs)
    /// and all states finite.
    pub fn is_valid(&self) -> bool {
        if self.times.len() != self.states.len() || self.times.is_empty() {
            return false;
        }
        let inc = self.times.windows(2).all(|w| w[1] > w[0]);
        let dec = self.times.windows(2).all(|w| w[1] < w[0]);
        (inc || dec) && self.states.iter().all(ExtendedPoint::is_finite)
    }

    /// Time-reversed relabeling: `t -> -t`, `p -> -p`, `lambda_q -> -lambda_q`.
    /// The result is again a solution of the extended equations.
    pub fn time_reversed(&self) -> Self {
        let t_end = self.times.last().copied().unwrap_or(0.0);
        let mut times = Vec::with_capacity(self.len());
        let mut states = Vec::with_capacity(self.len());
        for (t, x) in self.times.iter().zip(&self.states).rev() {
            times.push(t_end - t);
            states.push(ExtendedPoint::new(x.q, -x.p, -x.lq, x.lp));
        }
        Self { times, states }
    }
}

fn singular_at_origin(pot: &MonomialPotential) -> bool {
    pot.integer_exponent().is_none()
}

/// Rates `(q', p', lambda_q', lambda_p')` at `x`.
pub fn eom_rhs(x: &ExtendedPoint, pot: &MonomialPotential) -> Result<ExtendedPoint, DynamicsError> {
    let (d1, d2) = pot.derivs(x.q)?;
    Ok(ExtendedPoint::new(x.p, -d1, x.lp * d2, -x.lq))
}

fn guarded_rhs(
    pot: &MonomialPotential,
    rmin: f64,
) -> impl Fn(f64, &[f64; 4]) -> Result<[f64; 4], DynamicsError> + '_ {
    let guard = singular_at_origin(pot);
    move |t, y| {
        if guard && y[0].abs() < rmin {
            return Err(DynamicsError::SingularityAbort { t, q: y[0] });
        }
        eom_rhs(&ExtendedPoint::from_array(*y), pot).map(|r| r.to_array())
    }
}

fn lift(t: f64, e: StepError<DynamicsError>) -> DynamicsError {
    match e {
        StepError::Rhs(e) => e,
        StepError::Underflow { t, h } => {
            DynamicsError::StepFailure { t, reason: format!("step size underflow (h = {h:e})") }
        }
        StepError::Budget(n) => DynamicsError::StepFailure { t, reason: format!("{n} steps exhausted") },
    }
}

fn check_start(x0: &ExtendedPoint, pot: &MonomialPotential, cfg: &IntegratorConfig) -> Result<(), DynamicsError> {
    cfg.validate()?;
    if !x0.is_finite() {
        return Err(DynamicsError::Config("non-finite initial state".into()));
    }
    if !pot.admissible(x0.q) {
        return Err(ModelError::Domain { q: x0.q, n: pot.n }.into());
    }
    if singular_at_origin(pot) && x0.q.abs() < cfg.rmin {
        return Err(DynamicsError::SingularityAbort { t: 0.0, q: x0.q });
    }
    Ok(())
}

/// Integrate the extended system on `[0, horizon]`, recording every accepted
/// step.
pub fn integrate(
    x0: &ExtendedPoint,
    pot: &MonomialPotential,
    horizon: f64,
    cfg: &IntegratorConfig,
) -> Result<ExtendedTrajectory, DynamicsError> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(DynamicsError::Horizon(horizon));
    }
    check_start(x0, pot, cfg)?;
    let (times, ys) = cfg
        .stepper()
        .solve_steps(guarded_rhs(pot, cfg.rmin), 0.0, x0.to_array(), horizon)
        .map_err(|e| lift(horizon, e))?;
    Ok(ExtendedTrajectory { times, states: ys.into_iter().map(ExtendedPoint::from_array).collect() })
}

/// Integrate the extended system and report the state exactly at each of
/// `times` (monotone, starting at or after 0 in the direction of travel).
pub fn integrate_sampled(
    x0: &ExtendedPoint,
    pot: &MonomialPotential,
    times: &[f64],
    cfg: &IntegratorConfig,
) -> Result<ExtendedTrajectory, DynamicsError> {
    check_start(x0, pot, cfg)?;
    let ys = cfg
        .stepper()
        .solve_at(guarded_rhs(pot, cfg.rmin), 0.0, x0.to_array(), times)
        .map_err(|e| lift(times.last().copied().unwrap_or(0.0), e))?;
    Ok(ExtendedTrajectory {
        times: times.to_vec(),
        states: ys.into_iter().map(ExtendedPoint::from_array).collect(),
    })
}

/// Uniform grid `0, T/k, ..., T` with `k = samples - 1`.
pub fn uniform_times(horizon: f64, samples: usize) -> Vec<f64> {
    let k = samples.max(2) - 1;
    (0..=k).map(|i| horizon * i as f64 / k as f64).collect()
}

/// Classical flow of `(q, p)` by time `t` (either sign).
pub fn flow_map(
    x0: &PhasePoint,
    pot: &MonomialPotential,
    t: f64,
    cfg: &IntegratorConfig,
) -> Result<PhasePoint, DynamicsError> {
    let start = ExtendedPoint::from_phase(*x0);
    if t == 0.0 {
        check_start(&start, pot, cfg)?;
        return Ok(*x0);
    }
    if !t.is_finite() {
        return Err(DynamicsError::Horizon(t));
    }
    let tr = integrate_sampled(&start, pot, &[t], cfg)?;
    Ok(tr.states[0].phase())
}

/// Time scale used for test horizons: `2 pi / sqrt(g)` for the oscillator;
/// otherwise the period of one detected turning-point cycle. Orbits without
/// a cycle inside the search window fall back to `|q0| / sqrt(2 |H|)`.
pub fn characteristic_time(
    x0: &PhasePoint,
    pot: &MonomialPotential,
    cfg: &IntegratorConfig,
) -> Result<f64, DynamicsError> {
    if pot.is_harmonic() && pot.g > 0.0 {
        return Ok(2.0 * std::f64::consts::PI / pot.g.sqrt());
    }
    let energy = pot.energy(x0)?;
    let fallback = || {
        let scale = if energy != 0.0 { x0.q.abs() / (2.0 * energy.abs()).sqrt() } else { 1.0 };
        if scale.is_finite() && scale > 0.0 {
            scale
        } else {
            1.0
        }
    };
    if let Some(period) = detect_cycle(x0, pot, cfg, 50.0 * fallback()) {
        return Ok(period);
    }
    Ok(fallback())
}

/// `periods` characteristic times, halved until the extended orbit from
/// `x0` integrates without error and stays within `|q| <= radius`. Unbounded
/// and collapsing orbits thus get the longest horizon they survive.
pub fn survivable_horizon(
    x0: &ExtendedPoint,
    pot: &MonomialPotential,
    periods: f64,
    radius: f64,
    cfg: &IntegratorConfig,
) -> Result<f64, DynamicsError> {
    check_start(x0, pot, cfg)?;
    let mut t = periods * characteristic_time(&x0.phase(), pot, cfg)?;
    for _ in 0..60 {
        if let Ok(tr) = integrate(x0, pot, t, cfg) {
            if tr.states.iter().all(|x| x.q.abs() <= radius) {
                return Ok(t);
            }
        }
        t *= 0.5;
    }
    Err(DynamicsError::Horizon(t))
}

/// Period of one turning-point cycle, from the zeros of `p` along a trial
/// run. Zeros are located on the cubic Hermite interpolant of `p(t)`.
fn detect_cycle(x0: &PhasePoint, pot: &MonomialPotential, cfg: &IntegratorConfig, window: f64) -> Option<f64> {
    let tr = integrate(&ExtendedPoint::from_phase(*x0), pot, window, cfg).ok()?;
    let mut zeros = Vec::new();
    for (ts, xs) in tr.times.windows(2).zip(tr.states.windows(2)) {
        let (p0, p1) = (xs[0].p, xs[1].p);
        if p1 == 0.0 || p0 == 0.0 || p0.signum() == p1.signum() {
            continue;
        }
        let h = ts[1] - ts[0];
        let d0 = -pot.derivs(xs[0].q).ok()?.0 * h;
        let d1 = -pot.derivs(xs[1].q).ok()?.0 * h;
        let hermite = |s: f64| {
            let s2 = s * s;
            let s3 = s2 * s;
            (2.0 * s3 - 3.0 * s2 + 1.0) * p0 + (s3 - 2.0 * s2 + s) * d0 + (-2.0 * s3 + 3.0 * s2) * p1 + (s3 - s2) * d1
        };
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if hermite(mid).signum() == p0.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        zeros.push(ts[0] + 0.5 * (lo + hi) * h);
    }
    if x0.p == 0.0 {
        zeros.get(1).copied()
    } else if zeros.len() >= 3 {
        Some(zeros[2] - zeros[0])
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn pot(g: f64, n: f64) -> MonomialPotential {
        MonomialPotential::new(g, n).unwrap()
    }

    #[test]
    fn rhs_examples() {
        let r = eom_rhs(&ExtendedPoint::new(1.0, 0.0, 0.0, 1.0), &pot(1.0, 2.0)).unwrap();
        assert_eq!(r, ExtendedPoint::new(0.0, -1.0, 1.0, 0.0));
        let r = eom_rhs(&ExtendedPoint::new(1.0, 1.0, 1.0, 0.0), &pot(1.0, 1.0)).unwrap();
        assert_eq!(r, ExtendedPoint::new(1.0, -1.0, 0.0, -1.0));
        for v in [pot(1.0, 4.0), pot(2.0, -2.0), pot(0.5, 3.0)] {
            let r = eom_rhs(&ExtendedPoint::new(1.0, 0.0, 0.0, 0.0), &v).unwrap();
            assert_eq!(r, ExtendedPoint::new(0.0, -v.derivs(1.0).unwrap().0, 0.0, 0.0));
        }
        assert!(eom_rhs(&ExtendedPoint::new(-1.0, 0.0, 0.0, 0.0), &pot(1.0, -2.0)).is_err());
    }

    #[test]
    fn harmonic_period() {
        let cfg = IntegratorConfig::default();
        let tr = integrate(&ExtendedPoint::new(1.0, 0.0, 0.0, 0.0), &pot(1.0, 2.0), 2.0 * PI, &cfg).unwrap();
        let x = tr.last().unwrap();
        assert!((x.q - 1.0).abs() < 1e-8 && x.p.abs() < 1e-8, "{x:?}");
        assert!(tr.is_valid());
        assert_eq!(tr.states[0], ExtendedPoint::new(1.0, 0.0, 0.0, 0.0));

        let tr = integrate(&ExtendedPoint::new(0.0, 0.0, 1.0, 0.0), &pot(1.0, 2.0), 2.0 * PI, &cfg).unwrap();
        let x = tr.last().unwrap();
        assert!((x.lq - 1.0).abs() < 1e-8 && x.lp.abs() < 1e-8, "{x:?}");
    }

    #[test]
    fn tiny_horizon_is_identity() {
        let x0 = ExtendedPoint::new(0.7, -0.2, 0.3, 1.1);
        let tr = integrate(&x0, &pot(1.0, 4.0), 1e-12, &IntegratorConfig::default()).unwrap();
        assert!(tr.last().unwrap().max_abs_diff(&x0) < 1e-10);
    }

    #[test]
    fn flow_map_examples() {
        let cfg = IntegratorConfig::default();
        let y = flow_map(&PhasePoint::new(1.0, 0.0), &pot(1.0, 2.0), PI / 2.0, &cfg).unwrap();
        assert!(y.q.abs() < 1e-8 && (y.p + 1.0).abs() < 1e-8);
        let x = PhasePoint::new(0.3, 0.9);
        assert_eq!(flow_map(&x, &pot(1.0, 4.0), 0.0, &cfg).unwrap(), x);

        let v = pot(1.0, -2.0);
        let x = PhasePoint::new(1.0, 1.5);
        let y = flow_map(&x, &v, 2.0, &cfg).unwrap();
        let back = flow_map(&y, &v, -2.0, &cfg).unwrap();
        assert!((back.q - x.q).abs() < 1e-8 && (back.p - x.p).abs() < 1e-8);
    }

    #[test]
    fn singularity_aborts() {
        // attractive inverse square falling in
        let r = integrate(
            &ExtendedPoint::new(1.0, -0.2, 0.0, 0.0),
            &pot(1.0, -2.0),
            10.0,
            &IntegratorConfig::default(),
        );
        assert!(matches!(r, Err(DynamicsError::SingularityAbort { .. })), "{r:?}");
        let r = integrate(&ExtendedPoint::new(1.0, 0.0, 0.0, 0.0), &pot(1.0, 2.0), -1.0, &IntegratorConfig::default());
        assert!(matches!(r, Err(DynamicsError::Horizon(_))));
    }

    #[test]
    fn characteristic_times() {
        let cfg = IntegratorConfig::default();
        let t = characteristic_time(&PhasePoint::new(1.0, 0.0), &pot(4.0, 2.0), &cfg).unwrap();
        assert!((t - PI).abs() < 1e-15);
        // quartic period from (1, 0): 4 * int_0^1 dq / sqrt((1 - q^4)/2) = 4 sqrt(2) K(1/sqrt 2)/sqrt 2 ...
        // compare against a direct quadrature instead of a closed form
        let t = characteristic_time(&PhasePoint::new(1.0, 0.0), &pot(1.0, 4.0), &cfg).unwrap();
        let n = 200_000;
        let mut s = 0.0;
        for i in 0..n {
            // q = sin(theta) removes the endpoint singularity
            let th = (i as f64 + 0.5) / n as f64 * PI / 2.0;
            let q = th.sin();
            s += th.cos() / ((1.0 - q.powi(4)) / 2.0).sqrt();
        }
        let quad = 4.0 * s * (PI / 2.0) / n as f64;
        assert!((t - quad).abs() < 1e-7, "{t} vs {quad}");
    }
}
