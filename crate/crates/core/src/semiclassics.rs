//! Bohr-Sommerfeld actions and the Newton-equivalent Hamiltonian family
//! `H_gamma = p_gamma^2 / (2 gamma m) + gamma V(q)`.
//!
//! Unlike the rest of the crate, the mass `m` is a parameter here.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::integrator::{Dopri5, StepError};
use crate::model::{LmsParams, ModelError, MonomialPotential, PhasePoint};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SemiclassicsError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("no bounded orbit for g = {g}, n = {n} at E = {energy}")]
    NoBoundOrbit { g: f64, n: f64, energy: f64 },
    #[error("energy bracket exhausted while seeking level {0}")]
    RangeExhausted(usize),
    #[error("eigenvalue iteration failed: {0}")]
    ConvergenceFailure(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("integration failed: {0}")]
    Integration(String),
}

/// Bounded orbits exist only for confining potentials: positive even `n`
/// with `g > 0`, at positive energy.
fn require_bound(pot: &MonomialPotential, e: f64) -> Result<(), SemiclassicsError> {
    let even = pot.integer_exponent().is_some_and(|k| k % 2 == 0);
    if even && pot.g > 0.0 && e > 0.0 && e.is_finite() {
        Ok(())
    } else {
        Err(SemiclassicsError::NoBoundOrbit { g: pot.g, n: pot.n, energy: e })
    }
}

/// Roots of `V(q) = E` by bisection; `q- = -q+` by parity.
pub fn turning_points(pot: &MonomialPotential, e: f64) -> Result<(f64, f64), SemiclassicsError> {
    require_bound(pot, e)?;
    let f = |q: f64| pot.value(q).map(|v| v - e);
    let mut hi: f64 = 1.0;
    while f(hi)? < 0.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(SemiclassicsError::NoBoundOrbit { g: pot.g, n: pot.n, energy: e });
        }
    }
    let mut lo = 0.0;
    while hi - lo > 1e-15 * hi.max(1e-300) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let qp = 0.5 * (lo + hi);
    Ok((-qp, qp))
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

fn action_with_nodes(pot: &MonomialPotential, e: f64, nodes: &(Vec<f64>, Vec<f64>)) -> Result<f64, SemiclassicsError> {
    let (qm, qp) = turning_points(pot, e)?;
    let (c, r) = (0.5 * (qp + qm), 0.5 * (qp - qm));
    // q = c + r sin(theta) removes the square-root endpoint behaviour
    let mut s = 0.0;
    for (x, w) in nodes.0.iter().zip(&nodes.1) {
        let th = 0.5 * PI * x;
        let q = c + r * th.sin();
        let ke = (e - pot.value(q)?).max(0.0);
        s += w * (2.0 * ke).sqrt() * r * th.cos();
    }
    Ok(2.0 * 0.5 * PI * s)
}

/// Number of quadrature nodes used by [`action_integral`].
pub const ACTION_NODES: usize = 128;

/// `J(E) = 2 int_{q-}^{q+} sqrt(2 (E - V)) dq`.
pub fn action_integral(pot: &MonomialPotential, e: f64) -> Result<f64, SemiclassicsError> {
    action_with_nodes(pot, e, &gauss_legendre(ACTION_NODES))
}

/// `J` together with the difference from a half-resolution quadrature.
pub fn action_integral_with_error(pot: &MonomialPotential, e: f64) -> Result<(f64, f64), SemiclassicsError> {
    let fine = action_integral(pot, e)?;
    let coarse = action_with_nodes(pot, e, &gauss_legendre(ACTION_NODES / 2))?;
    Ok((fine, (fine - coarse).abs()))
}

/// Least-squares slope of `ln(J(alpha^n E) / J(E))` against `ln(alpha)`.
pub fn action_scaling_exponent(pot: &MonomialPotential, e: f64, alphas: &[f64]) -> Result<f64, SemiclassicsError> {
    let j0 = action_integral(pot, e)?;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &a in alphas {
        if !(a > 0.0 && a != 1.0) {
            return Err(SemiclassicsError::Parameter(format!("scale {a}")));
        }
        let x = a.ln();
        let y = (action_integral(pot, a.powf(pot.n) * e)? / j0).ln();
        sxx += x * x;
        sxy += x * y;
    }
    if sxx == 0.0 {
        return Err(SemiclassicsError::Parameter("no scales".into()));
    }
    Ok(sxy / sxx)
}

/// Energies with `J(E) = (k + 1/2) 2 pi hbar` for `k = 0..count`.
pub fn bohr_levels(pot: &MonomialPotential, hbar: f64, count: usize) -> Result<Vec<f64>, SemiclassicsError> {
    if !(hbar.is_finite() && hbar > 0.0) {
        return Err(ModelError::Hbar(hbar).into());
    }
    require_bound(pot, 1.0)?;
    let nodes = gauss_legendre(ACTION_NODES);
    let j = |e: f64| action_with_nodes(pot, e, &nodes);
    let mut out = Vec::with_capacity(count);
    let mut lo_start = 0.0;
    for k in 0..count {
        let target = (k as f64 + 0.5) * 2.0 * PI * hbar;
        let mut hi = if lo_start > 0.0 { 2.0 * lo_start } else { 1.0 };
        let mut doublings = 0;
        while j(hi)? < target {
            hi *= 2.0;
            doublings += 1;
            if doublings > 2000 || !hi.is_finite() {
                return Err(SemiclassicsError::RangeExhausted(k));
            }
        }
        let mut lo = lo_start;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if mid > 0.0 && j(mid)? < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let e = 0.5 * (lo + hi);
        out.push(e);
        lo_start = e;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BohrViolation {
    /// `J` of the reference orbit; `None` on the analytic `n = -2` branch.
    pub action: Option<f64>,
    pub mapped_action: Option<f64>,
    /// Quadrature difference `J(alpha^n E) - J(E)`.
    pub delta_j: f64,
    /// `(alpha^(1 + n/2) - 1) J`.
    pub predicted_delta_j: f64,
    /// `delta_j / (2 pi hbar)`: shift in units of the level spacing.
    pub level_mismatch: f64,
    /// The action exponent `1 + n/2` vanishes.
    pub exact_invariance: bool,
}

/// How far the similarity map moves a quantized orbit off the quantization
/// condition. The map sends energy `E` to `alpha^n E` and the action to
/// `alpha^(1 + n/2) J`.
pub fn lms_bohr_violation(pot: &MonomialPotential, e: f64, prm: &LmsParams, hbar: f64) -> Result<BohrViolation, SemiclassicsError> {
    if !(hbar.is_finite() && hbar > 0.0) {
        return Err(ModelError::Hbar(hbar).into());
    }
    let exponent = 1.0 + pot.n / 2.0;
    if exponent == 0.0 {
        return Ok(BohrViolation {
            action: None,
            mapped_action: None,
            delta_j: 0.0,
            predicted_delta_j: 0.0,
            level_mismatch: 0.0,
            exact_invariance: true,
        });
    }
    let j = action_integral(pot, e)?;
    let jm = action_integral(pot, prm.alpha.powf(pot.n) * e)?;
    let delta = jm - j;
    Ok(BohrViolation {
        action: Some(j),
        mapped_action: Some(jm),
        delta_j: delta,
        predicted_delta_j: (prm.beta * exponent).exp_m1() * j,
        level_mismatch: delta / (2.0 * PI * hbar),
        exact_invariance: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonEquivParams {
    pub gamma: f64,
    pub mass: f64,
}

impl NewtonEquivParams {
    pub fn new(gamma: f64, mass: f64) -> Result<Self, SemiclassicsError> {
        if gamma.is_finite() && gamma > 0.0 && mass.is_finite() && mass > 0.0 {
            Ok(Self { gamma, mass })
        } else {
            Err(SemiclassicsError::Parameter(format!("gamma {gamma}, mass {mass}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewtonEquivReport {
    pub times: Vec<f64>,
    pub q_gamma: Vec<f64>,
    pub q_standard: Vec<f64>,
    /// `max |q_gamma - q_standard|`.
    pub max_q_diff: f64,
    /// `max |p_gamma - gamma p|`.
    pub max_momentum_dev: f64,
    /// `max |H_gamma - gamma H_standard|`.
    pub max_energy_dev: f64,
}

fn integrate_pair(
    rhs: impl Fn(&[f64; 2]) -> Result<[f64; 2], ModelError>,
    y0: [f64; 2],
    times: &[f64],
    tol: f64,
) -> Result<Vec<[f64; 2]>, SemiclassicsError> {
    let ig = Dopri5 { tol, ..Dopri5::default() };
    ig.solve_at(|_, y| rhs(y), 0.0, y0, times).map_err(|e| match e {
        StepError::Rhs(m) => SemiclassicsError::Model(m),
        other => SemiclassicsError::Integration(format!("{other:?}")),
    })
}

/// Integrate `H_gamma` from `(q0, gamma p0)` and the standard Hamiltonian
/// from `(q0, p0)`, where `x0.p` is the standard momentum `m qdot`, and
/// compare at `samples` uniform times on `[0, horizon]`.
pub fn newton_equiv_trajectory_check(
    pot: &MonomialPotential,
    prm: &NewtonEquivParams,
    x0: &PhasePoint,
    horizon: f64,
    samples: usize,
    tol: f64,
) -> Result<NewtonEquivReport, SemiclassicsError> {
    let NewtonEquivParams { gamma, mass } = *prm;
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(SemiclassicsError::Parameter(format!("horizon {horizon}")));
    }
    let times = crate::dynamics::uniform_times(horizon, samples);
    let st = integrate_pair(|y| Ok([y[1] / mass, -pot.derivs(y[0])?.0]), [x0.q, x0.p], &times, tol)?;
    let ga = integrate_pair(
        |y| Ok([y[1] / (gamma * mass), -gamma * pot.derivs(y[0])?.0]),
        [x0.q, gamma * x0.p],
        &times,
        tol,
    )?;
    let mut rep = NewtonEquivReport {
        times: times.clone(),
        q_gamma: ga.iter().map(|y| y[0]).collect(),
        q_standard: st.iter().map(|y| y[0]).collect(),
        max_q_diff: 0.0,
        max_momentum_dev: 0.0,
        max_energy_dev: 0.0,
    };
    for (a, b) in ga.iter().zip(&st) {
        let h_g = a[1] * a[1] / (2.0 * gamma * mass) + gamma * pot.value(a[0])?;
        let h_s = b[1] * b[1] / (2.0 * mass) + pot.value(b[0])?;
        rep.max_q_diff = rep.max_q_diff.max((a[0] - b[0]).abs());
        rep.max_momentum_dev = rep.max_momentum_dev.max((a[1] - gamma * b[1]).abs());
        rep.max_energy_dev = rep.max_energy_dev.max((h_g - gamma * h_s).abs());
    }
    Ok(rep)
}

/// Exponent `kappa` in `E_k(gamma) = gamma^kappa E_k(1)`:
/// rescaling `q -> gamma^(-2/(n+2)) q` maps `H_gamma` to
/// `gamma^((2-n)/(n+2)) H_1`.
pub fn spectral_scaling_exponent(n: f64) -> f64 {
    (2.0 - n) / (n + 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenGrid {
    /// Interior points of the fine grid.
    pub count: usize,
    /// Box half-width; `None` uses eight natural lengths.
    pub half_width: Option<f64>,
}

impl Default for EigenGrid {
    fn default() -> Self {
        Self { count: 4000, half_width: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenResult {
    pub eigenvalues: Vec<f64>,
    /// `|E(h) - E(2h)| / 3` per level (second-order scheme).
    pub error_estimate: Vec<f64>,
    pub half_width: f64,
    pub count: usize,
    /// Natural length `l` with `hbar^2/(2 gamma m l^2) = gamma V(l)`.
    pub length_scale: f64,
    /// RMS position spread of the ground state.
    pub ground_width: f64,
}

struct Tridiagonal {
    diag: Vec<f64>,
    off: f64,
}

impl Tridiagonal {
    /// Number of eigenvalues below `x` (Sturm sequence).
    fn count_below(&self, x: f64) -> usize {
        let mut d = 1.0;
        let mut neg = 0;
        let o2 = self.off * self.off;
        for (i, a) in self.diag.iter().enumerate() {
            d = a - x - if i == 0 { 0.0 } else { o2 / d };
            if d == 0.0 {
                d = -1e-300;
            }
            if d < 0.0 {
                neg += 1;
            }
        }
        neg
    }

    fn bounds(&self) -> (f64, f64) {
        let r = 2.0 * self.off.abs();
        let lo = self.diag.iter().fold(f64::INFINITY, |m, a| m.min(a - r));
        let hi = self.diag.iter().fold(f64::NEG_INFINITY, |m, a| m.max(a + r));
        (lo, hi)
    }

    fn eigenvalue(&self, k: usize) -> Result<f64, SemiclassicsError> {
        let (mut lo, mut hi) = self.bounds();
        for _ in 0..300 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                return Ok(mid);
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        if hi - lo <= 1e-12 * hi.abs().max(1.0) {
            Ok(0.5 * (lo + hi))
        } else {
            Err(SemiclassicsError::ConvergenceFailure(format!("level {k} bracket [{lo}, {hi}]")))
        }
    }

    /// Inverse iteration for the eigenvector nearest `shift`.
    fn eigenvector(&self, shift: f64) -> Vec<f64> {
        let n = self.diag.len();
        let mut x = vec![1.0; n];
        for _ in 0..5 {
            // Thomas algorithm on (T - shift)
            let mut c = vec![0.0; n];
            let mut d = vec![0.0; n];
            let mut denom = self.diag[0] - shift;
            c[0] = self.off / denom;
            d[0] = x[0] / denom;
            for i in 1..n {
                denom = self.diag[i] - shift - self.off * c[i - 1];
                c[i] = self.off / denom;
                d[i] = (x[i] - self.off * d[i - 1]) / denom;
            }
            let mut y = vec![0.0; n];
            y[n - 1] = d[n - 1];
            for i in (0..n - 1).rev() {
                y[i] = d[i] - c[i] * y[i + 1];
            }
            let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            x = y.into_iter().map(|v| v / norm).collect();
        }
        x
    }
}

fn build_hamiltonian(pot: &MonomialPotential, prm: &NewtonEquivParams, hbar: f64, half: f64, count: usize) -> Result<(Tridiagonal, Vec<f64>), SemiclassicsError> {
    let h = 2.0 * half / (count + 1) as f64;
    let c = hbar * hbar / (2.0 * prm.gamma * prm.mass);
    let xs: Vec<f64> = (1..=count).map(|i| -half + i as f64 * h).collect();
    let diag = xs
        .iter()
        .map(|x| Ok(2.0 * c / (h * h) + prm.gamma * pot.value(*x)?))
        .collect::<Result<Vec<_>, ModelError>>()?;
    Ok((Tridiagonal { diag, off: -c / (h * h) }, xs))
}

/// Lowest `k` eigenvalues of `-(hbar^2 / 2 gamma m) d^2/dq^2 + gamma V(q)`
/// in a Dirichlet box, by second-order finite differences and Sturm
/// bisection. The error estimate compares with the grid of twice the spacing.
pub fn eigensolve_newton_equiv(
    pot: &MonomialPotential,
    prm: &NewtonEquivParams,
    hbar: f64,
    k: usize,
    grid: &EigenGrid,
) -> Result<EigenResult, SemiclassicsError> {
    if !(hbar.is_finite() && hbar > 0.0) {
        return Err(ModelError::Hbar(hbar).into());
    }
    require_bound(pot, 1.0)?;
    if k == 0 || 4 * k > grid.count || grid.count < 16 {
        return Err(SemiclassicsError::Parameter(format!("{k} levels on {} points", grid.count)));
    }
    let n = pot.n;
    let length = (n * hbar * hbar / (2.0 * prm.gamma * prm.gamma * prm.mass * pot.g)).powf(1.0 / (n + 2.0));
    let half = grid.half_width.unwrap_or(8.0 * length);
    // coarse grid: every other interior point, spacing doubled
    let coarse_count = (grid.count - 1) / 2;
    let fine_count = 2 * coarse_count + 1;
    let (fine, xs) = build_hamiltonian(pot, prm, hbar, half, fine_count)?;
    let (coarse, _) = build_hamiltonian(pot, prm, hbar, half, coarse_count)?;
    let mut eigenvalues = Vec::with_capacity(k);
    let mut error_estimate = Vec::with_capacity(k);
    for level in 0..k {
        let ef = fine.eigenvalue(level)?;
        let ec = coarse.eigenvalue(level)?;
        eigenvalues.push(ef);
        error_estimate.push((ef - ec).abs() / 3.0);
    }
    let shift = eigenvalues[0] - 1e-9 * eigenvalues[0].abs().max(1e-12);
    let v = fine.eigenvector(shift);
    let ground_width = (v.iter().zip(&xs).map(|(a, x)| a * a * x * x).sum::<f64>()).sqrt();
    Ok(EigenResult { eigenvalues, error_estimate, half_width: half, count: fine_count, length_scale: length, ground_width })
}
