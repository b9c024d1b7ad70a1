//! Grid realizations of extended-phase-space wave functions.
//!
//! Two representations share one container: `psi(q, p)` evolved by Liouville
//! transport, and `psi(Q, Qb)` evolved by `G = [H(Q,P) - H(Qb,Pb)] / hbar`
//! with `P = -i hbar d/dQ` and `Pb = +i hbar d/dQb`, so that
//! `[Qb, Pb] = -i hbar`. Norms use the plain measure `dx1 dx2`.
//!
//! Arrays are row-major with `axis1` as the slow index.

use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use thiserror::Error;

use crate::dynamics::{flow_map, IntegratorConfig};
use crate::fsutil::atomic_write;
use crate::model::{MonomialPotential, PhasePoint};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QgridError {
    #[error("invalid axis: {0}")]
    Axis(String),
    #[error("expected {expected:?} representation, got {found:?}")]
    WrongRepresentation { expected: Representation, found: Representation },
    #[error("profile or state is not normalizable")]
    NonNormalizable,
    #[error("amplitude array has {found} entries, grid needs {expected}")]
    Shape { expected: usize, found: usize },
    #[error("grid evolution supports n in {{1, 2, 4}}, got n = {0}")]
    UnsupportedPotential(f64),
    #[error("mapped support reaches the grid edge (edge mass fraction {0:e})")]
    SupportExit(f64),
    #[error("invalid evolution request: {0}")]
    Request(String),
    #[error("i/o: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Representation {
    /// `psi(q, p)`.
    QP,
    /// `psi(Q, Qb)`.
    QQbar,
}

/// Periodic uniform grid `x_i = center - extent/2 + i dx`, `dx = extent/count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformAxis {
    pub center: f64,
    pub extent: f64,
    pub count: usize,
}

impl UniformAxis {
    pub fn new(center: f64, extent: f64, count: usize) -> Result<Self, QgridError> {
        if !(extent.is_finite() && extent > 0.0 && center.is_finite()) {
            return Err(QgridError::Axis(format!("extent {extent}, center {center}")));
        }
        if count < 4 || !count.is_power_of_two() {
            return Err(QgridError::Axis(format!("count {count} is not a power of two >= 4")));
        }
        Ok(Self { center, extent, count })
    }

    /// Symmetric axis on `[-half_width, half_width)`.
    pub fn symmetric(half_width: f64, count: usize) -> Result<Self, QgridError> {
        Self::new(0.0, 2.0 * half_width, count)
    }

    pub fn dx(&self) -> f64 {
        self.extent / self.count as f64
    }

    pub fn start(&self) -> f64 {
        self.center - 0.5 * self.extent
    }

    pub fn point(&self, i: usize) -> f64 {
        self.start() + i as f64 * self.dx()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.point(i)).collect()
    }

    /// FFT-ordered angular wavenumbers.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.count as i64;
        let dk = 2.0 * std::f64::consts::PI / self.extent;
        (0..n).map(|m| if m < n / 2 { m as f64 * dk } else { (m - n) as f64 * dk }).collect()
    }

    fn validate(&self) -> Result<(), QgridError> {
        Self::new(self.center, self.extent, self.count).map(|_| ())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridState2D {
    pub axis1: UniformAxis,
    pub axis2: UniformAxis,
    pub amps: Vec<Complex64>,
    pub hbar: f64,
    pub rep: Representation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GridWarning {
    /// Characteristics that left the grid or failed to integrate.
    DomainExit { points: usize },
    /// Fraction of the norm in the outer quarter of the spectrum.
    Aliasing { tail_fraction: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evolution {
    pub state: GridState2D,
    pub warnings: Vec<GridWarning>,
}

impl GridState2D {
    pub fn new(
        axis1: UniformAxis,
        axis2: UniformAxis,
        amps: Vec<Complex64>,
        hbar: f64,
        rep: Representation,
    ) -> Result<Self, QgridError> {
        axis1.validate()?;
        axis2.validate()?;
        let expected = axis1.count * axis2.count;
        if amps.len() != expected {
            return Err(QgridError::Shape { expected, found: amps.len() });
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(QgridError::Request(format!("hbar must be positive, got {hbar}")));
        }
        Ok(Self { axis1, axis2, amps, hbar, rep })
    }

    pub fn from_fn<F>(axis1: UniformAxis, axis2: UniformAxis, hbar: f64, rep: Representation, f: F) -> Result<Self, QgridError>
    where
        F: Fn(f64, f64) -> Complex64,
    {
        let mut amps = Vec::with_capacity(axis1.count * axis2.count);
        for i in 0..axis1.count {
            let x1 = axis1.point(i);
            for j in 0..axis2.count {
                amps.push(f(x1, axis2.point(j)));
            }
        }
        Self::new(axis1, axis2, amps, hbar, rep)
    }

    fn with_amps(&self, amps: Vec<Complex64>) -> Self {
        Self { amps, ..self.clone() }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.axis1.count, self.axis2.count)
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.amps[i * self.axis2.count + j]
    }

    pub fn cell(&self) -> f64 {
        self.axis1.dx() * self.axis2.dx()
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.cell()
    }

    pub fn normalized(&self) -> Result<Self, QgridError> {
        let n = self.norm_sq();
        if !(n.is_finite() && n > 0.0) {
            return Err(QgridError::NonNormalizable);
        }
        let s = 1.0 / n.sqrt();
        Ok(self.with_amps(self.amps.iter().map(|a| a * s).collect()))
    }

    /// `<self | other>` on the same grid.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum::<Complex64>() * self.cell()
    }

    /// `sum |psi|^2 f(x1, x2) dx1 dx2 / norm^2`.
    pub fn expectation<F: Fn(f64, f64) -> f64>(&self, f: F) -> f64 {
        let (n1, n2) = self.shape();
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..n1 {
            let x1 = self.axis1.point(i);
            for j in 0..n2 {
                let w = self.amps[i * n2 + j].norm_sqr();
                num += w * f(x1, self.axis2.point(j));
                den += w;
            }
        }
        num / den
    }

    /// Swap the two axes.
    pub fn transpose(&self) -> Self {
        let (n1, n2) = self.shape();
        let mut amps = vec![Complex64::new(0.0, 0.0); n1 * n2];
        for i in 0..n1 {
            for j in 0..n2 {
                amps[j * n1 + i] = self.amps[i * n2 + j];
            }
        }
        Self { axis1: self.axis2, axis2: self.axis1, amps, hbar: self.hbar, rep: self.rep }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// `sqrt(sum |a - b|^2 dx1 dx2)`.
    pub fn l2_distance(&self, other: &Self) -> f64 {
        (self.amps.iter().zip(&other.amps).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() * self.cell()).sqrt()
    }

    fn require(&self, rep: Representation) -> Result<(), QgridError> {
        if self.rep == rep {
            Ok(())
        } else {
            Err(QgridError::WrongRepresentation { expected: rep, found: self.rep })
        }
    }

    /// Cubic-convolution (Keys, a = -1/2) interpolation; zero outside the
    /// sampled window, `None` when the point lies off the grid.
    pub fn interpolate(&self, x1: f64, x2: f64) -> Option<Complex64> {
        let (n1, n2) = self.shape();
        let u = (x1 - self.axis1.start()) / self.axis1.dx();
        let v = (x2 - self.axis2.start()) / self.axis2.dx();
        if !(u >= 0.0 && v >= 0.0 && u <= (n1 - 1) as f64 && v <= (n2 - 1) as f64) {
            return None;
        }
        let (i0, j0) = (u.floor() as i64, v.floor() as i64);
        let (fu, fv) = (u - i0 as f64, v - j0 as f64);
        let wu = keys_weights(fu);
        let wv = keys_weights(fv);
        let mut acc = Complex64::new(0.0, 0.0);
        for (di, wi) in wu.iter().enumerate() {
            let i = i0 - 1 + di as i64;
            if i < 0 || i >= n1 as i64 {
                continue;
            }
            for (dj, wj) in wv.iter().enumerate() {
                let j = j0 - 1 + dj as i64;
                if j < 0 || j >= n2 as i64 {
                    continue;
                }
                acc += self.amps[i as usize * n2 + j as usize] * (wi * wj);
            }
        }
        Some(acc)
    }

    /// Raw little-endian complex128 array plus a JSON sidecar describing it.
    pub fn export(&self, dir: &Path, stem: &str) -> Result<(), QgridError> {
        let io = |e: std::io::Error| QgridError::Io(e.to_string());
        let mut bytes = Vec::with_capacity(self.amps.len() * 16);
        for a in &self.amps {
            bytes.extend_from_slice(&a.re.to_le_bytes());
            bytes.extend_from_slice(&a.im.to_le_bytes());
        }
        let meta = ExportMeta {
            data_file: format!("{stem}.bin"),
            layout: "row-major, axis1 slow, complex128 little-endian (re, im)".into(),
            axis1: self.axis1,
            axis2: self.axis2,
            hbar: self.hbar,
            rep: self.rep,
        };
        atomic_write(&dir.join(format!("{stem}.bin")), &bytes).map_err(io)?;
        let json = serde_json::to_vec_pretty(&meta).map_err(|e| QgridError::Io(e.to_string()))?;
        atomic_write(&dir.join(format!("{stem}.json")), &json).map_err(io)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportMeta {
    pub data_file: String,
    pub layout: String,
    pub axis1: UniformAxis,
    pub axis2: UniformAxis,
    pub hbar: f64,
    pub rep: Representation,
}

fn keys_weights(s: f64) -> [f64; 4] {
    let k = |x: f64| {
        let x = x.abs();
        if x < 1.0 {
            1.5 * x * x * x - 2.5 * x * x + 1.0
        } else if x < 2.0 {
            -0.5 * x * x * x + 2.5 * x * x - 4.0 * x + 2.0
        } else {
            0.0
        }
    };
    [k(1.0 + s), k(s), k(1.0 - s), k(2.0 - s)]
}

/// Sample a one-variable profile on an axis.
pub fn sample_profile<F: Fn(f64) -> Complex64>(axis: &UniformAxis, f: F) -> Vec<Complex64> {
    axis.points().into_iter().map(f).collect()
}

/// `exp(-(x - center)^2 / (2 width^2) + i momentum x / hbar)`, unnormalized.
pub fn gaussian_profile(axis: &UniformAxis, center: f64, width: f64, momentum: f64, hbar: f64) -> Vec<Complex64> {
    sample_profile(axis, |x| {
        let d = (x - center) / width;
        Complex64::from_polar((-0.5 * d * d).exp(), momentum * x / hbar)
    })
}

/// Liouville transport `psi(z, t) = psi_0(Phi_{-t}(z))` by backward
/// characteristics of the classical flow and cubic interpolation.
pub fn evolve_liouville(
    state: &GridState2D,
    pot: &MonomialPotential,
    t: f64,
    cfg: &IntegratorConfig,
) -> Result<Evolution, QgridError> {
    state.require(Representation::QP)?;
    if !t.is_finite() {
        return Err(QgridError::Request(format!("time {t}")));
    }
    if t == 0.0 {
        return Ok(Evolution { state: state.clone(), warnings: Vec::new() });
    }
    let (n1, n2) = state.shape();
    let values: Vec<Option<Complex64>> = (0..n1 * n2)
        .into_par_iter()
        .map(|idx| {
            let z = PhasePoint::new(state.axis1.point(idx / n2), state.axis2.point(idx % n2));
            let src = flow_map(&z, pot, -t, cfg).ok()?;
            state.interpolate(src.q, src.p)
        })
        .collect();
    let lost = values.iter().filter(|v| v.is_none()).count();
    let amps = values.into_iter().map(|v| v.unwrap_or_default()).collect();
    let mut warnings = Vec::new();
    if lost > 0 {
        warnings.push(GridWarning::DomainExit { points: lost });
    }
    Ok(Evolution { state: state.with_amps(amps), warnings })
}

/// `amps[i, j] = psi(Q_i) chi(Qb_j)`, normalized.
pub fn make_separable(
    psi: &[Complex64],
    chi: &[Complex64],
    axis1: UniformAxis,
    axis2: UniformAxis,
    hbar: f64,
) -> Result<GridState2D, QgridError> {
    for (prof, ax) in [(psi, &axis1), (chi, &axis2)] {
        if prof.len() != ax.count {
            return Err(QgridError::Shape { expected: ax.count, found: prof.len() });
        }
        let n: f64 = prof.iter().map(|a| a.norm_sqr()).sum::<f64>() * ax.dx();
        if !(n.is_finite() && n > 0.0) {
            return Err(QgridError::NonNormalizable);
        }
    }
    let amps = psi.iter().flat_map(|a| chi.iter().map(move |b| a * b)).collect();
    GridState2D::new(axis1, axis2, amps, hbar, Representation::QQbar)?.normalized()
}

struct Fft2 {
    n1: usize,
    n2: usize,
    f1: Arc<dyn Fft<f64>>,
    f2: Arc<dyn Fft<f64>>,
    i1: Arc<dyn Fft<f64>>,
    i2: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    fn new(n1: usize, n2: usize) -> Self {
        let mut p = FftPlanner::new();
        Self { n1, n2, f1: p.plan_fft_forward(n1), f2: p.plan_fft_forward(n2), i1: p.plan_fft_inverse(n1), i2: p.plan_fft_inverse(n2) }
    }

    fn apply(&self, a: &mut [Complex64], along1: &Arc<dyn Fft<f64>>, along2: &Arc<dyn Fft<f64>>) {
        // rows are contiguous along axis2
        for row in a.chunks_mut(self.n2) {
            along2.process(row);
        }
        let mut col = vec![Complex64::new(0.0, 0.0); self.n1];
        for j in 0..self.n2 {
            for i in 0..self.n1 {
                col[i] = a[i * self.n2 + j];
            }
            along1.process(&mut col);
            for i in 0..self.n1 {
                a[i * self.n2 + j] = col[i];
            }
        }
    }

    fn forward(&self, a: &mut [Complex64]) {
        self.apply(a, &self.f1, &self.f2);
    }

    fn inverse(&self, a: &mut [Complex64]) {
        self.apply(a, &self.i1, &self.i2);
        let s = 1.0 / (self.n1 * self.n2) as f64;
        for v in a.iter_mut() {
            *v *= s;
        }
    }
}

fn tail_fraction(spec: &[Complex64], n1: usize, n2: usize) -> f64 {
    let outer = |m: usize, n: usize| 8 * m.min(n - m) > 3 * n;
    let mut tail = 0.0;
    let mut total = 0.0;
    for i in 0..n1 {
        for j in 0..n2 {
            let w = spec[i * n2 + j].norm_sqr();
            total += w;
            if outer(i, n1) || outer(j, n2) {
                tail += w;
            }
        }
    }
    if total > 0.0 {
        tail / total
    } else {
        0.0
    }
}

/// Threshold on the outer-spectrum norm fraction above which evolution
/// results carry an aliasing warning.
pub const ALIASING_TAIL: f64 = 1e-6;

/// Strang split-step evolution of `i d/dt psi = G psi` in the `(Q, Qb)`
/// representation.
pub fn evolve_g(state: &GridState2D, pot: &MonomialPotential, t: f64, steps: usize) -> Result<Evolution, QgridError> {
    state.require(Representation::QQbar)?;
    if !matches!(pot.integer_exponent(), Some(1 | 2 | 4)) {
        return Err(QgridError::UnsupportedPotential(pot.n));
    }
    if t == 0.0 {
        return Ok(Evolution { state: state.clone(), warnings: Vec::new() });
    }
    if steps == 0 || !t.is_finite() {
        return Err(QgridError::Request(format!("t = {t} with {steps} steps")));
    }
    let (n1, n2) = state.shape();
    let h = state.hbar;
    let dt = t / steps as f64;
    let v = |x: f64| pot.value(x).expect("polynomial potentials accept every grid point");
    let (x1, x2) = (state.axis1.points(), state.axis2.points());
    let mut half_pot = Vec::with_capacity(n1 * n2);
    for a in &x1 {
        let va = v(*a);
        for b in &x2 {
            half_pot.push(Complex64::from_polar(1.0, -0.5 * dt * (va - v(*b)) / h));
        }
    }
    let (k1, k2) = (state.axis1.wavenumbers(), state.axis2.wavenumbers());
    let mut kinetic = Vec::with_capacity(n1 * n2);
    for a in &k1 {
        for b in &k2 {
            kinetic.push(Complex64::from_polar(1.0, -0.5 * dt * h * (a * a - b * b)));
        }
    }
    let fft = Fft2::new(n1, n2);
    let mut psi = state.amps.clone();
    for _ in 0..steps {
        psi.iter_mut().zip(&half_pot).for_each(|(a, b)| *a *= b);
        fft.forward(&mut psi);
        psi.iter_mut().zip(&kinetic).for_each(|(a, b)| *a *= b);
        fft.inverse(&mut psi);
        psi.iter_mut().zip(&half_pot).for_each(|(a, b)| *a *= b);
    }
    let mut spec = psi.clone();
    fft.forward(&mut spec);
    let tail = tail_fraction(&spec, n1, n2);
    let warnings = if tail > ALIASING_TAIL { vec![GridWarning::Aliasing { tail_fraction: tail }] } else { Vec::new() };
    Ok(Evolution { state: state.with_amps(psi), warnings })
}

/// Shift every line along one axis by a line-dependent displacement,
/// `f(x) -> f(x + d)`, exactly for band-limited periodic data.
fn fourier_shear(state: &GridState2D, along_axis1: bool, rate: f64) -> Vec<Complex64> {
    let (n1, n2) = state.shape();
    let (n, other, ks) = if along_axis1 {
        (n1, state.axis2, state.axis1.wavenumbers())
    } else {
        (n2, state.axis1, state.axis2.wavenumbers())
    };
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let lines = if along_axis1 { n2 } else { n1 };
    let mut out = state.amps.clone();
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for l in 0..lines {
        let d = rate * other.point(l);
        let idx = |m: usize| if along_axis1 { m * n2 + l } else { l * n2 + m };
        for (m, b) in buf.iter_mut().enumerate() {
            *b = out[idx(m)];
        }
        fwd.process(&mut buf);
        for (b, k) in buf.iter_mut().zip(&ks) {
            *b *= Complex64::from_polar(1.0 / n as f64, k * d);
        }
        inv.process(&mut buf);
        for (m, b) in buf.iter().enumerate() {
            out[idx(m)] = *b;
        }
    }
    out
}

fn edge_fraction(state: &GridState2D) -> f64 {
    let (n1, n2) = state.shape();
    let (b1, b2) = (n1 / 16, n2 / 16);
    let mut edge = 0.0;
    let mut total = 0.0;
    for i in 0..n1 {
        for j in 0..n2 {
            let w = state.amps[i * n2 + j].norm_sqr();
            total += w;
            if i < b1 || i >= n1 - b1 || j < b2 || j >= n2 - b2 {
                edge += w;
            }
        }
    }
    if total > 0.0 {
        edge / total
    } else {
        0.0
    }
}

/// Edge-band mass fraction tolerated by the hyperbolic remap.
pub const SUPPORT_EDGE_TOL: f64 = 1e-6;

/// `exp[alpha (Qb d/dQ + Q d/dQb)] psi = psi o Phi_alpha` with the hyperbolic
/// rotation `Phi_alpha(Q, Qb) = (Q cosh a + Qb sinh a, Q sinh a + Qb cosh a)`.
///
/// The map factors into three shears, `S1 S2 S1` with `S1: Q += tanh(a/2) Qb`
/// and `S2: Qb += sinh(a) Q`, each applied as an exact Fourier shift of grid
/// lines.
pub fn apply_lms_unitary_harmonic(state: &GridState2D, alpha: f64) -> Result<GridState2D, QgridError> {
    state.require(Representation::QQbar)?;
    if !alpha.is_finite() {
        return Err(QgridError::Request(format!("alpha = {alpha}")));
    }
    if alpha == 0.0 {
        return Ok(state.clone());
    }
    let a = (0.5 * alpha).tanh();
    let b = alpha.sinh();
    let mut cur = state.clone();
    for (along1, rate) in [(true, a), (false, b), (true, a)] {
        cur = cur.with_amps(fourier_shear(&cur, along1, rate));
        let e = edge_fraction(&cur);
        if e > SUPPORT_EDGE_TOL {
            return Err(QgridError::SupportExit(e));
        }
    }
    Ok(cur)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchmidtSpectrum {
    pub values: Vec<f64>,
}

impl SchmidtSpectrum {
    /// Second over first singular value (0 for rank one).
    pub fn ratio(&self) -> f64 {
        match self.values.as_slice() {
            [a, b, ..] if *a > 0.0 => b / a,
            _ => 0.0,
        }
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|s| s * s).sum()
    }
}

/// Singular values of `amps * sqrt(dx1 dx2)`, descending.
pub fn schmidt(state: &GridState2D) -> SchmidtSpectrum {
    let (n1, n2) = state.shape();
    let w = state.cell().sqrt();
    let m = DMatrix::from_fn(n1, n2, |i, j| state.amps[i * n2 + j] * w);
    let mut values: Vec<f64> = m.singular_values().iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    SchmidtSpectrum { values }
}

/// Leading Schmidt vectors `(u, v)` with `state ~ s u(x1) v(x2)`, each of unit norm
/// on its own axis.
pub fn leading_factors(state: &GridState2D) -> (Vec<Complex64>, Vec<Complex64>) {
    let (n1, n2) = state.shape();
    let m = DMatrix::from_fn(n1, n2, |i, j| state.amps[i * n2 + j]);
    let svd = m.svd(true, true);
    let (u, vt) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
    let k = svd.singular_values.iamax();
    let s1 = 1.0 / state.axis1.dx().sqrt();
    let s2 = 1.0 / state.axis2.dx().sqrt();
    let uu = (0..n1).map(|i| u[(i, k)] * s1).collect();
    let vv = (0..n2).map(|j| vt[(k, j)] * s2).collect();
    (uu, vv)
}
