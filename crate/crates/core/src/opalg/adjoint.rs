//! Adjoint actions of generators on operators: first order, and the exact
//! finite action of quadratic generators on linear operators.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::algebra::OperatorPoly;
use super::exact::{
    identity, invert, mat_mul, numeric_roots, poly_derivative, poly_divrem, poly_eval, poly_gcd, snap_rational,
    solve_combination, Poly,
};
use super::scalar::{coeff, coeff_to_c64, fmt_coeff, Coeff, Scalar, SymbolValues};
use super::OpalgError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdjointMode {
    /// `X + i alpha [A, X]`.
    Kvn,
    /// `X + (i alpha / hbar) [A, X]`.
    Standard,
}

/// First-order conjugation `U X U^-1` with `U = exp(i alpha A)` (or
/// `exp(i alpha A / hbar)` in standard mode).
pub fn adjoint_infinitesimal(a: &OperatorPoly, x: &OperatorPoly, alpha: &Scalar, mode: AdjointMode) -> OperatorPoly {
    let mut k = &Scalar::i() * alpha;
    if mode == AdjointMode::Standard {
        k = k.shift_hbar(-1);
    }
    x + &a.commutator(x).scale(&k)
}

/// Coordinates on the span of `(q, p, lambda_q, lambda_p, 1)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LinearOpBasis {
    pub coords: [Scalar; 5],
}

const BASIS_KEYS: [[u32; 4]; 5] = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1], [0, 0, 0, 0]];

impl LinearOpBasis {
    pub fn from_operator(x: &OperatorPoly) -> Result<Self, OpalgError> {
        if x.degree().unwrap_or(0) > 1 {
            return Err(OpalgError::NonLinearOperand);
        }
        let mut out = Self::default();
        for (i, k) in BASIS_KEYS.iter().enumerate() {
            out.coords[i] = x.coefficient(*k);
        }
        Ok(out)
    }

    pub fn to_operator(&self) -> OperatorPoly {
        OperatorPoly::from_terms(BASIS_KEYS.iter().zip(&self.coords).map(|(k, c)| (*k, c.clone())))
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Scalar::is_zero)
    }

    fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (a, b) in out.coords.iter_mut().zip(&o.coords) {
            *a = &*a + b;
        }
        out
    }
}

/// `Re` and `Im` of a rate, ordered so terms print deterministically.
type RateKey = (BigRational, BigRational);

/// `sum alpha^k exp(mu alpha) v_{mu,k}`: the exact finite adjoint of a
/// quadratic generator on a linear operator.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExpLinear {
    terms: BTreeMap<(RateKey, u32), LinearOpBasis>,
}

impl ExpLinear {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `alpha^power exp(rate alpha) v`.
    pub fn exp_term(rate: Coeff, power: u32, v: LinearOpBasis) -> Self {
        let mut out = Self::zero();
        out.accumulate((rate.re, rate.im), power, v);
        out
    }

    fn accumulate(&mut self, rate: RateKey, power: u32, v: LinearOpBasis) {
        let key = (rate, power);
        let merged = match self.terms.remove(&key) {
            Some(prev) => prev.add(&v),
            None => v,
        };
        if !merged.is_zero() {
            self.terms.insert(key, merged);
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for ((r, k), v) in &o.terms {
            out.accumulate(r.clone(), *k, v.clone());
        }
        out
    }

    /// `cosh(alpha) a + sinh(alpha) b`.
    pub fn hyperbolic(a: &LinearOpBasis, b: &LinearOpBasis) -> Self {
        let half = Scalar::ratio(1, 2);
        let plus = LinearOpBasis { coords: std::array::from_fn(|i| &(&a.coords[i] + &b.coords[i]) * &half) };
        let minus = LinearOpBasis { coords: std::array::from_fn(|i| &(&a.coords[i] - &b.coords[i]) * &half) };
        let re = |n: i64| coeff(BigRational::from_integer(n.into()), BigRational::zero());
        Self::exp_term(re(1), 0, plus).add(&Self::exp_term(re(-1), 0, minus))
    }

    pub fn terms(&self) -> impl Iterator<Item = (Coeff, u32, &LinearOpBasis)> {
        self.terms.iter().map(|((r, k), v)| (coeff(r.0.clone(), r.1.clone()), *k, v))
    }

    pub fn value_at_zero(&self) -> LinearOpBasis {
        self.terms().filter(|(_, k, _)| *k == 0).fold(LinearOpBasis::default(), |acc, (_, _, v)| acc.add(v))
    }

    /// `d/d alpha` at `alpha = 0`.
    pub fn derivative_at_zero(&self) -> LinearOpBasis {
        let mut acc = LinearOpBasis::default();
        for (mu, k, v) in self.terms() {
            let w = match k {
                0 => Scalar::constant(mu),
                1 => Scalar::one(),
                _ => continue,
            };
            acc = acc.add(&LinearOpBasis { coords: std::array::from_fn(|i| &v.coords[i] * &w) });
        }
        acc
    }

    /// Numerical coordinates at a given `alpha`; remaining symbols from `sym`.
    pub fn evaluate(&self, alpha: f64, sym: &SymbolValues) -> [Complex64; 5] {
        let mut out = [Complex64::new(0.0, 0.0); 5];
        for (mu, k, v) in self.terms() {
            let f = (coeff_to_c64(&mu) * alpha).exp() * alpha.powi(k as i32);
            for (o, c) in out.iter_mut().zip(&v.coords) {
                *o += f * c.eval(sym);
            }
        }
        out
    }
}

impl fmt::Display for ExpLinear {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (mu, k, v)) in self.terms().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            let pw = match k {
                0 => String::new(),
                1 => "alpha*".into(),
                _ => format!("alpha^{k}*"),
            };
            write!(f, "{pw}exp({}*alpha)*[{}]", fmt_coeff(&mu), v.to_operator())?;
        }
        Ok(())
    }
}

fn numeric_entry(s: &Scalar) -> Result<Coeff, OpalgError> {
    s.as_numeric().ok_or(OpalgError::NonNumericGenerator)
}

/// Matrix of `X -> i [A, X]` on the linear basis, columns indexed by input.
pub fn adjoint_matrix(a: &OperatorPoly) -> Result<Vec<Vec<Coeff>>, OpalgError> {
    let deg = a.degree().unwrap_or(0);
    if deg > 2 {
        return Err(OpalgError::NonQuadraticGenerator(deg));
    }
    let mut m = vec![vec![Coeff::zero(); 5]; 5];
    for (j, k) in BASIS_KEYS.iter().enumerate() {
        let e = OperatorPoly::monomial(*k, Scalar::one());
        let img = LinearOpBasis::from_operator(&a.commutator(&e).scale(&Scalar::i()))?;
        for (row, c) in m.iter_mut().zip(&img.coords) {
            row[j] = numeric_entry(c)?;
        }
    }
    Ok(m)
}

fn flatten(m: &[Vec<Coeff>]) -> Vec<Coeff> {
    m.iter().flatten().cloned().collect()
}

/// Minimal polynomial by the first linear dependence among `I, M, M^2, ...`.
fn minimal_polynomial(m: &[Vec<Coeff>]) -> Poly {
    let mut powers = vec![identity(m.len())];
    loop {
        let next = mat_mul(powers.last().unwrap(), m);
        let flat: Vec<Vec<Coeff>> = powers.iter().map(|p| flatten(p)).collect();
        if let Some(c) = solve_combination(&flat, &flatten(&next)) {
            let mut poly: Poly = c.into_iter().map(|x| -x).collect();
            poly.push(Coeff::one());
            return poly;
        }
        powers.push(next);
    }
}

/// Exact roots with multiplicities when all lie in `Q + iQ` with small
/// denominators.
fn exact_spectrum(minpoly: &Poly) -> Result<Vec<(Coeff, usize)>, OpalgError> {
    let degree = minpoly.len() - 1;
    if degree == 0 {
        return Ok(Vec::new());
    }
    let g = poly_gcd(minpoly, &poly_derivative(minpoly));
    let (square_free, _) = poly_divrem(minpoly, &g);
    let mut out = Vec::new();
    let mut total = 0;
    for z in numeric_roots(&square_free) {
        let (Some(re), Some(im)) = (snap_rational(z.re, 1000, 1e-9), snap_rational(z.im, 1000, 1e-9)) else {
            return Err(OpalgError::UnsupportedSpectrum(format!("root {z} is not a small Gaussian rational")));
        };
        let mu = coeff(re, im);
        if !poly_eval(&square_free, &mu).is_zero() {
            return Err(OpalgError::UnsupportedSpectrum(format!("root {z} did not verify exactly")));
        }
        let factor: Poly = vec![-mu.clone(), Coeff::one()];
        let mut rest = minpoly.clone();
        let mut mult = 0;
        loop {
            let (q, r) = poly_divrem(&rest, &factor);
            if !r.is_empty() {
                break;
            }
            rest = q;
            mult += 1;
        }
        total += mult;
        out.push((mu, mult));
    }
    if total != degree {
        return Err(OpalgError::UnsupportedSpectrum("multiplicities do not account for the degree".into()));
    }
    Ok(out)
}

/// `exp(i alpha A) X exp(-i alpha A)` for `A` at most quadratic with numeric
/// coefficients and `X` linear, as an exact function of `alpha`.
///
/// `exp(alpha M) = sum_j c_j(alpha) M^j` with `c_j` fixed by matching
/// `alpha^k exp(alpha mu)` at every eigenvalue `mu` of multiplicity `> k`
/// (confluent Vandermonde).
pub fn adjoint_finite_quadratic(a: &OperatorPoly, x: &OperatorPoly) -> Result<ExpLinear, OpalgError> {
    let m = adjoint_matrix(a)?;
    let v = LinearOpBasis::from_operator(x)?;
    let minpoly = minimal_polynomial(&m);
    let spectrum = exact_spectrum(&minpoly)?;
    let d = minpoly.len() - 1;

    // rows (mu, k): d^k/dx^k x^j at mu
    let mut labels = Vec::new();
    let mut rows = Vec::new();
    for (mu, mult) in &spectrum {
        for k in 0..*mult {
            let row: Vec<Coeff> = (0..d)
                .map(|j| {
                    if j < k {
                        return Coeff::zero();
                    }
                    let fall: i64 = ((j - k + 1)..=j).map(|x| x as i64).product();
                    let mut p = Coeff::one();
                    for _ in 0..(j - k) {
                        p = &p * mu;
                    }
                    p * Coeff::from(BigRational::from_integer(fall.into()))
                })
                .collect();
            rows.push(row);
            labels.push((mu.clone(), k as u32));
        }
    }
    let vinv = invert(&rows).ok_or_else(|| OpalgError::UnsupportedSpectrum("singular interpolation system".into()))?;

    // M^j v
    let mut krylov: Vec<LinearOpBasis> = vec![v];
    for _ in 1..d.max(1) {
        let prev = krylov.last().unwrap();
        let next = LinearOpBasis {
            coords: std::array::from_fn(|i| {
                (0..5).fold(Scalar::zero(), |acc, l| &acc + &prev.coords[l].scale(&m[i][l]))
            }),
        };
        krylov.push(next);
    }

    let mut out = ExpLinear::zero();
    if d == 0 {
        return Ok(out);
    }
    for (col, (mu, k)) in labels.into_iter().enumerate() {
        let mut vec = LinearOpBasis::default();
        for (j, kv) in krylov.iter().enumerate().take(d) {
            let w = &vinv[j][col];
            if w.is_zero() {
                continue;
            }
            vec = vec.add(&LinearOpBasis { coords: std::array::from_fn(|i| kv.coords[i].scale(w)) });
        }
        out = out.add(&ExpLinear::exp_term(mu, k, vec));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalg::scalar::real_coeff;

    #[test]
    fn dilation_exponentiates() {
        // A = lq q + p lp scales q, p by e^alpha and the lambdas by e^-alpha
        let a = &(&OperatorPoly::lq() * &OperatorPoly::q()) + &(&OperatorPoly::p() * &OperatorPoly::lp());
        let r = adjoint_finite_quadratic(&a, &OperatorPoly::q()).unwrap();
        let e = LinearOpBasis::from_operator(&OperatorPoly::q()).unwrap();
        assert_eq!(r, ExpLinear::exp_term(real_coeff(1, 1), 0, e));
        let r = adjoint_finite_quadratic(&a, &OperatorPoly::lp()).unwrap();
        let e = LinearOpBasis::from_operator(&OperatorPoly::lp()).unwrap();
        assert_eq!(r, ExpLinear::exp_term(real_coeff(-1, 1), 0, e));
    }

    #[test]
    fn nilpotent_generator_gives_polynomial() {
        // A = lq^2/2: q -> q + alpha lq... i[lq^2/2, q] = lq
        let a = OperatorPoly::monomial([0, 0, 2, 0], Scalar::ratio(1, 2));
        let r = adjoint_finite_quadratic(&a, &OperatorPoly::q()).unwrap();
        let lin = |x: &OperatorPoly| LinearOpBasis::from_operator(x).unwrap();
        let expect = ExpLinear::exp_term(Coeff::zero(), 0, lin(&OperatorPoly::q()))
            .add(&ExpLinear::exp_term(Coeff::zero(), 1, lin(&OperatorPoly::lq())));
        assert_eq!(r, expect);
    }

    #[test]
    fn rotation_has_imaginary_rates() {
        // harmonic Liouvillian generates rotations: rates +-i
        let h = &(&OperatorPoly::lq() * &OperatorPoly::p()) - &(&OperatorPoly::lp() * &OperatorPoly::q());
        let r = adjoint_finite_quadratic(&h, &OperatorPoly::q()).unwrap();
        let sym = SymbolValues { hbar: 1.0, t: 0.0, g: 1.0, alpha: 0.0 };
        let a = 0.7;
        let out = r.evaluate(a, &sym);
        // i[H, q] = p... generated flow q -> q cos a + p sin a
        assert!((out[0] - Complex64::new(a.cos(), 0.0)).norm() < 1e-14);
        assert!((out[1] - Complex64::new(a.sin(), 0.0)).norm() < 1e-14);
    }

    #[test]
    fn rejects_cubic_and_symbolic() {
        let c = OperatorPoly::q().pow(3);
        assert!(matches!(adjoint_finite_quadratic(&c, &OperatorPoly::q()), Err(OpalgError::NonQuadraticGenerator(3))));
        let s = OperatorPoly::monomial([1, 0, 1, 0], Scalar::hbar());
        assert_eq!(adjoint_finite_quadratic(&s, &OperatorPoly::q()), Err(OpalgError::NonNumericGenerator));
        let x = OperatorPoly::q().pow(2);
        assert_eq!(adjoint_finite_quadratic(&OperatorPoly::q(), &x), Err(OpalgError::NonLinearOperand));
    }
}
