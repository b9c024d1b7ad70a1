//! Small exact linear algebra and univariate polynomials over complex
//! rationals.

use num_complex::Complex64;
use num_traits::{One, Zero};

use super::scalar::{coeff_to_c64, Coeff};

/// Row-reduce `[A | B]` in place; returns pivot columns of `A`.
fn rref(m: &mut [Vec<Coeff>], ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        let Some(pr) = (row..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, pr);
        let inv = Coeff::one() / m[row][col].clone();
        for v in m[row].iter_mut() {
            *v = &*v * &inv;
        }
        for r in 0..m.len() {
            if r != row && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in 0..m[r].len() {
                    let sub = &f * &m[row][c];
                    m[r][c] = &m[r][c] - sub;
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == m.len() {
            break;
        }
    }
    pivots
}

/// Solve `sum_j x_j v_j = target` exactly, if consistent.
pub fn solve_combination(vectors: &[Vec<Coeff>], target: &[Coeff]) -> Option<Vec<Coeff>> {
    let k = vectors.len();
    let mut m: Vec<Vec<Coeff>> = (0..target.len())
        .map(|r| vectors.iter().map(|v| v[r].clone()).chain(std::iter::once(target[r].clone())).collect())
        .collect();
    let pivots = rref(&mut m, k);
    // inconsistent if a zero row has a nonzero right-hand side
    for row in m.iter().skip(pivots.len()) {
        if !row[k].is_zero() {
            return None;
        }
    }
    let mut x = vec![Coeff::zero(); k];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = m[r][k].clone();
    }
    Some(x)
}

pub fn invert(a: &[Vec<Coeff>]) -> Option<Vec<Vec<Coeff>>> {
    let n = a.len();
    let mut m: Vec<Vec<Coeff>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Coeff::one() } else { Coeff::zero() }));
            r
        })
        .collect();
    if rref(&mut m, n).len() < n {
        return None;
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn mat_mul(a: &[Vec<Coeff>], b: &[Vec<Coeff>]) -> Vec<Vec<Coeff>> {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (0..k).fold(Coeff::zero(), |acc, l| acc + &a[i][l] * &b[l][j]))
                .collect()
        })
        .collect()
}

pub fn identity(n: usize) -> Vec<Vec<Coeff>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { Coeff::one() } else { Coeff::zero() }).collect()).collect()
}

/// Univariate polynomial, coefficients low to high, no trailing zeros.
pub type Poly = Vec<Coeff>;

fn trim(mut p: Poly) -> Poly {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

pub fn poly_derivative(p: &Poly) -> Poly {
    trim(p.iter().enumerate().skip(1).map(|(k, c)| c * Coeff::from(num_rational::BigRational::from_integer((k as i64).into()))).collect())
}

pub fn poly_divrem(a: &Poly, b: &Poly) -> (Poly, Poly) {
    let b = trim(b.clone());
    assert!(!b.is_empty(), "division by zero polynomial");
    let mut r = trim(a.clone());
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let lead_inv = Coeff::one() / b.last().unwrap().clone();
    let mut q = vec![Coeff::zero(); r.len() - b.len() + 1];
    while r.len() >= b.len() {
        let shift = r.len() - b.len();
        let f = r.last().unwrap() * &lead_inv;
        for (i, bc) in b.iter().enumerate() {
            r[shift + i] = &r[shift + i] - &f * bc;
        }
        q[shift] = f;
        r.pop();
        r = trim(r);
    }
    (trim(q), r)
}

fn monic(p: Poly) -> Poly {
    let inv = Coeff::one() / p.last().unwrap().clone();
    p.into_iter().map(|c| c * &inv).collect()
}

pub fn poly_gcd(a: &Poly, b: &Poly) -> Poly {
    let (mut x, mut y) = (trim(a.clone()), trim(b.clone()));
    while !y.is_empty() {
        let (_, r) = poly_divrem(&x, &y);
        x = y;
        y = r;
    }
    monic(x)
}

pub fn poly_eval(p: &Poly, x: &Coeff) -> Coeff {
    p.iter().rev().fold(Coeff::zero(), |acc, c| acc * x + c)
}

/// Numerical roots of a polynomial with simple roots (Durand-Kerner).
pub fn numeric_roots(p: &Poly) -> Vec<Complex64> {
    let p = monic(trim(p.clone()));
    let d = p.len() - 1;
    let c: Vec<Complex64> = p.iter().map(coeff_to_c64).collect();
    let eval = |z: Complex64| c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, a| acc * z + a);
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..d).map(|k| seed.powu(k as u32)).collect();
    for _ in 0..1000 {
        let mut delta: f64 = 0.0;
        for i in 0..d {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..d {
                if i != j {
                    den *= z[i] - z[j];
                }
            }
            let step = eval(z[i]) / den;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 {
            break;
        }
    }
    z
}

/// Nearest rational with denominator up to `max_den` within `tol`.
pub fn snap_rational(x: f64, max_den: i64, tol: f64) -> Option<num_rational::BigRational> {
    for den in 1..=max_den {
        let num = (x * den as f64).round();
        if (x - num / den as f64).abs() <= tol * x.abs().max(1.0) {
            return Some(num_rational::BigRational::new((num as i64).into(), den.into()));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalg::scalar::real_coeff;

    #[test]
    fn inverse_and_solve() {
        let a = vec![vec![real_coeff(2, 1), real_coeff(1, 1)], vec![real_coeff(1, 1), real_coeff(1, 1)]];
        let inv = invert(&a).unwrap();
        assert_eq!(mat_mul(&a, &inv), identity(2));
        let x = solve_combination(&[vec![real_coeff(1, 1), real_coeff(0, 1)], vec![real_coeff(1, 1), real_coeff(1, 1)]], &[real_coeff(3, 1), real_coeff(1, 1)]).unwrap();
        assert_eq!(x, vec![real_coeff(2, 1), real_coeff(1, 1)]);
        assert!(solve_combination(&[vec![real_coeff(1, 1), real_coeff(1, 1)]], &[real_coeff(1, 1), real_coeff(2, 1)]).is_none());
    }

    #[test]
    fn gcd_detects_repeated_roots() {
        // (x-1)^2 (x+2)
        let p: Poly = vec![real_coeff(2, 1), real_coeff(-3, 1), real_coeff(0, 1), real_coeff(1, 1)];
        let g = poly_gcd(&p, &poly_derivative(&p));
        assert_eq!(g, vec![real_coeff(-1, 1), real_coeff(1, 1)]);
        let (sq, r) = poly_divrem(&p, &g);
        assert!(r.is_empty());
        let mut roots = numeric_roots(&sq);
        roots.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert!((roots[0] - Complex64::new(-2.0, 0.0)).norm() < 1e-12);
        assert!((roots[1] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }
}
