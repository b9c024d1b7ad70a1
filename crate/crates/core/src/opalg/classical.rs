//! Commutative polynomials in `(q, p, lambda_q, lambda_p)` and their
//! Weyl-ordered images in the operator algebras.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use super::algebra::{Key, NormalPoly, OperatorPoly, PairAlgebra};
use super::scalar::Scalar;

fn binom(n: u32, k: u32) -> BigRational {
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    BigRational::from_integer(r)
}

/// Commutative polynomial; key `[a, b, c, d]` is `q^a p^b lambda_q^c lambda_p^d`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClassicalPoly {
    terms: BTreeMap<Key, Scalar>,
}

impl ClassicalPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(key: Key, s: Scalar) -> Self {
        let mut out = Self::zero();
        out.accumulate(key, s);
        out
    }

    /// `c q^a p^b`.
    pub fn phase_monomial(a: u32, b: u32, c: Scalar) -> Self {
        Self::monomial([a, b, 0, 0], c)
    }

    pub fn from_terms<I: IntoIterator<Item = (Key, Scalar)>>(it: I) -> Self {
        let mut out = Self::zero();
        for (k, s) in it {
            out.accumulate(k, s);
        }
        out
    }

    fn accumulate(&mut self, key: Key, s: Scalar) {
        if s.is_zero() {
            return;
        }
        let slot = self.terms.entry(key).or_default();
        *slot = &*slot + &s;
        if slot.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Key, &Scalar)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Only `q` and `p` appear.
    pub fn is_phase_space(&self) -> bool {
        self.terms.keys().all(|k| k[2] == 0 && k[3] == 0)
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &o.terms {
            out.accumulate(*k, c.clone());
        }
        out
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        Self::from_terms(self.terms.iter().map(|(k, c)| (*k, c * s)))
    }

    /// Partial derivative in variable `i` (key order).
    pub fn derivative(&self, i: usize) -> Self {
        Self::from_terms(self.terms.iter().filter(|(k, _)| k[i] > 0).map(|(k, c)| {
            let mut k2 = *k;
            k2[i] -= 1;
            (k2, c * &Scalar::int(k[i] as i64))
        }))
    }

    fn times_var(&self, i: usize) -> Self {
        Self::from_terms(self.terms.iter().map(|(k, c)| {
            let mut k2 = *k;
            k2[i] += 1;
            (k2, c.clone())
        }))
    }

    /// `lambda_q d/dp - lambda_p d/dq`, the Hamiltonian vector field paired
    /// with the lambdas.
    pub fn flow_derivative(&self) -> Self {
        let a = self.derivative(1).times_var(2);
        let b = self.derivative(0).times_var(3);
        a.add(&b.scale(&Scalar::int(-1)))
    }

    /// Weyl quantization in the extended algebra. The two pairs commute, so
    /// `W(q^a p^b lq^c lp^d) = W(q^a lq^c) W(p^b lp^d)` with
    /// `W(x^a y^c) = 2^-a sum_k C(a,k) x^k y^c x^(a-k)`.
    pub fn weyl(&self) -> OperatorPoly {
        let pair = |x: OperatorPoly, y: OperatorPoly, a: u32, c: u32| {
            let mut s = OperatorPoly::zero();
            let yc = y.pow(c);
            for k in 0..=a {
                let w = Scalar::real(binom(a, k) / BigRational::from_integer(BigInt::from(2).pow(a)));
                s = &s + &(&(&x.pow(k) * &yc) * &x.pow(a - k)).scale(&w);
            }
            s
        };
        let mut out = OperatorPoly::zero();
        for (k, c) in &self.terms {
            let one = pair(OperatorPoly::q(), OperatorPoly::lq(), k[0], k[2]);
            let two = pair(OperatorPoly::p(), OperatorPoly::lp(), k[1], k[3]);
            out = &out + &(&one * &two).scale(c);
        }
        out
    }

    /// Weyl-ordered `C(X, Y)` for a phase-space polynomial with operator
    /// images `X`, `Y` of `q`, `p`: `W(q^a p^b) = 2^-a sum_k C(a,k) X^k Y^b X^(a-k)`.
    /// Panics if a lambda appears.
    pub fn weyl_in<K: PairAlgebra>(&self, x: &NormalPoly<K>, y: &NormalPoly<K>) -> NormalPoly<K> {
        assert!(self.is_phase_space(), "weyl_in takes a function of q and p only");
        let mut out = NormalPoly::<K>::zero();
        for (k, c) in &self.terms {
            let (a, b) = (k[0], k[1]);
            let yb = y.pow(b);
            for j in 0..=a {
                let w = Scalar::real(binom(a, j) / BigRational::from_integer(BigInt::from(2).pow(a)));
                let m = &(&x.pow(j) * &yb) * &x.pow(a - j);
                out = &out + &m.scale(&(&w * c));
            }
        }
        out
    }
}

impl fmt::Display for ClassicalPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = OperatorPoly::from_terms(self.terms.iter().map(|(k, c)| (*k, c.clone())));
        write!(f, "{op}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flow_derivative_of_hamiltonian() {
        // H = p^2/2 + q^4/4 -> lq p - lp q^3
        let h = ClassicalPoly::phase_monomial(0, 2, Scalar::ratio(1, 2)).add(&ClassicalPoly::phase_monomial(4, 0, Scalar::ratio(1, 4)));
        let d = h.flow_derivative();
        let expect = ClassicalPoly::from_terms([([0, 1, 1, 0], Scalar::one()), ([3, 0, 0, 1], Scalar::int(-1))]);
        assert_eq!(d, expect);
    }

    #[test]
    fn weyl_of_mixed_pair_is_symmetric() {
        // W(q lq) = (q lq + lq q)/2 = q lq - i/2
        let w = ClassicalPoly::monomial([1, 0, 1, 0], Scalar::one()).weyl();
        let expect = &OperatorPoly::monomial([1, 0, 1, 0], Scalar::one()) - &OperatorPoly::scalar(&Scalar::i() * &Scalar::ratio(1, 2));
        assert_eq!(w, expect);
        assert!(w.is_hermitian());
    }
}
