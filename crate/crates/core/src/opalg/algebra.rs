//! Normal-ordered polynomials in two commuting canonical pairs `(x1, y1)` and
//! `(x2, y2)` with central commutators `[x1, y1] = c1`, `[x2, y2] = c2`.
//!
//! A monomial key `[a, b, c, d]` stands for `x1^a x2^b y1^c y2^d`.

use std::collections::BTreeMap;
use std::fmt;
use std::marker::PhantomData;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use super::scalar::{forward_owned, Scalar};

pub type Key = [u32; 4];

/// Commutation data and generator names of a concrete algebra.
pub trait PairAlgebra: Clone + fmt::Debug + PartialEq + Eq + Default {
    /// `([x1, y1], [x2, y2])`.
    fn commutators() -> (Scalar, Scalar);
    /// Names in key order.
    const NAMES: [&'static str; 4];
}

/// The extended phase-space algebra: `[q, lambda_q] = [p, lambda_p] = i`.
/// Key order `q^a p^b lambda_q^c lambda_p^d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Kvn;

impl PairAlgebra for Kvn {
    fn commutators() -> (Scalar, Scalar) {
        (Scalar::i(), Scalar::i())
    }
    const NAMES: [&'static str; 4] = ["q", "p", "lq", "lp"];
}

/// Bopp generators: `[Q, P] = i hbar`, `[Qb, Pb] = -i hbar`, the sets commute.
/// Key order `Q^a Qb^b P^c Pb^d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Bopp;

impl PairAlgebra for Bopp {
    fn commutators() -> (Scalar, Scalar) {
        let ih = &Scalar::i() * &Scalar::hbar();
        (ih.clone(), -ih)
    }
    const NAMES: [&'static str; 4] = ["Q", "Qb", "P", "Pb"];
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NormalPoly<K: PairAlgebra> {
    terms: BTreeMap<Key, Scalar>,
    _alg: PhantomData<K>,
}

pub type OperatorPoly = NormalPoly<Kvn>;
pub type BoppPoly = NormalPoly<Bopp>;

fn binom(n: u32, k: u32) -> BigInt {
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

fn factorial(k: u32) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// `x^a y^c * x^a2 y^c2` in one pair: reorder `y^c x^a2` with
/// `y^c x^a2 = sum_k C(c,k) C(a2,k) k! (-c)^k x^(a2-k) y^(c-k)`.
fn pair_product(a: u32, c: u32, a2: u32, c2: u32, comm: &Scalar) -> Vec<(Scalar, u32, u32)> {
    let minus_comm = -comm;
    (0..=c.min(a2))
        .map(|k| {
            let w = binom(c, k) * binom(a2, k) * factorial(k);
            let s = &Scalar::real(BigRational::from_integer(w)) * &minus_comm.pow(k);
            (s, a + a2 - k, c + c2 - k)
        })
        .collect()
}

impl<K: PairAlgebra> NormalPoly<K> {
    pub fn zero() -> Self {
        Self { terms: BTreeMap::new(), _alg: PhantomData }
    }

    pub fn one() -> Self {
        Self::scalar(Scalar::one())
    }

    pub fn scalar(s: Scalar) -> Self {
        Self::monomial([0; 4], s)
    }

    pub fn monomial(key: Key, s: Scalar) -> Self {
        let mut out = Self::zero();
        out.accumulate(key, s);
        out
    }

    /// Generator `i` in key order.
    pub fn generator(i: usize) -> Self {
        let mut key = [0; 4];
        key[i] = 1;
        Self::monomial(key, Scalar::one())
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

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, key: Key) -> Scalar {
        self.terms.get(&key).cloned().unwrap_or_default()
    }

    /// Total degree in the generators; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|k| k.iter().sum()).max()
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        Self::from_terms(self.terms.iter().map(|(k, c)| (*k, c * s)))
    }

    pub fn map_scalars<F: Fn(&Scalar) -> Scalar>(&self, f: F) -> Self {
        Self::from_terms(self.terms.iter().map(|(k, c)| (*k, f(c))))
    }

    /// Formal `hbar -> 0` coefficient: keeps the `hbar^0` part of every term.
    pub fn hbar_zero_part(&self) -> Self {
        self.map_scalars(Scalar::hbar_zero_part)
    }

    pub fn min_hbar_power(&self) -> Option<i32> {
        self.terms.values().filter_map(Scalar::min_hbar_power).min()
    }

    pub fn is_numeric(&self) -> bool {
        self.terms.values().all(Scalar::is_numeric)
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::one(), |acc, _| &acc * self)
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// Hermitian conjugate with Hermitian generators and real symbols:
    /// reverse the factor order and conjugate coefficients.
    pub fn conj(&self) -> Self {
        let mut out = Self::zero();
        for (k, c) in &self.terms {
            let pow = |i: usize, e: u32| {
                let mut key = [0; 4];
                key[i] = e;
                Self::monomial(key, Scalar::one())
            };
            // (x1^a x2^b y1^c y2^d)^† = (y1^c x1^a)(y2^d x2^b)
            let one = &pow(2, k[2]) * &pow(0, k[0]);
            let two = &pow(3, k[3]) * &pow(1, k[1]);
            out = &out + &(&one * &two).scale(&c.conj());
        }
        out
    }

    pub fn is_hermitian(&self) -> bool {
        self.conj() == *self
    }

    /// Evaluate with generator images in another algebra. The images must
    /// satisfy the same commutation relations for this to be a homomorphism.
    pub fn substitute<K2: PairAlgebra>(&self, images: &[NormalPoly<K2>; 4]) -> NormalPoly<K2> {
        let mut out = NormalPoly::<K2>::zero();
        for (k, c) in &self.terms {
            let mut m = NormalPoly::<K2>::scalar(c.clone());
            for (i, e) in k.iter().enumerate() {
                m = &m * &images[i].pow(*e);
            }
            out = &out + &m;
        }
        out
    }
}

impl<'a, K: PairAlgebra> Add<&'a NormalPoly<K>> for &'a NormalPoly<K> {
    type Output = NormalPoly<K>;
    fn add(self, o: &NormalPoly<K>) -> NormalPoly<K> {
        let mut out = self.clone();
        for (k, c) in &o.terms {
            out.accumulate(*k, c.clone());
        }
        out
    }
}

impl<'a, K: PairAlgebra> Sub<&'a NormalPoly<K>> for &'a NormalPoly<K> {
    type Output = NormalPoly<K>;
    fn sub(self, o: &NormalPoly<K>) -> NormalPoly<K> {
        let mut out = self.clone();
        for (k, c) in &o.terms {
            out.accumulate(*k, -c);
        }
        out
    }
}

impl<'a, K: PairAlgebra> Mul<&'a NormalPoly<K>> for &'a NormalPoly<K> {
    type Output = NormalPoly<K>;
    fn mul(self, o: &NormalPoly<K>) -> NormalPoly<K> {
        let (c1, c2) = K::commutators();
        let mut out = NormalPoly::zero();
        for (k1, s1) in &self.terms {
            for (k2, s2) in &o.terms {
                let s = s1 * s2;
                let first = pair_product(k1[0], k1[2], k2[0], k2[2], &c1);
                let second = pair_product(k1[1], k1[3], k2[1], k2[3], &c2);
                for (w1, a, c) in &first {
                    let sw = &s * w1;
                    for (w2, b, d) in &second {
                        out.accumulate([*a, *b, *c, *d], &sw * w2);
                    }
                }
            }
        }
        out
    }
}

impl<K: PairAlgebra> Neg for &NormalPoly<K> {
    type Output = NormalPoly<K>;
    fn neg(self) -> NormalPoly<K> {
        self.map_scalars(|c| -c)
    }
}

forward_owned!(OperatorPoly, Add add, Sub sub, Mul mul);
forward_owned!(BoppPoly, Add add, Sub sub, Mul mul);

/// Canonical text form: terms in key order, `coefficient*generators`.
impl<K: PairAlgebra> fmt::Display for NormalPoly<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (idx, (k, c)) in self.terms.iter().enumerate() {
            let gens: Vec<String> = k
                .iter()
                .zip(K::NAMES)
                .filter(|(e, _)| **e > 0)
                .map(|(e, n)| if *e == 1 { n.to_string() } else { format!("{n}^{e}") })
                .collect();
            let cs = c.to_string();
            let body = match (gens.is_empty(), cs.as_str()) {
                (true, _) => cs.clone(),
                (false, "1") => gens.join("*"),
                (false, "-1") => format!("-{}", gens.join("*")),
                (false, _) if c.single_term() => format!("{cs}*{}", gens.join("*")),
                (false, _) => format!("({cs})*{}", gens.join("*")),
            };
            if idx == 0 {
                write!(f, "{body}")?;
            } else if let Some(rest) = body.strip_prefix('-') {
                write!(f, " - {rest}")?;
            } else {
                write!(f, " + {body}")?;
            }
        }
        Ok(())
    }
}

/// `[a, b] = ab - ba`.
pub fn commutator<K: PairAlgebra>(a: &NormalPoly<K>, b: &NormalPoly<K>) -> NormalPoly<K> {
    a.commutator(b)
}

pub fn op_mul<K: PairAlgebra>(a: &NormalPoly<K>, b: &NormalPoly<K>) -> NormalPoly<K> {
    a * b
}

impl OperatorPoly {
    pub fn q() -> Self {
        Self::generator(0)
    }
    pub fn p() -> Self {
        Self::generator(1)
    }
    pub fn lq() -> Self {
        Self::generator(2)
    }
    pub fn lp() -> Self {
        Self::generator(3)
    }
}

impl BoppPoly {
    pub fn big_q() -> Self {
        Self::generator(0)
    }
    pub fn big_qb() -> Self {
        Self::generator(1)
    }
    pub fn big_p() -> Self {
        Self::generator(2)
    }
    pub fn big_pb() -> Self {
        Self::generator(3)
    }

    /// True when some monomial contains `Qb` or `Pb`.
    pub fn has_barred(&self) -> bool {
        self.terms().any(|(k, _)| k[1] > 0 || k[3] > 0)
    }

    /// `(unbarred, barred)` split of the monomials.
    pub fn split_barred(&self) -> (BoppPoly, BoppPoly) {
        let (b, u): (Vec<_>, Vec<_>) =
            self.terms().map(|(k, c)| (*k, c.clone())).partition(|(k, _)| k[1] > 0 || k[3] > 0);
        (Self::from_terms(u), Self::from_terms(b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reordering_examples() {
        let (q, p, lq) = (OperatorPoly::q(), OperatorPoly::p(), OperatorPoly::lq());
        // lq q = q lq - i
        let expect = &(&q * &lq) - &OperatorPoly::scalar(Scalar::i());
        assert_eq!(&lq * &q, expect);
        assert_eq!(&q * &p, OperatorPoly::monomial([1, 1, 0, 0], Scalar::one()));
        let s = &q + &p;
        assert_eq!(&s * &OperatorPoly::one(), s);
    }

    #[test]
    fn commutator_examples() {
        let (q, p, lq, lp) = (OperatorPoly::q(), OperatorPoly::p(), OperatorPoly::lq(), OperatorPoly::lp());
        assert_eq!(commutator(&q, &lq), OperatorPoly::scalar(Scalar::i()));
        assert_eq!(commutator(&p, &lp), OperatorPoly::scalar(Scalar::i()));
        assert!(commutator(&q, &p).is_zero());
        assert!(commutator(&q, &lp).is_zero());
        assert!(commutator(&lq, &lp).is_zero());
        let expect = q.scale(&Scalar::int(-2)).scale(&Scalar::i());
        assert_eq!(commutator(&lq, &q.pow(2)), expect);
    }

    #[test]
    fn bopp_relations() {
        let (bq, bqb, bp, bpb) = (BoppPoly::big_q(), BoppPoly::big_qb(), BoppPoly::big_p(), BoppPoly::big_pb());
        let ih = &Scalar::i() * &Scalar::hbar();
        assert_eq!(commutator(&bq, &bp), BoppPoly::scalar(ih.clone()));
        assert_eq!(commutator(&bqb, &bpb), BoppPoly::scalar(-ih));
        assert!(commutator(&bq, &bpb).is_zero());
    }

    #[test]
    fn conjugation() {
        let (q, lq) = (OperatorPoly::q(), OperatorPoly::lq());
        // (q lq)^† = lq q = q lq - i
        let m = &q * &lq;
        assert_eq!(m.conj(), &m - &OperatorPoly::scalar(Scalar::i()));
        let sym = &m + &(&lq * &q);
        assert!(sym.is_hermitian());
        assert!(!OperatorPoly::scalar(Scalar::i()).is_hermitian());
    }

    #[test]
    fn display() {
        let x = &OperatorPoly::lq() * &OperatorPoly::q();
        assert_eq!(x.to_string(), "-i + q*lq");
        let y = OperatorPoly::monomial([0, 0, 0, 3], &Scalar::ratio(-1, 4) * &Scalar::hbar().pow(2));
        assert_eq!(y.to_string(), "-1/4*hbar^2*lp^3");
    }
}
