//! Coefficients: Laurent polynomials in the commuting real symbols
//! `hbar`, `t`, `g`, `alpha` over exact complex rationals.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Coeff = Complex<BigRational>;

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn coeff(re: BigRational, im: BigRational) -> Coeff {
    Complex::new(re, im)
}

pub fn real_coeff(num: i64, den: i64) -> Coeff {
    Complex::new(rational(num, den), BigRational::zero())
}

pub fn coeff_i() -> Coeff {
    Complex::new(BigRational::zero(), BigRational::one())
}

pub fn coeff_to_c64(c: &Coeff) -> Complex64 {
    Complex64::new(c.re.to_f64().unwrap_or(f64::NAN), c.im.to_f64().unwrap_or(f64::NAN))
}

/// Exponents of `(hbar, t, g, alpha)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SymExp {
    pub hbar: i32,
    pub t: i32,
    pub g: i32,
    pub alpha: i32,
}

impl SymExp {
    pub const ONE: SymExp = SymExp { hbar: 0, t: 0, g: 0, alpha: 0 };

    fn plus(self, o: SymExp) -> SymExp {
        SymExp { hbar: self.hbar + o.hbar, t: self.t + o.t, g: self.g + o.g, alpha: self.alpha + o.alpha }
    }

    pub fn is_one(&self) -> bool {
        *self == Self::ONE
    }
}

/// Numeric values substituted for the symbols.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolValues {
    pub hbar: f64,
    pub t: f64,
    pub g: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Scalar {
    terms: BTreeMap<SymExp, Coeff>,
}

impl Scalar {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(real_coeff(1, 1))
    }

    pub fn i() -> Self {
        Self::constant(coeff_i())
    }

    pub fn constant(c: Coeff) -> Self {
        Self::term(SymExp::ONE, c)
    }

    pub fn int(n: i64) -> Self {
        Self::constant(real_coeff(n, 1))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Self::constant(real_coeff(num, den))
    }

    pub fn real(r: BigRational) -> Self {
        Self::constant(Complex::new(r, BigRational::zero()))
    }

    pub fn term(e: SymExp, c: Coeff) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(e, c);
        }
        Self { terms }
    }

    pub fn hbar_pow(k: i32) -> Self {
        Self::term(SymExp { hbar: k, ..SymExp::ONE }, real_coeff(1, 1))
    }

    pub fn hbar() -> Self {
        Self::hbar_pow(1)
    }

    pub fn t() -> Self {
        Self::term(SymExp { t: 1, ..SymExp::ONE }, real_coeff(1, 1))
    }

    pub fn g() -> Self {
        Self::term(SymExp { g: 1, ..SymExp::ONE }, real_coeff(1, 1))
    }

    pub fn alpha() -> Self {
        Self::term(SymExp { alpha: 1, ..SymExp::ONE }, real_coeff(1, 1))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&SymExp, &Coeff)> {
        self.terms.iter()
    }

    fn accumulate(&mut self, e: SymExp, c: Coeff) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e).or_insert_with(Coeff::zero);
        *slot = &*slot + c;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    /// Coefficient when free of symbols.
    pub fn as_numeric(&self) -> Option<Coeff> {
        match self.terms.len() {
            0 => Some(Coeff::zero()),
            1 => self.terms.get(&SymExp::ONE).cloned(),
            _ => None,
        }
    }

    pub fn is_numeric(&self) -> bool {
        self.as_numeric().is_some()
    }

    pub fn scale(&self, c: &Coeff) -> Self {
        let mut out = Self::zero();
        for (e, v) in &self.terms {
            out.accumulate(*e, v * c);
        }
        out
    }

    /// Multiply by `hbar^k`.
    pub fn shift_hbar(&self, k: i32) -> Self {
        Self {
            terms: self.terms.iter().map(|(e, c)| (SymExp { hbar: e.hbar + k, ..*e }, c.clone())).collect(),
        }
    }

    pub fn min_hbar_power(&self) -> Option<i32> {
        self.terms.keys().map(|e| e.hbar).min()
    }

    /// Coefficient of `hbar^0`.
    pub fn hbar_zero_part(&self) -> Self {
        Self { terms: self.terms.iter().filter(|(e, _)| e.hbar == 0).map(|(e, c)| (*e, c.clone())).collect() }
    }

    pub fn conj(&self) -> Self {
        Self { terms: self.terms.iter().map(|(e, c)| (*e, c.conj())).collect() }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    pub fn eval(&self, v: &SymbolValues) -> Complex64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                coeff_to_c64(c)
                    * v.hbar.powi(e.hbar)
                    * v.t.powi(e.t)
                    * v.g.powi(e.g)
                    * v.alpha.powi(e.alpha)
            })
            .sum()
    }
}

impl From<Coeff> for Scalar {
    fn from(c: Coeff) -> Self {
        Scalar::constant(c)
    }
}

impl<'a> Add<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn add(self, o: &Scalar) -> Scalar {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.accumulate(*e, c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn sub(self, o: &Scalar) -> Scalar {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.accumulate(*e, -c.clone());
        }
        out
    }
}

impl<'a> Mul<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn mul(self, o: &Scalar) -> Scalar {
        let mut out = Scalar::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                out.accumulate(e1.plus(*e2), c1 * c2);
            }
        }
        out
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar { terms: self.terms.iter().map(|(e, c)| (*e, -c.clone())).collect() }
    }
}

macro_rules! forward_owned {
    ($t:ty, $($tr:ident $m:ident),*) => {$(
        impl $tr<$t> for $t {
            type Output = $t;
            fn $m(self, o: $t) -> $t { (&self).$m(&o) }
        }
        impl<'a> $tr<&'a $t> for $t {
            type Output = $t;
            fn $m(self, o: &'a $t) -> $t { (&self).$m(o) }
        }
    )*
    impl Neg for $t {
        type Output = $t;
        fn neg(self) -> $t { -&self }
    }
    };
}
pub(crate) use forward_owned;

forward_owned!(Scalar, Add add, Sub sub, Mul mul);

fn fmt_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn fmt_coeff(c: &Coeff) -> String {
    let im = |r: &BigRational| {
        if r.is_one() {
            "i".to_string()
        } else if (-r).is_one() {
            "-i".to_string()
        } else {
            format!("{}i", fmt_rational(r))
        }
    };
    match (c.re.is_zero(), c.im.is_zero()) {
        (_, true) => fmt_rational(&c.re),
        (true, false) => im(&c.im),
        (false, false) => {
            let sign = if c.im.is_negative() { "-" } else { "+" };
            format!("({}{}{})", fmt_rational(&c.re), sign, im(&c.im.abs()))
        }
    }
}

fn fmt_symbols(e: &SymExp) -> Vec<String> {
    let mut out = Vec::new();
    for (name, k) in [("hbar", e.hbar), ("t", e.t), ("g", e.g), ("alpha", e.alpha)] {
        match k {
            0 => {}
            1 => out.push(name.to_string()),
            _ => out.push(format!("{name}^{k}")),
        }
    }
    out
}

impl Scalar {
    pub(crate) fn single_term(&self) -> bool {
        self.terms.len() == 1
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            let syms = fmt_symbols(e);
            let cs = fmt_coeff(c);
            let mut s = if syms.is_empty() {
                cs
            } else if cs == "1" {
                syms.join("*")
            } else if cs == "-1" {
                format!("-{}", syms.join("*"))
            } else {
                format!("{}*{}", cs, syms.join("*"))
            };
            if !first {
                if let Some(rest) = s.strip_prefix('-') {
                    s = format!(" - {rest}");
                } else {
                    s = format!(" + {s}");
                }
            }
            first = false;
            write!(f, "{s}")?;
        }
        Ok(())
    }
}
