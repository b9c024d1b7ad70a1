//! Exact operator algebra on the extended phase space.
//!
//! Operators are normal-ordered polynomials in `q, p, lambda_q, lambda_p`
//! with `[q, lambda_q] = [p, lambda_p] = i`. Coefficients carry the formal
//! real symbols `hbar`, `t`, `g`, `alpha`, so every identity here is exact.
//! The Bopp combinations
//!
//! ```text
//! Q = q - (hbar/2) lambda_p,  P = p + (hbar/2) lambda_q,
//! Qb = q + (hbar/2) lambda_p, Pb = p - (hbar/2) lambda_q
//! ```
//!
//! give two commuting Heisenberg pairs, `[Q, P] = i hbar`, `[Qb, Pb] = -i hbar`.

mod adjoint;
mod algebra;
mod classical;
pub mod exact;
mod scalar;

pub use adjoint::{adjoint_finite_quadratic, adjoint_infinitesimal, adjoint_matrix, AdjointMode, ExpLinear, LinearOpBasis};
pub use algebra::{commutator, op_mul, Bopp, BoppPoly, Key, Kvn, NormalPoly, OperatorPoly, PairAlgebra};
pub use classical::ClassicalPoly;
pub use scalar::{coeff, coeff_i, coeff_to_c64, fmt_coeff, rational, real_coeff, Coeff, Scalar, SymExp, SymbolValues};

use num_rational::BigRational;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::model::MonomialPotential;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OpalgError {
    #[error("exponent n = {0} is not a positive integer; no polynomial operator form")]
    NonPolynomialPotential(f64),
    #[error("coupling {0} has no exact rational form")]
    Coupling(f64),
    #[error("division by hbar left a negative power of hbar")]
    InexactHbarDivision,
    #[error("generator has degree {0}; the finite adjoint needs degree <= 2")]
    NonQuadraticGenerator(u32),
    #[error("generator coefficients must be numeric for the finite adjoint")]
    NonNumericGenerator,
    #[error("operand is not linear in q, p, lambda_q, lambda_p")]
    NonLinearOperand,
    #[error("unsupported adjoint spectrum: {0}")]
    UnsupportedSpectrum(String),
    #[error("n = 2 is the harmonic case")]
    HarmonicCase,
    #[error("expected a function of q and p only")]
    NotPhaseSpaceFunction,
}

/// `V(q) = g q^n / n` with integer `n >= 1` and an exact or formal coupling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolicPotential {
    pub g: Scalar,
    pub n: u32,
}

impl SymbolicPotential {
    /// Coupling kept as the formal symbol `g`.
    pub fn formal(n: u32) -> Result<Self, OpalgError> {
        if n == 0 {
            return Err(OpalgError::NonPolynomialPotential(0.0));
        }
        Ok(Self { g: Scalar::g(), n })
    }

    /// Coupling converted exactly from its binary value.
    pub fn from_potential(pot: &MonomialPotential) -> Result<Self, OpalgError> {
        let n = pot.integer_exponent().ok_or(OpalgError::NonPolynomialPotential(pot.n))?;
        let g = BigRational::from_float(pot.g).ok_or(OpalgError::Coupling(pot.g))?;
        Ok(Self { g: Scalar::real(g), n })
    }

    /// `p^2/2 + g q^n / n`.
    pub fn hamiltonian(&self) -> ClassicalPoly {
        ClassicalPoly::phase_monomial(0, 2, Scalar::ratio(1, 2))
            .add(&ClassicalPoly::phase_monomial(self.n, 0, &self.g * &Scalar::ratio(1, self.n as i64)))
    }

    pub fn is_harmonic(&self) -> bool {
        self.n == 2
    }
}

/// `(Q, P, Qb, Pb)` as extended-algebra operators.
pub fn bopp_operators() -> (OperatorPoly, OperatorPoly, OperatorPoly, OperatorPoly) {
    let half_h = &Scalar::hbar() * &Scalar::ratio(1, 2);
    let lq = OperatorPoly::lq().scale(&half_h);
    let lp = OperatorPoly::lp().scale(&half_h);
    let (q, p) = (OperatorPoly::q(), OperatorPoly::p());
    (&q - &lp, &p + &lq, &q + &lp, &p - &lq)
}

fn divide_by_hbar(x: OperatorPoly) -> Result<OperatorPoly, OpalgError> {
    let y = x.map_scalars(|c| c.shift_hbar(-1));
    match y.min_hbar_power() {
        Some(k) if k < 0 => Err(OpalgError::InexactHbarDivision),
        _ => Ok(y),
    }
}

/// `[C(Q, P) - C(Qb, Pb)] / hbar` with `C` Weyl-ordered in each Bopp pair.
pub fn build_c_hbar(c: &ClassicalPoly) -> Result<OperatorPoly, OpalgError> {
    if !c.is_phase_space() {
        return Err(OpalgError::NotPhaseSpaceFunction);
    }
    let (bq, bp, bqb, bpb) = bopp_operators();
    divide_by_hbar(&c.weyl_in(&bq, &bp) - &c.weyl_in(&bqb, &bpb))
}

/// `[H(Q, P) - H(Qb, Pb)] / hbar`.
pub fn build_g(pot: &SymbolicPotential) -> Result<OperatorPoly, OpalgError> {
    build_c_hbar(&pot.hamiltonian())
}

/// Partial sum `sum_{j <= jmax} hbar^(2j) / (2^(2j) (2j+1)!) D^(2j+1) C`,
/// `D = lambda_q d/dp - lambda_p d/dq`, Weyl-ordered in the extended algebra.
pub fn build_series_c(c: &ClassicalPoly, jmax: u32) -> OperatorPoly {
    let mut out = ClassicalPoly::zero();
    let mut d = c.flow_derivative();
    let mut fact: i64 = 1;
    for j in 0..=jmax {
        if d.is_zero() {
            break;
        }
        let k = 2 * j as i64 + 1;
        if j > 0 {
            fact *= (k - 1) * k;
        }
        let w = &Scalar::hbar_pow(2 * j as i32) * &Scalar::ratio(1, fact * 4i64.pow(j));
        out = out.add(&d.scale(&w));
        d = d.flow_derivative().flow_derivative();
    }
    out.weyl()
}

pub fn build_series_g(pot: &SymbolicPotential, jmax: u32) -> OperatorPoly {
    build_series_c(&pot.hamiltonian(), jmax)
}

/// `lambda_q dC/dp - lambda_p dC/dq`, Weyl-ordered.
pub fn hamiltonian_vector_field(c: &ClassicalPoly) -> OperatorPoly {
    c.flow_derivative().weyl()
}

/// Similarity generator
/// `A = t G - (lq q + q lq)/(2-n) - n (lp p + p lp) / (2(2-n))`
/// with the optional `O(hbar)` corrections set to zero. For `n = 2` the
/// dilation `lq q + p lp` is returned.
pub fn lms_quantum_generator(pot: &SymbolicPotential) -> Result<OperatorPoly, OpalgError> {
    let (q, p, lq, lp) = (OperatorPoly::q(), OperatorPoly::p(), OperatorPoly::lq(), OperatorPoly::lp());
    if pot.is_harmonic() {
        return Ok(&(&lq * &q) + &(&p * &lp));
    }
    let n = pot.n as i64;
    let sym_q = &(&lq * &q) + &(&q * &lq);
    let sym_p = &(&lp * &p) + &(&p * &lp);
    let tg = build_g(pot)?.scale(&Scalar::t());
    Ok(&(&tg - &sym_q.scale(&Scalar::ratio(1, 2 - n))) - &sym_p.scale(&Scalar::ratio(n, 2 * (2 - n))))
}

/// Result of rewriting an operator in the Bopp generators.
#[derive(Debug, Clone, PartialEq)]
pub struct LeakReport {
    /// Some monomial contains `Qb` or `Pb`.
    pub leaks: bool,
    pub rewritten: BoppPoly,
    pub barred: BoppPoly,
    pub unbarred: BoppPoly,
    /// Coefficients contain negative powers of `hbar`.
    pub inverse_hbar: bool,
}

/// Rewrite via `q = (Q+Qb)/2`, `lambda_p = (Qb-Q)/hbar`, `p = (P+Pb)/2`,
/// `lambda_q = (P-Pb)/hbar`. Formal `1/hbar` coefficients are kept.
pub fn leak_detect(x: &OperatorPoly) -> LeakReport {
    let half = Scalar::ratio(1, 2);
    let inv_h = Scalar::hbar_pow(-1);
    let (bq, bqb, bp, bpb) = (BoppPoly::big_q(), BoppPoly::big_qb(), BoppPoly::big_p(), BoppPoly::big_pb());
    let images = [
        (&bq + &bqb).scale(&half),
        (&bp + &bpb).scale(&half),
        (&bp - &bpb).scale(&inv_h),
        (&bqb - &bq).scale(&inv_h),
    ];
    let rewritten = x.substitute(&images);
    let (unbarred, barred) = rewritten.split_barred();
    LeakReport {
        leaks: !barred.is_zero(),
        inverse_hbar: rewritten.min_hbar_power().is_some_and(|k| k < 0),
        rewritten,
        barred,
        unbarred,
    }
}

/// Inverse of the rewriting in [`leak_detect`].
pub fn bopp_to_kvn(x: &BoppPoly) -> OperatorPoly {
    let (bq, bp, bqb, bpb) = bopp_operators();
    x.substitute(&[bq, bqb, bp, bpb])
}

/// Outcome of the standard-quantum consistency conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoGoResult {
    /// Common coefficient when both conditions agree.
    pub solution: Option<f64>,
    /// Difference between the two required coefficients, `(n+2)/(2-n)`.
    pub gap: f64,
}

/// Look for `A0 = a (QP + PQ)/2` with `(i/hbar)[A0, Q] = -2/(2-n) Q` and
/// `(i/hbar)[A0, P] = -n/(2-n) P`. The commutators are computed in the
/// Heisenberg algebra; both conditions hold only at `n = -2`.
pub fn no_go_standard_qm(n: f64) -> Result<NoGoResult, OpalgError> {
    if n == 2.0 {
        return Err(OpalgError::HarmonicCase);
    }
    let (bq, bp) = (BoppPoly::big_q(), BoppPoly::big_p());
    let a0 = (&(&bq * &bp) + &(&bp * &bq)).scale(&Scalar::ratio(1, 2));
    let k = Scalar::i().shift_hbar(-1);
    let on_q = a0.commutator(&bq).scale(&k);
    let on_p = a0.commutator(&bp).scale(&k);
    let rate = |img: &BoppPoly, key: Key| -> f64 {
        let c = img.coefficient(key).as_numeric().expect("Heisenberg commutators are numeric");
        c.re.to_f64().unwrap_or(f64::NAN)
    };
    let kq = rate(&on_q, [1, 0, 0, 0]);
    let kp = rate(&on_p, [0, 0, 1, 0]);
    let from_q = -2.0 / (2.0 - n) / kq;
    let from_p = -n / (2.0 - n) / kp;
    let gap = from_p - from_q;
    let solution = if gap.abs() <= 1e-12 * from_q.abs().max(1.0) { Some(from_q) } else { None };
    Ok(NoGoResult { solution, gap })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(n: i64, d: i64) -> Scalar {
        Scalar::ratio(n, d)
    }

    #[test]
    fn bopp_commutators() {
        let (bq, bp, bqb, bpb) = bopp_operators();
        let ih = &Scalar::i() * &Scalar::hbar();
        assert_eq!(commutator(&bq, &bp), OperatorPoly::scalar(ih.clone()));
        assert_eq!(commutator(&bqb, &bpb), OperatorPoly::scalar(-ih));
        for (a, b) in [(&bq, &bqb), (&bq, &bpb), (&bp, &bqb), (&bp, &bpb)] {
            assert!(commutator(a, b).is_zero());
        }
    }

    #[test]
    fn evolution_operator_examples() {
        let (q, p, lq, lp) = (OperatorPoly::q(), OperatorPoly::p(), OperatorPoly::lq(), OperatorPoly::lp());
        let g = Scalar::g();
        let liouv = |qpow: u32| &(&lq * &p) - &(&lp * &q.pow(qpow)).scale(&g);
        assert_eq!(build_g(&SymbolicPotential::formal(2).unwrap()).unwrap(), liouv(1));
        assert_eq!(build_g(&SymbolicPotential::formal(1).unwrap()).unwrap(), liouv(0));
        let quartic = &liouv(3) - &(&lp.pow(3) * &q).scale(&(&(&g * &Scalar::hbar().pow(2)) * &s(1, 4)));
        assert_eq!(build_g(&SymbolicPotential::formal(4).unwrap()).unwrap(), quartic);
    }

    #[test]
    fn series_terminates() {
        for n in 1..=6u32 {
            let pot = SymbolicPotential::formal(n).unwrap();
            let jmax = n.saturating_sub(1).div_ceil(2);
            assert_eq!(build_series_g(&pot, jmax), build_g(&pot).unwrap(), "n={n}");
        }
        let quartic = SymbolicPotential::formal(4).unwrap();
        assert_ne!(build_series_g(&quartic, 0), build_g(&quartic).unwrap());
        let harmonic = SymbolicPotential::formal(2).unwrap();
        assert_eq!(build_series_g(&harmonic, 0), build_series_g(&harmonic, 5));
    }

    #[test]
    fn generalized_generator_examples() {
        // C = q p: its vector field is lq q - lp p, and no corrections remain
        let qp = ClassicalPoly::phase_monomial(1, 1, Scalar::one());
        let c = build_c_hbar(&qp).unwrap();
        assert_eq!(c, build_series_c(&qp, 3));
        assert_eq!(c, hamiltonian_vector_field(&qp));
        // C = q -> -lp
        let c = build_c_hbar(&ClassicalPoly::phase_monomial(1, 0, Scalar::one())).unwrap();
        assert_eq!(c, -&OperatorPoly::lp());
        assert!(build_c_hbar(&ClassicalPoly::phase_monomial(0, 0, Scalar::int(7))).unwrap().is_zero());
        let bad = ClassicalPoly::monomial([0, 0, 1, 0], Scalar::one());
        assert_eq!(build_c_hbar(&bad), Err(OpalgError::NotPhaseSpaceFunction));
    }

    #[test]
    fn numeric_coupling_is_exact() {
        let pot = SymbolicPotential::from_potential(&MonomialPotential::new(0.5, 4.0).unwrap()).unwrap();
        assert_eq!(pot.g, s(1, 2));
        let non_int = MonomialPotential::new(1.0, 2.5).unwrap();
        assert_eq!(SymbolicPotential::from_potential(&non_int), Err(OpalgError::NonPolynomialPotential(2.5)));
    }

    #[test]
    fn generator_properties() {
        let a2 = lms_quantum_generator(&SymbolicPotential::formal(2).unwrap()).unwrap();
        assert!(a2.is_hermitian());
        let h = build_g(&SymbolicPotential::formal(2).unwrap()).unwrap();
        assert!(commutator(&a2, &h).is_zero());
        for n in [1, 3, 4, 5] {
            let a = lms_quantum_generator(&SymbolicPotential::formal(n).unwrap()).unwrap();
            assert!(a.is_hermitian(), "n={n}");
        }
        // n = 4: -(1/(2-4))(lq q + q lq) = q lq - i/2
        let a4 = lms_quantum_generator(&SymbolicPotential::formal(4).unwrap()).unwrap();
        assert_eq!(a4.coefficient([1, 0, 1, 0]), Scalar::one());
        assert_eq!(a4.coefficient([0, 1, 0, 1]), Scalar::int(2));
    }

    #[test]
    fn infinitesimal_similarity_on_bopp_operators() {
        let (bq, bp, bqb, bpb) = bopp_operators();
        let alpha = Scalar::alpha();
        let t = Scalar::t();
        let g = Scalar::g();
        let a4 = lms_quantum_generator(&SymbolicPotential::formal(4).unwrap()).unwrap();
        let dq = adjoint_infinitesimal(&a4, &bq, &alpha, AdjointMode::Kvn);
        // Q + alpha (t P + Q + (3/2)(Qb - Q))
        let expect = &bq
            + &(&(&bp.scale(&t) + &bq) + &(&bqb - &bq).scale(&s(3, 2))).scale(&alpha);
        assert_eq!(dq, expect);
        let dp = adjoint_infinitesimal(&a4, &bp, &alpha, AdjointMode::Kvn);
        // P + alpha (-t g Q^3 + 2 P + (3/2)(Pb - P))
        let expect = &bp
            + &(&(&bq.pow(3).scale(&-&(&t * &g)) + &bp.scale(&Scalar::int(2))) + &(&bpb - &bp).scale(&s(3, 2))).scale(&alpha);
        assert_eq!(dp, expect);
        assert_eq!(adjoint_infinitesimal(&a4, &bq, &Scalar::zero(), AdjointMode::Kvn), bq);
    }

    #[test]
    fn hyperbolic_mixing() {
        let (bq, bp, bqb, bpb) = bopp_operators();
        let a = lms_quantum_generator(&SymbolicPotential::formal(2).unwrap()).unwrap();
        let lin = |x: &OperatorPoly| LinearOpBasis::from_operator(x).unwrap();
        let r = adjoint_finite_quadratic(&a, &bq).unwrap();
        assert_eq!(r, ExpLinear::hyperbolic(&lin(&bq), &lin(&bqb)));
        let r = adjoint_finite_quadratic(&a, &bp).unwrap();
        assert_eq!(r, ExpLinear::hyperbolic(&lin(&bp), &lin(&bpb)));
        // first order agrees with the infinitesimal form
        let inf = adjoint_infinitesimal(&a, &bp, &Scalar::one(), AdjointMode::Kvn);
        assert_eq!(r.value_at_zero(), lin(&bp));
        assert_eq!(r.derivative_at_zero().to_operator(), &inf - &bp);
    }

    #[test]
    fn leak_examples() {
        let (bq, _, bqb, _) = bopp_operators();
        assert!(!leak_detect(&bq.pow(3)).leaks);
        assert!(leak_detect(&OperatorPoly::q()).leaks);
        let mixed = &bq + &bqb.scale(&Scalar::ratio(1, 3));
        let r = leak_detect(&mixed);
        assert!(r.leaks);
        assert_eq!(r.barred, BoppPoly::big_qb().scale(&s(1, 3)));
        let r = leak_detect(&OperatorPoly::lq());
        assert!(r.inverse_hbar && r.leaks);
        // round trip
        let x = &(&OperatorPoly::q().pow(2) * &OperatorPoly::lp()) + &OperatorPoly::p();
        assert_eq!(bopp_to_kvn(&leak_detect(&x).rewritten), x);
    }

    #[test]
    fn no_go_examples() {
        let r = no_go_standard_qm(-2.0).unwrap();
        assert_eq!(r.solution, Some(-0.5));
        let r = no_go_standard_qm(4.0).unwrap();
        assert_eq!(r.solution, None);
        assert!((r.gap + 3.0).abs() < 1e-15);
        assert_eq!(no_go_standard_qm(1.0).unwrap().solution, None);
        assert_eq!(no_go_standard_qm(2.0), Err(OpalgError::HarmonicCase));
    }
}
