//! Verification suites run by `kvnlab run`.

use std::fmt::Display;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use super::report::{Check, CheckRecord};
use super::scenario::{Scenario, SuiteName};
use super::series::Series;
use crate::charges::{
    epb, liouvillian_field, liouvillian_value, lms_charge, lms_charge_field, lms_charge_harmonic, virasoro_charge,
    ChargeError, ScalarField4, NULL_LIOUVILLIAN_EPS,
};
use crate::dynamics::{integrate_sampled, survivable_horizon, uniform_times, ExtendedTrajectory, IntegratorConfig};
use crate::model::{ExtendedPoint, LmsParams, MonomialPotential};
use crate::opalg::{
    adjoint_finite_quadratic, adjoint_infinitesimal, bopp_operators, build_g, build_series_g, commutator,
    hamiltonian_vector_field, leak_detect, lms_quantum_generator, no_go_standard_qm, AdjointMode, ExpLinear,
    LinearOpBasis, OperatorPoly, Scalar, SymbolicPotential,
};
use crate::qgrid::{apply_lms_unitary_harmonic, evolve_g, gaussian_profile, make_separable, schmidt, UniformAxis};
use crate::semiclassics::{
    action_integral, action_scaling_exponent, bohr_levels, eigensolve_newton_equiv, lms_bohr_violation,
    newton_equiv_trajectory_check, spectral_scaling_exponent, turning_points, EigenGrid, NewtonEquivParams,
};
use crate::symmetry::{
    action_kvn, bracket_change, check_action_scaling, extended_form, extended_jacobian, lms_map_trajectory_checked,
    pullback_form, ScalingExponents, SymmetryError,
};

/// Library operations that check records may cite as anchors.
pub const ANCHORS: &[&str] = &[
    "dynamics::integrate_sampled",
    "dynamics::time_reversed",
    "charges::liouvillian_value",
    "charges::lms_charge",
    "charges::lms_charge_harmonic",
    "charges::epb",
    "charges::virasoro_charge",
    "symmetry::lms_map_trajectory_checked",
    "symmetry::action_kvn",
    "symmetry::check_action_scaling",
    "symmetry::bracket_change",
    "symmetry::extended_jacobian",
    "opalg::bopp_operators",
    "opalg::build_g",
    "opalg::build_series_g",
    "opalg::adjoint_infinitesimal",
    "opalg::adjoint_finite_quadratic",
    "opalg::leak_detect",
    "opalg::no_go_standard_qm",
    "qgrid::evolve_g",
    "qgrid::apply_lms_unitary_harmonic",
    "semiclassics::bohr_levels",
    "semiclassics::lms_bohr_violation",
    "semiclassics::action_scaling_exponent",
    "semiclassics::newton_equiv_trajectory_check",
    "semiclassics::eigensolve_newton_equiv",
];

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{context}: {message}")]
pub struct RunFailure {
    pub context: String,
    pub message: String,
}

trait Context<T> {
    fn ctx(self, context: &str) -> Result<T, RunFailure>;
}

impl<T, E: Display> Context<T> for Result<T, E> {
    fn ctx(self, context: &str) -> Result<T, RunFailure> {
        self.map_err(|e| RunFailure { context: context.to_string(), message: e.to_string() })
    }
}

#[derive(Debug, Clone, Default)]
pub struct SuiteOutput {
    pub records: Vec<CheckRecord>,
    pub series: Vec<Series>,
}

impl SuiteOutput {
    fn extend(&mut self, o: SuiteOutput) {
        self.records.extend(o.records);
        self.series.extend(o.series);
    }
}

/// Everything a suite needs, resolved from the scenario.
pub struct RunContext {
    pub scenario: Scenario,
    pub pot: MonomialPotential,
    pub cfg: IntegratorConfig,
    pub points: Vec<ExtendedPoint>,
    pub seed: u64,
}

impl RunContext {
    pub fn new(scenario: Scenario, seed: u64) -> Result<Self, RunFailure> {
        let pot = scenario.potential().ctx("potential")?;
        let ig = &scenario.integration;
        let cfg = IntegratorConfig { dt: ig.dt, tol: ig.tol, rmin: ig.rmin };
        let points = scenario.initial_points();
        Ok(Self { scenario, pot, cfg, points, seed })
    }

    fn pot_json(&self) -> Value {
        json!({"g": self.pot.g, "n": self.pot.n})
    }

    fn trajectory(&self, x0: &ExtendedPoint) -> Result<ExtendedTrajectory, RunFailure> {
        let ig = &self.scenario.integration;
        let horizon = survivable_horizon(x0, &self.pot, ig.periods, ig.radius, &self.cfg).ctx("horizon")?;
        integrate_sampled(x0, &self.pot, &uniform_times(horizon, ig.samples), &self.cfg).ctx("integration")
    }
}

pub fn run_suite(ctx: &RunContext, suite: SuiteName) -> Result<SuiteOutput, RunFailure> {
    match suite {
        SuiteName::Dynamics => dynamics(ctx),
        SuiteName::Charges => charges(ctx),
        SuiteName::LmsClassical => lms_classical(ctx),
        SuiteName::LmsVirasoro => lms_virasoro(ctx),
        SuiteName::Opalg => opalg(ctx),
        SuiteName::QuantumLeak => quantum_leak(ctx),
        SuiteName::Bohr => bohr(ctx),
        SuiteName::NewtonEquiv => newton_equiv(ctx),
        SuiteName::All => {
            let parts: Vec<_> = SuiteName::CONCRETE.par_iter().map(|s| run_suite(ctx, *s)).collect();
            let mut out = SuiteOutput::default();
            for p in parts {
                out.extend(p?);
            }
            Ok(out)
        }
    }
}

/// Run `f` for every initial condition in parallel, keeping input order.
fn per_point<F>(ctx: &RunContext, f: F) -> Result<SuiteOutput, RunFailure>
where
    F: Fn(usize, &ExtendedPoint) -> Result<SuiteOutput, RunFailure> + Sync,
{
    let parts: Vec<_> = ctx.points.par_iter().enumerate().map(|(i, x)| f(i, x)).collect();
    let mut out = SuiteOutput::default();
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

fn ic_json(x: &ExtendedPoint) -> Value {
    json!([x.q, x.p, x.lq, x.lp])
}

/// `max |c(t) - c(0)| / (1 + |c(0)|)`.
fn relative_drift(values: &[f64]) -> f64 {
    let Some(&c0) = values.first() else { return 0.0 };
    values.iter().map(|v| (v - c0).abs()).fold(0.0, f64::max) / (1.0 + c0.abs())
}

fn state_scale(tr: &ExtendedTrajectory) -> f64 {
    1.0 + tr.states.iter().flat_map(|x| x.to_array()).map(f64::abs).fold(0.0, f64::max)
}

fn dynamics(ctx: &RunContext) -> Result<SuiteOutput, RunFailure> {
    let tol = &ctx.scenario.tolerances;
    per_point(ctx, |i, x0| {
        let tr = ctx.trajectory(x0)?;
        let horizon = *tr.times.last().unwrap_or(&0.0);
        let inputs = json!({"potential": ctx.pot_json(), "ic": ic_json(x0), "horizon": horizon});
        let energies = tr.states.iter().map(|x| ctx.pot.energy(&x.phase())).collect::<Result<Vec<_>, _>>().ctx("energy")?;
        let energy = Check::new(format!("dynamics.energy_drift[{i}]"), "dynamics::integrate_sampled", inputs.clone())
            .measure("horizon", horizon)
            .at_most("relative_drift", relative_drift(&energies), tol.energy_drift);

        let rev = tr.time_reversed();
        let back = integrate_sampled(&rev.states[0], &ctx.pot, &rev.times, &ctx.cfg).ctx("reversed integration")?;
        let dev = back.states.iter().zip(&rev.states).map(|(a, b)| a.max_abs_diff(b)).fold(0.0, f64::max);
        let reversal = Check::new(format!("dynamics.reversal[{i}]"), "dynamics::time_reversed", inputs)
            .at_most("relative_deviation", dev / state_scale(&tr), tol.reversal);

        let series = Series::new(format!("dynamics_ic{i}"))
            .column("t", tr.times.iter().copied())
            .column("q", tr.states.iter().map(|x| x.q))
            .column("p", tr.states.iter().map(|x| x.p))
            .column("lq", tr.states.iter().map(|x| x.lq))
            .column("lp", tr.states.iter().map(|x| x.lp));
        Ok(SuiteOutput { records: vec![energy, reversal], series: vec![series] })
    })
}

fn optional_charge(r: Result<f64, ChargeError>) -> Result<Option<f64>, RunFailure> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(ChargeError::HarmonicCase | ChargeError::NullLiouvillian(_)) => Ok(None),
        Err(e) => Err(e).ctx("charge"),
    }
}

/// Random extended points inside the potential's domain.
pub fn random_points(pot: &MonomialPotential, count: usize, seed: u64) -> Vec<ExtendedPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mag: f64 = rng.gen_range(0.3..2.0);
            let sign = if pot.integer_exponent().is_some() && rng.gen_bool(0.5) { -1.0 } else { 1.0 };
            let mut c = || rng.gen_range(-2.0..2.0);
            ExtendedPoint::new(sign * mag, c(), c(), c())
        })
        .collect()
}

fn charges(ctx: &RunContext) -> Result<SuiteOutput, RunFailure> {
    let tol = &ctx.scenario.tolerances;
    let pot = &ctx.pot;
    let harmonic = pot.is_harmonic();
    let mut out = per_point(ctx, |i, x0| {
        let tr = ctx.trajectory(x0)?;
        let inputs = json!({"potential": ctx.pot_json(), "ic": ic_json(x0), "horizon": tr.times.last()});
        let h = tr.states.iter().map(|x| liouvillian_value(x, pot)).collect::<Result<Vec<_>, _>>().ctx("liouvillian")?;
        let d = tr
            .iter()
            .map(|(t, x)| if harmonic { Ok(lms_charge_harmonic(x)) } else { lms_charge(x, pot, t) })
            .collect::<Result<Vec<_>, _>>()
            .ctx("similarity charge")?;
        let mut tower = [Vec::new(), Vec::new()];
        for (t, x) in tr.iter() {
            for (m, col) in tower.iter_mut().enumerate() {
                col.push(optional_charge(virasoro_charge(x, pot, t, m as i32 + 1))?);
            }
        }
        let rec_h = Check::new(format!("charges.liouvillian_drift[{i}]"), "charges::liouvillian_value", inputs.clone())
            .at_most("relative_drift", relative_drift(&h), tol.charge_drift);
        let anchor = if harmonic { "charges::lms_charge_harmonic" } else { "charges::lms_charge" };
        let rec_d = Check::new(format!("charges.lms_drift[{i}]"), anchor, inputs)
            .measure("initial", d[0])
            .at_most("relative_drift", relative_drift(&d), tol.charge_drift);
        let [l1, l2] = tower;
        let series = Series::new(format!("charges_ic{i}"))
            .column("t", tr.times.iter().copied())
            .column("H", h)
            .column("D", d)
            .optional_column("L1", l1)
            .optional_column("L2", l2);
        Ok(SuiteOutput { records: vec![rec_h, rec_d], series: vec![series] })
    })?;

    // {L, D0} = L off the oscillator; {L, D} = 0 for the oscillator charge
    let pts = random_points(pot, tol.epb_points, ctx.seed);
    let lf = liouvillian_field(pot);
    let df = if harmonic {
        ScalarField4::with_gradient(lms_charge_harmonic, |x| [x.lq, x.lp, x.q, x.p])
    } else {
        lms_charge_field(pot).ctx("charge field")?
    };
    let mut worst: f64 = 0.0;
    for x in &pts {
        let b = epb(&lf, &df, x).ctx("bracket")?;
        let target = if harmonic { 0.0 } else { liouvillian_value(x, pot).ctx("liouvillian")? };
        worst = worst.max((b - target).abs() / (1.0 + target.abs()));
    }
    let inputs = json!({"potential": ctx.pot_json(), "points": tol.epb_points, "seed": ctx.seed});
    out.records.push(
        Check::new("charges.epb_dilation", "charges::epb", inputs)
            .measure("points", pts.len() as f64)
            .at_most("max_relative_error", worst, tol.epb),
    );
    Ok(out)
}

fn lms_virasoro(ctx: &RunContext) -> Result<SuiteOutput, RunFailure> {
    let tol = &ctx.scenario.tolerances;
    let pot = &ctx.pot;
    let ms = [-1, 0, 1, 2];
    per_point(ctx, |i, x0| {
        let inputs = json!({"potential": ctx.pot_json(), "ic": ic_json(x0), "alpha": ctx.scenario.lms.alpha});
        if pot.is_harmonic() {
            let rec = Check::new(format!("virasoro.tower[{i}]"), "charges::virasoro_charge", inputs)
                .skip("the tower is built from the similarity charge, which has no finite form at n = 2");
            return Ok(SuiteOutput { records: vec![rec], series: vec![] });
        }
        let h0 = liouvillian_value(x0, pot).ctx("liouvillian")?;
        if h0.abs() <= NULL_LIOUVILLIAN_EPS {
            let rec = Check::new(format!("virasoro.tower[{i}]"), "charges::virasoro_charge", inputs)
                .skip("vanishing Liouvillian");
            return Ok(SuiteOutput { records: vec![rec], series: vec![] });
        }
        let tr = ctx.trajectory(x0)?;
        let mut cols = vec![Vec::with_capacity(tr.len()); ms.len()];
        let mut identity_mismatch = 0usize;
        for (t, x) in tr.iter() {
            for (k, m) in ms.iter().enumerate() {
                cols[k].push(virasoro_charge(x, pot, t, *m).ctx("virasoro charge")?);
            }
            let h = liouvillian_value(x, pot).ctx("liouvillian")?;
            let d = lms_charge(x, pot, t).ctx("similarity charge")?;
            identity_mismatch += usize::from(cols[0].last() != Some(&h)) + usize::from(cols[1].last() != Some(&d));
        }
        let mut records: Vec<CheckRecord> = ms
            .iter()
            .zip(&cols)
            .map(|(m, c)| {
                Check::new(format!("virasoro.drift[{i}][m={m}]"), "charges::virasoro_charge", inputs.clone())
                    .measure("initial", c[0])
                    .at_most("relative_drift", relative_drift(c), tol.virasoro_drift)
            })
            .collect();
        records.push(
            Check::new(format!("virasoro.identities[{i}]"), "charges::virasoro_charge", inputs.clone())
                .measure("mismatches", identity_mismatch as f64)
                .exact(identity_mismatch == 0),
        );
        // the tower is conserved along the mapped solution as well
        let prm = LmsParams::from_alpha(ctx.scenario.lms.alpha, pot.n);
        let mapped = lms_map_trajectory_checked(&tr, &prm, pot).ctx("similarity map")?;
        for m in [1, 2] {
            let vals = mapped.iter().map(|(t, x)| virasoro_charge(x, pot, t, m)).collect::<Result<Vec<_>, _>>();
            let rec = Check::new(format!("virasoro.mapped_drift[{i}][m={m}]"), "symmetry::lms_map_trajectory_checked", inputs.clone());
            records.push(match vals {
                Ok(v) => rec.at_most("relative_drift", relative_drift(&v), tol.virasoro_drift),
                Err(ChargeError::NullLiouvillian(_)) => rec.skip("vanishing Liouvillian on the mapped orbit"),
                Err(e) => return Err(e).ctx("mapped virasoro charge"),
            });
        }
        let mut series = Series::new(format!("virasoro_ic{i}")).column("t", tr.times.iter().copied());
        for (m, c) in ms.iter().zip(cols) {
            series = series.column(&format!("L{m}"), c);
        }
        Ok(SuiteOutput { records, series: vec![series] })
    })
}

fn lms_classical(ctx: &RunContext) -> Result<SuiteOutput, RunFailure> {
    let tol = &ctx.scenario.tolerances;
    let pot = &ctx.pot;
    let n = pot.n;
    let alpha = ctx.scenario.lms.alpha;
    let prm = LmsParams::from_alpha(alpha, n);
    let mut out = per_point(ctx, |i, x0| {
        let inputs = json!({"potential": ctx.pot_json(), "ic": ic_json(x0), "alpha": alpha});
        let tr = ctx.trajectory(x0)?;
        let mapped = lms_map_trajectory_checked(&tr, &prm, pot).ctx("similarity map")?;
        let reint = integrate_sampled(&mapped.states[0], pot, &mapped.times, &ctx.cfg).ctx("reintegration")?;
        let dev = mapped.states.iter().zip(&reint.states).map(|(a, b)| a.max_abs_diff(b)).fold(0.0, f64::max);
        let mut records = vec![Check::new(format!("lms.solution_map[{i}]"), "symmetry::lms_map_trajectory_checked", inputs.clone())
            .at_most("relative_sup_difference", dev / state_scale(&mapped), tol.solution_map)];

        let s0 = action_kvn(&tr, pot).ctx("extended action")?;
        let s1 = action_kvn(&mapped, pot).ctx("extended action")?;
        records.push(
            Check::new(format!("lms.extended_action[{i}]"), "symmetry::action_kvn", inputs.clone())
                .measure("action", s0)
                .at_most("relative_change", (s1 - s0).abs() / (1.0 + s0.abs()), tol.action_invariance),
        );
        // full periods can cancel the action; use a fraction of one
        let ig = &ctx.scenario.integration;
        let short_t = survivable_horizon(x0, pot, 0.3, ig.radius, &ctx.cfg).ctx("horizon")?;
        let short = integrate_sampled(x0, pot, &uniform_times(short_t, ig.samples), &ctx.cfg).ctx("integration")?;
        let rec = Check::new(format!("lms.action_exponent[{i}]"), "symmetry::check_action_scaling", inputs);
        records.push(match check_action_scaling(&short, pot, &prm) {
            Ok(r) => rec.measure("measured", r.measured_exponent).measure("expected", r.expected_exponent).at_most(
                "residual",
                r.residual,
                tol.action_exponent,
            ),
            Err(SymmetryError::DegenerateAction(why)) => rec.skip(why),
            Err(e) => return Err(e).ctx("action scaling"),
        });
        let series = Series::new(format!("lms_ic{i}"))
            .column("t", mapped.times.iter().copied())
            .column("q_mapped", mapped.states.iter().map(|x| x.q))
            .column("p_mapped", mapped.states.iter().map(|x| x.p))
            .column("q_reintegrated", reint.states.iter().map(|x| x.q))
            .column("p_reintegrated", reint.states.iter().map(|x| x.p));
        Ok(SuiteOutput { records, series: vec![series] })
    })?;

    let beta = ctx.scenario.lms.beta_small;
    let k = 1.0 + n / 2.0;
    let (f_small, _) = bracket_change(&LmsParams::from_beta(beta, n), n);
    let resid = (f_small - (1.0 + beta * k)).abs();
    out.records.push(
        Check::new("lms.bracket_first_order", "symmetry::bracket_change", json!({"n": n, "beta": beta}))
            .measure("factor", f_small)
            .measure("residual", resid)
            .at_most("normalized_residual", resid / k.powi(2).max(1.0), tol.bracket_first_order),
    );
    let (f_std, f_ext) = bracket_change(&prm, n);
    out.records.push(
        Check::new("lms.standard_bracket_unit", "symmetry::bracket_change", json!({"n": n, "alpha": alpha}))
            .measure("factor", f_std)
            .exact((f_std == 1.0) == (n == -2.0)),
    );
    out.records.push(
        Check::new("lms.extended_bracket", "symmetry::bracket_change", json!({"n": n, "alpha": alpha}))
            .measure("factor", f_ext)
            .exact(f_ext == 1.0 && ScalingExponents::for_exponent(n).preserves_extended_form()),
    );
    let w = extended_form();
    let pb = pullback_form(&extended_jacobian(&prm, n), &w);
    let dev = (0..4).flat_map(|a| (0..4).map(move |b| (a, b))).map(|(a, b)| (pb[a][b] - w[a][b]).abs()).fold(0.0, f64::max);
    out.records.push(
        Check::new("lms.extended_form_pullback", "symmetry::extended_jacobian", json!({"n": n, "alpha": alpha}))
            .at_most("max_deviation", dev, 4.0 * f64::EPSILON),
    );
    Ok(out)
}

fn exact_record(id: String, anchor: &str, inputs: Value, mismatches: usize) -> CheckRecord {
    Check::new(id, anchor, inputs).measure("mismatches", mismatches as f64).exact(mismatches == 0)
}

fn opalg(ctx: &RunContext) -> Result<SuiteOutput, RunFailure> {
    let mut records = Vec::new();
    let (bq, bp, bqb, bpb) = bopp_operators();
    let ih = &Scalar::i() * &Scalar::hbar();
    let mut miss = usize::from(commutator(&bq, &bp) != OperatorPoly::scalar(ih.clone()));
    miss += usize::from(commutator(&bqb, &bpb) != OperatorPoly::scalar(-ih));
    for (a, b) in [(&bq, &bqb), (&bq, &bpb), (&bp, &bqb), (&bp, &bpb)] {
        miss += usize::from(!commutator(a, b).is_zero());
    }
    records.push(exact_record("opalg.bopp_commutators".into(), "opalg::bopp_operators", json!({}), miss));

    let harmonic = SymbolicPotential::formal(2).ctx("potential")?;
    let g2 = build_g(&harmonic).ctx("generator")?;
    let liouv = hamiltonian_vector_field(&harmonic.hamiltonian());
    records.push(exact_record("opalg.harmonic_generator".into(), "opalg::build_g", json!({"n": 2}), usize::from(g2 != liouv)));

    let mut pots: Vec<(Value, SymbolicPotential)> = Vec::new();
    for n in 1..=6u32 {
        pots.push((json!({"n": n, "g": "symbolic"}), SymbolicPotential::formal(n).ctx("potential")?));
    }
    if let Ok(p) = SymbolicPotential::from_potential(&ctx.pot) {
        pots.push((json!({"n": ctx.pot.n, "g": ctx.pot.g}), p));
    }
    for (inputs, p) in pots {
        let g = build_g(&p).ctx("generator")?;
        let jmax = p.n.saturating_sub(1).div_ceil(2);
        let tag = inputs.to_string();
        records.push(exact_record(
            format!("opalg.series_equals_difference[{tag}]"),
            "opalg::build_series_g",
            inputs.clone(),
            usize::from(build_series_g(&p, jmax) != g),
        ));
        let lv = hamiltonian_vector_field(&p.hamiltonian());
        records.push(exact_record(
            format!("opalg.classical_limit[{tag}]"),
            "opalg::build_g",
            inputs.clone(),
            usize::from(g.hbar_zero_part() != lv),
        ));
        records.push(exact_record(format!("opalg.hermitian[{tag}]"), "opalg::build_g", inputs, usize::from(!g.is_hermitian())));
    }
    Ok(SuiteOutput { records, series: vec![] })
}

fn grid_axis(ctx: &RunContext) -> Result<UniformAxis, RunFailure> {
    UniformAxis::symmetric(ctx.scenario.grid.half_width, ctx.scenario.grid.count).ctx("grid axis")
}

fn quantum_leak(ctx: &RunContext) -> Result<SuiteOutput, RunFailure> {
    let mut records = Vec::new();
    let (bq, bp, bqb, bpb) = bopp_operators();
    let (alpha, t, g) = (Scalar::alpha(), Scalar::t(), Scalar::g());
    for n in [1u32, 3, 4] {
        let a = lms_quantum_generator(&SymbolicPotential::formal(n).ctx("potential")?).ctx("generator")?;
        let ni = n as i64;
        let mix = Scalar::ratio(-(ni + 2), 2 * (2 - ni));
        let dq = adjoint_infinitesimal(&a, &bq, &alpha, AdjointMode::Kvn);
        let eq = &bq
            + &(&(&bp.scale(&t) + &bq.scale(&Scalar::ratio(-2, 2 - ni))) + &(&bqb - &bq).scale(&mix)).scale(&alpha);
        let dp = adjoint_infinitesimal(&a, &bp, &alpha, AdjointMode::Kvn);
        let force = bq.pow(n - 1).scale(&-&(&t * &g));
        let ep = &bp + &(&(&force + &bp.scale(&Scalar::ratio(-ni, 2 - ni))) + &(&bpb - &bp).scale(&mix)).scale(&alpha);
        let inputs = json!({"n": n});
        let mismatches = usize::from(dq != eq) + usize::from(dp != ep);
        records.push(
            Check::new(format!("leak.adjoint_coefficients[n={n}]"), "opalg::adjoint_infinitesimal", inputs.clone())
                .measure("barred_coefficient", -((n + 2) as f64) / (2.0 * (2.0 - n as f64)))
                .measure("mismatches", mismatches as f64)
                .exact(mismatches == 0),
        );
        let leaks = leak_detect(&dq).leaks && leak_detect(&dp).leaks && !leak_detect(&bq).leaks;
        records.push(Check::new(format!("leak.detected[n={n}]"), "opalg::leak_detect", inputs).exact(leaks));
    }
    let a2 = lms_quantum_generator(&SymbolicPotential::formal(2).ctx("potential")?).ctx("generator")?;
    let lin = |x: &OperatorPoly| LinearOpBasis::from_operator(x).ctx("linear operand");
    let mut miss = 0;
    for (x, y) in [(&bq, &bqb), (&bp, &bpb)] {
        let r = adjoint_finite_quadratic(&a2, x).ctx("finite adjoint")?;
        miss += usize::from(r != ExpLinear::hyperbolic(&lin(x)?, &lin(y)?));
    }
    records.push(exact_record("leak.harmonic_hyperbolic".into(), "opalg::adjoint_finite_quadratic", json!({"n": 2}), miss));

    for n in [-2.0, -1.0, 1.0, 3.0, 4.0] {
        let r = no_go_standard_qm(n).ctx("no-go")?;
        let mut rec = Check::new(format!("leak.no_go[n={n}]"), "opalg::no_go_standard_qm", json!({"n": n})).measure("gap", r.gap);
        if let Some(s) = r.solution {
            rec = rec.measure("solution", s);
        }
        records.push(rec.exact(r.solution.is_some() == (n == -2.0)));
    }

    let tol = &ctx.scenario.tolerances;
    let gs = &ctx.scenario.grid;
    let ax = grid_axis(ctx)?;
    let fixture = |hbar: f64| {
        make_separable(
            &gaussian_profile(&ax, 0.5, gs.width, 0.3, hbar),
            &gaussian_profile(&ax, -0.5, gs.width, -0.2, hbar),
            ax,
            ax,
            hbar,
        )
        .ctx("fixture")
    };
    let inputs = json!({"potential": ctx.pot_json(), "grid": serde_json::to_value(gs).ctx("grid")?});
    let rec = Check::new("leak.grid_separable", "qgrid::evolve_g", inputs);
    records.push(if matches!(ctx.pot.integer_exponent(), Some(1 | 2 | 4)) {
        let ev = evolve_g(&fixture(gs.hbar)?, &ctx.pot, gs.t, gs.steps).ctx("grid evolution")?;
        rec.measure("warnings", ev.warnings.len() as f64).at_most("schmidt_ratio", schmidt(&ev.state).ratio(), tol.schmidt_separable)
    } else {
        rec.skip("split-step propagation supports n in {1, 2, 4}")
    });

    let base = fixture(gs.hbar)?;
    let steps = 5;
    let mut rows = Vec::new();
    for k in 0..=steps {
        let a = gs.alpha * k as f64 / steps as f64;
        let sp = schmidt(&apply_lms_unitary_harmonic(&base, a).ctx("similarity unitary")?);
        rows.push((a, sp.values[0], sp.values.get(1).copied().unwrap_or(0.0), sp.ratio()));
    }
    let final_ratio = rows.last().map_or(0.0, |r| r.3);
    records.push(
        Check::new("leak.grid_lms_entangles", "qgrid::apply_lms_unitary_harmonic", json!({"grid": serde_json::to_value(gs).ctx("grid")?}))
            .at_least("schmidt_ratio", final_ratio, tol.schmidt_entangled),
    );
    let series = Series::new("schmidt")
        .column("alpha", rows.iter().map(|r| r.0))
        .column("s1", rows.iter().map(|r| r.1))
        .column("s2", rows.iter().map(|r| r.2))
        .column("ratio", rows.iter().map(|r| r.3));
    Ok(SuiteOutput { records, series: vec![series] })
}

fn bohr(ctx: &RunContext) -> Result<SuiteOutput, RunFailure> {
    let tol = &ctx.scenario.tolerances;
    let sm = &ctx.scenario.semiclassics;
    let pot = &ctx.pot;
    let alpha = ctx.scenario.lms.alpha;
    let prm = LmsParams::from_alpha(alpha, pot.n);
    let inputs = json!({"potential": ctx.pot_json(), "hbar": sm.hbar, "levels": sm.levels, "alpha": alpha});
    let mut records = Vec::new();
    let mut series = Series::new("bohr").column("k", []).column("E", []).column("J", []);
    if turning_points(pot, 1.0).is_ok() {
        let levels = bohr_levels(pot, sm.hbar, sm.levels).ctx("levels")?;
        let actions = levels.iter().map(|e| action_integral(pot, *e)).collect::<Result<Vec<_>, _>>().ctx("action")?;
        let err = if pot.is_harmonic() {
            let w = pot.g.sqrt();
            levels.iter().enumerate().map(|(k, e)| (e - (k as f64 + 0.5) * sm.hbar * w).abs()).fold(0.0, f64::max)
        } else {
            actions
                .iter()
                .enumerate()
                .map(|(k, j)| (j / (2.0 * std::f64::consts::PI * sm.hbar) - (k as f64 + 0.5)).abs() / (k as f64 + 0.5))
                .fold(0.0, f64::max)
        };
        records.push(Check::new("bohr.levels", "semiclassics::bohr_levels", inputs.clone()).at_most("max_error", err, tol.bohr_levels));
        let v = lms_bohr_violation(pot, levels[0], &prm, sm.hbar).ctx("violation")?;
        let j = v.action.unwrap_or(f64::NAN);
        records.push(
            Check::new("bohr.lms_delta", "semiclassics::lms_bohr_violation", inputs.clone())
                .measure("delta_j", v.delta_j)
                .measure("level_mismatch", v.level_mismatch)
                .at_most("relative_error", (v.delta_j - v.predicted_delta_j).abs() / (1.0 + j.abs()), tol.bohr_delta),
        );
        records.push(
            Check::new("bohr.exact_invariance", "semiclassics::lms_bohr_violation", inputs.clone())
                .exact(!v.exact_invariance && (v.delta_j != 0.0) == (alpha != 1.0)),
        );
        let fit = action_scaling_exponent(pot, levels[0], &[0.8, 0.9, 1.1, 1.25]).ctx("exponent fit")?;
        records.push(
            Check::new("bohr.action_exponent", "semiclassics::action_scaling_exponent", inputs)
                .measure("fitted", fit)
                .at_most("residual", (fit - (1.0 + pot.n / 2.0)).abs(), tol.action_exponent),
        );
        series = Series::new("bohr")
            .column("k", (0..levels.len()).map(|k| k as f64))
            .column("E", levels)
            .column("J", actions);
    } else if pot.n == -2.0 {
        let v = lms_bohr_violation(pot, 1.0, &prm, sm.hbar).ctx("violation")?;
        records.push(
            Check::new("bohr.exact_invariance", "semiclassics::lms_bohr_violation", inputs)
                .measure("delta_j", v.delta_j)
                .exact(v.exact_invariance && v.delta_j == 0.0),
        );
    } else {
        records.push(Check::new("bohr.levels", "semiclassics::bohr_levels", inputs).skip("no bounded orbits"));
    }
    Ok(SuiteOutput { records, series: vec![series] })
}

fn newton_equiv(ctx: &RunContext) -> Result<SuiteOutput, RunFailure> {
    let tol = &ctx.scenario.tolerances;
    let sm = &ctx.scenario.semiclassics;
    let ig = &ctx.scenario.integration;
    let pot = &ctx.pot;
    let mut out = per_point(ctx, |i, x0| {
        let horizon = survivable_horizon(x0, pot, ig.periods, ig.radius, &ctx.cfg).ctx("horizon")?;
        let mut records = Vec::new();
        let mut series = Series::new(format!("newton_ic{i}"));
        for (k, gamma) in sm.gammas.iter().enumerate() {
            let prm = NewtonEquivParams::new(*gamma, sm.mass).ctx("parameters")?;
            let r = newton_equiv_trajectory_check(pot, &prm, &x0.phase(), horizon, ig.samples, ig.tol).ctx("newton check")?;
            let inputs = json!({"potential": ctx.pot_json(), "ic": ic_json(x0), "gamma": gamma, "mass": sm.mass, "horizon": horizon});
            records.push(
                Check::new(format!("newton.trajectory[{i}][gamma={gamma}]"), "semiclassics::newton_equiv_trajectory_check", inputs)
                    .measure("max_momentum_dev", r.max_momentum_dev)
                    .measure("max_energy_dev", r.max_energy_dev)
                    .at_most("max_q_diff", r.max_q_diff, tol.newton_q),
            );
            if k == 0 {
                series = series.column("t", r.times.iter().copied()).column("q_standard", r.q_standard.iter().copied());
            }
            series = series.column(&format!("q_gamma_{gamma}"), r.q_gamma);
        }
        Ok(SuiteOutput { records, series: vec![series] })
    })?;

    let inputs = |gamma: f64| json!({"potential": ctx.pot_json(), "gamma": gamma, "hbar": sm.hbar, "points": sm.eigen_points, "levels": sm.eigen_levels});
    if turning_points(pot, 1.0).is_err() {
        out.records.push(Check::new("newton.spectrum", "semiclassics::eigensolve_newton_equiv", inputs(1.0)).skip("potential is not confining"));
        return Ok(out);
    }
    let grid = EigenGrid { count: sm.eigen_points, half_width: None };
    let mut gammas = vec![1.0];
    gammas.extend(sm.gammas.iter().copied().filter(|g| *g != 1.0));
    let results = gammas
        .par_iter()
        .map(|g| {
            let prm = NewtonEquivParams::new(*g, sm.mass).ctx("parameters")?;
            eigensolve_newton_equiv(pot, &prm, sm.hbar, sm.eigen_levels, &grid).ctx("eigen-solve")
        })
        .collect::<Result<Vec<_>, _>>()?;
    let kappa = spectral_scaling_exponent(pot.n);
    let width_exp = -2.0 / (pot.n + 2.0);
    let base = &results[0];
    for (g, r) in gammas.iter().zip(&results).skip(1) {
        let expect = g.powf(kappa);
        let err = r
            .eigenvalues
            .iter()
            .zip(&base.eigenvalues)
            .map(|(a, b)| (a / b - expect).abs() / expect)
            .fold(0.0, f64::max);
        out.records.push(
            Check::new(format!("newton.spectrum[gamma={g}]"), "semiclassics::eigensolve_newton_equiv", inputs(*g))
                .measure("expected_ratio", expect)
                .measure("max_error_estimate", r.error_estimate.iter().copied().fold(0.0, f64::max))
                .at_most("max_relative_error", err, tol.spectral_ratio),
        );
        let we = g.powf(width_exp);
        out.records.push(
            Check::new(format!("newton.ground_width[gamma={g}]"), "semiclassics::eigensolve_newton_equiv", inputs(*g))
                .measure("expected_ratio", we)
                .at_most("relative_error", (r.ground_width / base.ground_width - we).abs() / we, tol.spectral_ratio),
        );
    }
    let mut series = Series::new("eigen").column("gamma", gammas.iter().copied());
    for k in 0..sm.eigen_levels {
        series = series.column(&format!("E{k}"), results.iter().map(|r| r.eigenvalues[k]));
    }
    series = series.column("width", results.iter().map(|r| r.ground_width));
    out.series.push(series);
    Ok(out)
}
