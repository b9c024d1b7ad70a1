//! Scenario files: the JSON input of `kvnlab run`.

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::model::{ExtendedPoint, MonomialPotential};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteName {
    Dynamics,
    Charges,
    LmsClassical,
    LmsVirasoro,
    Opalg,
    QuantumLeak,
    Bohr,
    NewtonEquiv,
    All,
}

impl SuiteName {
    pub const CONCRETE: [SuiteName; 8] = [
        SuiteName::Dynamics,
        SuiteName::Charges,
        SuiteName::LmsClassical,
        SuiteName::LmsVirasoro,
        SuiteName::Opalg,
        SuiteName::QuantumLeak,
        SuiteName::Bohr,
        SuiteName::NewtonEquiv,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SuiteName::Dynamics => "dynamics",
            SuiteName::Charges => "charges",
            SuiteName::LmsClassical => "lms-classical",
            SuiteName::LmsVirasoro => "lms-virasoro",
            SuiteName::Opalg => "opalg",
            SuiteName::QuantumLeak => "quantum-leak",
            SuiteName::Bohr => "bohr",
            SuiteName::NewtonEquiv => "newton-equiv",
            SuiteName::All => "all",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::CONCRETE.into_iter().chain([SuiteName::All]).find(|x| x.as_str() == s)
    }

    /// The suites this name expands to, in execution order.
    pub fn expand(self) -> Vec<SuiteName> {
        match self {
            SuiteName::All => Self::CONCRETE.to_vec(),
            s => vec![s],
        }
    }
}

/// `V(q) = g q^n / n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub g: f64,
    pub n: f64,
}

/// Extended initial state; the lambdas default to zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct InitialCondition {
    pub q: f64,
    pub p: f64,
    #[serde(default)]
    pub lq: f64,
    #[serde(default)]
    pub lp: f64,
}

impl InitialCondition {
    pub fn point(&self) -> ExtendedPoint {
        ExtendedPoint::new(self.q, self.p, self.lq, self.lp)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct LmsSpec {
    /// Finite scale for the classical solution-map checks.
    pub alpha: f64,
    /// Small logarithmic scale for the first-order bracket check.
    pub beta_small: f64,
}

impl Default for LmsSpec {
    fn default() -> Self {
        Self { alpha: 1.3, beta_small: 1e-3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct IntegrationSpec {
    /// Horizon in characteristic periods (shortened for escaping orbits).
    pub periods: f64,
    /// Output samples per trajectory.
    pub samples: usize,
    pub tol: f64,
    pub dt: f64,
    pub rmin: f64,
    /// Orbits leaving `|q| <= radius` get a shorter horizon.
    pub radius: f64,
}

impl Default for IntegrationSpec {
    fn default() -> Self {
        Self { periods: 20.0, samples: 401, tol: 1e-12, dt: 1e-2, rmin: 1e-6, radius: 20.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    /// Points per axis (power of two).
    pub count: usize,
    pub half_width: f64,
    pub hbar: f64,
    /// Evolution time for the separability check.
    pub t: f64,
    pub steps: usize,
    /// Scale for the harmonic similarity unitary.
    pub alpha: f64,
    /// Gaussian width of the separable fixture.
    pub width: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { count: 64, half_width: 8.0, hbar: 1.0, t: 5.0, steps: 500, alpha: 0.5, width: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct SemiclassicsSpec {
    pub hbar: f64,
    pub levels: usize,
    pub gammas: Vec<f64>,
    pub mass: f64,
    /// Interior points of the fine eigen-solver grid.
    pub eigen_points: usize,
    pub eigen_levels: usize,
}

impl Default for SemiclassicsSpec {
    fn default() -> Self {
        Self { hbar: 1.0, levels: 5, gammas: vec![0.5, 2.0, 10.0], mass: 1.0, eigen_points: 2001, eigen_levels: 3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub energy_drift: f64,
    pub reversal: f64,
    pub charge_drift: f64,
    pub virasoro_drift: f64,
    pub epb: f64,
    pub epb_points: usize,
    pub solution_map: f64,
    pub action_invariance: f64,
    pub action_exponent: f64,
    pub bracket_first_order: f64,
    pub schmidt_separable: f64,
    pub schmidt_entangled: f64,
    pub bohr_levels: f64,
    pub bohr_delta: f64,
    pub newton_q: f64,
    pub spectral_ratio: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            energy_drift: 1e-8,
            reversal: 1e-6,
            charge_drift: 1e-7,
            virasoro_drift: 1e-6,
            epb: 1e-6,
            epb_points: 100,
            solution_map: 1e-6,
            action_invariance: 1e-6,
            action_exponent: 1e-4,
            bracket_first_order: 1e-6,
            schmidt_separable: 1e-8,
            schmidt_entangled: 1e-3,
            bohr_levels: 1e-8,
            bohr_delta: 1e-6,
            newton_q: 1e-7,
            spectral_ratio: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    /// Output directory; `--out` overrides.
    pub dir: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "default_suite")]
    pub suite: SuiteName,
    pub potential: PotentialSpec,
    /// Empty selects a default set suited to the potential.
    #[serde(default)]
    pub initial_conditions: Vec<InitialCondition>,
    #[serde(default)]
    pub lms: LmsSpec,
    #[serde(default)]
    pub integration: IntegrationSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub semiclassics: SemiclassicsSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputSpec,
    /// `--seed` overrides; defaults to 0.
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_suite() -> SuiteName {
    SuiteName::All
}

/// The published scenario schema.
pub fn scenario_schema() -> serde_json::Value {
    serde_json::to_value(schemars::schema_for!(Scenario)).expect("schema serializes")
}

fn positive(errs: &mut Vec<String>, name: &str, v: f64) {
    if !(v.is_finite() && v > 0.0) {
        errs.push(format!("{name} must be a positive finite number, got {v}"));
    }
}

impl Scenario {
    /// Parse and validate; every problem is reported, not just the first.
    pub fn from_json(text: &str) -> Result<Self, Vec<String>> {
        let sc: Scenario = serde_json::from_str(text).map_err(|e| vec![e.to_string()])?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn validate(&self) -> Result<(), Vec<String>> {
        let mut errs = Vec::new();
        if let Err(e) = self.potential() {
            errs.push(format!("potential: {e}"));
        }
        if let Ok(pot) = self.potential() {
            for (i, ic) in self.initial_conditions.iter().enumerate() {
                let pt = ic.point();
                if !pt.is_finite() {
                    errs.push(format!("initial_conditions[{i}] is not finite"));
                } else if !pot.admissible(pt.q) {
                    errs.push(format!("initial_conditions[{i}]: q = {} outside the potential domain", pt.q));
                }
            }
        }
        positive(&mut errs, "lms.alpha", self.lms.alpha);
        positive(&mut errs, "lms.beta_small", self.lms.beta_small);
        let ig = &self.integration;
        for (name, v) in [("periods", ig.periods), ("tol", ig.tol), ("dt", ig.dt), ("rmin", ig.rmin), ("radius", ig.radius)] {
            positive(&mut errs, &format!("integration.{name}"), v);
        }
        if ig.samples < crate::symmetry::MIN_ACTION_SAMPLES {
            errs.push(format!("integration.samples must be at least {}", crate::symmetry::MIN_ACTION_SAMPLES));
        }
        let gr = &self.grid;
        if !(gr.count >= 8 && gr.count.is_power_of_two()) {
            errs.push(format!("grid.count must be a power of two >= 8, got {}", gr.count));
        }
        for (name, v) in [("half_width", gr.half_width), ("hbar", gr.hbar), ("t", gr.t), ("alpha", gr.alpha), ("width", gr.width)] {
            positive(&mut errs, &format!("grid.{name}"), v);
        }
        if gr.steps == 0 {
            errs.push("grid.steps must be positive".into());
        }
        let sm = &self.semiclassics;
        positive(&mut errs, "semiclassics.hbar", sm.hbar);
        positive(&mut errs, "semiclassics.mass", sm.mass);
        for (i, g) in sm.gammas.iter().enumerate() {
            positive(&mut errs, &format!("semiclassics.gammas[{i}]"), *g);
        }
        if sm.levels == 0 || sm.eigen_levels == 0 {
            errs.push("semiclassics level counts must be positive".into());
        }
        if sm.eigen_points < 16 || 4 * sm.eigen_levels > sm.eigen_points {
            errs.push(format!("semiclassics.eigen_points = {} is too small", sm.eigen_points));
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("energy_drift", t.energy_drift),
            ("reversal", t.reversal),
            ("charge_drift", t.charge_drift),
            ("virasoro_drift", t.virasoro_drift),
            ("epb", t.epb),
            ("solution_map", t.solution_map),
            ("action_invariance", t.action_invariance),
            ("action_exponent", t.action_exponent),
            ("bracket_first_order", t.bracket_first_order),
            ("schmidt_separable", t.schmidt_separable),
            ("schmidt_entangled", t.schmidt_entangled),
            ("bohr_levels", t.bohr_levels),
            ("bohr_delta", t.bohr_delta),
            ("newton_q", t.newton_q),
            ("spectral_ratio", t.spectral_ratio),
        ] {
            positive(&mut errs, &format!("tolerances.{name}"), v);
        }
        if t.epb_points == 0 {
            errs.push("tolerances.epb_points must be positive".into());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }

    pub fn potential(&self) -> Result<MonomialPotential, crate::model::ModelError> {
        MonomialPotential::new(self.potential.g, self.potential.n)
    }

    /// Scenario initial conditions, or [`default_initial_conditions`].
    pub fn initial_points(&self) -> Vec<ExtendedPoint> {
        if self.initial_conditions.is_empty() {
            match self.potential() {
                Ok(pot) => default_initial_conditions(&pot),
                Err(_) => Vec::new(),
            }
        } else {
            self.initial_conditions.iter().map(InitialCondition::point).collect()
        }
    }
}

/// Two generic extended states inside the potential's domain. Non-integer
/// and negative exponents live on `q > 0`.
pub fn default_initial_conditions(pot: &MonomialPotential) -> Vec<ExtendedPoint> {
    if pot.integer_exponent().is_some() {
        vec![ExtendedPoint::new(1.0, 0.3, 0.3, -0.2), ExtendedPoint::new(0.4, -0.9, -0.5, 0.7)]
    } else {
        vec![ExtendedPoint::new(1.0, 1.5, 0.3, -0.2), ExtendedPoint::new(1.5, 0.9, -0.5, 0.7)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_scenario_gets_defaults() {
        let sc = Scenario::from_json(r#"{"potential": {"g": 1, "n": 2}}"#).unwrap();
        assert_eq!(sc.suite, SuiteName::All);
        assert_eq!(sc.lms, LmsSpec::default());
        assert_eq!(sc.initial_points().len(), 2);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Scenario::from_json(r#"{"suite": "charges"}"#).is_err());
        assert!(Scenario::from_json(r#"{"potential": {"g": 1, "n": 2}, "colour": 3}"#).is_err());
        assert!(Scenario::from_json(r#"{"potential": {"g": 1, "n": 2}, "suite": "nope"}"#).is_err());
        let e = Scenario::from_json(r#"{"potential": {"g": 1, "n": -2}, "initial_conditions": [{"q": -1, "p": 0}], "grid": {"count": 48}}"#).unwrap_err();
        assert_eq!(e.len(), 2, "{e:?}");
    }

    #[test]
    fn suite_names_round_trip() {
        for s in SuiteName::CONCRETE {
            assert_eq!(SuiteName::parse(s.as_str()), Some(s));
            let js = serde_json::to_string(&s).unwrap();
            assert_eq!(js, format!("\"{}\"", s.as_str()));
        }
        assert_eq!(SuiteName::All.expand().len(), 8);
    }
}
