//! Check records and the run report.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

/// One verification outcome. `anchor` names the library operation under
/// test as `module::function`, or `plumbing`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub id: String,
    pub anchor: String,
    pub inputs_digest: String,
    pub measured: BTreeMap<String, f64>,
    pub tolerance: f64,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// sha256 of the compact JSON encoding (object keys sorted).
pub fn digest(v: &serde_json::Value) -> String {
    let bytes = serde_json::to_vec(v).expect("JSON value serializes");
    hex::encode(Sha256::digest(bytes))
}

/// Builder for [`CheckRecord`].
pub struct Check {
    rec: CheckRecord,
}

impl Check {
    pub fn new(id: impl Into<String>, anchor: &str, inputs: serde_json::Value) -> Self {
        Self {
            rec: CheckRecord {
                id: id.into(),
                anchor: anchor.to_string(),
                inputs_digest: digest(&inputs),
                measured: BTreeMap::new(),
                tolerance: 0.0,
                verdict: Verdict::Skipped,
                note: None,
            },
        }
    }

    pub fn measure(mut self, key: &str, v: f64) -> Self {
        self.rec.measured.insert(key.to_string(), v);
        self
    }

    pub fn note(mut self, s: impl Into<String>) -> Self {
        self.rec.note = Some(s.into());
        self
    }

    /// Pass iff `measured[key] <= tol` (NaN fails).
    pub fn at_most(mut self, key: &str, v: f64, tol: f64) -> CheckRecord {
        self.rec.measured.insert(key.to_string(), v);
        self.rec.tolerance = tol;
        self.rec.verdict = if v <= tol { Verdict::Pass } else { Verdict::Fail };
        self.rec
    }

    /// Pass iff `measured[key] >= bound`.
    pub fn at_least(mut self, key: &str, v: f64, bound: f64) -> CheckRecord {
        self.rec.measured.insert(key.to_string(), v);
        self.rec.tolerance = bound;
        self.rec.verdict = if v >= bound { Verdict::Pass } else { Verdict::Fail };
        self.rec
    }

    /// Exact check, recorded with tolerance 0.
    pub fn exact(mut self, ok: bool) -> CheckRecord {
        self.rec.tolerance = 0.0;
        self.rec.verdict = if ok { Verdict::Pass } else { Verdict::Fail };
        self.rec
    }

    pub fn skip(mut self, why: impl Into<String>) -> CheckRecord {
        self.rec.verdict = Verdict::Skipped;
        self.rec.note = Some(why.into());
        self.rec
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub pass: usize,
    pub fail: usize,
    pub skipped: usize,
}

impl Summary {
    pub fn of(records: &[CheckRecord]) -> Self {
        let mut s = Summary { total: records.len(), ..Summary::default() };
        for r in records {
            match r.verdict {
                Verdict::Pass => s.pass += 1,
                Verdict::Fail => s.fail += 1,
                Verdict::Skipped => s.skipped += 1,
            }
        }
        s
    }

    pub fn all_pass(&self) -> bool {
        self.fail == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub suite: String,
    #[serde(flatten)]
    pub counts: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub suite: String,
    pub seed: u64,
    pub scenario_digest: String,
    pub records: Vec<CheckRecord>,
    pub suites: Vec<SuiteSummary>,
    pub summary: Summary,
    pub series: Vec<String>,
    /// Seconds; the only field that varies between identical runs.
    pub wall_time: f64,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn digest_is_key_order_independent() {
        let a: serde_json::Value = serde_json::from_str(r#"{"a": 1, "b": [2, 3]}"#).unwrap();
        let b: serde_json::Value = serde_json::from_str(r#"{"b": [2, 3], "a": 1}"#).unwrap();
        assert_eq!(digest(&a), digest(&b));
        assert_eq!(digest(&a).len(), 64);
    }

    #[test]
    fn verdicts() {
        let r = Check::new("x", "plumbing", json!({})).at_most("err", 1e-9, 1e-8);
        assert_eq!(r.verdict, Verdict::Pass);
        let r = Check::new("x", "plumbing", json!({})).at_most("err", f64::NAN, 1e-8);
        assert_eq!(r.verdict, Verdict::Fail);
        let r = Check::new("x", "plumbing", json!({})).at_least("ratio", 0.1, 1e-3);
        assert_eq!(r.verdict, Verdict::Pass);
        let recs = vec![r, Check::new("y", "plumbing", json!({})).skip("n/a")];
        let s = Summary::of(&recs);
        assert_eq!((s.pass, s.skipped, s.fail), (1, 1, 0));
        assert!(s.all_pass());
    }
}
