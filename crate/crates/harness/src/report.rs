use std::collections::BTreeMap;

use serde::ser::{Serialize, Serializer};
use serde_json::value::RawValue;

pub const SCHEMA_VERSION: &str = "1";

/// A reported number. Finite values are written with 17 significant digits;
/// anything else becomes a string so the JSON stays portable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Num {
    Value(f64),
    Divergent,
}

impl Num {
    pub fn as_f64(self) -> f64 {
        match self {
            Num::Value(v) => v,
            Num::Divergent => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Num::Value(v) if v.is_finite())
    }
}

impl From<f64> for Num {
    fn from(v: f64) -> Self {
        Num::Value(v)
    }
}

/// `{:.16e}` with the exponent kept; always a valid JSON number.
pub fn format_17(v: f64) -> String {
    format!("{v:.16e}")
}

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match *self {
            Num::Divergent => s.serialize_str("divergent"),
            Num::Value(v) if v.is_nan() => s.serialize_str("undefined"),
            Num::Value(v) if v == f64::INFINITY => s.serialize_str("infinite"),
            Num::Value(v) if v == f64::NEG_INFINITY => s.serialize_str("-infinite"),
            Num::Value(v) => {
                let raw = RawValue::from_string(format_17(v)).map_err(serde::ser::Error::custom)?;
                raw.serialize(s)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
#[serde(untagged)]
pub enum Param {
    Num(Num),
    Int(i64),
    Text(String),
    List(Vec<Num>),
}

impl From<f64> for Param {
    fn from(v: f64) -> Self {
        Param::Num(Num::Value(v))
    }
}

impl From<usize> for Param {
    fn from(v: usize) -> Self {
        Param::Int(v as i64)
    }
}

impl From<Vec<f64>> for Param {
    fn from(v: Vec<f64>) -> Self {
        Param::List(v.into_iter().map(Num::Value).collect())
    }
}

impl From<&str> for Param {
    fn from(v: &str) -> Self {
        Param::Text(v.to_string())
    }
}

impl From<String> for Param {
    fn from(v: String) -> Self {
        Param::Text(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Path {
    Analytic,
    Discrete,
    Sampled,
}

/// How a check compares its two sides.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Relation {
    #[serde(rename = "le")]
    Le,
    #[serde(rename = "ge")]
    Ge,
    #[serde(rename = "eq")]
    Eq,
}

/// Signed relative gap: positive means slack in the direction of the
/// inequality, zero means equality.
pub fn rel_gap(relation: Relation, lhs: f64, rhs: f64) -> f64 {
    if lhs == rhs {
        return 0.0;
    }
    if rhs.is_infinite() && lhs.is_finite() {
        // finite vs infinite: full slack one way, unbounded deficit the other
        return match relation {
            Relation::Le if rhs > 0.0 => 1.0,
            Relation::Ge if rhs < 0.0 => 1.0,
            _ => f64::NEG_INFINITY,
        };
    }
    let scale = rhs.abs().max(1e-300);
    match relation {
        Relation::Le | Relation::Eq => (rhs - lhs) / scale,
        Relation::Ge => (lhs - rhs) / scale,
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Check {
    pub name: String,
    pub path: Path,
    pub relation: Relation,
    pub lhs: Num,
    pub rhs: Num,
    pub rel_gap: Num,
    pub tolerance: Num,
    pub satisfied: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, path: Path, relation: Relation, lhs: Num, rhs: Num, tolerance: f64) -> Self {
        let (gap, satisfied) = match (lhs, rhs) {
            (Num::Divergent, Num::Divergent) => (0.0, relation == Relation::Eq),
            (Num::Divergent, _) | (_, Num::Divergent) => (f64::NEG_INFINITY, false),
            (Num::Value(l), Num::Value(r)) => {
                let g = rel_gap(relation, l, r);
                let ok = match relation {
                    Relation::Eq => g.abs() <= tolerance,
                    _ => g >= -tolerance,
                };
                (g, ok && !g.is_nan())
            }
        };
        Self {
            name: name.into(),
            path,
            relation,
            lhs,
            rhs,
            rel_gap: Num::Value(gap),
            tolerance: Num::Value(tolerance),
            satisfied,
        }
    }

    pub fn le(name: impl Into<String>, path: Path, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Self::new(name, path, Relation::Le, lhs.into(), rhs.into(), tolerance)
    }

    pub fn ge(name: impl Into<String>, path: Path, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Self::new(name, path, Relation::Ge, lhs.into(), rhs.into(), tolerance)
    }

    pub fn eq(name: impl Into<String>, path: Path, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Self::new(name, path, Relation::Eq, lhs.into(), rhs.into(), tolerance)
    }
}

#[derive(Clone, Debug, Default, PartialEq, serde::Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Diagnostics {
    /// Total solver iterations (sweeps or descent steps).
    pub iterations: usize,
    /// Worst constraint violation or relative duality gap seen.
    pub residual: Num,
    /// Cells per axis of the discrete grids, `None` if nothing discrete ran.
    pub grid: Option<usize>,
    pub runtime_ms: Num,
    /// Relative deviation between the analytic and discrete value of the
    /// headline quantity, when both exist.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path_deviation: Option<Num>,
}

impl Default for Num {
    fn default() -> Self {
        Num::Value(0.0)
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Report {
    pub schema_version: &'static str,
    pub scenario: String,
    pub theorem: String,
    pub params: BTreeMap<String, Param>,
    pub lhs: Num,
    pub rhs: Num,
    pub satisfied: bool,
    pub rel_gap: Num,
    pub checks: Vec<Check>,
    pub diagnostics: Diagnostics,
    pub notes: Vec<String>,
}

impl Report {
    /// Builds a report whose headline is `checks[headline]`; `satisfied`
    /// requires every check to pass.
    pub fn new(scenario: &str, theorem: &str, checks: Vec<Check>, headline: usize) -> Self {
        let head = &checks[headline];
        Self {
            schema_version: SCHEMA_VERSION,
            scenario: scenario.to_string(),
            theorem: theorem.to_string(),
            params: BTreeMap::new(),
            lhs: head.lhs,
            rhs: head.rhs,
            rel_gap: head.rel_gap,
            satisfied: checks.iter().all(|c| c.satisfied),
            checks,
            diagnostics: Diagnostics::default(),
            notes: Vec::new(),
        }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_keep_17_digits() {
        let v = serde_json::to_string(&Num::Value(std::f64::consts::PI * 8.0)).unwrap();
        assert_eq!(v, "2.5132741228718345e1");
        let back: f64 = v.parse().unwrap();
        assert_eq!(back, std::f64::consts::PI * 8.0);
        assert_eq!(serde_json::to_string(&Num::Value(f64::INFINITY)).unwrap(), "\"infinite\"");
        assert_eq!(serde_json::to_string(&Num::Divergent).unwrap(), "\"divergent\"");
    }

    #[test]
    fn gaps_follow_direction() {
        assert!((rel_gap(Relation::Le, 1.0, 2.0) - 0.5).abs() < 1e-15);
        assert!((rel_gap(Relation::Ge, 1.0, 2.0) + 0.5).abs() < 1e-15);
        assert_eq!(rel_gap(Relation::Le, 1.0, f64::INFINITY), 1.0);
        let c = Check::le("x", Path::Discrete, 1.04, 1.0, 0.05);
        assert!(c.satisfied);
        let c = Check::le("x", Path::Discrete, 9.0, 0.0, 0.05);
        assert!(!c.satisfied);
        let c = Check::eq("x", Path::Analytic, 1.0 + 1e-9, 1.0, 1e-8);
        assert!(c.satisfied);
        assert!(Check::new("d", Path::Analytic, Relation::Eq, Num::Divergent, Num::Divergent, 0.0).satisfied);
        assert!(!Check::new("d", Path::Analytic, Relation::Eq, Num::Value(5.0), Num::Divergent, 0.0).satisfied);
    }

    #[test]
    fn report_schema_fields() {
        let r = Report::new("s", "ring_criterion", vec![Check::le("a", Path::Analytic, 1.0, 2.0, 1e-8)], 0);
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        for key in [
            "schemaVersion",
            "scenario",
            "theorem",
            "params",
            "lhs",
            "rhs",
            "satisfied",
            "relGap",
            "diagnostics",
            "notes",
        ] {
            assert!(v.get(key).is_some(), "{key}");
        }
        for key in ["iterations", "residual", "grid", "runtimeMs"] {
            assert!(v["diagnostics"].get(key).is_some(), "{key}");
        }
        assert_eq!(v["schemaVersion"], "1");
    }
}
