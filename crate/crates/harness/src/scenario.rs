//! Scenario files: `key = value` lines grouped under `[section]` headers.
//!
//! ```text
//! [scenario]
//! name = identity_conformal
//! theorem = ring_criterion
//!
//! [mapping]
//! kind = identity
//!
//! [weight]
//! kind = constant
//! value = 1
//!
//! [ring]
//! r1 = 1
//! r2 = 2.718281828459045
//!
//! [params]
//! n = 2
//! p = 2
//! ```
//!
//! `#` starts a comment. Unknown sections and keys are errors.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use pmod_core::dilatations::inner_dilatation;
use pmod_core::linalg::{Matrix, Point};
use pmod_core::mappings::MappingSpec;
use pmod_core::moduli::{RingSpec, Weight};

use crate::error::{HarnessError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Theorem {
    Sandwich,
    Quasiinvariance,
    RingCriterion,
    LowerCriterion,
    Transfer,
    PointwiseBounds,
    MeanDilatation,
}

impl Theorem {
    pub const ALL: [Theorem; 7] = [
        Theorem::Sandwich,
        Theorem::Quasiinvariance,
        Theorem::RingCriterion,
        Theorem::LowerCriterion,
        Theorem::Transfer,
        Theorem::PointwiseBounds,
        Theorem::MeanDilatation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Theorem::Sandwich => "sandwich",
            Theorem::Quasiinvariance => "quasiinvariance",
            Theorem::RingCriterion => "ring_criterion",
            Theorem::LowerCriterion => "lower_criterion",
            Theorem::Transfer => "transfer",
            Theorem::PointwiseBounds => "pointwise_bounds",
            Theorem::MeanDilatation => "mean_dilatation",
        }
    }

    fn needs_ring(self) -> bool {
        !matches!(self, Theorem::PointwiseBounds | Theorem::MeanDilatation)
    }
}

impl FromStr for Theorem {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Theorem::ALL.into_iter().find(|t| t.name() == s).ok_or_else(|| format!("unknown theorem `{s}`"))
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MappingConfig {
    Identity,
    Scaling { lambda: f64 },
    Linear { entries: Vec<f64> },
    RadialPower { beta: f64, center: Option<Vec<f64>> },
    AxisStretch { c: f64 },
}

impl MappingConfig {
    pub fn build(&self, n: usize) -> Result<MappingSpec<f64>> {
        Ok(match self {
            MappingConfig::Identity => MappingSpec::identity(n),
            MappingConfig::Scaling { lambda } => MappingSpec::scaling(n, *lambda)?,
            MappingConfig::Linear { entries } => MappingSpec::linear(Matrix::new(n, entries)?)?,
            MappingConfig::RadialPower { beta, center } => {
                let c = match center {
                    Some(c) => point(n, c)?,
                    None => Point::zeros(n),
                };
                MappingSpec::radial_power(*beta, c)?
            }
            MappingConfig::AxisStretch { c } => MappingSpec::axis_stretch(n, *c)?,
        })
    }

    /// Compact form `kind[:args]`, e.g. `radial_power:2`, `linear:2,0,0,2`.
    pub fn from_compact(s: &str) -> std::result::Result<Self, String> {
        let (kind, args) = s.split_once(':').unwrap_or((s, ""));
        let nums = || -> std::result::Result<Vec<f64>, String> {
            args.split(',').map(|a| a.trim().parse::<f64>().map_err(|_| format!("`{a}` is not a number"))).collect()
        };
        let one = || -> std::result::Result<f64, String> {
            match nums()?.as_slice() {
                [v] => Ok(*v),
                _ => Err(format!("mapping `{kind}` takes exactly one parameter")),
            }
        };
        Ok(match kind {
            "identity" if args.is_empty() => MappingConfig::Identity,
            "scaling" => MappingConfig::Scaling { lambda: one()? },
            "radial_power" => MappingConfig::RadialPower { beta: one()?, center: None },
            "axis_stretch" => MappingConfig::AxisStretch { c: one()? },
            "linear" => MappingConfig::Linear { entries: nums()? },
            _ => return Err(format!("unknown mapping `{s}`")),
        })
    }

    pub fn describe(&self) -> String {
        match self {
            MappingConfig::Identity => "identity".into(),
            MappingConfig::Scaling { lambda } => format!("scaling(lambda={lambda})"),
            MappingConfig::Linear { entries } => format!("linear({entries:?})"),
            MappingConfig::RadialPower { beta, .. } => format!("radial_power(beta={beta})"),
            MappingConfig::AxisStretch { c } => format!("axis_stretch(c={c})"),
        }
    }
}

/// Declared form of the weight Q.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightConfig {
    Constant(f64),
    /// `coef · |x − x₀|^exponent` about the ring centre.
    RadialPower {
        coef: f64,
        exponent: f64,
    },
    /// `Q(x) = H_{I,α}(x, f)` for the scenario's mapping and α.
    InnerDilatation,
}

impl WeightConfig {
    /// Materializes Q; the dilatation form needs the mapping and α.
    pub fn build(&self, map: &MappingSpec<f64>, alpha: Option<f64>) -> Result<Weight<f64>> {
        Ok(match self {
            WeightConfig::Constant(q) => Weight::constant(*q)?,
            WeightConfig::RadialPower { coef, exponent } => Weight::radial_power(*coef, *exponent)?,
            WeightConfig::InnerDilatation => {
                let alpha = alpha.ok_or_else(|| HarnessError::config("weight inner_dilatation needs params.alpha"))?;
                let map = map.clone();
                Weight::field(move |x| {
                    map.jacobian_matrix(x).and_then(|m| inner_dilatation(&m, alpha)).unwrap_or(f64::NAN)
                })
            }
        })
    }

    pub fn describe(&self) -> String {
        match self {
            WeightConfig::Constant(q) => format!("constant({q})"),
            WeightConfig::RadialPower { coef, exponent } => {
                format!("radial_power(coef={coef}, exponent={exponent})")
            }
            WeightConfig::InnerDilatation => "inner_dilatation".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RingConfig {
    pub center: Option<Vec<f64>>,
    pub r1: f64,
    pub r2: f64,
}

impl RingConfig {
    pub fn build(&self, n: usize) -> Result<RingSpec<f64>> {
        let c = match &self.center {
            Some(c) => point(n, c)?,
            None => Point::zeros(n),
        };
        Ok(RingSpec::new(c, self.r1, self.r2)?)
    }
}

/// Which family a scenario samples.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyChoice {
    Curves,
    Spheres,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeanKind {
    Inner,
    Outer,
}

/// `auto` picks a sample count that resolves the grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Count {
    Auto,
    Fixed(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    pub n: usize,
    pub p: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub delta: Option<f64>,
    pub family: FamilyChoice,
    pub mean: MeanKind,
    /// Cells per axis for the discrete grids (default 256 in 2D, 48 in 3D).
    pub cells: Option<usize>,
    pub curves: Count,
    pub spheres: Count,
    /// Cells per axis for mean-dilatation quadrature.
    pub quad_cells: Option<usize>,
    pub samples: usize,
    pub seed: u64,
    /// Skip the discrete path (analytic checks only).
    pub analytic_only: bool,
}

impl Params {
    /// Defaults for dimension n: curves, inner mean, automatic counts.
    pub fn new(n: usize) -> Self {
        Self {
            n,
            p: None,
            alpha: None,
            beta: None,
            gamma: None,
            delta: None,
            family: FamilyChoice::Curves,
            mean: MeanKind::Inner,
            cells: None,
            curves: Count::Auto,
            spheres: Count::Auto,
            quad_cells: None,
            samples: 10_000,
            seed: 0x5eed,
            analytic_only: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tolerances {
    pub analytic: f64,
    pub discrete: f64,
    /// Extremal-metric agreement against the discrete solver.
    pub extremal: f64,
    /// Mean-dilatation quadrature against closed forms.
    pub quadrature: f64,
}

impl Tolerances {
    pub fn defaults(n: usize) -> Self {
        Self { analytic: 1e-8, discrete: if n == 2 { 0.05 } else { 0.10 }, extremal: 0.02, quadrature: 1e-6 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub theorem: Theorem,
    pub mapping: MappingConfig,
    pub weight: WeightConfig,
    pub ring: Option<RingConfig>,
    pub params: Params,
    pub tolerances: Tolerances,
}

impl Scenario {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        text.parse()
    }

    pub fn ring_spec(&self) -> Result<RingSpec<f64>> {
        self.ring
            .as_ref()
            .ok_or_else(|| HarnessError::config(format!("theorem {} needs a [ring] section", self.theorem)))?
            .build(self.params.n)
    }

    pub fn mapping_spec(&self) -> Result<MappingSpec<f64>> {
        self.mapping.build(self.params.n)
    }

    pub fn weight_for(&self, map: &MappingSpec<f64>) -> Result<Weight<f64>> {
        self.weight.build(map, self.params.alpha)
    }

    pub fn cells(&self) -> usize {
        self.params.cells.unwrap_or(if self.params.n == 2 { 256 } else { 48 })
    }

    /// The exponent p, or a configuration error naming the theorem.
    pub fn p(&self) -> Result<f64> {
        self.params.p.ok_or_else(|| HarnessError::config(format!("theorem {} needs params.p", self.theorem)))
    }

    pub fn alpha(&self) -> Result<f64> {
        self.params.alpha.ok_or_else(|| HarnessError::config(format!("theorem {} needs params.alpha", self.theorem)))
    }

    /// Parameter-range checks for the theorem; run by the parser.
    pub fn validate(&self) -> Result<()> {
        let n = self.params.n;
        if !(2..=3).contains(&n) {
            return Err(HarnessError::config("params.n must be 2 or 3"));
        }
        if self.theorem.needs_ring() && self.ring.is_none() {
            return Err(HarnessError::config(format!("theorem {} needs a [ring] section", self.theorem)));
        }
        let nf = n as f64;
        match self.theorem {
            Theorem::RingCriterion => {
                let p = self.p()?;
                if !(p > 1.0 && p <= nf) {
                    return Err(HarnessError::config("ring_criterion needs 1 < p <= n"));
                }
            }
            Theorem::LowerCriterion | Theorem::Transfer => {
                if !(self.p()? > nf - 1.0) {
                    return Err(HarnessError::config(format!("{} needs p > n - 1", self.theorem)));
                }
            }
            Theorem::Sandwich => {
                let a = self.alpha()?;
                let k = if self.params.family == FamilyChoice::Curves { 1.0 } else { nf - 1.0 };
                if !(a > k) {
                    return Err(HarnessError::config("sandwich needs alpha > k"));
                }
            }
            Theorem::Quasiinvariance => {
                if let Some(a) = self.params.alpha {
                    if a != nf {
                        return Err(HarnessError::config("quasiinvariance uses the n-module; alpha must equal n"));
                    }
                }
            }
            Theorem::PointwiseBounds => {
                if !(self.alpha()? >= 1.0) {
                    return Err(HarnessError::config("pointwise_bounds needs alpha >= 1"));
                }
            }
            Theorem::MeanDilatation => {
                let (lo, hi) = match self.params.mean {
                    MeanKind::Inner => (self.params.alpha, self.params.beta),
                    MeanKind::Outer => (self.params.gamma, self.params.delta),
                };
                match (lo, hi) {
                    (Some(lo), Some(hi)) if lo >= 1.0 && hi > lo => {}
                    _ => {
                        return Err(HarnessError::config(
                            "mean_dilatation needs 1 <= alpha < beta (inner) or 1 <= gamma < delta (outer)",
                        ))
                    }
                }
            }
        }
        Ok(())
    }
}

fn point(n: usize, c: &[f64]) -> Result<Point<f64>> {
    if c.len() != n {
        return Err(HarnessError::config(format!("point has {} coordinates, expected {n}", c.len())));
    }
    Ok(Point::new(c)?)
}

struct Entry {
    value: String,
    line: usize,
}

struct Section {
    line: usize,
    entries: BTreeMap<String, Entry>,
}

impl Section {
    fn take(&mut self, key: &str) -> Option<Entry> {
        self.entries.remove(key)
    }

    fn finish(self, name: &str) -> Result<()> {
        match self.entries.into_iter().next() {
            Some((k, e)) => {
                Err(HarnessError::Scenario { line: e.line, message: format!("unknown key `{k}` in [{name}]") })
            }
            None => Ok(()),
        }
    }

    fn required(&mut self, name: &str, key: &str) -> Result<Entry> {
        self.take(key)
            .ok_or_else(|| HarnessError::Scenario { line: self.line, message: format!("[{name}] is missing `{key}`") })
    }
}

fn bad(e: &Entry, msg: impl fmt::Display) -> HarnessError {
    HarnessError::Scenario { line: e.line, message: msg.to_string() }
}

fn num(e: &Entry) -> Result<f64> {
    let v: f64 = e.value.parse().map_err(|_| bad(e, format!("`{}` is not a number", e.value)))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad(e, "numbers must be finite"))
    }
}

fn int(e: &Entry) -> Result<usize> {
    e.value.parse().map_err(|_| bad(e, format!("`{}` is not a nonnegative integer", e.value)))
}

fn list(e: &Entry) -> Result<Vec<f64>> {
    e.value
        .split(',')
        .map(|s| {
            let s = s.trim();
            match s.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(bad(e, format!("`{s}` is not a finite number"))),
            }
        })
        .collect()
}

fn count(e: &Entry) -> Result<Count> {
    if e.value == "auto" {
        Ok(Count::Auto)
    } else {
        Ok(Count::Fixed(int(e)?))
    }
}

fn boolean(e: &Entry) -> Result<bool> {
    match e.value.as_str() {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(bad(e, "expected true or false")),
    }
}

fn opt<T>(s: &mut Section, key: &str, f: impl Fn(&Entry) -> Result<T>) -> Result<Option<T>> {
    s.take(key).map(|e| f(&e)).transpose()
}

fn split_sections(text: &str) -> Result<BTreeMap<String, Section>> {
    const KNOWN: [&str; 6] = ["scenario", "mapping", "weight", "ring", "params", "tolerances"];
    let mut sections: BTreeMap<String, Section> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let name = name.trim();
            if !KNOWN.contains(&name) {
                return Err(HarnessError::Scenario { line, message: format!("unknown section [{name}]") });
            }
            if sections.contains_key(name) {
                return Err(HarnessError::Scenario { line, message: format!("duplicate section [{name}]") });
            }
            sections.insert(name.to_string(), Section { line, entries: BTreeMap::new() });
            current = Some(name.to_string());
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(HarnessError::Scenario { line, message: "expected `key = value`".into() });
        };
        let Some(sec) = current.as_ref().and_then(|c| sections.get_mut(c)) else {
            return Err(HarnessError::Scenario { line, message: "key outside of any section".into() });
        };
        let key = key.trim().to_string();
        if key.is_empty() {
            return Err(HarnessError::Scenario { line, message: "empty key".into() });
        }
        if sec.entries.contains_key(&key) {
            return Err(HarnessError::Scenario { line, message: format!("duplicate key `{key}`") });
        }
        sec.entries.insert(key, Entry { value: value.trim().to_string(), line });
    }
    Ok(sections)
}

fn parse_mapping(s: Option<Section>) -> Result<MappingConfig> {
    let Some(mut s) = s else {
        return Ok(MappingConfig::Identity);
    };
    let kind = s.required("mapping", "kind")?;
    let m = match kind.value.as_str() {
        "identity" => MappingConfig::Identity,
        "scaling" => MappingConfig::Scaling { lambda: num(&s.required("mapping", "lambda")?)? },
        "linear" => MappingConfig::Linear { entries: list(&s.required("mapping", "matrix")?)? },
        "radial_power" => MappingConfig::RadialPower {
            beta: num(&s.required("mapping", "beta")?)?,
            center: opt(&mut s, "center", list)?,
        },
        "axis_stretch" => MappingConfig::AxisStretch { c: num(&s.required("mapping", "c")?)? },
        other => return Err(bad(&kind, format!("unknown mapping kind `{other}`"))),
    };
    s.finish("mapping")?;
    Ok(m)
}

fn parse_weight(s: Option<Section>) -> Result<WeightConfig> {
    let Some(mut s) = s else {
        return Ok(WeightConfig::Constant(1.0));
    };
    let kind = s.required("weight", "kind")?;
    let w = match kind.value.as_str() {
        "constant" => WeightConfig::Constant(num(&s.required("weight", "value")?)?),
        "radial_power" => WeightConfig::RadialPower {
            coef: num(&s.required("weight", "coef")?)?,
            exponent: num(&s.required("weight", "exponent")?)?,
        },
        "inner_dilatation" => WeightConfig::InnerDilatation,
        other => return Err(bad(&kind, format!("unknown weight kind `{other}`"))),
    };
    s.finish("weight")?;
    Ok(w)
}

fn parse_params(mut s: Section) -> Result<Params> {
    let n = int(&s.required("params", "n")?)?;
    let k = s.take("k");
    let family = match s.take("family") {
        Some(e) => match e.value.as_str() {
            "curves" => FamilyChoice::Curves,
            "spheres" => FamilyChoice::Spheres,
            _ => return Err(bad(&e, "family must be curves or spheres")),
        },
        None => FamilyChoice::Curves,
    };
    let family = match k {
        None => family,
        Some(e) => {
            let k = int(&e)?;
            // in the plane k = 1 fits both; the explicit family decides
            match (k, n) {
                (1, 2) => family,
                (1, _) => FamilyChoice::Curves,
                (k, n) if k + 1 == n => FamilyChoice::Spheres,
                _ => return Err(bad(&e, "k must be 1 or n - 1")),
            }
        }
    };
    let mean = match s.take("mean") {
        Some(e) => match e.value.as_str() {
            "inner" => MeanKind::Inner,
            "outer" => MeanKind::Outer,
            _ => return Err(bad(&e, "mean must be inner or outer")),
        },
        None => MeanKind::Inner,
    };
    let params = Params {
        n,
        p: opt(&mut s, "p", num)?,
        alpha: opt(&mut s, "alpha", num)?,
        beta: opt(&mut s, "beta", num)?,
        gamma: opt(&mut s, "gamma", num)?,
        delta: opt(&mut s, "delta", num)?,
        family,
        mean,
        cells: opt(&mut s, "cells", int)?,
        curves: opt(&mut s, "curves", count)?.unwrap_or(Count::Auto),
        spheres: opt(&mut s, "spheres", count)?.unwrap_or(Count::Auto),
        quad_cells: opt(&mut s, "quad_cells", int)?,
        samples: opt(&mut s, "samples", int)?.unwrap_or(10_000),
        seed: opt(&mut s, "seed", |e| e.value.parse::<u64>().map_err(|_| bad(e, "seed must be an integer")))?
            .unwrap_or(0x5eed),
        analytic_only: opt(&mut s, "analytic_only", boolean)?.unwrap_or(false),
    };
    s.finish("params")?;
    Ok(params)
}

fn parse_tolerances(s: Option<Section>, n: usize) -> Result<Tolerances> {
    let mut t = Tolerances::defaults(n);
    let Some(mut s) = s else { return Ok(t) };
    for (key, slot) in [
        ("analytic", &mut t.analytic),
        ("discrete", &mut t.discrete),
        ("extremal", &mut t.extremal),
        ("quadrature", &mut t.quadrature),
    ] {
        if let Some(e) = s.take(key) {
            let v = num(&e)?;
            if v < 0.0 {
                return Err(bad(&e, "tolerances must be nonnegative"));
            }
            *slot = v;
        }
    }
    s.finish("tolerances")?;
    Ok(t)
}

impl FromStr for Scenario {
    type Err = HarnessError;

    fn from_str(text: &str) -> Result<Self> {
        let mut sections = split_sections(text)?;
        let mut head = sections.remove("scenario").ok_or_else(|| HarnessError::config("missing [scenario] section"))?;
        let name = head.required("scenario", "name")?.value;
        let th = head.required("scenario", "theorem")?;
        let theorem: Theorem = th.value.parse().map_err(|m: String| bad(&th, m))?;
        head.finish("scenario")?;

        let params_sec = sections.remove("params").ok_or_else(|| HarnessError::config("missing [params] section"))?;
        let params = parse_params(params_sec)?;
        let mapping = parse_mapping(sections.remove("mapping"))?;
        let weight = parse_weight(sections.remove("weight"))?;
        let ring = match sections.remove("ring") {
            None => None,
            Some(mut s) => {
                let r = RingConfig {
                    center: opt(&mut s, "center", list)?,
                    r1: num(&s.required("ring", "r1")?)?,
                    r2: num(&s.required("ring", "r2")?)?,
                };
                s.finish("ring")?;
                Some(r)
            }
        };
        let tolerances = parse_tolerances(sections.remove("tolerances"), params.n)?;
        let scenario = Scenario { name, theorem, mapping, weight, ring, params, tolerances };
        scenario.validate()?;
        // surface construction errors (bad matrix, radii, …) at parse time
        let map = scenario.mapping_spec()?;
        if scenario.ring.is_some() {
            scenario.ring_spec()?;
        }
        scenario.weight_for(&map)?;
        Ok(scenario)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = "\
# identity ring criterion
[scenario]
name = basic
theorem = ring_criterion

[mapping]
kind = identity

[weight]
kind = constant
value = 1

[ring]
r1 = 1
r2 = 2.5e0

[params]
n = 2
p = 2
cells = 64
curves = auto

[tolerances]
discrete = 0.1
";

    #[test]
    fn parses_a_full_scenario() {
        let s: Scenario = BASIC.parse().unwrap();
        assert_eq!(s.name, "basic");
        assert_eq!(s.theorem, Theorem::RingCriterion);
        assert_eq!(s.mapping, MappingConfig::Identity);
        assert_eq!(s.weight, WeightConfig::Constant(1.0));
        assert_eq!(s.ring.as_ref().unwrap().r2, 2.5);
        assert_eq!(s.cells(), 64);
        assert_eq!(s.tolerances.discrete, 0.1);
        assert_eq!(s.tolerances.analytic, 1e-8);
    }

    #[test]
    fn unknown_keys_are_errors() {
        let text = BASIC.replace("cells = 64", "cels = 64");
        let err = text.parse::<Scenario>().unwrap_err();
        assert!(err.to_string().contains("unknown key `cels`"), "{err}");
        assert!(matches!(err, HarnessError::Scenario { line: 20, .. }), "{err:?}");
    }

    #[test]
    fn malformed_input_is_rejected() {
        for (from, to) in [
            ("[params]", "[parameters]"),
            ("r2 = 2.5e0", "r2 = two"),
            ("theorem = ring_criterion", "theorem = sandwhich"),
            ("p = 2", "p = 3"),
            ("r1 = 1", "r1 = 3"),
            ("kind = identity", "kind = mobius"),
            ("value = 1", "value = -1"),
            ("n = 2", "n = 5"),
        ] {
            let text = BASIC.replace(from, to);
            assert!(text.parse::<Scenario>().is_err(), "{from} -> {to} accepted");
        }
        assert!("n = 2".parse::<Scenario>().is_err());
    }

    #[test]
    fn family_and_k() {
        let text = BASIC.replace("curves = auto", "k = 1\nfamily = spheres");
        assert_eq!(text.parse::<Scenario>().unwrap().params.family, FamilyChoice::Spheres);
        let text = BASIC.replace("curves = auto", "k = 2");
        assert!(text.parse::<Scenario>().is_err());
    }
}
