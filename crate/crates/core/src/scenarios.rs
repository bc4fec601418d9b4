//! Runnable scenarios: maps, ψ/φ, condition form, iteration settings and
//! tolerances bound into one validated configuration.
//!
//! Scenarios are JSON documents. Built-ins are embedded copies of the files
//! under `scenarios/` and go through the same loader as user files.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::auxiliary::{Phi, Psi};
use crate::contraction::{check_inclusions, verify, ConditionForm, MapQuadruple, Verdict, DEFAULT_COND_TOL};
use crate::error::{Error, Result};
use crate::iteration::{find_coincidence_points, jungck_iterate, IterationConfig, Witness, DEFAULT_HORIZON};
use crate::metric::{sample, Domain, Generator, Metric, Point, SampleSet};
use crate::piecewise::{Branch, PiecewiseMap};

const BUILTINS: &[(&str, &str)] = &[
    ("example_1_8", include_str!("../scenarios/example_1_8.json")),
    ("banach", include_str!("../scenarios/banach.json")),
    ("kannan_form", include_str!("../scenarios/kannan_form.json")),
    ("identity_violation", include_str!("../scenarios/identity_violation.json")),
    ("choudhury_single", include_str!("../scenarios/choudhury_single.json")),
    ("four_maps", include_str!("../scenarios/four_maps.json")),
];

/// Probe grid density per axis for load-time coverage and self-map checks.
const PROBE_GRID: usize = 101;

/// Coordinates written either as a bare number (1-D) or as a list.
#[derive(Debug, Clone, PartialEq)]
pub struct Coords(pub Vec<f64>);

impl<'de> Deserialize<'de> for Coords {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            One(f64),
            Many(Vec<f64>),
        }
        Ok(match Repr::deserialize(d)? {
            Repr::One(x) => Coords(vec![x]),
            Repr::Many(v) => Coords(v),
        })
    }
}

impl Serialize for Coords {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.0.as_slice() {
            [x] => s.serialize_f64(*x),
            v => v.serialize(s),
        }
    }
}

impl Coords {
    fn point(&self) -> Result<Point> {
        Point::new(self.0.clone())
    }
}

/// One expression or one per output coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExprSpec {
    One(String),
    Many(Vec<String>),
}

impl ExprSpec {
    pub fn parts(&self) -> Vec<&str> {
        match self {
            ExprSpec::One(s) => vec![s.as_str()],
            ExprSpec::Many(v) => v.iter().map(String::as_str).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub when: Option<String>,
    pub expr: ExprSpec,
}

impl BranchSpec {
    pub fn expr_texts(&self) -> Vec<&str> {
        self.expr.parts()
    }
}

/// `"identity"` or a list of branches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MapSpec {
    Named(String),
    Branches(Vec<BranchSpec>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapsSpec {
    #[serde(rename = "A")]
    pub a: MapSpec,
    #[serde(rename = "B")]
    pub b: MapSpec,
    #[serde(rename = "S")]
    pub s: MapSpec,
    #[serde(rename = "T")]
    pub t: MapSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum PsiSpec {
    PowerSum { p: f64, q: f64 },
    ProductPower { p: f64, q: f64, r: f64 },
    MaxPower { p: f64, q: f64 },
    ScaledPower { p: f64, q: f64, r: f64, lambda: f64 },
    Custom { expr: String },
}

impl PsiSpec {
    pub fn build(&self) -> Result<Psi> {
        match self {
            PsiSpec::PowerSum { p, q } => Psi::power_sum(*p, *q),
            PsiSpec::ProductPower { p, q, r } => Psi::product_power(*p, *q, *r),
            PsiSpec::MaxPower { p, q } => Psi::max_power(*p, *q),
            PsiSpec::ScaledPower { p, q, r, lambda } => Psi::scaled_power(*p, *q, *r, *lambda),
            PsiSpec::Custom { expr } => Psi::custom(expr),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhiSpec {
    Linear { r: f64 },
    Custom { expr: String },
}

impl PhiSpec {
    pub fn build(&self) -> Result<Phi> {
        match self {
            PhiSpec::Linear { r } => Phi::linear(*r),
            PhiSpec::Custom { expr } => Phi::custom(expr),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", deny_unknown_fields)]
pub enum FormSpec {
    #[serde(rename = "theorem_2_1")]
    Theorem21,
    #[serde(rename = "corollary_2_2")]
    Corollary22 { r: f64 },
    #[serde(rename = "corollary_2_3")]
    Corollary23,
    #[serde(rename = "theorem_2_5")]
    Theorem25 { p: f64, q: f64, r: f64, lambda: f64 },
    #[serde(rename = "choudhury_sum")]
    ChoudhurySum { r: f64, s: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IterationSpec {
    pub x0: Coords,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_conv_tol")]
    pub conv_tol: f64,
    #[serde(default = "default_eq_tol")]
    pub eq_tol: f64,
    #[serde(default = "default_preimage_tol")]
    pub preimage_tol: f64,
    #[serde(default = "default_preimage_resolution")]
    pub preimage_resolution: usize,
    #[serde(default)]
    pub probes: Vec<Coords>,
}

fn default_max_iter() -> usize {
    200
}
fn default_conv_tol() -> f64 {
    1e-10
}
fn default_eq_tol() -> f64 {
    1e-6
}
fn default_preimage_tol() -> f64 {
    1e-9
}
fn default_preimage_resolution() -> usize {
    1001
}
fn default_cond_tol() -> f64 {
    DEFAULT_COND_TOL
}
fn default_audit_grid() -> usize {
    50
}
fn default_audit_tol() -> f64 {
    1e-9
}
fn default_mono_tol() -> f64 {
    1e-12
}
fn default_falsify_budget() -> usize {
    1000
}
fn default_falsify_seed() -> u64 {
    7
}
fn default_horizon() -> u64 {
    DEFAULT_HORIZON
}
fn default_compat_tol() -> f64 {
    1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompatSpec {
    /// Sequence `x_n` as an expression in `n`; `;` separates coordinates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    #[serde(default = "default_horizon")]
    pub horizon: u64,
    #[serde(default = "default_compat_tol")]
    pub tol: f64,
}

impl Default for CompatSpec {
    fn default() -> Self {
        CompatSpec {
            witness: None,
            horizon: default_horizon(),
            tol: default_compat_tol(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChecksSpec {
    #[serde(default = "default_cond_tol")]
    pub cond_tol: f64,
    /// Points per axis for ψ/φ audits.
    #[serde(default = "default_audit_grid")]
    pub audit_grid: usize,
    /// Upper end of the audit range; defaults to the domain diameter.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audit_t_max: Option<f64>,
    #[serde(default = "default_audit_tol")]
    pub audit_tol: f64,
    /// Tolerance for `α_n` to be non-increasing.
    #[serde(default = "default_mono_tol")]
    pub mono_tol: f64,
    #[serde(default = "default_falsify_budget")]
    pub falsify_budget: usize,
    #[serde(default = "default_falsify_seed")]
    pub falsify_seed: u64,
    /// Grid density for coincidence scans; defaults to the main sampling.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coincidence_grid: Option<usize>,
    #[serde(default)]
    pub compat: CompatSpec,
}

impl Default for ChecksSpec {
    fn default() -> Self {
        serde_json::from_value(Value::Object(Default::default())).expect("all fields have defaults")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    /// Taken from the source literature.
    Literature,
    /// Constructed for this tool.
    Artifact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// A claim stated in the source literature.
    Literature,
    /// A computed value kept as a regression snapshot.
    Derived,
}

fn default_value_tol() -> f64 {
    1e-15
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum ExpectationKind {
    MapValue {
        map: String,
        at: Coords,
        value: Coords,
        #[serde(default = "default_value_tol")]
        tol: f64,
    },
    VerifyVerdict {
        verdict: Verdict,
    },
    FixedPoint {
        z: Coords,
        tol: f64,
    },
    CoincidencePoints {
        pair: [String; 2],
        points: Vec<Coords>,
        tol: f64,
    },
    Inclusions {
        passed: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Expectation {
    #[serde(flatten)]
    pub kind: ExpectationKind,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

/// The on-disk scenario document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub origin: Origin,
    pub domain: Domain,
    #[serde(default)]
    pub metric: Metric,
    pub maps: MapsSpec,
    /// Optional for `theorem_2_5`, which fixes its own ψ.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<PsiSpec>,
    /// Optional for `corollary_2_2` and `choudhury_sum`; defaults to `linear(r)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<PhiSpec>,
    pub form: FormSpec,
    pub iteration: IterationSpec,
    pub sampling: Generator,
    #[serde(default)]
    pub checks: ChecksSpec,
    #[serde(default)]
    pub expectations: Vec<Expectation>,
}

/// A validated, runnable scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub origin: Origin,
    pub maps: MapQuadruple,
    pub psi: Psi,
    pub phi: Phi,
    pub form: ConditionForm,
    pub iteration: IterationConfig,
    pub probes: Vec<Point>,
    pub sampling: Generator,
    pub checks: ChecksSpec,
    pub witness: Option<Witness>,
    pub expectations: Vec<Expectation>,
    source: ScenarioFile,
}

fn invalid(section: &str, e: impl fmt::Display) -> Error {
    Error::Validation(format!("{section}: {e}"))
}

fn probe_grid(domain: &Domain) -> Result<SampleSet> {
    // keep the probe affordable in three or more dimensions
    let n = if domain.dim() <= 2 { PROBE_GRID } else { 21 };
    sample(domain, Generator::Grid(n))
}

fn build_map(name: &str, spec: &MapSpec, domain: &Domain) -> Result<PiecewiseMap> {
    let section = format!("maps.{name}");
    let map = match spec {
        MapSpec::Named(s) if s == "identity" => PiecewiseMap::identity(name, domain.clone()),
        MapSpec::Named(s) => return Err(invalid(&section, format!("unknown named map `{s}`"))),
        MapSpec::Branches(bs) => {
            let branches = bs
                .iter()
                .map(|b| Branch::new(b.when.as_deref().unwrap_or(""), &b.expr.parts()))
                .collect::<Result<Vec<_>>>()
                .map_err(|e| invalid(&section, e))?;
            PiecewiseMap::new(name, domain.clone(), branches).map_err(|e| invalid(&section, e))?
        }
    };
    if let Some((p, e)) = map.first_failure(&probe_grid(domain)?) {
        let what = match e {
            Error::Coverage { .. } => "branch coverage",
            Error::SelfMapViolation { .. } => "self-map",
            _ => "evaluation",
        };
        return Err(invalid(&section, format!("{what} check failed at {p}: {e}")));
    }
    Ok(map)
}

fn build_point(section: &str, c: &Coords, domain: &Domain) -> Result<Point> {
    let p = c.point().map_err(|e| invalid(section, e))?;
    domain.check_dim(&p).map_err(|e| invalid(section, e))?;
    if !domain.contains(&p) {
        return Err(invalid(section, format!("{p} lies outside the domain")));
    }
    Ok(p)
}

impl ScenarioFile {
    /// Validate and assemble a runnable scenario.
    pub fn build(&self) -> Result<Scenario> {
        let domain = &self.domain;
        let maps = MapQuadruple::new(
            build_map("A", &self.maps.a, domain)?,
            build_map("B", &self.maps.b, domain)?,
            build_map("S", &self.maps.s, domain)?,
            build_map("T", &self.maps.t, domain)?,
            self.metric,
        )?;

        let psi = match (&self.psi, &self.form) {
            (Some(spec), _) => spec.build().map_err(|e| invalid("psi", e))?,
            (None, FormSpec::Theorem25 { p, q, r, lambda }) => {
                Psi::scaled_power(*p, *q, *r, *lambda).map_err(|e| invalid("form", e))?
            }
            (None, _) => return Err(invalid("psi", "required by this form")),
        };
        let phi = match (&self.phi, &self.form) {
            (Some(spec), _) => spec.build().map_err(|e| invalid("phi", e))?,
            (None, FormSpec::Corollary22 { r } | FormSpec::ChoudhurySum { r, .. }) => {
                Phi::linear(*r).map_err(|e| invalid("form", e))?
            }
            (None, _) => return Err(invalid("phi", "required by this form")),
        };
        let form = match &self.form {
            FormSpec::Theorem21 => Ok(ConditionForm::Theorem21 {
                psi: psi.clone(),
                phi: phi.clone(),
            }),
            FormSpec::Corollary22 { r } => ConditionForm::corollary_2_2(psi.clone(), *r),
            FormSpec::Corollary23 => Ok(ConditionForm::Corollary23 {
                psi: psi.clone(),
                phi: phi.clone(),
            }),
            FormSpec::Theorem25 { p, q, r, lambda } => ConditionForm::theorem_2_5(*p, *q, *r, *lambda, phi.clone()),
            FormSpec::ChoudhurySum { r, s } => ConditionForm::choudhury_sum(psi.clone(), *r, *s),
        }
        .map_err(|e| invalid("form", e))?;
        if let ConditionForm::ChoudhurySum { .. } = form {
            if !maps.a.is_identity() || !maps.b.is_identity() || maps.s.branches() != maps.t.branches() {
                return Err(invalid("form", "choudhury_sum needs A = B = identity and S = T"));
            }
        }

        let it = &self.iteration;
        let iteration = IterationConfig {
            x0: build_point("iteration.x0", &it.x0, domain)?,
            max_iter: it.max_iter,
            conv_tol: it.conv_tol,
            eq_tol: it.eq_tol,
            preimage_tol: it.preimage_tol,
            preimage_resolution: it.preimage_resolution,
        };
        iteration.validate().map_err(|e| invalid("iteration", e))?;
        let probes = it
            .probes
            .iter()
            .map(|c| build_point("iteration.probes", c, domain))
            .collect::<Result<Vec<_>>>()?;

        sample(domain, self.sampling).map_err(|e| invalid("sampling", e))?;

        let c = &self.checks;
        if !(c.cond_tol >= 0.0 && c.audit_tol >= 0.0 && c.mono_tol >= 0.0) {
            return Err(invalid("checks", "tolerances must be non-negative"));
        }
        if c.audit_grid < 2 {
            return Err(invalid("checks.audit_grid", "must be at least 2"));
        }
        if c.audit_t_max.is_some_and(|t| !(t > 0.0 && t.is_finite())) {
            return Err(invalid("checks.audit_t_max", "must be positive"));
        }
        if c.falsify_budget == 0 {
            return Err(invalid("checks.falsify_budget", "must be at least 1"));
        }
        if let Some(n) = c.coincidence_grid {
            sample(domain, Generator::Grid(n)).map_err(|e| invalid("checks.coincidence_grid", e))?;
        }
        if c.compat.horizon == 0 || c.compat.tol.is_nan() || c.compat.tol <= 0.0 {
            return Err(invalid("checks.compat", "horizon and tol must be positive"));
        }
        let witness = c
            .compat
            .witness
            .as_deref()
            .map(Witness::parse)
            .transpose()
            .map_err(|e| invalid("checks.compat.witness", e))?;

        for e in &self.expectations {
            match &e.kind {
                ExpectationKind::MapValue { map, at, .. } => {
                    if !["A", "B", "S", "T"].contains(&map.as_str()) {
                        return Err(invalid("expectations", format!("unknown map `{map}`")));
                    }
                    build_point("expectations", at, domain)?;
                }
                ExpectationKind::CoincidencePoints { pair, .. } => {
                    for m in pair {
                        if !["A", "B", "S", "T"].contains(&m.as_str()) {
                            return Err(invalid("expectations", format!("unknown map `{m}`")));
                        }
                    }
                }
                _ => {}
            }
        }

        Ok(Scenario {
            name: self.name.clone(),
            description: self.description.clone(),
            origin: self.origin,
            maps,
            psi,
            phi,
            form,
            iteration,
            probes,
            sampling: self.sampling,
            checks: self.checks.clone(),
            witness,
            expectations: self.expectations.clone(),
            source: self.clone(),
        })
    }
}

/// Names of the built-in scenarios.
pub fn builtin_names() -> Vec<&'static str> {
    BUILTINS.iter().map(|(n, _)| *n).collect()
}

fn builtin_text(name: &str) -> Option<&'static str> {
    BUILTINS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

/// A built-in scenario by name.
pub fn builtin(name: &str) -> Result<Scenario> {
    let text = builtin_text(name).ok_or_else(|| Error::UnknownScenario(name.to_string()))?;
    from_json_str(text, &[])
}

/// Load and validate a scenario file.
pub fn load(path: impl AsRef<Path>) -> Result<Scenario> {
    load_with(path, &[])
}

/// Load a scenario file, applying dotted `key=value` overrides first.
pub fn load_with(path: impl AsRef<Path>, overrides: &[(String, String)]) -> Result<Scenario> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    from_json_str(&text, overrides)
}

/// Resolve a scenario given as an existing file path or a built-in name.
pub fn resolve(name_or_path: &str, overrides: &[(String, String)]) -> Result<Scenario> {
    let path = Path::new(name_or_path);
    if path.is_file() {
        load_with(path, overrides)
    } else if let Some(text) = builtin_text(name_or_path) {
        from_json_str(text, overrides)
    } else {
        Err(Error::UnknownScenario(name_or_path.to_string()))
    }
}

fn parse_error(e: serde_json::Error) -> Error {
    Error::ScenarioParse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

/// Parse, override, validate.
pub fn from_json_str(text: &str, overrides: &[(String, String)]) -> Result<Scenario> {
    let file: ScenarioFile = if overrides.is_empty() {
        serde_json::from_str(text).map_err(parse_error)?
    } else {
        let mut tree: Value = serde_json::from_str(text).map_err(parse_error)?;
        for (k, v) in overrides {
            apply_override(&mut tree, k, v)?;
        }
        serde_json::from_value(tree).map_err(|e| invalid("after overrides", e))?
    };
    file.build()
}

/// Parse `key=value`.
pub fn parse_override(text: &str) -> Result<(String, String)> {
    let (k, v) = text
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{text}` is not of the form key=value")))?;
    if k.trim().is_empty() {
        return Err(Error::Config(format!("override `{text}` has an empty key")));
    }
    Ok((k.trim().to_string(), v.trim().to_string()))
}

/// Set a dotted path in a JSON tree. The value is read as JSON when it
/// parses and as a string otherwise; numeric segments index arrays.
pub fn apply_override(tree: &mut Value, key: &str, raw: &str) -> Result<()> {
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = tree;
    let segments: Vec<&str> = key.split('.').collect();
    for (i, seg) in segments.iter().enumerate() {
        let last = i + 1 == segments.len();
        node = match node {
            Value::Object(map) => {
                if last {
                    map.insert(seg.to_string(), value);
                    return Ok(());
                }
                map.entry(seg.to_string()).or_insert_with(|| Value::Object(Default::default()))
            }
            Value::Array(items) => {
                let idx: usize = seg
                    .parse()
                    .map_err(|_| Error::Config(format!("override `{key}`: `{seg}` is not an array index")))?;
                let len = items.len();
                let slot = items
                    .get_mut(idx)
                    .ok_or_else(|| Error::Config(format!("override `{key}`: index {idx} out of range ({len})")))?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            _ => {
                return Err(Error::Config(format!(
                    "override `{key}`: `{seg}` is inside a scalar"
                )))
            }
        };
    }
    Ok(())
}

/// Outcome of checking one declared expectation against live computation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectationOutcome {
    pub check: String,
    pub provenance: Provenance,
    pub passed: bool,
    pub observed: String,
}

fn near(a: &Point, b: &Point, tol: f64, metric: Metric) -> bool {
    metric.distance(a, b).is_ok_and(|d| d <= tol)
}

impl Scenario {
    pub fn domain(&self) -> &Domain {
        self.maps.domain()
    }

    pub fn metric(&self) -> Metric {
        self.maps.metric
    }

    /// The document this scenario was built from, overrides applied.
    pub fn source(&self) -> &ScenarioFile {
        &self.source
    }

    pub fn map(&self, name: &str) -> Option<&PiecewiseMap> {
        match name {
            "A" => Some(&self.maps.a),
            "B" => Some(&self.maps.b),
            "S" => Some(&self.maps.s),
            "T" => Some(&self.maps.t),
            _ => None,
        }
    }

    pub fn samples(&self) -> Result<SampleSet> {
        sample(self.domain(), self.sampling)
    }

    pub fn coincidence_samples(&self) -> Result<SampleSet> {
        match self.checks.coincidence_grid {
            Some(n) => sample(self.domain(), Generator::Grid(n)),
            None => self.samples(),
        }
    }

    /// Upper end of the ψ/φ audit range.
    pub fn audit_t_max(&self) -> f64 {
        self.checks
            .audit_t_max
            .unwrap_or_else(|| self.domain().diameter(self.metric()))
            .max(f64::MIN_POSITIVE)
    }

    /// The distinct pairs `(A, S)` and `(B, T)`.
    pub fn coincidence_pairs(&self) -> Vec<(&PiecewiseMap, &PiecewiseMap)> {
        let mut pairs = vec![(&self.maps.a, &self.maps.s)];
        let same = self.maps.a.branches() == self.maps.b.branches() && self.maps.s.branches() == self.maps.t.branches();
        if !same {
            pairs.push((&self.maps.b, &self.maps.t));
        }
        pairs
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.source).expect("scenario documents always serialize")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string() + "\n")?;
        Ok(())
    }

    /// Check every declared expectation against live computation.
    pub fn check_expectations(&self, workers: usize) -> Result<Vec<ExpectationOutcome>> {
        let metric = self.metric();
        self.expectations
            .iter()
            .map(|e| {
                let (check, passed, observed) = match &e.kind {
                    ExpectationKind::MapValue { map, at, value, tol } => {
                        let m = self.map(map).expect("validated at load");
                        let got = m.evaluate(&at.point()?)?;
                        let ok = near(&got, &value.point()?, *tol, metric);
                        (format!("{map}({})", at.point()?), ok, got.to_string())
                    }
                    ExpectationKind::VerifyVerdict { verdict } => {
                        let r = verify(&self.form, &self.maps, &self.samples()?, self.checks.cond_tol, workers)?;
                        ("verify".to_string(), r.verdict == *verdict, format!("{:?}", r.verdict).to_lowercase())
                    }
                    ExpectationKind::FixedPoint { z, tol } => {
                        let trace = jungck_iterate(&self.maps, &self.iteration)?;
                        let ok = trace.converged().is_some_and(|got| near(got, &z.point().unwrap_or(got.clone()), *tol, metric));
                        ("fixed_point".to_string(), ok, format!("{:?}", trace.terminal))
                    }
                    ExpectationKind::CoincidencePoints { pair, points, tol } => {
                        let f = self.map(&pair[0]).expect("validated at load");
                        let g = self.map(&pair[1]).expect("validated at load");
                        let r = find_coincidence_points(f, g, &self.coincidence_samples()?, self.iteration.eq_tol, metric)?;
                        let want = points.iter().map(Coords::point).collect::<Result<Vec<_>>>()?;
                        let ok = r.points.len() == want.len()
                            && r.points.iter().zip(&want).all(|(c, w)| near(&c.point, w, *tol, metric));
                        let got: Vec<String> = r.points.iter().map(|c| c.point.to_string()).collect();
                        (format!("coincidence({}, {})", pair[0], pair[1]), ok, got.join(" "))
                    }
                    ExpectationKind::Inclusions { passed } => {
                        let r = check_inclusions(
                            &self.maps,
                            &self.samples()?,
                            self.iteration.preimage_tol,
                            self.iteration.preimage_resolution,
                        )?;
                        ("inclusions".to_string(), r.passed == *passed, r.passed.to_string())
                    }
                };
                Ok(ExpectationOutcome {
                    check,
                    provenance: e.provenance,
                    passed,
                    observed,
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_builtin_validates() {
        for name in builtin_names() {
            let s = builtin(name).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(s.name, name);
        }
        assert!(matches!(builtin("nope"), Err(Error::UnknownScenario(_))));
    }

    #[test]
    fn example_t_at_point_six() {
        let s = builtin("example_1_8").unwrap();
        assert_eq!(s.maps.t.eval_scalar(0.6).unwrap(), 1.0);
        assert_eq!(s.coincidence_pairs().len(), 1);
    }

    #[test]
    fn theorem_2_5_psi_comes_from_form() {
        let s = builtin("kannan_form").unwrap();
        assert_eq!(s.psi, Psi::scaled_power(1.0, 1.0, 0.0, 1.0).unwrap());
    }

    #[test]
    fn round_trip_equals_builtin() {
        let s = builtin("banach").unwrap();
        let again = from_json_str(&s.to_json_string(), &[]).unwrap();
        assert_eq!(again, s);
    }

    #[test]
    fn phi_of_one_is_rejected() {
        let text = builtin_text("banach").unwrap();
        let err = from_json_str(text, &[("phi.r".into(), "1.0".into())]).unwrap_err();
        assert!(err.to_string().contains("r must be < 1"), "{err}");
    }

    #[test]
    fn coverage_gap_is_rejected() {
        let text = builtin_text("banach").unwrap();
        let gap = r#"[{"when": "x < 0.5", "expr": "x/2"}, {"when": "x > 0.6", "expr": "x/2"}]"#;
        let err = from_json_str(text, &[("maps.T".into(), gap.into())]).unwrap_err();
        assert!(err.to_string().contains("branch coverage"), "{err}");
        let escape = r#"[{"expr": "x + 0.5"}]"#;
        let err = from_json_str(text, &[("maps.S".into(), escape.into())]).unwrap_err();
        assert!(err.to_string().contains("self-map"), "{err}");
    }

    #[test]
    fn parse_errors_carry_location() {
        let err = from_json_str("{\n  \"name\": \"x\",\n  oops\n}", &[]).unwrap_err();
        match err {
            Error::ScenarioParse { line, .. } => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn overrides_apply_before_validation() {
        let text = builtin_text("banach").unwrap();
        let s = from_json_str(
            text,
            &[
                ("iteration.conv_tol".into(), "1e-12".into()),
                ("sampling.grid".into(), "11".into()),
                ("iteration.probes.1".into(), "0.5".into()),
            ],
        )
        .unwrap();
        assert_eq!(s.iteration.conv_tol, 1e-12);
        assert_eq!(s.sampling, Generator::Grid(11));
        assert_eq!(s.probes[1].x(), 0.5);
        assert!(from_json_str(text, &[("iteration.conv_tl".into(), "1".into())]).is_err());
        assert!(from_json_str(text, &[("name.x".into(), "1".into())]).is_err());
        assert!(parse_override("novalue").is_err());
        assert_eq!(parse_override("a.b = 3").unwrap(), ("a.b".into(), "3".into()));
    }

    #[test]
    fn choudhury_needs_single_map() {
        let text = builtin_text("choudhury_single").unwrap();
        let err = from_json_str(text, &[("maps.A".into(), r#"[{"expr": "x/3"}]"#.into())]).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn out_of_domain_start_is_rejected() {
        let text = builtin_text("banach").unwrap();
        assert!(from_json_str(text, &[("iteration.x0".into(), "2".into())]).is_err());
    }
}
