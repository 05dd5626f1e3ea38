//! Scenario files, validation, the built-in catalog and the assembled model.

use std::fmt;
use std::path::Path;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bifurcation::{ClassSpan, GFunction};
use crate::groups::{GroupRep, Matrix, QMatrix, Subgroup};
use crate::invariants::{
    discover_equivariants, discover_invariants, EquivariantBasis, InvariantBasis, DEFAULT_EQUIVARIANT_CAP,
    DEFAULT_INVARIANT_CAP,
};
use crate::linalg;
use crate::number::{rational_sqrt, Surd};
use crate::poly::{Pairing, PolyMap, Polynomial, Rational};
use crate::reduction::{poisson_matrix, reduce, FieldFamily, PoissonStructure, ReducedSystem};

pub const CATALOG: [(&str, &str); 5] = [
    ("z2-pitchfork", include_str!("../scenarios/z2-pitchfork.json")),
    ("so2-hopf", include_str!("../scenarios/so2-hopf.json")),
    ("s1-resonance", include_str!("../scenarios/s1-resonance.json")),
    ("trivial-sympl", include_str!("../scenarios/trivial-sympl.json")),
    ("d3-plane", include_str!("../scenarios/d3-plane.json")),
];

pub const DEFAULT_MAX_ORDER: usize = 1000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub coordinates: Vec<String>,
    pub group: GroupSpec,
    pub basis: BasisSpec,
    pub field: FieldSpec,
    /// Complex structure used for the Hopf class of general families.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub complex_structure: Option<Vec<Vec<String>>>,
    /// `J` acting on each half of `V_0 ⊕ V_1` for the Hamiltonian Hopf class.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j_block: Option<Vec<Vec<String>>>,
    pub lambda: LambdaSpec,
    #[serde(default)]
    pub continuation: ContinuationSpec,
    #[serde(default)]
    pub simulation: SimulationSpec,
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    #[serde(default)]
    pub generators: Vec<Vec<Vec<String>>>,
    #[serde(default)]
    pub torus: Vec<Vec<Vec<String>>>,
    #[serde(default = "default_max_order")]
    pub max_order: usize,
}

fn default_max_order() -> usize {
    DEFAULT_MAX_ORDER
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase", deny_unknown_fields)]
pub enum BasisSpec {
    Discover {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max_degree: Option<u32>,
    },
    Explicit { generators: Vec<String> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase", deny_unknown_fields)]
pub enum EquivariantSpec {
    Discover {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max_degree: Option<u32>,
    },
    Explicit { generators: Vec<Vec<String>> },
}

impl Default for EquivariantSpec {
    fn default() -> Self {
        EquivariantSpec::Discover { max_degree: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum FieldSpec {
    /// `Σ f_i(θ, λ) F_i(v)`.
    General {
        coefficients: Vec<String>,
        #[serde(default)]
        equivariants: EquivariantSpec,
    },
    /// Hamiltonian field of `F̃(θ, λ)` for a canonical pairing.
    Hamiltonian { hamiltonian: String, pairing: Vec<[usize; 2]> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaSpec {
    pub seed: f64,
    pub range: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContinuationSpec {
    pub step: f64,
    pub min_step: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub presweep: usize,
}

impl Default for ContinuationSpec {
    fn default() -> Self {
        ContinuationSpec {
            step: 1e-2,
            min_step: 1e-8,
            tol: 1e-10,
            max_iter: 25,
            presweep: 32,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationSpec {
    /// Defaults to the seed `λ`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    pub horizon: f64,
    pub dt: f64,
    pub starts: usize,
    /// Standard deviation of the random starting points.
    pub scale: f64,
    pub stride: usize,
}

impl Default for SimulationSpec {
    fn default() -> Self {
        SimulationSpec {
            lambda: None,
            horizon: 5.0,
            dt: 1e-3,
            starts: 20,
            scale: 0.5,
            stride: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Issue {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

fn issue(path: impl Into<String>, message: impl fmt::Display) -> Issue {
    Issue {
        path: path.into(),
        message: message.to_string(),
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("invalid scenario JSON: {0}")]
    Json(String),
    #[error("validation failed: {}", .0.iter().map(Issue::to_string).collect::<Vec<_>>().join("; "))]
    Validation(Vec<Issue>),
    #[error("{0}")]
    Computation(String),
}

impl ScenarioError {
    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::Computation(_) => 1,
            _ => 2,
        }
    }

    pub fn issues(&self) -> &[Issue] {
        match self {
            ScenarioError::Validation(v) => v,
            _ => &[],
        }
    }
}

fn invalid(path: impl Into<String>, message: impl fmt::Display) -> ScenarioError {
    ScenarioError::Validation(vec![issue(path, message)])
}

fn computation(e: impl fmt::Display) -> ScenarioError {
    ScenarioError::Computation(e.to_string())
}

/// A catalog name or a path to a JSON file.
pub fn load_scenario(name_or_path: &str) -> Result<Scenario, ScenarioError> {
    let text = match CATALOG.iter().find(|(n, _)| *n == name_or_path) {
        Some((_, t)) => t.to_string(),
        None => std::fs::read_to_string(Path::new(name_or_path)).map_err(|e| ScenarioError::Io {
            path: name_or_path.to_string(),
            message: e.to_string(),
        })?,
    };
    parse_scenario(&text)
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let s: Scenario = serde_json::from_str(text).map_err(|e| ScenarioError::Json(e.to_string()))?;
    let issues = validate(&s);
    if issues.is_empty() {
        Ok(s)
    } else {
        Err(ScenarioError::Validation(issues))
    }
}

fn parse_matrix(m: &[Vec<String>], n: usize, path: &str, issues: &mut Vec<Issue>) -> Option<Matrix> {
    if m.len() != n || m.iter().any(|r| r.len() != n) {
        issues.push(issue(path, format!("expected a {n}x{n} matrix")));
        return None;
    }
    let mut out = Vec::with_capacity(n);
    let mut ok = true;
    for (r, row) in m.iter().enumerate() {
        let mut v = Vec::with_capacity(n);
        for (c, s) in row.iter().enumerate() {
            match Surd::parse(s) {
                Ok(x) => v.push(x),
                Err(e) => {
                    issues.push(issue(format!("{path}[{r}][{c}]"), e));
                    ok = false;
                }
            }
        }
        out.push(v);
    }
    ok.then_some(out)
}

fn rational_matrix(m: &Matrix) -> Option<QMatrix> {
    m.iter().map(|r| r.iter().map(Surd::to_rational).collect()).collect()
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Every check that needs no algebra beyond parsing and matrix products.
pub fn validate(s: &Scenario) -> Vec<Issue> {
    let mut issues = Vec::new();
    if s.name.trim().is_empty() {
        issues.push(issue("name", "must not be empty"));
    }
    let n = s.coordinates.len();
    if n == 0 {
        issues.push(issue("coordinates", "must not be empty"));
    }
    for (i, c) in s.coordinates.iter().enumerate() {
        if !is_identifier(c) || c == "lambda" {
            issues.push(issue(format!("coordinates[{i}]"), format!("invalid coordinate name {c:?}")));
        }
        if s.coordinates[..i].contains(c) {
            issues.push(issue(format!("coordinates[{i}]"), format!("duplicate coordinate name {c:?}")));
        }
    }
    for (i, g) in s.group.generators.iter().enumerate() {
        let path = format!("group.generators[{i}]");
        if let Some(m) = parse_matrix(g, n, &path, &mut issues) {
            let prod = linalg::mat_mul(&m, &linalg::transpose(&m));
            if prod != linalg::identity::<Surd>(n) {
                issues.push(issue(path, "matrix is not orthogonal"));
            }
        }
    }
    for (a, t) in s.group.torus.iter().enumerate() {
        let path = format!("group.torus[{a}]");
        if let Some(m) = parse_matrix(t, n, &path, &mut issues) {
            match rational_matrix(&m) {
                None => issues.push(issue(&path, "torus generators must be rational")),
                Some(q) => {
                    let anti = (0..n).all(|i| (0..n).all(|j| q[i][j] == -q[j][i].clone()));
                    if !anti {
                        issues.push(issue(&path, "matrix is not antisymmetric"));
                    }
                }
            }
        }
    }
    if s.group.max_order == 0 {
        issues.push(issue("group.max_order", "must be positive"));
    }
    if let BasisSpec::Explicit { generators } = &s.basis {
        if generators.is_empty() {
            issues.push(issue("basis.generators", "must not be empty"));
        }
        for (i, g) in generators.iter().enumerate() {
            if let Err(e) = Polynomial::parse(g, &s.coordinates) {
                issues.push(issue(format!("basis.generators[{i}]"), e));
            }
        }
    }
    match &s.field {
        FieldSpec::General {
            coefficients,
            equivariants,
        } => {
            if coefficients.is_empty() {
                issues.push(issue("field.coefficients", "must not be empty"));
            }
            if let EquivariantSpec::Explicit { generators } = equivariants {
                if generators.len() != coefficients.len() {
                    issues.push(issue(
                        "field.equivariants.generators",
                        format!("expected {} maps, found {}", coefficients.len(), generators.len()),
                    ));
                }
                for (i, f) in generators.iter().enumerate() {
                    if f.len() != n {
                        issues.push(issue(
                            format!("field.equivariants.generators[{i}]"),
                            format!("expected {n} components"),
                        ));
                    }
                    for (k, c) in f.iter().enumerate() {
                        if let Err(e) = Polynomial::parse(c, &s.coordinates) {
                            issues.push(issue(format!("field.equivariants.generators[{i}][{k}]"), e));
                        }
                    }
                }
            }
        }
        FieldSpec::Hamiltonian { pairing, .. } => {
            if let Err(e) = Pairing::new(n, pairing.iter().map(|p| (p[0], p[1])).collect()) {
                issues.push(issue("field.pairing", e));
            }
        }
    }
    for (key, m) in [("complex_structure", &s.complex_structure), ("j_block", &s.j_block)] {
        if let Some(m) = m {
            let size = if key == "j_block" { n / 2 } else { n };
            if let Some(mm) = parse_matrix(m, size, key, &mut issues) {
                if rational_matrix(&mm).is_none() {
                    issues.push(issue(key, "entries must be rational"));
                }
            }
        }
    }
    let [lo, hi] = s.lambda.range;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        issues.push(issue("lambda.range", "must be two finite values with lo < hi"));
    }
    if !s.lambda.seed.is_finite() {
        issues.push(issue("lambda.seed", "must be finite"));
    }
    let c = &s.continuation;
    if !(c.step > 0.0 && c.min_step > 0.0 && c.min_step <= c.step) {
        issues.push(issue("continuation.step", "need 0 < min_step <= step"));
    }
    if !(c.tol > 0.0) {
        issues.push(issue("continuation.tol", "must be positive"));
    }
    let sim = &s.simulation;
    if !(sim.dt > 0.0 && sim.horizon > 0.0) {
        issues.push(issue("simulation", "dt and horizon must be positive"));
    }
    issues
}

#[derive(Clone, Debug, Default)]
pub struct BuildOptions {
    /// Overrides the invariant and equivariant discovery caps.
    pub max_degree: Option<u32>,
}

/// A validated scenario with everything derived from it.
pub struct Model {
    pub scenario: Scenario,
    pub group: GroupRep,
    pub basis: InvariantBasis,
    pub family: FieldFamily,
    pub reduced: ReducedSystem,
    pub g: GFunction,
    /// `X(v, λ)` in the `n + 1` variables `(v, λ)`.
    pub full_field: PolyMap,
    pub spans: Vec<ClassSpan>,
    /// The scenario pairing, or the standard one on even-dimensional
    /// spaces of general families.
    pub pairing: Option<Pairing>,
    pub poisson: Option<PoissonStructure>,
}

pub fn reduced_names(l: usize) -> Vec<String> {
    let mut v: Vec<String> = (1..=l).map(|i| format!("t{i}")).collect();
    v.push("lambda".into());
    v
}

fn qmatrix(m: &[Vec<String>]) -> QMatrix {
    m.iter()
        .map(|r| {
            r.iter()
                .map(|s| Surd::parse(s).ok().and_then(|x| x.to_rational()).unwrap_or_default())
                .collect()
        })
        .collect()
}

impl Model {
    pub fn build(scenario: &Scenario, opts: &BuildOptions) -> Result<Model, ScenarioError> {
        let issues = validate(scenario);
        if !issues.is_empty() {
            return Err(ScenarioError::Validation(issues));
        }
        let s = scenario;
        let n = s.coordinates.len();
        let gens: Vec<Matrix> = s
            .group
            .generators
            .iter()
            .map(|g| parse_matrix(g, n, "", &mut Vec::new()).expect("validated"))
            .collect();
        let torus: Vec<QMatrix> = s.group.torus.iter().map(|t| qmatrix(t)).collect();
        let group = GroupRep::new(n, &gens, torus, s.group.max_order).map_err(|e| invalid("group", e))?;

        let basis = match &s.basis {
            BasisSpec::Discover { max_degree } => {
                let cap = opts.max_degree.or(*max_degree).unwrap_or(DEFAULT_INVARIANT_CAP);
                discover_invariants(&group, cap).map_err(computation)?
            }
            BasisSpec::Explicit { generators } => {
                let polys = generators
                    .iter()
                    .map(|g| Polynomial::parse(g, &s.coordinates).expect("validated"))
                    .collect();
                InvariantBasis::validated(&group, polys).map_err(|e| invalid("basis.generators", e))?
            }
        };
        let l = basis.len();
        let names = reduced_names(l);
        let parse_reduced = |text: &str, path: String| {
            Polynomial::parse(text, &names).map_err(|e| invalid(path, e))
        };

        let family = match &s.field {
            FieldSpec::General {
                coefficients,
                equivariants,
            } => {
                let eq = match equivariants {
                    EquivariantSpec::Discover { max_degree } => {
                        let cap = opts.max_degree.or(*max_degree);
                        discover_equivariants(&group, &basis, cap.unwrap_or(DEFAULT_EQUIVARIANT_CAP))
                            .map_err(computation)?
                    }
                    EquivariantSpec::Explicit { generators } => {
                        let maps = generators
                            .iter()
                            .map(|f| {
                                PolyMap::from_components(
                                    n,
                                    f.iter()
                                        .map(|c| Polynomial::parse(c, &s.coordinates).expect("validated"))
                                        .collect(),
                                )
                            })
                            .collect();
                        EquivariantBasis::validated(&group, maps).map_err(|e| invalid("field.equivariants", e))?
                    }
                };
                if eq.len() != coefficients.len() {
                    return Err(invalid(
                        "field.coefficients",
                        format!("{} coefficients for {} equivariant generators", coefficients.len(), eq.len()),
                    ));
                }
                let coefficients = coefficients
                    .iter()
                    .enumerate()
                    .map(|(i, c)| parse_reduced(c, format!("field.coefficients[{i}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                FieldFamily::General {
                    coefficients,
                    equivariants: eq,
                }
            }
            FieldSpec::Hamiltonian { hamiltonian, pairing } => FieldFamily::Hamiltonian {
                hamiltonian: parse_reduced(hamiltonian, "field.hamiltonian".into())?,
                pairing: Pairing::new(n, pairing.iter().map(|p| (p[0], p[1])).collect()).expect("validated"),
            },
        };
        family.check(&basis).map_err(|e| invalid("field", e))?;
        let reduced = reduce(&family, &basis).map_err(computation)?;
        let g = GFunction::from_reduced(&reduced, &basis).map_err(computation)?;
        let full_field = family.full_field(&basis).map_err(computation)?;

        let pairing = match &family {
            FieldFamily::Hamiltonian { pairing, .. } => Some(pairing.clone()),
            FieldFamily::General { .. } if n % 2 == 0 => Pairing::standard(n).ok(),
            FieldFamily::General { .. } => None,
        };
        let poisson = match (&reduced, &pairing) {
            (ReducedSystem::Hamiltonian(h), _) => Some(h.poisson.clone()),
            // brackets of invariants need not be invariant when the group
            // does not preserve the standard pairing
            (_, Some(p)) => poisson_matrix(&basis, p).ok(),
            _ => None,
        };

        let mut spans = Vec::new();
        match &family {
            FieldFamily::General { .. } => {
                spans.push(ClassSpan::stationary(n));
                if let Some(j) = &s.complex_structure {
                    spans.push(ClassSpan::hopf(qmatrix(j)));
                } else {
                    for xi in group.torus_generators() {
                        let sq = linalg::mat_mul(xi, xi);
                        let minus_id: QMatrix = linalg::identity::<Rational>(n)
                            .into_iter()
                            .map(|r| r.into_iter().map(|x| -x).collect())
                            .collect();
                        if sq == minus_id {
                            spans.push(ClassSpan::hopf(xi.clone()));
                            break;
                        }
                    }
                }
            }
            FieldFamily::Hamiltonian { pairing, .. } => {
                spans.push(ClassSpan::ham_steady_state(pairing));
                if let Some(j) = &s.j_block {
                    spans.push(ClassSpan::ham_hopf(pairing, &qmatrix(j)));
                }
            }
        }

        Ok(Model {
            scenario: s.clone(),
            group,
            basis,
            family,
            reduced,
            g,
            full_field,
            spans,
            pairing,
            poisson,
        })
    }

    pub fn names(&self) -> Vec<String> {
        reduced_names(self.basis.len())
    }

    pub fn coordinate_names(&self) -> Vec<String> {
        let mut v = self.scenario.coordinates.clone();
        v.push("lambda".into());
        v
    }

    /// A scenario on the fixed space `V^K`, acted on by the normalizer of
    /// `K` modulo `K`, with the family restricted by substitution.
    pub fn restrict_to_fixed_space(&self, k: &Subgroup) -> Result<Model, ScenarioError> {
        let n = self.group.dim();
        let fixed = self.group.fixed_subspace(k);
        if fixed.dim() == 0 {
            return Err(computation("zero fixed space"));
        }
        let exact = fixed
            .exact
            .ok_or_else(|| computation("fixed space has no exact basis"))?;
        let rational: Option<Vec<Vec<Rational>>> =
            exact.iter().map(|v| v.iter().map(Surd::to_rational).collect()).collect();
        let b = rational
            .and_then(|v| orthonormal_rational(&v))
            .ok_or_else(|| computation("fixed space has no rational orthonormal basis"))?;
        let d = b.len();
        // columns of B are the basis vectors
        let bt: QMatrix = b.clone();
        let bm: QMatrix = linalg::transpose(&b);
        let restrict = |m: &QMatrix| linalg::mat_mul(&linalg::mat_mul(&bt, m), &bm);
        let surd_restrict = |m: &Matrix| -> Matrix {
            let bts: Matrix = crate::groups::to_surd(&bt);
            let bms: Matrix = crate::groups::to_surd(&bm);
            linalg::mat_mul(&linalg::mat_mul(&bts, m), &bms)
        };

        let coords: Vec<String> = (1..=d).map(|i| format!("y{i}")).collect();
        let mut generators = Vec::new();
        for g in self.group.normalizer(k) {
            let r = surd_restrict(&self.group.elements()[g]);
            if r != linalg::identity::<Surd>(d) {
                generators.push(r.iter().map(|row| row.iter().map(Surd::to_string).collect()).collect());
            }
        }
        let mut torus: Vec<QMatrix> = Vec::new();
        for xi in self.group.torus_generators() {
            let img = linalg::mat_mul(xi, &bm);
            let back = linalg::mat_mul(&bm, &linalg::mat_mul(&bt, &img));
            if back != img {
                continue;
            }
            let r = restrict(xi);
            let mut flat: Vec<Vec<Rational>> = torus.iter().map(|t| t.concat()).collect();
            flat.push(r.concat());
            if linalg::rank(&flat) == torus.len() + 1 {
                torus.push(r);
            }
        }
        let to_text = |m: &QMatrix| -> Vec<Vec<String>> {
            m.iter()
                .map(|r| r.iter().map(crate::poly::format_rational).collect())
                .collect()
        };
        let group = GroupSpec {
            generators,
            torus: torus.iter().map(to_text).collect(),
            max_order: self.scenario.group.max_order,
        };

        // v = B y
        let subs = PolyMap::from_components(
            d,
            (0..n)
                .map(|i| {
                    let mut p = Polynomial::zero(d);
                    for j in 0..d {
                        if !bm[i][j].is_zero() {
                            p = &p + &Polynomial::var(d, j).scale(&bm[i][j]);
                        }
                    }
                    p
                })
                .collect(),
        );
        let probe = Scenario {
            name: format!("{}|fixed", self.scenario.name),
            description: None,
            coordinates: coords.clone(),
            group: group.clone(),
            basis: BasisSpec::Discover { max_degree: None },
            field: FieldSpec::General {
                coefficients: vec!["0".into()],
                equivariants: EquivariantSpec::Explicit {
                    generators: vec![coords.clone()],
                },
            },
            complex_structure: None,
            j_block: None,
            lambda: self.scenario.lambda.clone(),
            continuation: self.scenario.continuation.clone(),
            simulation: self.scenario.simulation.clone(),
        };
        let issues = validate(&probe);
        if !issues.is_empty() {
            return Err(ScenarioError::Validation(issues));
        }
        let gens: Vec<Matrix> = probe
            .group
            .generators
            .iter()
            .map(|g| parse_matrix(g, d, "", &mut Vec::new()).expect("validated"))
            .collect();
        let sub_group = GroupRep::new(d, &gens, torus.clone(), probe.group.max_order).map_err(|e| invalid("group", e))?;
        let sub_basis = discover_invariants(&sub_group, DEFAULT_INVARIANT_CAP).map_err(computation)?;
        let ls = sub_basis.len();
        let sub_names = reduced_names(ls);

        // θ_j(B y) in the new generators, then (θ, λ) ↦ (r(s), λ)
        let mut theta_subs = Vec::with_capacity(self.basis.len() + 1);
        for t in self.basis.generators() {
            let r = sub_basis.rewrite(&t.compose(&subs).map_err(computation)?).map_err(computation)?;
            theta_subs.push(r.extend_vars(1));
        }
        theta_subs.push(Polynomial::var(ls + 1, ls));
        let theta_subs = PolyMap::from_components(ls + 1, theta_subs);
        let text = |p: &Polynomial| p.to_text(&sub_names);

        let field = match &self.family {
            FieldFamily::General {
                coefficients,
                equivariants,
            } => {
                let mut coeffs = Vec::new();
                let mut maps = Vec::new();
                for (c, f) in coefficients.iter().zip(equivariants.generators()) {
                    let fv = f.compose(&subs).map_err(computation)?;
                    let restricted: Vec<Polynomial> = (0..d)
                        .map(|j| {
                            let mut acc = Polynomial::zero(d);
                            for i in 0..n {
                                if !bm[i][j].is_zero() {
                                    acc = &acc + &fv.component(i).scale(&bm[i][j]);
                                }
                            }
                            acc
                        })
                        .collect();
                    if restricted.iter().all(Polynomial::is_zero) {
                        continue;
                    }
                    coeffs.push(text(&c.compose(&theta_subs).map_err(computation)?));
                    maps.push(restricted.iter().map(|p| p.to_text(&coords)).collect());
                }
                if coeffs.is_empty() {
                    return Err(computation("the family vanishes on the fixed space"));
                }
                FieldSpec::General {
                    coefficients: coeffs,
                    equivariants: EquivariantSpec::Explicit { generators: maps },
                }
            }
            FieldFamily::Hamiltonian { hamiltonian, pairing } => {
                let jm = pairing.poisson_tensor();
                let jq: QMatrix = jm
                    .iter()
                    .map(|r| r.iter().map(|&x| Rational::from_integer(x.into())).collect())
                    .collect();
                let red = linalg::mat_mul(&linalg::mat_mul(&bt, &jq), &bm);
                let pairs = canonical_pairs(&red)
                    .ok_or_else(|| computation("restricted pairing is degenerate or not canonical in the fixed-space basis"))?;
                FieldSpec::Hamiltonian {
                    hamiltonian: text(&hamiltonian.compose(&theta_subs).map_err(computation)?),
                    pairing: pairs,
                }
            }
        };
        let derived = Scenario {
            basis: BasisSpec::Explicit {
                generators: sub_basis.generators().iter().map(|p| p.to_text(&coords)).collect(),
            },
            field,
            ..probe
        };
        Model::build(&derived, &BuildOptions::default())
    }
}

/// Exact Gram–Schmidt followed by normalization; `None` if some norm is
/// not a rational square.
fn orthonormal_rational(vectors: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let dot = |a: &[Rational], b: &[Rational]| -> Rational { a.iter().zip(b).map(|(x, y)| x * y).sum() };
    let mut ortho: Vec<Vec<Rational>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for u in &ortho {
            let c = dot(&w, u) / dot(u, u);
            for (wi, ui) in w.iter_mut().zip(u) {
                *wi -= &c * ui;
            }
        }
        if w.iter().any(|x| !x.is_zero()) {
            ortho.push(w);
        }
    }
    ortho
        .into_iter()
        .map(|w| {
            let r = rational_sqrt(&dot(&w, &w))?;
            Some(w.into_iter().map(|x| x / &r).collect())
        })
        .collect()
}

/// Pairs `(q, p)` when `m` is the Poisson tensor of a canonical pairing.
fn canonical_pairs(m: &QMatrix) -> Option<Vec<[usize; 2]>> {
    let d = m.len();
    let one = Rational::one();
    let mut pairs = Vec::new();
    let mut used = vec![false; d];
    for q in 0..d {
        if used[q] {
            continue;
        }
        let p = (0..d).find(|&p| m[q][p] == one)?;
        if used[p] || m[p][q] != -one.clone() {
            return None;
        }
        used[q] = true;
        used[p] = true;
        pairs.push([q, p]);
    }
    let ok = Pairing::new(d, pairs.iter().map(|p| (p[0], p[1])).collect()).ok()?;
    let expect = ok.poisson_tensor();
    (0..d)
        .all(|i| (0..d).all(|j| m[i][j] == Rational::from_integer(expect[i][j].into())))
        .then_some(pairs)
}

/// The reduced system in text form; reloads to identical polynomials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedJson {
    pub scenario: String,
    pub coordinates: Vec<String>,
    pub invariants: Vec<String>,
    pub degrees: Vec<u32>,
    pub relations: Vec<String>,
    pub variables: Vec<String>,
    pub kind: String,
    #[serde(default)]
    pub equivariants: Vec<Vec<String>>,
    /// `F̃_i` components, one list per equivariant generator.
    #[serde(default)]
    pub tables: Vec<Vec<String>>,
    #[serde(default)]
    pub coefficients: Vec<String>,
    #[serde(default)]
    pub hamiltonian: Option<String>,
    #[serde(default)]
    pub poisson: Vec<Vec<String>>,
    #[serde(default)]
    pub casimirs: Vec<String>,
    pub field: Vec<String>,
}

fn poly_text(p: &Polynomial, names: &[String]) -> String {
    p.to_text(&names[..p.nvars()])
}

impl ReducedJson {
    pub fn from_model(m: &Model) -> Self {
        let names = m.names();
        let coords = &m.scenario.coordinates;
        let mut out = ReducedJson {
            scenario: m.scenario.name.clone(),
            coordinates: coords.clone(),
            invariants: m.basis.generators().iter().map(|p| p.to_text(coords)).collect(),
            degrees: m.basis.degrees().to_vec(),
            relations: m.basis.relations().iter().map(|p| poly_text(p, &names)).collect(),
            variables: names.clone(),
            kind: String::new(),
            equivariants: Vec::new(),
            tables: Vec::new(),
            coefficients: Vec::new(),
            hamiltonian: None,
            poisson: Vec::new(),
            casimirs: m.g.casimirs().iter().map(|p| poly_text(p, &names)).collect(),
            field: m.reduced.field().components().iter().map(|p| poly_text(p, &names)).collect(),
        };
        match (&m.reduced, &m.family) {
            (ReducedSystem::General(r), FieldFamily::General { equivariants, .. }) => {
                out.kind = "general".into();
                out.equivariants = equivariants.generators().iter().map(|f| f.to_text(coords)).collect();
                out.tables = r
                    .tables
                    .iter()
                    .map(|t| t.components().iter().map(|p| poly_text(p, &names)).collect())
                    .collect();
                out.coefficients = r.coefficients.iter().map(|p| poly_text(p, &names)).collect();
            }
            (ReducedSystem::Hamiltonian(h), _) => {
                out.kind = "hamiltonian".into();
                out.hamiltonian = Some(poly_text(&h.hamiltonian, &names));
                out.poisson = h
                    .poisson
                    .matrix
                    .iter()
                    .map(|r| r.iter().map(|p| poly_text(p, &names)).collect())
                    .collect();
            }
            _ => unreachable!("reduction preserves the family kind"),
        }
        out
    }

    /// The reduced field reparsed, in `l + 1` variables.
    pub fn field_map(&self) -> Result<PolyMap, ScenarioError> {
        let comps = self
            .field
            .iter()
            .enumerate()
            .map(|(i, t)| Polynomial::parse(t, &self.variables).map_err(|e| invalid(format!("field[{i}]"), e)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PolyMap::from_components(self.variables.len(), comps))
    }

    pub fn relation_polys(&self) -> Result<Vec<Polynomial>, ScenarioError> {
        let names = &self.variables[..self.variables.len() - 1];
        self.relations
            .iter()
            .enumerate()
            .map(|(i, t)| Polynomial::parse(t, names).map_err(|e| invalid(format!("relations[{i}]"), e)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_builds() {
        for (name, _) in CATALOG {
            let s = load_scenario(name).unwrap();
            let m = Model::build(&s, &BuildOptions::default()).unwrap();
            assert_eq!(m.scenario.name, name);
        }
    }

    #[test]
    fn z2_reduces() {
        let m = Model::build(&load_scenario("z2-pitchfork").unwrap(), &BuildOptions::default()).unwrap();
        let r = ReducedJson::from_model(&m);
        assert_eq!(r.tables, vec![vec!["2 * t1".to_string()]]);
        assert_eq!(r.field, vec!["-2 * t1^2 + 2 * t1*lambda".to_string()]);
        let back = r.field_map().unwrap();
        assert_eq!(&back, m.reduced.field());
    }

    #[test]
    fn validation_paths() {
        let s = load_scenario("z2-pitchfork").unwrap();
        let mut bad = s.clone();
        bad.group.generators = vec![vec![vec!["2".into()]]];
        let issues = validate(&bad);
        assert_eq!(issues[0].path, "group.generators[0]");
        let mut bad = s.clone();
        bad.coordinates = vec!["lambda".into()];
        assert!(!validate(&bad).is_empty());
        let mut bad = s;
        bad.field = FieldSpec::General {
            coefficients: vec!["lambda - * t1".into()],
            equivariants: EquivariantSpec::default(),
        };
        let err = Model::build(&bad, &BuildOptions::default()).err().unwrap();
        assert_eq!(err.exit_code(), 2);
        assert_eq!(err.issues()[0].path, "field.coefficients[0]");
        assert!(matches!(parse_scenario("{"), Err(ScenarioError::Json(_))));
    }

    #[test]
    fn s1_casimir_and_poisson() {
        let m = Model::build(&load_scenario("s1-resonance").unwrap(), &BuildOptions::default()).unwrap();
        let r = ReducedJson::from_model(&m);
        assert_eq!(r.casimirs, vec!["1 * t1 + 1 * t2".to_string()]);
        assert_eq!(r.poisson[0][2], "1 * t4");
        assert_eq!(r.poisson[2][3], "2 * t1 + -2 * t2");
    }
}
