//! Scenario configuration: a strict tree-structured TOML format.
//!
//! Parsing collects *all* problems instead of stopping at the first one, and
//! unknown keys are hard errors with a nearest-key suggestion — a silently
//! ignored typo in a physics parameter is the main field-use hazard. The
//! validated config re-serializes to a canonical form (defaults filled,
//! fields in declaration order) whose SHA-256 prefix identifies the run;
//! whitespace and key order in the input never change the hash.

use std::collections::BTreeMap;

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;
use toml::value::Table;
use toml::Value;

use crate::grid::Boundary;
use crate::tdse::Method;

/// Diagnostics the runner can compute, in report order.
pub const DIAGNOSTIC_NAMES: &[&str] = &[
    "norm-drift",
    "energy-drift",
    "chetaev",
    "continuity",
    "madelung-amplitude",
    "madelung-phase",
    "quantum-potential",
    "uncertainty-product",
    "uncertainty-decomposition",
    "action-dual-route",
    "equivariance",
    "non-crossing",
];

/// Rows the classical suite reports; valid targets for `[tolerances]` and
/// `[expectations]` but not for the `diagnostics` list.
pub const CLASSICAL_DIAGNOSTIC_NAMES: &[&str] =
    &["classical-energy-drift", "poincare-drift", "lyapunov", "stability"];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config is not valid TOML: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("invalid configuration:\n{}", .0.iter().map(|e| format!("  - {e}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<String>),
}

// ---------------------------------------------------------------------------
// Validated configuration tree
// ---------------------------------------------------------------------------

/// A fully validated scenario. Serializing it yields the canonical echo the
/// run hash is computed from.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    pub diagnostics: Vec<String>,
    pub units: UnitsBlock,
    pub grid: GridBlock,
    pub potential: PotentialBlock,
    pub initial_state: StateBlock,
    pub evolution: EvolutionBlock,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectories: Option<TrajectoriesBlock>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub expectations: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classical: Option<ClassicalBlock>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct UnitsBlock {
    pub hbar: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct GridBlock {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub points: Vec<usize>,
    pub boundary: String,
}

impl GridBlock {
    pub fn ndim(&self) -> usize {
        self.points.len()
    }

    pub fn boundary_kind(&self) -> Boundary {
        match self.boundary.as_str() {
            "dirichlet" => Boundary::DirichletZero,
            _ => Boundary::Periodic,
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct PotentialBlock {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub height: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_thickness: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slit_centers: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slit_width: Option<f64>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct StateBlock {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub momentum: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub components: Vec<ComponentBlock>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ComponentBlock {
    /// Complex weight as (re, im).
    pub weight: [f64; 2],
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub momentum: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct EvolutionBlock {
    pub method: String,
    pub dt: f64,
    pub steps: usize,
    pub snapshot_stride: usize,
}

impl EvolutionBlock {
    pub fn method_kind(&self) -> Method {
        match self.method.as_str() {
            "crank-nicolson" => Method::CrankNicolson,
            _ => Method::SplitSpectral,
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct TrajectoriesBlock {
    pub count: usize,
    pub seed: u64,
    pub substeps: usize,
    pub interpolation: String,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ClassicalBlock {
    pub mass: f64,
    pub q0: Vec<f64>,
    pub p0: Vec<f64>,
    pub dt: f64,
    pub steps: usize,
    pub variational: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lyapunov: Option<LyapunovBlock>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct LyapunovBlock {
    pub horizon: f64,
    pub renorm_interval: f64,
    pub seed: u64,
}

impl ScenarioConfig {
    /// Route every seeded stream through one override (CLI `--seed`).
    pub fn apply_seed_override(&mut self, seed: u64) {
        if let Some(t) = self.trajectories.as_mut() {
            t.seed = seed;
        }
        if let Some(l) = self.classical.as_mut().and_then(|c| c.lyapunov.as_mut()) {
            l.seed = seed;
        }
    }
}

/// Canonical serialized form of a validated config.
pub fn canonical_toml(cfg: &ScenarioConfig) -> String {
    toml::to_string(cfg).expect("validated configs serialize")
}

/// Twelve hex characters of SHA-256 over the canonical form.
pub fn config_hash(cfg: &ScenarioConfig) -> String {
    let mut hasher = Sha256::new();
    hasher.update(canonical_toml(cfg).as_bytes());
    let digest = hasher.finalize();
    digest.iter().take(6).map(|b| format!("{b:02x}")).collect()
}

// ---------------------------------------------------------------------------
// Validator
// ---------------------------------------------------------------------------

#[derive(Default)]
struct Validator {
    errors: Vec<String>,
}

fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, &ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

fn nearest<'a>(key: &str, allowed: &[&'a str]) -> Option<&'a str> {
    allowed
        .iter()
        .map(|cand| (levenshtein(key, cand), *cand))
        .min()
        .filter(|(d, _)| *d <= 3)
        .map(|(_, cand)| cand)
}

impl Validator {
    fn push(&mut self, message: String) {
        self.errors.push(message);
    }

    /// Flag keys outside the allowed set, suggesting the nearest valid key.
    fn check_keys(&mut self, table: &Table, path: &str, allowed: &[&str]) {
        for key in table.keys() {
            if !allowed.contains(&key.as_str()) {
                match nearest(key, allowed) {
                    Some(cand) => self.push(format!(
                        "unknown key `{path}{key}` (did you mean `{path}{cand}`?)"
                    )),
                    None => self.push(format!(
                        "unknown key `{path}{key}`; allowed keys: {}",
                        allowed.join(", ")
                    )),
                }
            }
        }
    }

    fn table<'a>(&mut self, root: &'a Table, key: &str, required: bool) -> Option<&'a Table> {
        match root.get(key) {
            Some(Value::Table(t)) => Some(t),
            Some(_) => {
                self.push(format!("`{key}` must be a table"));
                None
            }
            None => {
                if required {
                    self.push(format!("missing required block `[{key}]`"));
                }
                None
            }
        }
    }

    fn f64(&mut self, table: &Table, path: &str, key: &str) -> Option<f64> {
        match table.get(key) {
            Some(Value::Float(x)) => Some(*x),
            Some(Value::Integer(x)) => Some(*x as f64),
            Some(_) => {
                self.push(format!("`{path}{key}` must be a number"));
                None
            }
            None => None,
        }
    }

    fn require_f64(&mut self, table: &Table, path: &str, key: &str) -> Option<f64> {
        if !table.contains_key(key) {
            self.push(format!("missing required key `{path}{key}`"));
            return None;
        }
        self.f64(table, path, key)
    }

    fn usize(&mut self, table: &Table, path: &str, key: &str) -> Option<usize> {
        match table.get(key) {
            Some(Value::Integer(x)) if *x >= 0 => Some(*x as usize),
            Some(_) => {
                self.push(format!("`{path}{key}` must be a non-negative integer"));
                None
            }
            None => None,
        }
    }

    fn require_usize(&mut self, table: &Table, path: &str, key: &str) -> Option<usize> {
        if !table.contains_key(key) {
            self.push(format!("missing required key `{path}{key}`"));
            return None;
        }
        self.usize(table, path, key)
    }

    fn u64(&mut self, table: &Table, path: &str, key: &str) -> Option<u64> {
        match table.get(key) {
            Some(Value::Integer(x)) if *x >= 0 => Some(*x as u64),
            Some(_) => {
                self.push(format!("`{path}{key}` must be a non-negative integer"));
                None
            }
            None => None,
        }
    }

    fn bool(&mut self, table: &Table, path: &str, key: &str) -> Option<bool> {
        match table.get(key) {
            Some(Value::Boolean(b)) => Some(*b),
            Some(_) => {
                self.push(format!("`{path}{key}` must be a boolean"));
                None
            }
            None => None,
        }
    }

    fn string(&mut self, table: &Table, path: &str, key: &str) -> Option<String> {
        match table.get(key) {
            Some(Value::String(s)) => Some(s.clone()),
            Some(_) => {
                self.push(format!("`{path}{key}` must be a string"));
                None
            }
            None => None,
        }
    }

    fn require_string(&mut self, table: &Table, path: &str, key: &str) -> Option<String> {
        if !table.contains_key(key) {
            self.push(format!("missing required key `{path}{key}`"));
            return None;
        }
        self.string(table, path, key)
    }

    fn f64_array(&mut self, table: &Table, path: &str, key: &str) -> Option<Vec<f64>> {
        let value = table.get(key)?;
        let items = match value {
            Value::Array(items) => items,
            _ => {
                self.push(format!("`{path}{key}` must be an array of numbers"));
                return None;
            }
        };
        let mut out = Vec::with_capacity(items.len());
        for item in items {
            match item {
                Value::Float(x) => out.push(*x),
                Value::Integer(x) => out.push(*x as f64),
                _ => {
                    self.push(format!("`{path}{key}` must contain only numbers"));
                    return None;
                }
            }
        }
        Some(out)
    }

    fn require_f64_array(&mut self, table: &Table, path: &str, key: &str) -> Option<Vec<f64>> {
        if !table.contains_key(key) {
            self.push(format!("missing required key `{path}{key}`"));
            return None;
        }
        self.f64_array(table, path, key)
    }

    fn require_usize_array(&mut self, table: &Table, path: &str, key: &str) -> Option<Vec<usize>> {
        if !table.contains_key(key) {
            self.push(format!("missing required key `{path}{key}`"));
            return None;
        }
        match table.get(key) {
            Some(Value::Array(items)) => {
                let mut out = Vec::with_capacity(items.len());
                for item in items {
                    match item {
                        Value::Integer(x) if *x > 0 => out.push(*x as usize),
                        _ => {
                            self.push(format!(
                                "`{path}{key}` must contain only positive integers"
                            ));
                            return None;
                        }
                    }
                }
                Some(out)
            }
            _ => {
                self.push(format!("`{path}{key}` must be an array of integers"));
                None
            }
        }
    }

    fn finite_positive(&mut self, value: Option<f64>, path: &str) -> Option<f64> {
        match value {
            Some(x) if x.is_finite() && x > 0.0 => Some(x),
            Some(x) => {
                self.push(format!("`{path}` must be finite and positive, got {x}"));
                None
            }
            None => None,
        }
    }
}

// ---------------------------------------------------------------------------
// Block parsers
// ---------------------------------------------------------------------------

fn parse_units(v: &mut Validator, root: &Table) -> UnitsBlock {
    let mut units = UnitsBlock { hbar: 1.0, mass: 1.0 };
    if let Some(t) = v.table(root, "units", false) {
        v.check_keys(t, "units.", &["hbar", "mass"]);
        if let Some(h) = v.f64(t, "units.", "hbar") {
            units.hbar = v.finite_positive(Some(h), "units.hbar").unwrap_or(1.0);
        }
        if let Some(m) = v.f64(t, "units.", "mass") {
            units.mass = v.finite_positive(Some(m), "units.mass").unwrap_or(1.0);
        }
    }
    units
}

fn parse_grid(v: &mut Validator, root: &Table) -> Option<GridBlock> {
    let t = v.table(root, "grid", true)?;
    v.check_keys(t, "grid.", &["lower", "upper", "points", "boundary"]);
    let lower = v.require_f64_array(t, "grid.", "lower");
    let upper = v.require_f64_array(t, "grid.", "upper");
    let points = v.require_usize_array(t, "grid.", "points");
    let boundary = v.string(t, "grid.", "boundary").unwrap_or_else(|| "periodic".into());
    if !matches!(boundary.as_str(), "periodic" | "dirichlet") {
        v.push(format!(
            "`grid.boundary` must be \"periodic\" or \"dirichlet\", got \"{boundary}\""
        ));
        return None;
    }
    let (lower, upper, points) = (lower?, upper?, points?);
    if lower.len() != upper.len() || lower.len() != points.len() {
        v.push(format!(
            "grid arrays must agree in length (lower {}, upper {}, points {})",
            lower.len(),
            upper.len(),
            points.len()
        ));
        return None;
    }
    if lower.is_empty() || lower.len() > 2 {
        v.push(format!("grids are 1- or 2-dimensional, got {} axes", lower.len()));
        return None;
    }
    for a in 0..lower.len() {
        if !(lower[a].is_finite() && upper[a].is_finite() && lower[a] < upper[a]) {
            v.push(format!(
                "grid axis {a}: bounds must be finite with lower < upper, got [{}, {}]",
                lower[a], upper[a]
            ));
        }
        if points[a] < 8 {
            v.push(format!("grid axis {a}: need at least 8 points, got {}", points[a]));
        }
    }
    Some(GridBlock { lower, upper, points, boundary })
}

const POTENTIAL_KINDS: &[&str] =
    &["free", "harmonic", "inverted-harmonic", "box", "gaussian-barrier", "double-slit"];

fn parse_potential(v: &mut Validator, root: &Table, grid: Option<&GridBlock>) -> Option<PotentialBlock> {
    let t = v.table(root, "potential", true)?;
    v.check_keys(
        t,
        "potential.",
        &[
            "kind",
            "omega",
            "kappa",
            "height",
            "center",
            "width",
            "wall_x",
            "wall_thickness",
            "slit_centers",
            "slit_width",
        ],
    );
    let kind = v.require_string(t, "potential.", "kind")?;
    if !POTENTIAL_KINDS.contains(&kind.as_str()) {
        match nearest(&kind, POTENTIAL_KINDS) {
            Some(cand) => v.push(format!(
                "unknown potential kind \"{kind}\" (did you mean \"{cand}\"?)"
            )),
            None => v.push(format!(
                "unknown potential kind \"{kind}\"; catalog: {}",
                POTENTIAL_KINDS.join(", ")
            )),
        }
        return None;
    }
    let allowed_params: &[&str] = match kind.as_str() {
        "harmonic" => &["omega"],
        "inverted-harmonic" => &["kappa"],
        "gaussian-barrier" => &["height", "center", "width"],
        "double-slit" => &["height", "wall_x", "wall_thickness", "slit_centers", "slit_width"],
        _ => &[],
    };
    for key in t.keys().filter(|k| k.as_str() != "kind") {
        if !allowed_params.contains(&key.as_str()) {
            v.push(format!("`potential.{key}` does not apply to the {kind} potential"));
        }
    }
    let mut block = PotentialBlock {
        kind: kind.clone(),
        omega: None,
        kappa: None,
        height: None,
        center: None,
        width: None,
        wall_x: None,
        wall_thickness: None,
        slit_centers: None,
        slit_width: None,
    };
    match kind.as_str() {
        "harmonic" => {
            let omega = v.require_f64(t, "potential.", "omega");
            block.omega = v.finite_positive(omega, "potential.omega");
        }
        "inverted-harmonic" => {
            let kappa = v.require_f64(t, "potential.", "kappa");
            block.kappa = v.finite_positive(kappa, "potential.kappa");
        }
        "gaussian-barrier" => {
            block.height = v.require_f64(t, "potential.", "height");
            block.center = v.require_f64_array(t, "potential.", "center");
            let width = v.require_f64(t, "potential.", "width");
            block.width = v.finite_positive(width, "potential.width");
            if let (Some(c), Some(g)) = (&block.center, grid) {
                if c.len() != g.ndim() {
                    v.push(format!(
                        "`potential.center` has {} entries but the grid is {}-dimensional",
                        c.len(),
                        g.ndim()
                    ));
                }
            }
        }
        "double-slit" => {
            let height = v.require_f64(t, "potential.", "height");
            block.height = v.finite_positive(height, "potential.height");
            block.wall_x = v.require_f64(t, "potential.", "wall_x");
            let thickness = v.require_f64(t, "potential.", "wall_thickness");
            block.wall_thickness = v.finite_positive(thickness, "potential.wall_thickness");
            block.slit_centers = v.require_f64_array(t, "potential.", "slit_centers");
            if let Some(c) = &block.slit_centers {
                if c.len() != 2 {
                    v.push(format!("`potential.slit_centers` needs exactly 2 entries, got {}", c.len()));
                }
            }
            let slit_width = v.require_f64(t, "potential.", "slit_width");
            block.slit_width = v.finite_positive(slit_width, "potential.slit_width");
            if let Some(g) = grid {
                if g.ndim() != 2 {
                    v.push("the double-slit potential requires a 2-dimensional grid".into());
                }
            }
        }
        "box" => {
            if let Some(g) = grid {
                if g.boundary != "dirichlet" {
                    v.push("the box potential requires `grid.boundary = \"dirichlet\"`".into());
                }
            }
        }
        _ => {}
    }
    Some(block)
}

const STATE_KINDS: &[&str] =
    &["gaussian", "eigenstate", "plane-wave", "ground-state", "superposition"];

/// Kinds a superposition component may use.
const COMPONENT_KINDS: &[&str] = &["gaussian", "eigenstate", "plane-wave"];

#[allow(clippy::too_many_arguments)]
fn check_state_fields(
    v: &mut Validator,
    path: &str,
    kind: &str,
    center: &Option<Vec<f64>>,
    sigma: &Option<Vec<f64>>,
    momentum: &Option<Vec<f64>>,
    n: &Option<usize>,
    p: &Option<Vec<f64>>,
    grid: Option<&GridBlock>,
) {
    let ndim = grid.map(|g| g.ndim());
    let check_len = |v: &mut Validator, name: &str, arr: &Option<Vec<f64>>| {
        if let (Some(arr), Some(d)) = (arr, ndim) {
            if arr.len() != d {
                v.push(format!(
                    "`{path}{name}` has {} entries but the grid is {d}-dimensional",
                    arr.len()
                ));
            }
        }
    };
    match kind {
        "gaussian" => {
            if center.is_none() {
                v.push(format!("missing required key `{path}center`"));
            }
            if sigma.is_none() {
                v.push(format!("missing required key `{path}sigma`"));
            }
            check_len(v, "center", center);
            check_len(v, "sigma", sigma);
            check_len(v, "momentum", momentum);
            if let Some(s) = sigma {
                if s.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                    v.push(format!("`{path}sigma` entries must be finite and positive"));
                }
            }
        }
        "eigenstate" => {
            if n.is_none() {
                v.push(format!("missing required key `{path}n`"));
            }
            if let Some(g) = grid {
                if g.ndim() != 1 || g.boundary != "dirichlet" {
                    v.push(format!(
                        "`{path}kind = \"eigenstate\"` requires a 1-dimensional dirichlet grid"
                    ));
                }
            }
        }
        "plane-wave" => {
            if p.is_none() {
                v.push(format!("missing required key `{path}p`"));
            }
            check_len(v, "p", p);
            if let Some(g) = grid {
                if g.boundary != "periodic" {
                    v.push(format!("`{path}kind = \"plane-wave\"` requires a periodic grid"));
                }
            }
        }
        _ => {}
    }
}

fn parse_state(v: &mut Validator, root: &Table, grid: Option<&GridBlock>) -> Option<StateBlock> {
    let t = v.table(root, "initial_state", true)?;
    v.check_keys(
        t,
        "initial_state.",
        &["kind", "center", "sigma", "momentum", "n", "p", "components"],
    );
    let kind = v.require_string(t, "initial_state.", "kind")?;
    if !STATE_KINDS.contains(&kind.as_str()) {
        match nearest(&kind, STATE_KINDS) {
            Some(cand) => v.push(format!(
                "unknown initial state kind \"{kind}\" (did you mean \"{cand}\"?)"
            )),
            None => v.push(format!(
                "unknown initial state kind \"{kind}\"; catalog: {}",
                STATE_KINDS.join(", ")
            )),
        }
        return None;
    }
    let center = v.f64_array(t, "initial_state.", "center");
    let sigma = v.f64_array(t, "initial_state.", "sigma");
    let momentum = v.f64_array(t, "initial_state.", "momentum");
    let n = v.usize(t, "initial_state.", "n");
    let p = v.f64_array(t, "initial_state.", "p");
    check_state_fields(v, "initial_state.", &kind, &center, &sigma, &momentum, &n, &p, grid);
    let mut components = Vec::new();
    if kind == "superposition" {
        match t.get("components") {
            Some(Value::Array(items)) if !items.is_empty() => {
                for (i, item) in items.iter().enumerate() {
                    let path = format!("initial_state.components[{i}].");
                    let Some(ct) = item.as_table() else {
                        v.push(format!("`{path}` must be a table"));
                        continue;
                    };
                    v.check_keys(ct, &path, &["weight", "kind", "center", "sigma", "momentum", "n", "p"]);
                    let weight = match ct.get("weight") {
                        Some(Value::Array(w)) if w.len() == 2 => {
                            let re = w[0].as_float().or(w[0].as_integer().map(|x| x as f64));
                            let im = w[1].as_float().or(w[1].as_integer().map(|x| x as f64));
                            match (re, im) {
                                (Some(re), Some(im)) => Some([re, im]),
                                _ => {
                                    v.push(format!("`{path}weight` must be [re, im] numbers"));
                                    None
                                }
                            }
                        }
                        Some(Value::Float(x)) => Some([*x, 0.0]),
                        Some(Value::Integer(x)) => Some([*x as f64, 0.0]),
                        Some(_) => {
                            v.push(format!("`{path}weight` must be a number or [re, im]"));
                            None
                        }
                        None => {
                            v.push(format!("missing required key `{path}weight`"));
                            None
                        }
                    };
                    let Some(ckind) = v.require_string(ct, &path, "kind") else { continue };
                    if !COMPONENT_KINDS.contains(&ckind.as_str()) {
                        v.push(format!(
                            "`{path}kind` must be gaussian, eigenstate, or plane-wave"
                        ));
                        continue;
                    }
                    let ccenter = v.f64_array(ct, &path, "center");
                    let csigma = v.f64_array(ct, &path, "sigma");
                    let cmomentum = v.f64_array(ct, &path, "momentum");
                    let cn = v.usize(ct, &path, "n");
                    let cp = v.f64_array(ct, &path, "p");
                    check_state_fields(
                        v, &path, &ckind, &ccenter, &csigma, &cmomentum, &cn, &cp, grid,
                    );
                    if let Some(weight) = weight {
                        components.push(ComponentBlock {
                            weight,
                            kind: ckind,
                            center: ccenter,
                            sigma: csigma,
                            momentum: cmomentum,
                            n: cn,
                            p: cp,
                        });
                    }
                }
            }
            Some(Value::Array(_)) | None => {
                v.push("superposition states need a non-empty `initial_state.components` list".into());
            }
            Some(_) => {
                v.push("`initial_state.components` must be an array of tables".into());
            }
        }
    } else if t.contains_key("components") {
        v.push("`initial_state.components` only applies to superposition states".into());
    }
    Some(StateBlock { kind, center, sigma, momentum, n, p, components })
}

fn parse_evolution(v: &mut Validator, root: &Table) -> Option<EvolutionBlock> {
    let t = v.table(root, "evolution", true)?;
    v.check_keys(t, "evolution.", &["method", "dt", "steps", "snapshot_stride"]);
    let method = v.string(t, "evolution.", "method").unwrap_or_else(|| "split-spectral".into());
    if !matches!(method.as_str(), "split-spectral" | "crank-nicolson") {
        v.push(format!(
            "`evolution.method` must be \"split-spectral\" or \"crank-nicolson\", got \"{method}\""
        ));
    }
    let dt = v.require_f64(t, "evolution.", "dt");
    let dt = v.finite_positive(dt, "evolution.dt");
    let steps = v.require_usize(t, "evolution.", "steps");
    let stride = v.usize(t, "evolution.", "snapshot_stride").unwrap_or(1);
    if let Some(steps) = steps {
        if steps == 0 {
            v.push("`evolution.steps` must be at least 1".into());
        } else if stride == 0 || steps % stride != 0 {
            v.push(format!(
                "`evolution.snapshot_stride` must be >= 1 and divide steps (stride {stride}, steps {steps})"
            ));
        }
    }
    Some(EvolutionBlock { method, dt: dt?, steps: steps?, snapshot_stride: stride })
}

fn parse_trajectories(
    v: &mut Validator,
    root: &Table,
    seed_override: Option<u64>,
) -> Option<TrajectoriesBlock> {
    let t = v.table(root, "trajectories", false)?;
    v.check_keys(t, "trajectories.", &["count", "seed", "substeps", "interpolation"]);
    let count = v.require_usize(t, "trajectories.", "count");
    let seed = if t.contains_key("seed") {
        v.u64(t, "trajectories.", "seed")
    } else if seed_override.is_some() {
        seed_override
    } else {
        v.push("seed required: the `[trajectories]` block must set `seed`".into());
        None
    };
    let substeps = v.usize(t, "trajectories.", "substeps").unwrap_or(4);
    if t.contains_key("substeps") && substeps == 0 {
        v.push("`trajectories.substeps` must be at least 1".into());
    }
    let interpolation =
        v.string(t, "trajectories.", "interpolation").unwrap_or_else(|| "cubic".into());
    if !matches!(interpolation.as_str(), "linear" | "cubic") {
        v.push(format!(
            "`trajectories.interpolation` must be \"linear\" or \"cubic\", got \"{interpolation}\""
        ));
    }
    let count = count?;
    if count == 0 {
        v.push("`trajectories.count` must be at least 1".into());
        return None;
    }
    Some(TrajectoriesBlock { count, seed: seed?, substeps: substeps.max(1), interpolation })
}

fn parse_classical(v: &mut Validator, root: &Table, units: &UnitsBlock) -> Option<ClassicalBlock> {
    let t = v.table(root, "classical", false)?;
    v.check_keys(t, "classical.", &["mass", "q0", "p0", "dt", "steps", "variational", "lyapunov"]);
    let mass = match v.f64(t, "classical.", "mass") {
        Some(m) => v.finite_positive(Some(m), "classical.mass")?,
        None => units.mass,
    };
    let q0 = v.require_f64_array(t, "classical.", "q0");
    let p0 = v.require_f64_array(t, "classical.", "p0");
    let dt = v.require_f64(t, "classical.", "dt");
    let dt = v.finite_positive(dt, "classical.dt");
    let steps = v.require_usize(t, "classical.", "steps");
    let variational = v.bool(t, "classical.", "variational").unwrap_or(true);
    let lyapunov = match t.get("lyapunov") {
        Some(Value::Table(lt)) => {
            v.check_keys(lt, "classical.lyapunov.", &["horizon", "renorm_interval", "seed"]);
            let horizon = v.require_f64(lt, "classical.lyapunov.", "horizon");
            let horizon = v.finite_positive(horizon, "classical.lyapunov.horizon");
            let renorm = v.f64(lt, "classical.lyapunov.", "renorm_interval").unwrap_or(1.0);
            let renorm = v.finite_positive(Some(renorm), "classical.lyapunov.renorm_interval");
            let seed = v.u64(lt, "classical.lyapunov.", "seed").unwrap_or(0);
            match (horizon, renorm) {
                (Some(horizon), Some(renorm_interval)) => {
                    Some(LyapunovBlock { horizon, renorm_interval, seed })
                }
                _ => None,
            }
        }
        Some(_) => {
            v.push("`classical.lyapunov` must be a table".into());
            None
        }
        None => None,
    };
    let (q0, p0) = (q0?, p0?);
    if q0.len() != p0.len() || q0.is_empty() || q0.len() > 2 {
        v.push(format!(
            "`classical.q0`/`classical.p0` must both have 1 or 2 entries (got {} and {})",
            q0.len(),
            p0.len()
        ));
        return None;
    }
    let steps = steps?;
    if steps == 0 {
        v.push("`classical.steps` must be at least 1".into());
        return None;
    }
    Some(ClassicalBlock { mass, q0, p0, dt: dt?, steps, variational, lyapunov })
}

fn parse_named_map(
    v: &mut Validator,
    root: &Table,
    key: &'static str,
) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    let known: Vec<&str> = DIAGNOSTIC_NAMES
        .iter()
        .chain(CLASSICAL_DIAGNOSTIC_NAMES)
        .copied()
        .collect();
    if let Some(t) = v.table(root, key, false) {
        for (name, value) in t {
            if !known.contains(&name.as_str()) {
                match nearest(name, &known) {
                    Some(cand) => v.push(format!(
                        "unknown diagnostic `{key}.{name}` (did you mean `{key}.{cand}`?)"
                    )),
                    None => v.push(format!("unknown diagnostic `{key}.{name}`")),
                }
                continue;
            }
            match value {
                Value::Float(x) => {
                    out.insert(name.clone(), *x);
                }
                Value::Integer(x) => {
                    out.insert(name.clone(), *x as f64);
                }
                _ => v.push(format!("`{key}.{name}` must be a number")),
            }
        }
    }
    out
}

/// Parse and validate a scenario config, reporting every problem found.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    parse_config_with_seed(text, None)
}

/// Like [`parse_config`], with a CLI seed override that satisfies a missing
/// `trajectories.seed` and replaces every seeded stream otherwise.
pub fn parse_config_with_seed(
    text: &str,
    seed_override: Option<u64>,
) -> Result<ScenarioConfig, ConfigError> {
    let root: Value = toml::from_str(text)?;
    let root = root.as_table().expect("TOML documents are tables");
    let mut v = Validator::default();
    v.check_keys(
        root,
        "",
        &[
            "name",
            "output",
            "diagnostics",
            "units",
            "grid",
            "potential",
            "initial_state",
            "evolution",
            "trajectories",
            "tolerances",
            "expectations",
            "classical",
        ],
    );

    let name = v.require_string(root, "", "name");
    if let Some(name) = &name {
        let ok = !name.is_empty()
            && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
        if !ok {
            v.push(format!(
                "`name` must be non-empty and use only letters, digits, `-`, `_`; got \"{name}\""
            ));
        }
    }
    let output = v.string(root, "", "output");
    let units = parse_units(&mut v, root);
    let grid = parse_grid(&mut v, root);
    let potential = parse_potential(&mut v, root, grid.as_ref());
    let initial_state = parse_state(&mut v, root, grid.as_ref());
    let evolution = parse_evolution(&mut v, root);
    let trajectories = parse_trajectories(&mut v, root, seed_override);
    let tolerances = parse_named_map(&mut v, root, "tolerances");
    let expectations = parse_named_map(&mut v, root, "expectations");
    let classical = parse_classical(&mut v, root, &units);

    let mut diagnostics = Vec::new();
    match root.get("diagnostics") {
        Some(Value::Array(items)) => {
            for item in items {
                match item {
                    Value::String(s) if DIAGNOSTIC_NAMES.contains(&s.as_str()) => {
                        if !diagnostics.contains(s) {
                            diagnostics.push(s.clone());
                        }
                    }
                    Value::String(s) => match nearest(s, DIAGNOSTIC_NAMES) {
                        Some(cand) => v.push(format!(
                            "unknown diagnostic \"{s}\" (did you mean \"{cand}\"?)"
                        )),
                        None => v.push(format!(
                            "unknown diagnostic \"{s}\"; catalog: {}",
                            DIAGNOSTIC_NAMES.join(", ")
                        )),
                    },
                    _ => v.push("`diagnostics` must be an array of strings".into()),
                }
            }
        }
        Some(_) => v.push("`diagnostics` must be an array of strings".into()),
        None => {}
    }
    for needs_traj in ["equivariance", "non-crossing"] {
        if diagnostics.iter().any(|d| d == needs_traj) && trajectories.is_none() {
            v.push(format!(
                "diagnostic \"{needs_traj}\" requires a `[trajectories]` block"
            ));
        }
    }
    if let Some(g) = &grid {
        if g.ndim() != 1 {
            for needs_1d in
                ["non-crossing", "uncertainty-product", "uncertainty-decomposition"]
            {
                if diagnostics.iter().any(|d| d == needs_1d) {
                    v.push(format!("diagnostic \"{needs_1d}\" requires a 1-dimensional grid"));
                }
            }
        }
    }
    for (name, tol) in &tolerances {
        if !(tol.is_finite() && *tol >= 0.0) {
            v.push(format!("`tolerances.{name}` must be finite and non-negative, got {tol}"));
        }
    }

    if !v.errors.is_empty() {
        return Err(ConfigError::Invalid(v.errors));
    }
    let mut cfg = ScenarioConfig {
        name: name.expect("validated"),
        output,
        diagnostics,
        units,
        grid: grid.expect("validated"),
        potential: potential.expect("validated"),
        initial_state: initial_state.expect("validated"),
        evolution: evolution.expect("validated"),
        trajectories,
        tolerances,
        expectations,
        classical,
    };
    if let Some(seed) = seed_override {
        cfg.apply_seed_override(seed);
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        name = "free_gaussian"
        [grid]
        lower = [-8.0]
        upper = [8.0]
        points = [256]
        [potential]
        kind = "free"
        [initial_state]
        kind = "gaussian"
        center = [0.0]
        sigma = [1.0]
        [evolution]
        dt = 0.005
        steps = 200
    "#;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.name, "free_gaussian");
        assert_eq!(cfg.units, UnitsBlock { hbar: 1.0, mass: 1.0 });
        assert_eq!(cfg.grid.boundary, "periodic");
        assert_eq!(cfg.evolution.method, "split-spectral");
        assert_eq!(cfg.evolution.snapshot_stride, 1);
        assert!(cfg.trajectories.is_none());
        assert!(cfg.diagnostics.is_empty());
        let echo = canonical_toml(&cfg);
        assert!(echo.contains("hbar = 1.0"), "echo:\n{echo}");
        assert!(echo.contains("boundary = \"periodic\""));
        assert!(echo.contains("method = \"split-spectral\""));
    }

    #[test]
    fn hash_is_canonical_not_textual() {
        let cfg = parse_config(MINIMAL).unwrap();
        let hash = config_hash(&cfg);
        assert_eq!(hash.len(), 12);
        // Reparsing the canonical echo reproduces the config and its hash.
        let cfg2 = parse_config(&canonical_toml(&cfg)).unwrap();
        assert_eq!(cfg, cfg2);
        assert_eq!(config_hash(&cfg2), hash);
        // Whitespace and key order do not matter; values do.
        let reordered = MINIMAL.replace("dt = 0.005\n        steps = 200", "steps = 200\n        dt = 0.005");
        assert_eq!(config_hash(&parse_config(&reordered).unwrap()), hash);
        let changed = MINIMAL.replace("dt = 0.005", "dt = 0.01");
        assert_ne!(config_hash(&parse_config(&changed).unwrap()), hash);
    }

    #[test]
    fn unknown_key_suggests_nearest() {
        let text = MINIMAL.replace("[potential]", "[potental]");
        let err = parse_config(&text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("unknown key `potental`"), "{msg}");
        assert!(msg.contains("did you mean `potential`?"), "{msg}");
        // The missing block is reported in the same pass.
        assert!(msg.contains("missing required block `[potential]`"), "{msg}");
    }

    #[test]
    fn trajectories_require_seed() {
        let text = format!("{MINIMAL}\n[trajectories]\ncount = 100\n");
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("seed required"), "{err}");
    }

    #[test]
    fn all_errors_are_collected() {
        let text = r#"
            name = "broken"
            [grid]
            lower = [-8.0]
            upper = [8.0]
            points = [256]
            boundary = "torus"
            [potential]
            kind = "harmonic"
            [initial_state]
            kind = "gaussian"
            sigma = [-1.0]
            [evolution]
            dt = -0.005
            steps = 200
            snapshot_stride = 3
        "#;
        let err = parse_config(text).unwrap_err();
        let msg = err.to_string();
        for needle in [
            "grid.boundary",
            "potential.omega",
            "initial_state.center",
            "initial_state.sigma",
            "evolution.dt",
            "snapshot_stride",
        ] {
            assert!(msg.contains(needle), "missing `{needle}` in:\n{msg}");
        }
    }

    #[test]
    fn diagnostics_are_validated() {
        let text = format!("diagnostics = [\"continutiy\"]\n{MINIMAL}");
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("did you mean \"continuity\"?"), "{err}");
        let text = format!("diagnostics = [\"equivariance\"]\n{MINIMAL}");
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("requires a `[trajectories]` block"), "{err}");
    }

    #[test]
    fn state_grid_compatibility() {
        let text = MINIMAL.replace(
            "kind = \"gaussian\"\n        center = [0.0]\n        sigma = [1.0]",
            "kind = \"eigenstate\"\n        n = 1",
        );
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("dirichlet"), "{err}");
        let text = MINIMAL.replace(
            "kind = \"gaussian\"\n        center = [0.0]\n        sigma = [1.0]",
            "kind = \"plane-wave\"\np = [2.0, 0.0]",
        );
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("initial_state.p"), "{err}");
    }

    #[test]
    fn superposition_and_classical_blocks_parse() {
        let text = r#"
            name = "pair"
            diagnostics = ["norm-drift", "chetaev"]
            [tolerances]
            chetaev = 1.0e-3
            [expectations]
            chetaev = 0.2
            [grid]
            lower = [-10.0]
            upper = [10.0]
            points = [512]
            boundary = "periodic"
            [potential]
            kind = "harmonic"
            omega = 1.0
            [initial_state]
            kind = "superposition"
            [[initial_state.components]]
            weight = [0.7071067811865476, 0.0]
            kind = "gaussian"
            center = [-2.0]
            sigma = [1.0]
            [[initial_state.components]]
            weight = 0.7071067811865476
            kind = "gaussian"
            center = [2.0]
            sigma = [1.0]
            [evolution]
            method = "split-spectral"
            dt = 0.01
            steps = 100
            snapshot_stride = 2
            [trajectories]
            count = 500
            seed = 42
            [classical]
            q0 = [1.0]
            p0 = [0.0]
            dt = 0.01
            steps = 628
            [classical.lyapunov]
            horizon = 100.0
            renorm_interval = 1.0
            seed = 7
        "#;
        let mut cfg = parse_config(text).unwrap();
        assert_eq!(cfg.initial_state.components.len(), 2);
        assert_eq!(cfg.initial_state.components[1].weight, [0.7071067811865476, 0.0]);
        assert_eq!(cfg.tolerances["chetaev"], 1e-3);
        assert_eq!(cfg.expectations["chetaev"], 0.2);
        let classical = cfg.classical.clone().unwrap();
        assert_eq!(classical.mass, 1.0);
        assert!(classical.variational);
        assert_eq!(classical.lyapunov.unwrap().seed, 7);
        // Seed override reaches every stream.
        cfg.apply_seed_override(99);
        assert_eq!(cfg.trajectories.as_ref().unwrap().seed, 99);
        assert_eq!(cfg.classical.unwrap().lyapunov.unwrap().seed, 99);
        // Canonical echo round-trips.
        let cfg = parse_config(text).unwrap();
        let echo = canonical_toml(&cfg);
        let back = parse_config(&echo).unwrap();
        assert_eq!(cfg, back);
    }
}
