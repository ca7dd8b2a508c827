//! Experiment configuration: one JSON object per run, tagged by `kind`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{Map, Value};

use crate::averaging::{Domain, Substitution, WeightFamily, WeightScheme};
use crate::dual_system::{DualState, GroupAlgebraElement, L2Vector, TermRecord};
use crate::free_group::Alphabet;
use crate::joinings::{ClassicalSystem, Coupling, CouplingNet, FactorSpec};

use super::ConfigError;

/// A real given as a JSON number or as a string such as `"1/3"` or `"0.25"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Real(pub f64);

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Real(v)),
            Raw::Text(t) => parse_real(&t).map(Real).map_err(serde::de::Error::custom),
        }
    }
}

fn parse_real(text: &str) -> Result<f64, String> {
    let t = text.trim();
    let bad = || format!("`{text}` is not a number or fraction");
    let v = match t.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| bad())?;
            let b: f64 = b.trim().parse().map_err(|_| bad())?;
            if b == 0.0 {
                return Err(format!("zero denominator in `{text}`"));
            }
            a / b
        }
        None => t.parse().map_err(|_| bad())?,
    };
    if !v.is_finite() {
        return Err(bad());
    }
    Ok(v)
}

/// A complex entry: a real, or `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cx(pub Complex64);

impl<'de> Deserialize<'de> for Cx {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Re(Real),
            Pair([Real; 2]),
        }
        Ok(Cx(match Raw::deserialize(d)? {
            Raw::Re(r) => Complex64::new(r.0, 0.0),
            Raw::Pair([re, im]) => Complex64::new(re.0, im.0),
        }))
    }
}

pub fn real_matrix(rows: &[Vec<Real>]) -> Result<DMatrix<f64>, ConfigError> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
        return Err(ConfigError::new("matrices must be non-empty and rectangular"));
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j].0))
}

pub fn complex_matrix(rows: &[Vec<Cx>]) -> Result<DMatrix<Complex64>, ConfigError> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
        return Err(ConfigError::new("matrices must be non-empty and rectangular"));
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j].0))
}

pub fn reals(v: &[Real]) -> Vec<f64> {
    v.iter().map(|r| r.0).collect()
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainConfig {
    Discrete,
    Continuous,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum SchemeConfig {
    Uniform {
        #[serde(default)]
        domain: Option<DomainConfig>,
    },
    Power {
        s: Real,
        #[serde(default)]
        domain: Option<DomainConfig>,
    },
    Log {
        #[serde(default)]
        domain: Option<DomainConfig>,
    },
    Voronoi {
        s: Real,
        #[serde(default)]
        domain: Option<DomainConfig>,
    },
    Custom {
        weights: Vec<Real>,
    },
}

impl SchemeConfig {
    /// Builds the scheme, using `default` when no domain is given.
    pub fn build(&self, default: Domain) -> Result<WeightScheme, ConfigError> {
        let dom = |d: &Option<DomainConfig>| match d {
            None => default,
            Some(DomainConfig::Discrete) => Domain::Discrete,
            Some(DomainConfig::Continuous) => Domain::Continuous,
        };
        let (domain, family) = match self {
            SchemeConfig::Uniform { domain } => (dom(domain), WeightFamily::Uniform),
            SchemeConfig::Power { s, domain } => (dom(domain), WeightFamily::Power { s: s.0 }),
            SchemeConfig::Log { domain } => (dom(domain), WeightFamily::Log),
            SchemeConfig::Voronoi { s, domain } => (dom(domain), WeightFamily::Voronoi { s: s.0 }),
            SchemeConfig::Custom { weights } => (Domain::Discrete, WeightFamily::Custom { weights: reals(weights) }),
        };
        Ok(WeightScheme::new(domain, family)?)
    }
}

pub fn uniform() -> SchemeConfig {
    SchemeConfig::Uniform { domain: None }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum SubstitutionConfig {
    /// Uniform window `n` against `Power(s)` on `[0, n^{1/(s+1)}]`.
    Power { s: Real, n: Real },
    /// Uniform window `n` against `Log` on `[1, eⁿ]`.
    Exp { n: Real },
}

impl SubstitutionConfig {
    pub fn build(&self) -> Substitution {
        match self {
            SubstitutionConfig::Power { s, .. } => Substitution::Power { s: s.0 },
            SubstitutionConfig::Exp { .. } => Substitution::Exp,
        }
    }

    pub fn window(&self) -> f64 {
        match self {
            SubstitutionConfig::Power { n, .. } | SubstitutionConfig::Exp { n } => n.0,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureComponent {
    pub weight: Real,
    pub amplitudes: Vec<TermRecord>,
}

/// States on the group algebra. Vectors are normalized on load.
#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum StateConfig {
    Trace,
    Vector { amplitudes: Vec<TermRecord> },
    Mixture { components: Vec<MixtureComponent> },
}

fn unit_vector(al: &Alphabet, records: &[TermRecord]) -> Result<L2Vector, ConfigError> {
    Ok(L2Vector::from_records(al, records)?.normalized()?)
}

impl StateConfig {
    pub fn build(&self, al: &Alphabet) -> Result<DualState, ConfigError> {
        Ok(match self {
            StateConfig::Trace => DualState::Trace,
            StateConfig::Vector { amplitudes } => DualState::vector(unit_vector(al, amplitudes)?)?,
            StateConfig::Mixture { components } => {
                let total: f64 = components.iter().map(|c| c.weight.0).sum();
                if !(total > 0.0) {
                    return Err(ConfigError::new("mixture weights must have a positive sum"));
                }
                let parts = components
                    .iter()
                    .map(|c| Ok((c.weight.0 / total, unit_vector(al, &c.amplitudes)?)))
                    .collect::<Result<Vec<_>, ConfigError>>()?;
                DualState::mixture(parts)?
            }
        })
    }
}

pub fn element(al: &Alphabet, records: &[TermRecord]) -> Result<GroupAlgebraElement, ConfigError> {
    Ok(GroupAlgebraElement::from_records(al, records)?)
}

/// Random finitely supported vector states drawn from the run seed.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomStates {
    pub count: usize,
    pub support: usize,
    pub max_len: u32,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeanErgodic {
    /// Hermitian `H₀` of `U_t = e^{itH₀}`.
    #[serde(default)]
    pub generator: Option<Vec<Vec<Cx>>>,
    /// A contraction `U` iterated on `ℕ`.
    #[serde(default)]
    pub step: Option<Vec<Vec<Cx>>>,
    pub x: Vec<Cx>,
    pub schemes: Vec<SchemeConfig>,
    pub windows: Vec<Real>,
    pub tol: Real,
    #[serde(default)]
    pub substitutions: Vec<SubstitutionConfig>,
    #[serde(default)]
    pub substitution_tol: Option<Real>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FolnerConfig {
    pub schemes: Vec<SchemeConfig>,
    pub h: Real,
    pub windows: Vec<Real>,
    /// Required ratio between consecutive defects; defects must only decrease when absent.
    #[serde(default)]
    pub ratio: Option<Real>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixingDecay {
    pub alphabet: Alphabet,
    pub state: StateConfig,
    pub operator: Vec<TermRecord>,
    pub n_max: u32,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Multitime {
    pub alphabet: Alphabet,
    pub state: StateConfig,
    pub operators: Vec<Vec<TermRecord>>,
    pub times: Vec<i64>,
    #[serde(default)]
    pub permutation: Option<Vec<usize>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapSearch {
    pub alphabet: Alphabet,
    #[serde(default)]
    pub states: Vec<StateConfig>,
    #[serde(default)]
    pub random_states: Option<RandomStates>,
    pub operators: Vec<Vec<TermRecord>>,
    #[serde(default)]
    pub permutations: Vec<Vec<usize>>,
    #[serde(default)]
    pub random_permutations: usize,
    pub window: u32,
    pub gap_max: u32,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Furstenberg {
    pub alphabet: Alphabet,
    /// `c` in `a = c*c`.
    pub factor: Vec<TermRecord>,
    pub k: usize,
    pub n: u32,
    #[serde(default = "yes")]
    pub absolute: bool,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bergelson {
    pub alphabet: Alphabet,
    pub operators: [Vec<TermRecord>; 4],
    #[serde(default)]
    pub p: i64,
    #[serde(default)]
    pub q: i64,
    pub n: u32,
    #[serde(default)]
    pub tol: Option<Real>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Section4 {
    pub p: Real,
    #[serde(default = "default_samples")]
    pub samples: usize,
    pub n: usize,
    pub tol: Real,
    #[serde(default = "uniform")]
    pub scheme: SchemeConfig,
}

fn default_samples() -> usize {
    20
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Section4Projection {
    #[serde(rename = "E_L")]
    El,
    #[serde(rename = "E_fix")]
    Efix,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Section4StateFamily {
    Probability,
    Unital,
    Basis,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum SystemConfig {
    Section4 {
        p: Real,
        projection: Section4Projection,
        states: Section4StateFamily,
        #[serde(default = "default_samples")]
        samples: usize,
    },
    Explicit {
        alpha: Vec<Vec<Real>>,
        projection: Vec<Vec<Real>>,
        states: Vec<Vec<Cx>>,
        #[serde(default)]
        markov: bool,
    },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TensorCheck {
    Ergodicity,
    WeakMixing,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tensor {
    pub left: SystemConfig,
    pub right: SystemConfig,
    pub check: TensorCheck,
    pub n: usize,
    pub tol: Real,
    #[serde(default = "uniform")]
    pub scheme: SchemeConfig,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thm215 {
    pub alpha: Vec<Vec<Real>>,
    pub n: usize,
    pub tol: Real,
    #[serde(default = "uniform")]
    pub scheme: SchemeConfig,
    /// Closed-form limit to compare against, entrywise.
    #[serde(default)]
    pub expected: Option<Vec<Vec<Real>>>,
    #[serde(default)]
    pub expected_tol: Option<Real>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub sigma: Vec<usize>,
    #[serde(default)]
    pub mu: Option<Vec<Real>>,
}

impl SystemSpec {
    pub fn build(&self) -> Result<ClassicalSystem, ConfigError> {
        let n = self.sigma.len();
        let mu = match &self.mu {
            Some(m) => reals(m),
            None => vec![1.0 / n.max(1) as f64; n],
        };
        Ok(ClassicalSystem::new(self.sigma.clone(), mu)?)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorConfig {
    pub generators: Vec<Vec<Vec<Real>>>,
    /// `ψ` on the cells, in row-major order of first appearance.
    #[serde(default)]
    pub masses: Option<Vec<Real>>,
    /// Alternatively, a joining whose cell masses define `ψ`.
    #[serde(default)]
    pub reference: Option<Vec<Vec<Real>>>,
}

impl FactorConfig {
    pub fn build(&self, a: &ClassicalSystem, b: &ClassicalSystem) -> Result<FactorSpec, ConfigError> {
        let gens = self.generators.iter().map(|g| real_matrix(g)).collect::<Result<Vec<_>, _>>()?;
        Ok(match (&self.masses, &self.reference) {
            (Some(m), None) => FactorSpec::new(a, b, gens, reals(m))?,
            (None, Some(r)) => FactorSpec::from_reference(a, b, gens, &real_matrix(r)?)?,
            _ => return Err(ConfigError::new("factor needs exactly one of `masses` and `reference`")),
        })
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum NetConfig {
    Constant(Vec<Vec<Real>>),
    Cycled(Vec<Vec<Vec<Real>>>),
}

impl NetConfig {
    pub fn build(&self) -> Result<CouplingNet, ConfigError> {
        Ok(match self {
            NetConfig::Constant(m) => CouplingNet::Constant(real_matrix(m)?),
            NetConfig::Cycled(ms) => {
                CouplingNet::Cycled(ms.iter().map(|m| real_matrix(m)).collect::<Result<Vec<Coupling>, _>>()?)
            }
        })
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Joinings {
    pub a: SystemSpec,
    pub b: SystemSpec,
    #[serde(default)]
    pub factor: Option<FactorConfig>,
    #[serde(default)]
    pub coupling: Option<NetConfig>,
    #[serde(default)]
    pub schemes: Vec<SchemeConfig>,
    #[serde(default)]
    pub windows: Vec<usize>,
    #[serde(default)]
    pub expect_disjoint: Option<bool>,
    /// Largest accepted distance of a coupling average from the unique joining.
    #[serde(default)]
    pub tol: Option<Real>,
}

#[derive(Clone, Debug)]
pub enum Experiment {
    MeanErgodic(MeanErgodic),
    FolnerDefect(FolnerConfig),
    MixingDecay(MixingDecay),
    Multitime(Multitime),
    GapSearch(GapSearch),
    Furstenberg(Furstenberg),
    Bergelson(Bergelson),
    Section4(Section4),
    Tensor(Tensor),
    Thm215(Thm215),
    Joinings(Joinings),
}

/// Kind name, required fields, optional fields, one-line description.
pub const KINDS: [(&str, &[&str], &[&str], &str); 11] = [
    (
        "mean-ergodic",
        &["x", "schemes", "windows", "tol", "generator | step"],
        &["substitutions", "substitution_tol"],
        "weighted means of a matrix flow against the fixed-space projection",
    ),
    ("folner-defect", &["schemes", "h", "windows"], &["ratio"], "Folner defects of weight families over growing windows"),
    ("mixing-decay", &["alphabet", "state", "operator", "n_max"], &[], "phi(alpha^n(a - Ea)) on a dual system"),
    ("multitime", &["alphabet", "state", "operators", "times"], &["permutation"], "one multitime correlation and its E-image difference"),
    (
        "gap-search",
        &["alphabet", "operators", "window", "gap_max", "states | random_states"],
        &["permutations", "random_permutations"],
        "gap thresholds for higher-order mixing",
    ),
    ("furstenberg", &["alphabet", "factor", "k", "n"], &["absolute"], "Furstenberg averages of a = c*c under the trace"),
    ("bergelson", &["alphabet", "operators", "n"], &["p", "q", "tol"], "double averages against their E-images"),
    ("section4", &["p", "n", "tol"], &["samples", "scheme"], "the four-state example: spectrum and weak-mixing checks"),
    ("tensor", &["left", "right", "check", "n", "tol"], &["scheme"], "ergodicity or weak mixing of a tensor product"),
    ("thm215", &["alpha", "n", "tol"], &["scheme", "expected", "expected_tol"], "weighted limit of powers of a Markov matrix"),
    (
        "joinings",
        &["a", "b"],
        &["factor", "coupling", "schemes", "windows", "expect_disjoint", "tol"],
        "relative disjointness and averaged couplings of finite rotations",
    ),
];

pub fn kind_names() -> Vec<&'static str> {
    KINDS.iter().map(|k| k.0).collect()
}

/// A parsed config: the common envelope plus the experiment body.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub kind: String,
    pub name: String,
    pub seed: u64,
    /// The config exactly as read, echoed into the summary.
    pub raw: Value,
    pub experiment: Experiment,
}

fn body<T: DeserializeOwned>(kind: &str, map: Map<String, Value>) -> Result<T, ConfigError> {
    serde_json::from_value(Value::Object(map)).map_err(|e| ConfigError::new(format!("{kind}: {e}")))
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let raw: Value = serde_json::from_str(text).map_err(|e| ConfigError::new(format!("invalid JSON: {e}")))?;
    let Value::Object(mut map) = raw.clone() else {
        return Err(ConfigError::new("config must be a JSON object"));
    };
    let kind = match map.remove("kind") {
        Some(Value::String(k)) => k,
        Some(_) => return Err(ConfigError::new("`kind` must be a string")),
        None => return Err(ConfigError::new(format!("missing `kind`; valid kinds: {}", kind_names().join(", ")))),
    };
    if !kind_names().contains(&kind.as_str()) {
        return Err(ConfigError::new(format!("unknown kind `{kind}`; valid kinds: {}", kind_names().join(", "))));
    }
    let seed = match map.remove("seed") {
        Some(v) => v.as_u64().ok_or_else(|| ConfigError::new("`seed` must be a non-negative integer"))?,
        None => return Err(ConfigError::new("missing mandatory field `seed`")),
    };
    let name = match map.remove("name") {
        None => kind.clone(),
        Some(Value::String(n)) if valid_name(&n) => n,
        Some(_) => return Err(ConfigError::new("`name` must be a non-empty string of letters, digits, `-`, `_` or `.`")),
    };
    let k = kind.as_str();
    let experiment = match k {
        "mean-ergodic" => Experiment::MeanErgodic(body(k, map)?),
        "folner-defect" => Experiment::FolnerDefect(body(k, map)?),
        "mixing-decay" => Experiment::MixingDecay(body(k, map)?),
        "multitime" => Experiment::Multitime(body(k, map)?),
        "gap-search" => Experiment::GapSearch(body(k, map)?),
        "furstenberg" => Experiment::Furstenberg(body(k, map)?),
        "bergelson" => Experiment::Bergelson(body(k, map)?),
        "section4" => Experiment::Section4(body(k, map)?),
        "tensor" => Experiment::Tensor(body(k, map)?),
        "thm215" => Experiment::Thm215(body(k, map)?),
        "joinings" => Experiment::Joinings(body(k, map)?),
        _ => unreachable!("kind checked above"),
    };
    Ok(ExperimentConfig { kind, name, seed, raw, experiment })
}

fn valid_name(n: &str) -> bool {
    !n.is_empty()
        && !n.starts_with('.')
        && n.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
}

pub fn complex_vector(v: &[Cx]) -> DVector<Complex64> {
    DVector::from_iterator(v.len(), v.iter().map(|c| c.0))
}
