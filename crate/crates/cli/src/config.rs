//! Run configuration: one problem per JSON file.

use ifconv_core::classify::ClassifyError;
use ifconv_core::coeffspec::{parse_expr, ParseError, Problem, SpaceError, StateSpace, Violation};
use ifconv_core::quad::{ToleranceError, Tolerances};
use ifconv_core::simkit::{SimError, SimParams, TrendRule};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::path::PathBuf;

/// A real that may be infinite, written as a JSON number or one of the
/// strings `"inf"`, `"+inf"`, `"-inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtReal(pub f64);

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ifconv_core::ser::ext_real(&self.0, s)
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = ExtReal;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or \"inf\"/\"-inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<ExtReal, E> {
                Ok(ExtReal(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<ExtReal, E> {
                Ok(ExtReal(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<ExtReal, E> {
                Ok(ExtReal(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<ExtReal, E> {
                match v {
                    "inf" | "+inf" => Ok(ExtReal(f64::INFINITY)),
                    "-inf" => Ok(ExtReal(f64::NEG_INFINITY)),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Required by `classify` and `verify`; `identities` ignores it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<ProblemConfig>,
    #[serde(default)]
    pub tolerances: TolerancesConfig,
    #[serde(default)]
    pub simulation: SimulationConfig,
    #[serde(default)]
    pub identities: IdentitiesConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub l: ExtReal,
    pub r: ExtReal,
    pub x0: f64,
    pub mu: String,
    pub sigma: String,
    pub f: String,
    #[serde(default)]
    pub declared_singularities: Vec<f64>,
    #[serde(default)]
    pub f_ae_zero: bool,
    /// Reference point of the scale function; `x0` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_point: Option<f64>,
    #[serde(default = "default_probes")]
    pub probes: usize,
}

fn default_probes() -> usize {
    256
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TolerancesConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_depth: usize,
    pub shrink_ratio: f64,
    pub decision_window: usize,
}

impl Default for TolerancesConfig {
    fn default() -> Self {
        let t = Tolerances::default();
        TolerancesConfig {
            rel_tol: t.rel_tol,
            abs_tol: t.abs_tol,
            max_depth: t.max_depth,
            shrink_ratio: t.shrink_ratio,
            decision_window: t.decision_window,
        }
    }
}

impl TolerancesConfig {
    pub fn to_tolerances(self) -> Result<Tolerances, ToleranceError> {
        let t = Tolerances {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_depth: self.max_depth,
            shrink_ratio: self.shrink_ratio,
            decision_window: self.decision_window,
        };
        t.validate()?;
        Ok(t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub dt: f64,
    pub horizon: f64,
    pub n_paths: usize,
    pub master_seed: u64,
    pub dyadic_count: usize,
    /// Local-time bandwidth for the identity checks; `2√dt` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bandwidth: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_step: Option<f64>,
    pub trend_window: usize,
    pub converging_max: f64,
    pub diverging_min: f64,
    pub agreement_threshold: f64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        let p = SimParams::default();
        SimulationConfig {
            dt: p.dt,
            horizon: p.horizon,
            n_paths: p.n_paths,
            master_seed: p.master_seed,
            dyadic_count: p.dyadic_count,
            bandwidth: None,
            max_step: p.max_step,
            trend_window: p.trend.window,
            converging_max: p.trend.converging_max,
            diverging_min: p.trend.diverging_min,
            agreement_threshold: p.agreement_threshold,
        }
    }
}

impl SimulationConfig {
    pub fn trend_rule(&self) -> TrendRule {
        TrendRule { window: self.trend_window, converging_max: self.converging_max, diverging_min: self.diverging_min }
    }

    pub fn sim_params(&self) -> SimParams {
        SimParams {
            dt: self.dt,
            horizon: self.horizon,
            n_paths: self.n_paths,
            master_seed: self.master_seed,
            max_step: self.max_step,
            dyadic_count: self.dyadic_count,
            trend: self.trend_rule(),
            agreement_threshold: self.agreement_threshold,
        }
    }
}

/// Settings of the identity checks. Per-check path counts default to
/// fixed multiples of `n_paths`: Cherny `n/4`, Fubini `5n/2`, occupation
/// `n/20`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdentitiesConfig {
    pub r: f64,
    pub x0: f64,
    pub u: f64,
    pub n_paths: usize,
    pub dt: f64,
    pub alpha: f64,
    pub cherny_p: Vec<f64>,
    pub cherny_eps: f64,
    pub cherny_dt: f64,
    pub cherny_levels: usize,
    pub cherny_window: usize,
    pub cherny_threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cherny_n_paths: Option<usize>,
    pub fubini_f: Vec<String>,
    pub fubini_dt: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fubini_n_paths: Option<usize>,
    pub occupation_f: String,
    pub occupation_low: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub occupation_n_paths: Option<usize>,
}

impl Default for IdentitiesConfig {
    fn default() -> Self {
        IdentitiesConfig {
            r: 1.0,
            x0: 0.0,
            u: 0.5,
            n_paths: 2000,
            dt: 1e-4,
            alpha: 0.01,
            cherny_p: vec![1.5, 2.5],
            cherny_eps: 1.0,
            cherny_dt: 1e-3,
            cherny_levels: 30,
            cherny_window: 28,
            cherny_threshold: 0.9,
            cherny_n_paths: None,
            fubini_f: vec!["1".into(), "x".into()],
            fubini_dt: 1e-3,
            fubini_n_paths: None,
            occupation_f: "exp(-x^2)".into(),
            occupation_low: -6.0,
            occupation_n_paths: None,
        }
    }
}

impl IdentitiesConfig {
    /// Fills the per-check path counts from `n_paths`.
    pub fn resolved(mut self) -> Self {
        let n = self.n_paths;
        self.cherny_n_paths.get_or_insert((n / 4).max(1));
        self.fubini_n_paths.get_or_insert((5 * n / 2).max(1));
        self.occupation_n_paths.get_or_insert((n / 20).max(1));
        self
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
    /// Number of `verify` paths to dump as CSV.
    pub dump_paths: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dump_dir: Option<PathBuf>,
}

#[derive(Debug)]
pub enum ConfigError {
    Io { path: PathBuf, message: String },
    Json { path: String, line: usize, column: usize, message: String },
    Expr { field: &'static str, error: ParseError },
    Space(SpaceError),
    Tolerances(ToleranceError),
    Invalid { field: &'static str, message: String },
    Violations(Vec<Violation>),
    Reference(ClassifyError),
    Simulation(SimError),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match self {
            ConfigError::Io { path, message } => write!(f, "cannot read {}: {message}", path.display()),
            ConfigError::Json { path, line, column, message } => {
                write!(f, "config error at `{path}` (line {line}, column {column}): {message}")
            }
            ConfigError::Expr { field, error } => write!(f, "{field}: {error}"),
            ConfigError::Space(e) => write!(f, "problem: {e}"),
            ConfigError::Tolerances(e) => write!(f, "tolerances: {e}"),
            ConfigError::Invalid { field, message } => write!(f, "{field}: {message}"),
            ConfigError::Violations(v) => {
                write!(f, "problem fails validation:")?;
                for x in v {
                    write!(f, " {:?} at x={}", x.condition, x.x)?;
                }
                Ok(())
            }
            ConfigError::Reference(e) => write!(f, "problem.reference_point: {e}"),
            ConfigError::Simulation(e) => write!(f, "simulation: {e}"),
        }
    }
}

impl ConfigError {
    pub fn kind(&self) -> &'static str {
        match self {
            ConfigError::Io { .. } => "io",
            ConfigError::Json { .. } => "config_syntax",
            ConfigError::Expr { .. } => "expression",
            ConfigError::Space(_) => "state_space",
            ConfigError::Tolerances(_) => "tolerances",
            ConfigError::Invalid { .. } => "invalid_value",
            ConfigError::Violations(_) => "validation",
            ConfigError::Reference(_) => "reference_point",
            ConfigError::Simulation(_) => "simulation",
        }
    }
}

/// Parses a config, reporting the failing field path with line and column.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        ConfigError::Json { path, line: inner.line(), column: inner.column(), message: inner.to_string() }
    })
}

pub fn read_config(path: &std::path::Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Io { path: path.to_path_buf(), message: e.to_string() })?;
    parse_config(&text)
}

impl ProblemConfig {
    pub fn to_problem(&self) -> Result<Problem, ConfigError> {
        let expr = |field: &'static str, text: &str| parse_expr(text).map_err(|error| ConfigError::Expr { field, error });
        let space = StateSpace::new(self.l.0, self.r.0, self.x0).map_err(ConfigError::Space)?;
        let mut p = Problem::new(space, expr("problem.mu", &self.mu)?, expr("problem.sigma", &self.sigma)?, expr("problem.f", &self.f)?)
            .with_singularities(self.declared_singularities.clone());
        p.f_ae_zero = self.f_ae_zero;
        if self.probes < 16 {
            return Err(ConfigError::Invalid { field: "problem.probes", message: "at least 16 probes are needed".into() });
        }
        Ok(p)
    }
}
