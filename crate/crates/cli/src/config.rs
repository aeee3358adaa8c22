//! Experiment configuration files.
//!
//! Configs are TOML documents written with dotted keys, one setting per
//! line:
//!
//! ```toml
//! problem.kind = "kelly"
//! problem.returns = [[2.0, 1.0], [1.0, 2.0]]
//! problem.probs = [0.5, 0.5]
//! map.kind = "entropic"
//! policy.kind = "level"
//! policy.delta1 = 0.1
//! policy.budget = 20.0
//! run.max_iterations = 100000
//! run.certify_every = 1
//! output.prefix = "out/kelly"
//! ```
//!
//! Unknown keys are rejected, and every policy parameter constraint is
//! checked at parse time.

use std::path::{Path, PathBuf};

use mirror_polyak::{
    AdaptiveParams, LevelParams, MirrorMap, Objective, Policy, ZERO_GRAD_TOL,
};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub map: MapSpec,
    #[serde(default)]
    pub policy: PolicySpec,
    #[serde(default)]
    pub run: RunSpec,
    pub output: OutputSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProblemSpec {
    /// Rows are return vectors; `probs` defaults to uniform weights.
    Kelly {
        returns: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        probs: Option<Vec<f64>>,
    },
    Linear { cost: Vec<f64> },
    PiecewiseLinear { anchors: Vec<Vec<f64>>, weights: Vec<f64> },
    /// An instance file holding one of the inline problem kinds; relative
    /// paths resolve against the config file's directory.
    File { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapChoice {
    Euclidean,
    EuclideanSimplex,
    Entropic,
}

impl MapChoice {
    pub fn mirror_map(self) -> MirrorMap {
        match self {
            MapChoice::Euclidean => MirrorMap::euclidean(),
            MapChoice::EuclideanSimplex => MirrorMap::euclidean_simplex(),
            MapChoice::Entropic => MirrorMap::entropic(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    pub kind: MapChoice,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PolicySpec {
    /// Needs the optimal value; taken from the reference oracle when absent.
    Classic {
        #[serde(default = "one")]
        c: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        f_star: Option<f64>,
    },
    Adaptive {
        #[serde(default = "adaptive_defaults::delta1")]
        delta1: f64,
        #[serde(default = "adaptive_defaults::delta_floor")]
        delta_floor: f64,
        #[serde(default = "adaptive_defaults::beta")]
        beta: f64,
        #[serde(default = "adaptive_defaults::gamma")]
        gamma: f64,
        #[serde(default = "one")]
        c: f64,
    },
    Level {
        #[serde(default = "level_defaults::delta1")]
        delta1: f64,
        #[serde(default = "level_defaults::budget")]
        budget: f64,
        #[serde(default = "one")]
        c: f64,
    },
}

mod adaptive_defaults {
    use mirror_polyak::AdaptiveParams;

    pub fn delta1() -> f64 {
        AdaptiveParams::default().delta1
    }
    pub fn delta_floor() -> f64 {
        AdaptiveParams::default().delta_floor
    }
    pub fn beta() -> f64 {
        AdaptiveParams::default().beta
    }
    pub fn gamma() -> f64 {
        AdaptiveParams::default().gamma
    }
}

mod level_defaults {
    use mirror_polyak::LevelParams;

    pub fn delta1() -> f64 {
        LevelParams::default().delta1
    }
    pub fn budget() -> f64 {
        LevelParams::default().budget
    }
}

impl Default for PolicySpec {
    fn default() -> Self {
        PolicySpec::default_for(PolicyKind::Level)
    }
}

/// Policy names as accepted on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    Classic,
    Adaptive,
    Level,
}

impl PolicyKind {
    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Classic => "classic",
            PolicyKind::Adaptive => "adaptive",
            PolicyKind::Level => "level",
        }
    }
}

impl std::str::FromStr for PolicyKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "classic" | "polyak" => Ok(PolicyKind::Classic),
            "adaptive" | "alg2" => Ok(PolicyKind::Adaptive),
            "level" | "alg3" => Ok(PolicyKind::Level),
            other => Err(HarnessError::Config(format!(
                "unknown policy '{other}' (expected classic, adaptive or level)"
            ))),
        }
    }
}

impl PolicySpec {
    pub fn default_for(kind: PolicyKind) -> Self {
        match kind {
            PolicyKind::Classic => PolicySpec::Classic { c: 1.0, f_star: None },
            PolicyKind::Adaptive => {
                let p = AdaptiveParams::default();
                PolicySpec::Adaptive {
                    delta1: p.delta1,
                    delta_floor: p.delta_floor,
                    beta: p.beta,
                    gamma: p.gamma,
                    c: p.c,
                }
            }
            PolicyKind::Level => {
                let p = LevelParams::default();
                PolicySpec::Level { delta1: p.delta1, budget: p.budget, c: p.c }
            }
        }
    }

    pub fn kind(&self) -> PolicyKind {
        match self {
            PolicySpec::Classic { .. } => PolicyKind::Classic,
            PolicySpec::Adaptive { .. } => PolicyKind::Adaptive,
            PolicySpec::Level { .. } => PolicyKind::Level,
        }
    }

    /// Check the parameter constraints of the policy.
    pub fn validate(&self) -> Result<()> {
        match *self {
            PolicySpec::Classic { c, f_star } => {
                if !(c > 0.5) {
                    return Err(HarnessError::Config(format!(
                        "policy.c must satisfy c > 1/2, got {c}"
                    )));
                }
                if let Some(f) = f_star {
                    if !f.is_finite() {
                        return Err(HarnessError::Config("policy.f_star must be finite".into()));
                    }
                }
                Ok(())
            }
            PolicySpec::Adaptive { .. } => self.adaptive_params().unwrap().validate().map_err(Into::into),
            PolicySpec::Level { .. } => self.level_params().unwrap().validate().map_err(Into::into),
        }
    }

    pub fn adaptive_params(&self) -> Option<AdaptiveParams> {
        match *self {
            PolicySpec::Adaptive { delta1, delta_floor, beta, gamma, c } => {
                Some(AdaptiveParams { delta1, delta_floor, beta, gamma, c })
            }
            _ => None,
        }
    }

    pub fn level_params(&self) -> Option<LevelParams> {
        match *self {
            PolicySpec::Level { delta1, budget, c } => Some(LevelParams { delta1, budget, c }),
            _ => None,
        }
    }

    /// Build the policy; the classic policy needs an optimal value, either
    /// its own `f_star` or `reference_f_star`.
    pub fn build(&self, reference_f_star: Option<f64>) -> Result<Policy> {
        self.validate()?;
        Ok(match self {
            PolicySpec::Classic { c, f_star } => {
                let f_star = f_star.or(reference_f_star).ok_or_else(|| {
                    HarnessError::Config(
                        "the classic policy needs policy.f_star or a computable reference optimum".into(),
                    )
                })?;
                Policy::classic(f_star, *c)?
            }
            PolicySpec::Adaptive { .. } => Policy::adaptive(self.adaptive_params().unwrap())?,
            PolicySpec::Level { .. } => Policy::level(self.level_params().unwrap())?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialPoint {
    Coords(Vec<f64>),
    /// `"barycenter"` or `"random"` (a uniform draw on the simplex, seeded
    /// by `run.seed`).
    Named(String),
}

fn default_max_iterations() -> usize {
    1000
}

fn default_zero_grad_tol() -> f64 {
    ZERO_GRAD_TOL
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_zero_grad_tol")]
    pub zero_grad_tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_point: Option<InitialPoint>,
    #[serde(default)]
    pub certify_every: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_gap: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

impl Default for RunSpec {
    fn default() -> Self {
        RunSpec {
            max_iterations: default_max_iterations(),
            zero_grad_tol: default_zero_grad_tol(),
            initial_point: None,
            certify_every: 0,
            target_gap: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub prefix: PathBuf,
    /// Grid resolution for the reference optimum; chosen by dimension when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_resolution: Option<f64>,
}

impl ProblemSpec {
    /// Build the objective, reading instance files relative to `base_dir`.
    pub fn objective(&self, base_dir: &Path) -> Result<Objective> {
        let built = match self {
            ProblemSpec::Kelly { returns, probs: Some(p) } => Objective::kelly(returns.clone(), p.clone()),
            ProblemSpec::Kelly { returns, probs: None } => Objective::kelly_uniform(returns.clone()),
            ProblemSpec::Linear { cost } => Objective::linear(cost.clone()),
            ProblemSpec::PiecewiseLinear { anchors, weights } => {
                Objective::piecewise_linear(anchors.clone(), weights.clone())
            }
            ProblemSpec::File { path } => {
                let full = base_dir.join(path);
                let text = std::fs::read_to_string(&full).map_err(|e| HarnessError::io(&full, e))?;
                let inner: ProblemSpec = toml::from_str(&text).map_err(|e| {
                    HarnessError::Config(format!("instance file {}: {}", full.display(), e.message()))
                })?;
                if matches!(inner, ProblemSpec::File { .. }) {
                    return Err(HarnessError::Config("instance files cannot reference other files".into()));
                }
                return inner.objective(full.parent().unwrap_or(base_dir));
            }
        };
        built.map_err(|e| HarnessError::Config(format!("problem: {e}")))
    }
}

impl ExperimentConfig {
    /// Parse and validate. Relative paths inside the config resolve
    /// against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| HarnessError::Config(e.message().to_string()))?;
        cfg.validate(base_dir)?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config values are always representable in TOML")
    }

    /// Check the combination of problem, map, policy and run settings.
    pub fn validate(&self, base_dir: &Path) -> Result<()> {
        self.policy.validate()?;
        let obj = self.problem.objective(base_dir)?;
        let map = self.map.kind;
        if map == MapChoice::Entropic && !obj.on_simplex() {
            return Err(HarnessError::Config(
                "the entropic map requires a problem posed on the probability simplex".into(),
            ));
        }
        if obj.on_simplex() && map == MapChoice::Euclidean {
            return Err(HarnessError::Config(
                "simplex problems need map.kind = \"entropic\" or \"euclidean-simplex\"".into(),
            ));
        }
        let run = &self.run;
        if run.max_iterations == 0 {
            return Err(HarnessError::Config("run.max_iterations must be at least 1".into()));
        }
        if !(run.zero_grad_tol >= 0.0) {
            return Err(HarnessError::Config("run.zero_grad_tol must be nonnegative".into()));
        }
        if let Some(gap) = run.target_gap {
            if !(gap >= 0.0) {
                return Err(HarnessError::Config("run.target_gap must be nonnegative".into()));
            }
        }
        match &run.initial_point {
            Some(InitialPoint::Coords(x)) => {
                if x.len() != obj.dim() {
                    return Err(HarnessError::Config(format!(
                        "run.initial_point has dimension {}, problem has {}",
                        x.len(),
                        obj.dim()
                    )));
                }
                map.mirror_map().check_interior(x).map_err(|e| {
                    HarnessError::Config(format!("run.initial_point is not a valid start: {e}"))
                })?;
            }
            Some(InitialPoint::Named(name)) => match name.as_str() {
                "barycenter" | "random" if obj.on_simplex() => {}
                "barycenter" | "random" => {
                    return Err(HarnessError::Config(format!(
                        "run.initial_point = \"{name}\" only applies to simplex problems"
                    )))
                }
                other => {
                    return Err(HarnessError::Config(format!(
                        "run.initial_point must be a coordinate list, \"barycenter\" or \"random\", got \"{other}\""
                    )))
                }
            },
            None => {}
        }
        if let Some(r) = self.output.reference_resolution {
            if !(r > 0.0 && r < 1.0) {
                return Err(HarnessError::Config("output.reference_resolution must lie in (0, 1)".into()));
            }
        }
        Ok(())
    }
}

/// Read, parse and validate a config file.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        HarnessError::Config(format!("cannot read config {}: {e}", path.display()))
    })?;
    ExperimentConfig::parse(&text, path.parent().unwrap_or(Path::new(".")))
}
