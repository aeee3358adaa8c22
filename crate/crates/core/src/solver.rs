//! The mirror-descent outer loop.
//!
//! Each iteration evaluates `f` and a subgradient at the current point,
//! asks the policy for a step, takes the mirror step and records one
//! [`IterationRecord`]. When certification is enabled, every certified
//! step is checked against the one-step descent inequality
//!
//! ```text
//! η (f(x) − f(y)) ≤ D_h(y, x) − D_h(y, x₊) + η² ‖g(x)‖_*² / 2
//! ```
//!
//! with the probe `y` set to the best iterate so far.
//!
//! The loop stops on the first of: iteration cap, zero gradient, the
//! optional target gap, or a domain violation (objective or gradient
//! undefined at the iterate, or an entropic step that underflowed).

use crate::error::{Error, Result};
use crate::geometry::{FeasibleSet, MirrorMap, Point};
use crate::objectives::Objective;
use crate::policies::{Policy, PolicySnapshot, Proposal, ZERO_GRAD_TOL};

/// Weight of the barycenter when pulling a boundary probe into the interior.
pub const PROBE_MIX: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub max_iterations: usize,
    /// Dual gradient norms at or below this stop the run as a zero gradient.
    pub zero_grad_tol: f64,
    /// Starting point; the simplex barycenter (or the origin on the full
    /// space) when absent.
    pub initial_point: Option<Point>,
    /// Certify every n-th iteration; 0 disables the certifier.
    pub certify_every: usize,
    /// Stop once `best_f − known_f_star ≤ target_gap`.
    pub target_gap: Option<f64>,
    pub known_f_star: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            max_iterations: 1000,
            zero_grad_tol: ZERO_GRAD_TOL,
            initial_point: None,
            certify_every: 0,
            target_gap: None,
            known_f_star: None,
        }
    }
}

impl RunConfig {
    pub fn with_max_iterations(mut self, n: usize) -> Self {
        self.max_iterations = n;
        self
    }

    pub fn with_initial_point(mut self, x: impl Into<Point>) -> Self {
        self.initial_point = Some(x.into());
        self
    }

    pub fn with_certify_every(mut self, n: usize) -> Self {
        self.certify_every = n;
        self
    }

    pub fn with_target(mut self, f_star: f64, gap: f64) -> Self {
        self.known_f_star = Some(f_star);
        self.target_gap = Some(gap);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidInput("max_iterations must be at least 1".into()));
        }
        if !(self.zero_grad_tol >= 0.0) {
            return Err(Error::InvalidInput("zero_grad_tol must be nonnegative".into()));
        }
        if self.target_gap.is_some() != self.known_f_star.is_some() {
            return Err(Error::InvalidInput(
                "target_gap and known_f_star must be given together".into(),
            ));
        }
        Ok(())
    }
}

/// One row of run history.
///
/// `eta` and `target` are `None` on a terminal row, where no step was taken.
/// The policy snapshot holds the values used for this iteration's target.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub f_x: f64,
    pub g_dual_norm: Option<f64>,
    pub eta: Option<f64>,
    pub target: Option<f64>,
    pub best_f: f64,
    pub policy: PolicySnapshot,
    pub certifier_residual: Option<f64>,
    pub domain_violation: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Termination {
    ZeroGradient,
    MaxIterations,
    TargetReached,
    DomainViolation,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::ZeroGradient => "ZeroGradient",
            Termination::MaxIterations => "MaxIterations",
            Termination::TargetReached => "TargetReached",
            Termination::DomainViolation => "DomainViolation",
        }
    }
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub history: Vec<IterationRecord>,
    pub best_f: f64,
    pub best_x: Point,
    pub termination: Termination,
}

impl RunResult {
    /// Smallest certifier residual over the run, if any step was certified.
    pub fn min_residual(&self) -> Option<f64> {
        self.history
            .iter()
            .filter_map(|r| r.certifier_residual)
            .reduce(f64::min)
    }
}

/// Residual of the one-step descent inequality:
///
/// `D_h(y, x) − D_h(y, x₊) + η² ‖g‖_*² / 2 − η (f(x) − f(y))`,
///
/// which is nonnegative whenever `x₊ = T(x; η)` and `g` is a subgradient
/// of a convex `f` at `x`.
#[allow(clippy::too_many_arguments)]
pub fn certify_descent(
    map: &MirrorMap,
    x: &[f64],
    x_plus: &[f64],
    eta: f64,
    g: &[f64],
    f_x: f64,
    y: &[f64],
    f_y: f64,
) -> Result<f64> {
    map.check_interior(y)?;
    let g_norm = map.dual_norm(g);
    Ok(map.bregman(y, x)? - map.bregman(y, x_plus)? + 0.5 * eta * eta * g_norm * g_norm
        - eta * (f_x - f_y))
}

/// The point used as `y` by the certifier: the best iterate, pulled toward
/// the barycenter by [`PROBE_MIX`] when it touches the simplex boundary.
pub fn certifier_probe(map: &MirrorMap, best_x: &Point) -> Point {
    if map.feasible_set() == FeasibleSet::ProbabilitySimplex && best_x.min_coord() <= 0.0 {
        let uniform = 1.0 / best_x.dim() as f64;
        Point(best_x.iter().map(|v| (1.0 - PROBE_MIX) * v + PROBE_MIX * uniform).collect())
    } else {
        best_x.clone()
    }
}

/// Run mirror descent to termination.
pub fn run(obj: &Objective, map: &MirrorMap, policy: Policy, cfg: &RunConfig) -> Result<RunResult> {
    run_observed(obj, map, policy, cfg, |_, _| {})
}

/// Like [`run`], additionally calling `observer` with each record and the
/// iterate `x_k` it describes.
pub fn run_observed<F>(
    obj: &Objective,
    map: &MirrorMap,
    mut policy: Policy,
    cfg: &RunConfig,
    mut observer: F,
) -> Result<RunResult>
where
    F: FnMut(&IterationRecord, &Point),
{
    cfg.validate()?;
    let dim = obj.dim();
    let simplex = map.feasible_set() == FeasibleSet::ProbabilitySimplex;
    if obj.on_simplex() && !simplex {
        return Err(Error::InvalidInput(
            "this objective is posed on the simplex; use a simplex mirror map".into(),
        ));
    }
    let mut x = match &cfg.initial_point {
        Some(p) => p.clone(),
        None if simplex => Point::barycenter(dim),
        None => Point::zeros(dim),
    };
    if x.dim() != dim {
        return Err(Error::InvalidInput(format!(
            "initial point has dimension {}, objective expects {dim}",
            x.dim()
        )));
    }
    map.check_interior(&x)
        .map_err(|e| Error::InvalidInput(format!("infeasible initial point: {e}")))?;
    let mut f_x = obj.eval(&x)?;
    if !f_x.is_finite() {
        return Err(Error::InvalidInput("objective is not finite at the initial point".into()));
    }

    let mut history = Vec::with_capacity(cfg.max_iterations.min(1 << 20));
    let mut best_f = f64::INFINITY;
    let mut best_x = x.clone();
    let mut termination = Termination::MaxIterations;

    for k in 1..=cfg.max_iterations {
        match &mut policy {
            Policy::Adaptive(s) if s.last_target().is_some() => s.feedback(f_x)?,
            Policy::Adaptive(s) => s.observe(f_x),
            Policy::Level(s) => s.observe(f_x),
            Policy::Classic(_) => {}
        }
        if f_x < best_f {
            best_f = f_x;
            best_x = x.clone();
        }
        let mut record = IterationRecord {
            k,
            f_x,
            g_dual_norm: None,
            eta: None,
            target: None,
            best_f,
            policy: policy.snapshot(),
            certifier_residual: None,
            domain_violation: false,
        };

        if !f_x.is_finite() {
            record.domain_violation = true;
            observer(&record, &x);
            history.push(record);
            termination = Termination::DomainViolation;
            break;
        }
        if let (Some(gap), Some(f_star)) = (cfg.target_gap, cfg.known_f_star) {
            if best_f - f_star <= gap {
                observer(&record, &x);
                history.push(record);
                termination = Termination::TargetReached;
                break;
            }
        }
        let g = match obj.subgrad(&x) {
            Ok(g) => g,
            Err(Error::Domain(_)) => {
                record.domain_violation = true;
                observer(&record, &x);
                history.push(record);
                termination = Termination::DomainViolation;
                break;
            }
            Err(e) => return Err(e),
        };
        let g_norm = map.dual_norm(&g);
        record.g_dual_norm = Some(g_norm);
        if g_norm <= cfg.zero_grad_tol {
            observer(&record, &x);
            history.push(record);
            termination = Termination::ZeroGradient;
            break;
        }

        let Proposal { eta, target } = match &mut policy {
            Policy::Classic(s) => Proposal { eta: s.eta(f_x, g_norm)?, target: s.f_star() },
            Policy::Adaptive(s) => s.propose(f_x, g_norm)?,
            Policy::Level(s) => s.propose(f_x, g_norm, k)?,
        };
        record.eta = Some(eta);
        record.target = Some(target);
        record.policy = policy.snapshot();

        // A zero step (classic policy at f(x) ≤ f*) leaves the iterate in place.
        let x_next = if eta > 0.0 {
            match map.mirror_step(&x, &g, eta) {
                Ok(p) => p,
                Err(Error::Domain(_)) => {
                    record.domain_violation = true;
                    observer(&record, &x);
                    history.push(record);
                    termination = Termination::DomainViolation;
                    break;
                }
                Err(e) => return Err(e),
            }
        } else {
            x.clone()
        };
        if let Policy::Level(s) = &mut policy {
            s.accumulate(eta, g_norm);
        }
        let f_next = obj.eval(&x_next)?;

        if cfg.certify_every > 0 && k % cfg.certify_every == 0 {
            let y = certifier_probe(map, &best_x);
            let f_y = if y == best_x { best_f } else { obj.eval(&y)? };
            record.certifier_residual =
                Some(certify_descent(map, &x, &x_next, eta, &g, f_x, &y, f_y)?);
        }

        observer(&record, &x);
        history.push(record);
        x = x_next;
        f_x = f_next;
    }

    Ok(RunResult { history, best_f, best_x, termination })
}
