//! Polyak-type step-size state machines.
//!
//! All three policies produce a step of the form
//!
//! ```text
//! η_k = (f(x_k) − f̂_k) / (c ‖g(x_k)‖_*²)
//! ```
//!
//! and differ only in the target level `f̂_k`:
//!
//! * [`ClassicPolyak`] uses the true optimal value `f*`.
//! * [`AdaptiveEstimate`] uses `best − δ_k`, growing `δ_k` by `γ` when the
//!   next iterate reaches the target and shrinking it by `β` (never below the
//!   floor `δ`) otherwise.
//! * [`SubgradientLevel`] uses `record − δ_l`, where `record` is the best
//!   value seen when the current group began. A group ends either on
//!   sufficient decrease (`δ` kept) or when the accumulated path length
//!   `σ` exceeds the budget `B` (`δ` halved).

use crate::error::{Error, Result};

/// A dual gradient norm at or below this is treated as a zero gradient.
pub const ZERO_GRAD_TOL: f64 = 1e-14;

/// A proposed step and the level it aims at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Proposal {
    pub eta: f64,
    pub target: f64,
}

fn check_c(c: f64) -> Result<()> {
    if !(c > 0.5) || !c.is_finite() {
        return Err(Error::Construction(format!("step scale c must satisfy c > 1/2, got {c}")));
    }
    Ok(())
}

fn check_gradient(g_dual_norm: f64) -> Result<()> {
    if !(g_dual_norm > 0.0) || !g_dual_norm.is_finite() {
        return Err(Error::Contract(format!(
            "a step was requested at gradient norm {g_dual_norm}; zero gradients terminate the run"
        )));
    }
    Ok(())
}

fn polyak_step(gap: f64, c: f64, g_dual_norm: f64) -> f64 {
    gap / (c * g_dual_norm * g_dual_norm)
}

/// The classic Polyak step with a known optimal value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicPolyak {
    f_star: f64,
    c: f64,
}

impl ClassicPolyak {
    pub fn new(f_star: f64, c: f64) -> Result<Self> {
        check_c(c)?;
        if !f_star.is_finite() {
            return Err(Error::Construction(format!("optimal value must be finite, got {f_star}")));
        }
        Ok(ClassicPolyak { f_star, c })
    }

    pub fn f_star(&self) -> f64 {
        self.f_star
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// `(f(x) − f*) / (c ‖g‖_*²)`.
    ///
    /// A nonpositive gap means the point is already optimal up to the
    /// accuracy of `f*`; the returned step is then exactly zero.
    pub fn eta(&self, f_x: f64, g_dual_norm: f64) -> Result<f64> {
        check_gradient(g_dual_norm)?;
        Ok(polyak_step((f_x - self.f_star).max(0.0), self.c, g_dual_norm))
    }
}

/// Parameters of [`AdaptiveEstimate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveParams {
    /// Initial estimate gap `δ₁`.
    pub delta1: f64,
    /// Tolerance floor `δ`; the final accuracy guarantee.
    pub delta_floor: f64,
    /// Shrink factor on failure, `β < 1`.
    pub beta: f64,
    /// Growth factor on success, `γ ≥ 1`.
    pub gamma: f64,
    pub c: f64,
}

impl Default for AdaptiveParams {
    fn default() -> Self {
        AdaptiveParams { delta1: 0.1, delta_floor: 1e-4, beta: 0.5, gamma: 1.5, c: 1.0 }
    }
}

impl AdaptiveParams {
    pub fn validate(&self) -> Result<()> {
        check_c(self.c)?;
        if !(self.delta_floor > 0.0) || !self.delta_floor.is_finite() {
            return Err(Error::Construction(format!(
                "tolerance floor must satisfy δ > 0, got {}",
                self.delta_floor
            )));
        }
        if !(self.delta1 >= self.delta_floor) || !self.delta1.is_finite() {
            return Err(Error::Construction(format!(
                "initial gap must satisfy δ₁ ≥ δ, got δ₁ = {} and δ = {}",
                self.delta1, self.delta_floor
            )));
        }
        if !(self.beta < 1.0) || !self.beta.is_finite() {
            return Err(Error::Construction(format!("shrink factor must satisfy β < 1, got {}", self.beta)));
        }
        if !(self.gamma >= 1.0) || !self.gamma.is_finite() {
            return Err(Error::Construction(format!("growth factor must satisfy γ ≥ 1, got {}", self.gamma)));
        }
        Ok(())
    }
}

/// Polyak step against the moving estimate `min_{κ≤k} f(x_κ) − δ_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveEstimate {
    params: AdaptiveParams,
    delta: f64,
    best_f: f64,
    last_target: Option<f64>,
}

impl AdaptiveEstimate {
    pub fn new(params: AdaptiveParams) -> Result<Self> {
        params.validate()?;
        Ok(AdaptiveEstimate {
            params,
            delta: params.delta1,
            best_f: f64::INFINITY,
            last_target: None,
        })
    }

    pub fn params(&self) -> &AdaptiveParams {
        &self.params
    }

    /// The current gap `δ_k`.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn best_f(&self) -> f64 {
        self.best_f
    }

    pub fn last_target(&self) -> Option<f64> {
        self.last_target
    }

    /// Fold an objective value into the running minimum.
    pub fn observe(&mut self, f: f64) {
        self.best_f = self.best_f.min(f);
    }

    /// Target `best − δ_k` and the step reaching it. `f_xk` must already
    /// have been observed.
    pub fn propose(&mut self, f_xk: f64, g_dual_norm: f64) -> Result<Proposal> {
        check_gradient(g_dual_norm)?;
        if !(self.best_f <= f_xk) {
            return Err(Error::Contract(format!(
                "current value {f_xk} was not folded into the record {} before proposing",
                self.best_f
            )));
        }
        let target = self.best_f - self.delta;
        let eta = polyak_step(f_xk - target, self.params.c, g_dual_norm);
        self.last_target = Some(target);
        Ok(Proposal { eta, target })
    }

    /// Update `δ` from the value at the new iterate, then fold that value
    /// into the record.
    pub fn feedback(&mut self, f_x_next: f64) -> Result<()> {
        let target = self
            .last_target
            .take()
            .ok_or_else(|| Error::Contract("feedback without a pending proposal".into()))?;
        self.delta = if f_x_next <= target {
            self.params.gamma * self.delta
        } else {
            (self.params.beta * self.delta).max(self.params.delta_floor)
        };
        self.observe(f_x_next);
        Ok(())
    }
}

/// Parameters of [`SubgradientLevel`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelParams {
    /// Initial level gap `δ₁`.
    pub delta1: f64,
    /// Path-length budget `B` after which the gap is halved.
    pub budget: f64,
    pub c: f64,
}

impl Default for LevelParams {
    fn default() -> Self {
        LevelParams { delta1: 0.1, budget: 20.0, c: 1.0 }
    }
}

impl LevelParams {
    pub fn validate(&self) -> Result<()> {
        check_c(self.c)?;
        if !(self.delta1 > 0.0) || !self.delta1.is_finite() {
            return Err(Error::Construction(format!("initial gap must satisfy δ₁ > 0, got {}", self.delta1)));
        }
        if !(self.budget > 0.0) || !self.budget.is_finite() {
            return Err(Error::Construction(format!("path budget must satisfy B > 0, got {}", self.budget)));
        }
        Ok(())
    }
}

/// Which branch, if any, opened a new group during the last proposal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelTransition {
    None,
    /// Sufficient decrease: `f(x_k) ≤ record − δ_l/2`, gap kept.
    Decrease,
    /// Budget exhausted: `σ_k > B`, gap halved.
    Budget,
}

/// Subgradient level method in mirror-descent form.
#[derive(Debug, Clone, PartialEq)]
pub struct SubgradientLevel {
    params: LevelParams,
    delta: f64,
    sigma: f64,
    level: u64,
    group_start: usize,
    group_record: Option<f64>,
    best_f: f64,
    last_transition: LevelTransition,
}

impl SubgradientLevel {
    pub fn new(params: LevelParams) -> Result<Self> {
        params.validate()?;
        Ok(SubgradientLevel {
            params,
            delta: params.delta1,
            sigma: 0.0,
            level: 1,
            group_start: 1,
            group_record: None,
            best_f: f64::INFINITY,
            last_transition: LevelTransition::None,
        })
    }

    pub fn params(&self) -> &LevelParams {
        &self.params
    }

    /// The current gap `δ_l`.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Path length accumulated in the current group.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    /// Iteration at which the current group began.
    pub fn group_start(&self) -> usize {
        self.group_start
    }

    /// Record value snapshotted when the current group began.
    pub fn group_record(&self) -> Option<f64> {
        self.group_record
    }

    pub fn best_f(&self) -> f64 {
        self.best_f
    }

    pub fn last_transition(&self) -> LevelTransition {
        self.last_transition
    }

    /// Fold an objective value into the running record. The first value
    /// observed also seeds the record of the first group.
    pub fn observe(&mut self, f: f64) {
        self.best_f = self.best_f.min(f);
        if self.group_record.is_none() {
            self.group_record = Some(self.best_f);
        }
    }

    /// Run the two group tests (decrease first, then budget; at most one
    /// fires) and return the step toward `record − δ_l`.
    pub fn propose(&mut self, f_xk: f64, g_dual_norm: f64, iteration_k: usize) -> Result<Proposal> {
        check_gradient(g_dual_norm)?;
        let record = self
            .group_record
            .ok_or_else(|| Error::Contract("no objective value observed before proposing".into()))?;
        if !(self.best_f <= f_xk) {
            return Err(Error::Contract(format!(
                "current value {f_xk} was not folded into the record {} before proposing",
                self.best_f
            )));
        }
        self.last_transition = if f_xk <= record - 0.5 * self.delta {
            LevelTransition::Decrease
        } else if self.sigma > self.params.budget {
            LevelTransition::Budget
        } else {
            LevelTransition::None
        };
        if self.last_transition != LevelTransition::None {
            self.group_start = iteration_k;
            self.group_record = Some(self.best_f);
            self.sigma = 0.0;
            if self.last_transition == LevelTransition::Budget {
                self.delta *= 0.5;
            }
            self.level += 1;
        }
        let target = self.group_record.unwrap_or(record) - self.delta;
        let eta = polyak_step(f_xk - target, self.params.c, g_dual_norm);
        Ok(Proposal { eta, target })
    }

    /// `σ ← σ + c η ‖g‖_*`.
    pub fn accumulate(&mut self, eta: f64, g_dual_norm: f64) {
        self.sigma += self.params.c * eta * g_dual_norm;
    }
}

/// One of the three step-size policies, as driven by the solver.
#[derive(Debug, Clone, PartialEq)]
pub enum Policy {
    Classic(ClassicPolyak),
    Adaptive(AdaptiveEstimate),
    Level(SubgradientLevel),
}

/// Policy internals recorded alongside each iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicySnapshot {
    Classic,
    Adaptive { delta: f64 },
    Level { delta: f64, sigma: f64, level: u64, group_record: f64 },
}

impl Policy {
    pub fn classic(f_star: f64, c: f64) -> Result<Self> {
        Ok(Policy::Classic(ClassicPolyak::new(f_star, c)?))
    }

    pub fn adaptive(params: AdaptiveParams) -> Result<Self> {
        Ok(Policy::Adaptive(AdaptiveEstimate::new(params)?))
    }

    pub fn level(params: LevelParams) -> Result<Self> {
        Ok(Policy::Level(SubgradientLevel::new(params)?))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Policy::Classic(_) => "classic",
            Policy::Adaptive(_) => "adaptive",
            Policy::Level(_) => "level",
        }
    }

    pub fn snapshot(&self) -> PolicySnapshot {
        match self {
            Policy::Classic(_) => PolicySnapshot::Classic,
            Policy::Adaptive(s) => PolicySnapshot::Adaptive { delta: s.delta },
            Policy::Level(s) => PolicySnapshot::Level {
                delta: s.delta,
                sigma: s.sigma,
                level: s.level,
                group_record: s.group_record.unwrap_or(f64::NAN),
            },
        }
    }
}
