//! Convex objectives with extended-real evaluation and a subgradient oracle.
//!
//! Evaluating outside the effective domain returns `+∞` rather than failing,
//! so the solver can observe an iterate where the objective is undefined.
//! Asking for a subgradient there is an error.

use crate::error::{Error, Result};
use crate::geometry::{check_dims, dot, Point};

/// Slack allowed on `Σ pᵢ = 1` when building a Kelly objective.
pub const PROB_SUM_TOL: f64 = 1e-9;

/// Growth-optimal portfolio objective `f(x) = Σ pᵢ [−ln ⟨aᵢ, x⟩]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Kelly {
    returns: Vec<Vec<f64>>,
    probs: Vec<f64>,
}

impl Kelly {
    pub fn returns(&self) -> &[Vec<f64>] {
        &self.returns
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `minᵢ ⟨aᵢ, x⟩`; the objective is finite iff this is positive.
    pub fn min_inner(&self, x: &[f64]) -> f64 {
        self.returns.iter().map(|a| dot(a, x)).fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Objective {
    Kelly(Kelly),
    /// `f(x) = ⟨cost, x⟩` on the simplex.
    LinearOnSimplex { cost: Vec<f64> },
    /// `f(x) = Σⱼ wⱼ ‖x − anchorⱼ‖₁` on the full space.
    SyntheticPiecewiseLinear { anchors: Vec<Vec<f64>>, weights: Vec<f64> },
}

impl Objective {
    /// Validated Kelly objective from a return matrix (rows `aᵢ`) and scenario
    /// probabilities.
    pub fn kelly(returns: Vec<Vec<f64>>, probs: Vec<f64>) -> Result<Self> {
        if returns.is_empty() {
            return Err(Error::Construction("Kelly objective needs at least one return row".into()));
        }
        if returns.len() != probs.len() {
            return Err(Error::Construction(format!(
                "{} return rows but {} probabilities",
                returns.len(),
                probs.len()
            )));
        }
        let dim = returns[0].len();
        if dim == 0 {
            return Err(Error::Construction("return rows must be non-empty".into()));
        }
        for (i, row) in returns.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::Construction(format!(
                    "return row {i} has length {} (expected {dim})",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::Construction(format!("return row {i} has a negative or non-finite entry")));
            }
            if row.iter().all(|&v| v == 0.0) {
                return Err(Error::Construction(format!("return row {i} is identically zero")));
            }
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::Construction("probabilities must be finite and nonnegative".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::Construction(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Objective::Kelly(Kelly { returns, probs }))
    }

    /// Kelly objective with uniform scenario weights `1/n`.
    ///
    /// This is also the maximum-likelihood tomography problem when every
    /// measurement operator is diagonal in a common basis: each row holds
    /// the diagonal of one operator.
    pub fn kelly_uniform(returns: Vec<Vec<f64>>) -> Result<Self> {
        let n = returns.len();
        Self::kelly(returns, vec![1.0 / n as f64; n])
    }

    pub fn linear(cost: Vec<f64>) -> Result<Self> {
        if cost.is_empty() || cost.iter().any(|c| !c.is_finite()) {
            return Err(Error::Construction("cost vector must be non-empty and finite".into()));
        }
        Ok(Objective::LinearOnSimplex { cost })
    }

    pub fn piecewise_linear(anchors: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if anchors.is_empty() || anchors.len() != weights.len() {
            return Err(Error::Construction("need one positive weight per anchor".into()));
        }
        let dim = anchors[0].len();
        if dim == 0 || anchors.iter().any(|a| a.len() != dim || a.iter().any(|v| !v.is_finite())) {
            return Err(Error::Construction("anchors must share a positive dimension and be finite".into()));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::Construction("anchor weights must be positive".into()));
        }
        Ok(Objective::SyntheticPiecewiseLinear { anchors, weights })
    }

    pub fn dim(&self) -> usize {
        match self {
            Objective::Kelly(k) => k.returns[0].len(),
            Objective::LinearOnSimplex { cost } => cost.len(),
            Objective::SyntheticPiecewiseLinear { anchors, .. } => anchors[0].len(),
        }
    }

    /// Whether the natural feasible set is the probability simplex.
    pub fn on_simplex(&self) -> bool {
        !matches!(self, Objective::SyntheticPiecewiseLinear { .. })
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::InvalidInput(format!(
                "point has dimension {}, objective expects {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// `f(x)` as an extended real; Kelly gives `+∞` whenever some `⟨aᵢ, x⟩ ≤ 0`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(match self {
            Objective::Kelly(k) => {
                let mut total = 0.0;
                for (a, &p) in k.returns.iter().zip(&k.probs) {
                    let inner = dot(a, x);
                    if !(inner > 0.0) {
                        return Ok(f64::INFINITY);
                    }
                    total -= p * inner.ln();
                }
                total
            }
            Objective::LinearOnSimplex { cost } => dot(cost, x),
            Objective::SyntheticPiecewiseLinear { anchors, weights } => anchors
                .iter()
                .zip(weights)
                .map(|(a, w)| w * a.iter().zip(x).map(|(ai, xi)| (xi - ai).abs()).sum::<f64>())
                .sum(),
        })
    }

    /// A subgradient at `x`.
    ///
    /// For the piecewise-linear objective the selection uses `sign(0) = 0`.
    pub fn subgrad(&self, x: &[f64]) -> Result<Point> {
        self.check_dim(x)?;
        match self {
            Objective::Kelly(k) => {
                let mut g = vec![0.0; x.len()];
                for (a, &p) in k.returns.iter().zip(&k.probs) {
                    let inner = dot(a, x);
                    if !(inner > 0.0) {
                        return Err(Error::Domain(format!(
                            "Kelly gradient undefined: ⟨a, x⟩ = {inner}"
                        )));
                    }
                    let scale = p / inner;
                    for (gi, ai) in g.iter_mut().zip(a) {
                        *gi -= scale * ai;
                    }
                }
                Ok(Point(g))
            }
            Objective::LinearOnSimplex { cost } => Ok(Point(cost.clone())),
            Objective::SyntheticPiecewiseLinear { anchors, weights } => {
                let mut g = vec![0.0; x.len()];
                for (a, w) in anchors.iter().zip(weights) {
                    check_dims(a, x, "subgrad")?;
                    for (gi, (xi, ai)) in g.iter_mut().zip(x.iter().zip(a)) {
                        *gi += w * sign0(xi - ai);
                    }
                }
                Ok(Point(g))
            }
        }
    }
}

fn sign0(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}
