//! Mirror maps: Legendre potentials, their Bregman divergences, dual norms,
//! and the mirror step
//!
//! ```text
//! T(x; η) = argmin_{y ∈ X} ⟨g, y − x⟩ + D_h(y, x) / η
//! ```
//!
//! Two geometries are supported. The Euclidean map `h(x) = ½‖x‖₂²` works on
//! the full space or on the probability simplex (where the step becomes a
//! projected gradient step). The negative-entropy map `h(x) = Σ xᵢ ln xᵢ`
//! lives on the simplex only, is 1-strongly convex with respect to `‖·‖₁`
//! (Pinsker), and its step is the multiplicative (exponentiated gradient)
//! update.

use std::ops::{Deref, DerefMut};

use crate::error::{Error, Result};

/// Feasibility slack used when checking that a point lies on the simplex.
pub const SIMPLEX_TOL: f64 = 1e-9;

/// A point (or a gradient) in `R^d`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn zeros(dim: usize) -> Self {
        Point(vec![0.0; dim])
    }

    /// The simplex barycenter `(1/d, …, 1/d)`.
    pub fn barycenter(dim: usize) -> Self {
        Point(vec![1.0 / dim as f64; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &Point) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn min_coord(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

impl From<&[f64]> for Point {
    fn from(v: &[f64]) -> Self {
        Point(v.to_vec())
    }
}

impl Deref for Point {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for Point {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn check_dims(a: &[f64], b: &[f64], what: &str) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::InvalidInput(format!(
            "dimension mismatch in {what}: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

fn check_finite(v: &[f64], what: &str) -> Result<()> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(format!("{what} has non-finite entries")));
    }
    Ok(())
}

/// Which Legendre potential generates the geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MapKind {
    Euclidean,
    NegativeEntropy,
}

/// The closed convex feasible set the mirror step is taken over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeasibleSet {
    FullSpace,
    ProbabilitySimplex,
}

/// The primal norm in which the potential is 1-strongly convex (with factor ½).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PrimalNorm {
    L2,
    L1,
}

/// A Legendre geometry bundle: potential, divergence, dual norm, and the
/// feasible set its mirror step is solved over.
///
/// Only the combinations with a closed-form step are constructible:
/// Euclidean over the full space or the simplex, and negative entropy over
/// the simplex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MirrorMap {
    kind: MapKind,
    feasible_set: FeasibleSet,
}

impl MirrorMap {
    pub fn new(kind: MapKind, feasible_set: FeasibleSet) -> Result<Self> {
        if kind == MapKind::NegativeEntropy && feasible_set != FeasibleSet::ProbabilitySimplex {
            return Err(Error::InvalidInput(
                "the negative-entropy map is only defined over the probability simplex".into(),
            ));
        }
        Ok(MirrorMap { kind, feasible_set })
    }

    /// `h = ½‖·‖₂²` over `R^d`: the mirror step is a plain gradient step.
    pub fn euclidean() -> Self {
        MirrorMap { kind: MapKind::Euclidean, feasible_set: FeasibleSet::FullSpace }
    }

    /// `h = ½‖·‖₂²` over the simplex: the mirror step is projected gradient.
    pub fn euclidean_simplex() -> Self {
        MirrorMap { kind: MapKind::Euclidean, feasible_set: FeasibleSet::ProbabilitySimplex }
    }

    /// Negative Shannon entropy over the simplex (exponentiated gradient).
    pub fn entropic() -> Self {
        MirrorMap { kind: MapKind::NegativeEntropy, feasible_set: FeasibleSet::ProbabilitySimplex }
    }

    pub fn kind(&self) -> MapKind {
        self.kind
    }

    pub fn feasible_set(&self) -> FeasibleSet {
        self.feasible_set
    }

    pub fn primal_norm_id(&self) -> PrimalNorm {
        match self.kind {
            MapKind::Euclidean => PrimalNorm::L2,
            MapKind::NegativeEntropy => PrimalNorm::L1,
        }
    }

    /// `h(x)`, `+∞` outside the closure of `dom h`.
    pub fn h_value(&self, x: &[f64]) -> f64 {
        match self.kind {
            MapKind::Euclidean => 0.5 * dot(x, x),
            MapKind::NegativeEntropy => {
                if x.iter().any(|&v| v < 0.0 || v.is_nan()) {
                    return f64::INFINITY;
                }
                x.iter().map(|&v| xlogx(v)).sum()
            }
        }
    }

    /// `∇h(x)`; requires `x` in the interior of `dom h`.
    pub fn h_grad(&self, x: &[f64]) -> Result<Point> {
        match self.kind {
            MapKind::Euclidean => Ok(Point::from(x)),
            MapKind::NegativeEntropy => {
                if let Some(v) = x.iter().find(|&&v| !(v > 0.0)) {
                    return Err(Error::Domain(format!(
                        "gradient of negative entropy needs positive coordinates, got {v}"
                    )));
                }
                Ok(Point(x.iter().map(|v| v.ln() + 1.0).collect()))
            }
        }
    }

    /// Bregman divergence `D_h(x, y) = h(x) − h(y) − ⟨∇h(y), x − y⟩`.
    ///
    /// For negative entropy this is evaluated in its Kullback-Leibler form
    /// `Σ xᵢ ln(xᵢ / yᵢ)` (with `0 ln 0 = 0`), which equals the three-term
    /// definition whenever `x` and `y` have the same total mass, in
    /// particular on the simplex. `y` must have strictly positive entries.
    pub fn bregman(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_dims(x, y, "bregman")?;
        match self.kind {
            MapKind::Euclidean => {
                Ok(0.5 * x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
            }
            MapKind::NegativeEntropy => {
                let mut total = 0.0;
                for (&xi, &yi) in x.iter().zip(y) {
                    if !(yi > 0.0) {
                        return Err(Error::Domain(format!(
                            "second argument of the entropic divergence must be interior, got coordinate {yi}"
                        )));
                    }
                    if xi < 0.0 {
                        return Err(Error::Domain(format!(
                            "first argument of the entropic divergence has negative coordinate {xi}"
                        )));
                    }
                    if xi > 0.0 {
                        total += xi * (xi / yi).ln();
                    }
                }
                Ok(total)
            }
        }
    }

    /// Dual norm of a gradient: `‖·‖₂` for Euclidean, `‖·‖_∞` for entropy.
    pub fn dual_norm(&self, v: &[f64]) -> f64 {
        match self.kind {
            MapKind::Euclidean => dot(v, v).sqrt(),
            MapKind::NegativeEntropy => v.iter().fold(0.0, |m, x| m.max(x.abs())),
        }
    }

    /// The primal norm (`‖·‖₂` or `‖·‖₁`) of the strong convexity assumption.
    pub fn primal_norm(&self, v: &[f64]) -> f64 {
        match self.kind {
            MapKind::Euclidean => dot(v, v).sqrt(),
            MapKind::NegativeEntropy => v.iter().map(|x| x.abs()).sum(),
        }
    }

    /// Is `x` in `X ∩ int dom h`, i.e. a legal point to step from?
    pub fn check_interior(&self, x: &[f64]) -> Result<()> {
        check_finite(x, "point")?;
        if self.feasible_set == FeasibleSet::ProbabilitySimplex {
            let sum: f64 = x.iter().sum();
            if (sum - 1.0).abs() > SIMPLEX_TOL {
                return Err(Error::Domain(format!("point is off the simplex (sum = {sum})")));
            }
            let floor_ok = match self.kind {
                MapKind::Euclidean => x.iter().all(|&v| v >= 0.0),
                MapKind::NegativeEntropy => x.iter().all(|&v| v > 0.0),
            };
            if !floor_ok {
                return Err(Error::Domain(match self.kind {
                    MapKind::Euclidean => "point has a negative coordinate".into(),
                    MapKind::NegativeEntropy => {
                        "point is on the boundary of the entropy domain".into()
                    }
                }));
            }
        }
        Ok(())
    }

    /// The mirror step `T(x; η)`.
    ///
    /// The entropic update is carried out in the log domain with the maximum
    /// subtracted before exponentiation. If a coordinate underflows to zero
    /// the step fails with a domain error instead of clamping.
    pub fn mirror_step(&self, x: &[f64], g: &[f64], eta: f64) -> Result<Point> {
        check_dims(x, g, "mirror_step")?;
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::InvalidInput(format!("step size must be positive and finite, got {eta}")));
        }
        check_finite(g, "gradient")?;
        self.check_interior(x)?;
        match (self.kind, self.feasible_set) {
            (MapKind::Euclidean, FeasibleSet::FullSpace) => {
                Ok(Point(x.iter().zip(g).map(|(a, b)| a - eta * b).collect()))
            }
            (MapKind::Euclidean, FeasibleSet::ProbabilitySimplex) => {
                let moved: Vec<f64> = x.iter().zip(g).map(|(a, b)| a - eta * b).collect();
                Ok(simplex_project(&moved))
            }
            (MapKind::NegativeEntropy, _) => entropic_step(x, g, eta),
        }
    }
}

fn xlogx(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v * v.ln()
    }
}

fn entropic_step(x: &[f64], g: &[f64], eta: f64) -> Result<Point> {
    let logits: Vec<f64> = x.iter().zip(g).map(|(xi, gi)| xi.ln() - eta * gi).collect();
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::Domain("entropic step produced non-finite logits".into()));
    }
    let weights: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    if weights.contains(&0.0) {
        return Err(Error::Domain(
            "entropic step underflowed a coordinate to zero".into(),
        ));
    }
    let total: f64 = weights.iter().sum();
    Ok(Point(weights.into_iter().map(|w| w / total).collect()))
}

/// Euclidean projection onto the probability simplex `{x ≥ 0, Σ x = 1}`.
///
/// Sort-then-threshold: with `u` sorted decreasingly, the largest `ρ` with
/// `u_ρ > (Σ_{i≤ρ} uᵢ − 1)/ρ` fixes the shift `θ`, and the projection is
/// `max(v − θ, 0)`. The output may contain exact zeros.
pub fn simplex_project(v: &[f64]) -> Point {
    if v.is_empty() {
        return Point(Vec::new());
    }
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let candidate = (cumsum - 1.0) / (i + 1) as f64;
        if u > candidate {
            theta = candidate;
        }
    }
    Point(v.iter().map(|&vi| (vi - theta).max(0.0)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn h_value_examples() {
        assert_eq!(MirrorMap::euclidean().h_value(&[3.0, 4.0]), 12.5);
        assert_eq!(MirrorMap::entropic().h_value(&[1.0, 0.0]), 0.0);
        let v = MirrorMap::entropic().h_value(&[0.5, 0.5]);
        assert!(close(v, -std::f64::consts::LN_2, 1e-15));
        assert_eq!(MirrorMap::entropic().h_value(&[-0.1, 1.1]), f64::INFINITY);
    }

    #[test]
    fn bregman_examples() {
        let e = MirrorMap::euclidean();
        assert_eq!(e.bregman(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        let h = MirrorMap::entropic();
        assert_eq!(h.bregman(&[0.5, 0.5], &[0.5, 0.5]).unwrap(), 0.0);
        let d = h.bregman(&[0.5, 0.5], &[0.25, 0.75]).unwrap();
        let expected = 0.5 * 2f64.ln() + 0.5 * (2.0f64 / 3.0).ln();
        assert!(close(d, expected, 1e-15));
        assert!(close(d, 0.143841, 1e-6));
    }

    #[test]
    fn bregman_rejects_boundary_second_argument() {
        let h = MirrorMap::entropic();
        assert!(matches!(h.bregman(&[0.5, 0.5], &[1.0, 0.0]), Err(Error::Domain(_))));
        // boundary first argument is fine: 0 ln 0 = 0
        let d = h.bregman(&[1.0, 0.0], &[0.5, 0.5]).unwrap();
        assert!(close(d, std::f64::consts::LN_2, 1e-15));
    }

    #[test]
    fn bregman_dimension_mismatch() {
        assert!(matches!(
            MirrorMap::euclidean().bregman(&[1.0], &[1.0, 2.0]),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn kl_form_matches_three_term_definition_on_simplex() {
        let h = MirrorMap::entropic();
        let x = [0.2, 0.3, 0.5];
        let y = [0.6, 0.1, 0.3];
        let grad = h.h_grad(&y).unwrap();
        let three_term = h.h_value(&x)
            - h.h_value(&y)
            - grad.iter().zip(x.iter().zip(&y)).map(|(g, (a, b))| g * (a - b)).sum::<f64>();
        assert!(close(h.bregman(&x, &y).unwrap(), three_term, 1e-14));
    }

    #[test]
    fn dual_norm_examples() {
        assert_eq!(MirrorMap::euclidean().dual_norm(&[3.0, 4.0]), 5.0);
        assert_eq!(MirrorMap::entropic().dual_norm(&[3.0, -4.0]), 4.0);
        assert_eq!(MirrorMap::euclidean_simplex().dual_norm(&[0.0, 0.0]), 0.0);
        assert_eq!(MirrorMap::entropic().dual_norm(&[0.0, 0.0, 0.0]), 0.0);
    }

    #[test]
    fn entropy_requires_simplex() {
        assert!(MirrorMap::new(MapKind::NegativeEntropy, FeasibleSet::FullSpace).is_err());
        assert_eq!(
            MirrorMap::new(MapKind::NegativeEntropy, FeasibleSet::ProbabilitySimplex).unwrap(),
            MirrorMap::entropic()
        );
        assert_eq!(MirrorMap::entropic().primal_norm_id(), PrimalNorm::L1);
        assert_eq!(MirrorMap::euclidean_simplex().primal_norm_id(), PrimalNorm::L2);
    }

    #[test]
    fn euclidean_full_space_step() {
        let x = MirrorMap::euclidean().mirror_step(&[0.0, 0.0], &[1.0, 2.0], 0.5).unwrap();
        assert_eq!(x.0, vec![-0.5, -1.0]);
    }

    #[test]
    fn entropic_step_example() {
        let x = MirrorMap::entropic()
            .mirror_step(&[0.5, 0.5], &[1.0, 0.0], std::f64::consts::LN_2)
            .unwrap();
        assert!(close(x[0], 1.0 / 3.0, 1e-15));
        assert!(close(x[1], 2.0 / 3.0, 1e-15));
    }

    #[test]
    fn euclidean_simplex_step_example() {
        let x = MirrorMap::euclidean_simplex().mirror_step(&[0.5, 0.5], &[1.0, 0.0], 2.0).unwrap();
        assert_eq!(x.0, vec![0.0, 1.0]);
    }

    #[test]
    fn entropic_step_survives_huge_steps_or_reports_underflow() {
        let h = MirrorMap::entropic();
        // large but representable: exp(-700) relative weight
        let x = h.mirror_step(&[0.5, 0.5], &[1.0, 0.0], 700.0).unwrap();
        assert!(x[0] > 0.0 && x[0] < 1e-300);
        assert!(matches!(h.mirror_step(&[0.5, 0.5], &[1.0, 0.0], 1e6), Err(Error::Domain(_))));
    }

    #[test]
    fn mirror_step_rejects_bad_inputs() {
        let h = MirrorMap::entropic();
        assert!(matches!(h.mirror_step(&[0.5, 0.5], &[1.0, 0.0], 0.0), Err(Error::InvalidInput(_))));
        assert!(matches!(h.mirror_step(&[0.5, 0.5], &[1.0, 0.0], -1.0), Err(Error::InvalidInput(_))));
        assert!(matches!(h.mirror_step(&[1.0, 0.0], &[1.0, 0.0], 1.0), Err(Error::Domain(_))));
        assert!(matches!(h.mirror_step(&[0.7, 0.7], &[1.0, 0.0], 1.0), Err(Error::Domain(_))));
        assert!(matches!(
            MirrorMap::euclidean().mirror_step(&[0.0], &[1.0, 0.0], 1.0),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn simplex_project_examples() {
        assert_eq!(simplex_project(&[2.0, 0.0]).0, vec![1.0, 0.0]);
        let p = simplex_project(&[0.3, 0.7]);
        assert!(close(p[0], 0.3, 1e-15) && close(p[1], 0.7, 1e-15));
        assert_eq!(simplex_project(&[1.0, 1.0]).0, vec![0.5, 0.5]);
        assert_eq!(simplex_project(&[-3.0, -1.0, 5.0]).0, vec![0.0, 0.0, 1.0]);
    }
}
