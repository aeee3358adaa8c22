//! Mirror descent with Polyak-type step sizes that do not require the
//! optimal value.
//!
//! The crate is organised in four layers:
//!
//! * [`geometry`]: mirror maps (Euclidean and negative entropy), Bregman
//!   divergences, dual norms and the mirror step.
//! * [`objectives`]: the Kelly portfolio objective, a linear objective on
//!   the simplex and a piecewise-linear test problem.
//! * [`policies`]: the classic Polyak step, the adaptive-estimate step and
//!   the subgradient-level step.
//! * [`solver`]: the outer loop, run history, and a per-step certifier of
//!   the one-step descent inequality.
//!
//! ```
//! use mirror_polyak::{run, LevelParams, MirrorMap, Objective, Policy, RunConfig};
//!
//! let kelly = Objective::kelly(vec![vec![2.0, 1.0], vec![1.0, 2.0]], vec![0.5, 0.5]).unwrap();
//! let cfg = RunConfig::default()
//!     .with_initial_point(vec![0.9, 0.1])
//!     .with_max_iterations(5_000);
//! let policy = Policy::level(LevelParams::default()).unwrap();
//! let result = run(&kelly, &MirrorMap::entropic(), policy, &cfg).unwrap();
//! assert!(result.best_f - (-(1.5f64).ln()) < 1e-4);
//! ```
//!
//! The guide in `book/` walks through each layer; its code listings are
//! compiled and run as doc-tests of this crate.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // negated comparisons reject NaN

pub mod error;
pub mod geometry;
pub mod objectives;
pub mod policies;
pub mod solver;

pub use error::{Error, Result};
pub use geometry::{simplex_project, FeasibleSet, MapKind, MirrorMap, Point, PrimalNorm};
pub use objectives::{Kelly, Objective};
pub use policies::{
    AdaptiveEstimate, AdaptiveParams, ClassicPolyak, LevelParams, LevelTransition, Policy,
    PolicySnapshot, Proposal, SubgradientLevel, ZERO_GRAD_TOL,
};
pub use solver::{
    certifier_probe, certify_descent, run, run_observed, IterationRecord, RunConfig, RunResult,
    Termination,
};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/objectives.md")]
    mod objectives {}
    #[doc = include_str!("../../../book/src/policies.md")]
    mod policies {}
    #[doc = include_str!("../../../book/src/solver.md")]
    mod solver {}
}
