//! Reference optima used to report optimality gaps.

use mirror_polyak::Objective;

use crate::error::{HarnessError, Result};

/// Largest number of lattice points a grid search may visit.
pub const MAX_GRID_POINTS: u64 = 5_000_000;

/// Grid searches only run up to this dimension.
pub const MAX_GRID_DIM: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceMethod {
    GridSearch,
    AnalyticVertex,
    ClosedForm,
}

impl ReferenceMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            ReferenceMethod::GridSearch => "grid-search",
            ReferenceMethod::AnalyticVertex => "analytic-vertex",
            ReferenceMethod::ClosedForm => "closed-form",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceOptimum {
    pub f_star: f64,
    pub x_star: Vec<f64>,
    pub method: ReferenceMethod,
    /// Lattice spacing of a grid search; `None` for exact methods.
    pub resolution: Option<f64>,
}

/// Resolution used when the config does not set one.
pub fn default_resolution(dim: usize) -> f64 {
    match dim {
        0..=2 => 1e-5,
        3 => 1e-3,
        _ => 1e-2,
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Number of points of the simplex lattice with `n` subdivisions in dimension `d`.
pub fn simplex_grid_size(d: usize, n: u64) -> u64 {
    binomial(n + d as u64 - 1, d as u64 - 1)
}

/// Visit every point `m / n` with `m ∈ ℕ^d`, `Σ m = n`.
pub fn simplex_grid(d: usize, n: u64, mut visit: impl FnMut(&[f64])) {
    let mut counts = vec![0u64; d];
    let mut x = vec![0.0; d];
    fn rec(i: usize, left: u64, n: u64, counts: &mut [u64], x: &mut [f64], visit: &mut dyn FnMut(&[f64])) {
        let d = counts.len();
        if i == d - 1 {
            counts[i] = left;
            x[i] = left as f64 / n as f64;
            visit(x);
            return;
        }
        for m in 0..=left {
            counts[i] = m;
            x[i] = m as f64 / n as f64;
            rec(i + 1, left - m, n, counts, x, visit);
        }
    }
    rec(0, n, n, &mut counts, &mut x, &mut visit);
}

fn grid_subdivisions(resolution: f64) -> Result<u64> {
    if !(resolution > 0.0 && resolution < 1.0) {
        return Err(HarnessError::Config(format!("resolution must lie in (0, 1), got {resolution}")));
    }
    Ok((1.0 / resolution).round().max(1.0) as u64)
}

/// Best value over the lattice of spacing `resolution`, refined once on a
/// ten times finer lattice within one coarse cell of the best point.
fn grid_search(obj: &Objective, resolution: f64) -> Result<ReferenceOptimum> {
    let d = obj.dim();
    if d > MAX_GRID_DIM {
        return Err(HarnessError::Unsupported(format!(
            "grid reference only supports dimension ≤ {MAX_GRID_DIM}, got {d}"
        )));
    }
    let n = grid_subdivisions(resolution)?;
    let size = simplex_grid_size(d, n);
    if size > MAX_GRID_POINTS {
        return Err(HarnessError::Unsupported(format!(
            "grid with resolution {resolution} in dimension {d} has {size} points (limit {MAX_GRID_POINTS})"
        )));
    }
    let mut best_f = f64::INFINITY;
    let mut best_x = vec![1.0 / d as f64; d];
    let mut err = None;
    simplex_grid(d, n, |x| match obj.eval(x) {
        Ok(f) if f < best_f => {
            best_f = f;
            best_x = x.to_vec();
        }
        Ok(_) => {}
        Err(e) => err = Some(e),
    });
    if let Some(e) = err {
        return Err(e.into());
    }
    if !best_f.is_finite() {
        return Err(HarnessError::Unsupported("objective is infinite on the whole grid".into()));
    }

    // offsets in steps of h on the first d − 1 coordinates; the last closes the sum
    let spacing = 1.0 / n as f64;
    let h = spacing / 10.0;
    let centre = best_x.clone();
    let mut offsets = vec![-10i64; d - 1];
    let mut candidate = vec![0.0; d];
    loop {
        let mut partial = 0.0;
        for i in 0..d - 1 {
            candidate[i] = centre[i] + offsets[i] as f64 * h;
            partial += candidate[i];
        }
        candidate[d - 1] = 1.0 - partial;
        if candidate.iter().all(|&c| c >= 0.0) {
            let f = obj.eval(&candidate)?;
            if f < best_f {
                best_f = f;
                best_x.copy_from_slice(&candidate);
            }
        }
        let mut i = 0;
        while i < d - 1 {
            offsets[i] += 1;
            if offsets[i] <= 10 {
                break;
            }
            offsets[i] = -10;
            i += 1;
        }
        if i == d - 1 {
            break;
        }
    }
    Ok(ReferenceOptimum { f_star: best_f, x_star: best_x, method: ReferenceMethod::GridSearch, resolution: Some(resolution) })
}

/// Weighted median of `values`: a minimizer of `Σ wᵢ |t − vᵢ|`.
fn weighted_median(values: &[f64], weights: &[f64]) -> f64 {
    let mut pairs: Vec<(f64, f64)> = values.iter().copied().zip(weights.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let half = weights.iter().sum::<f64>() / 2.0;
    let mut acc = 0.0;
    for (v, w) in &pairs {
        acc += w;
        if acc >= half {
            return *v;
        }
    }
    pairs.last().map(|p| p.0).unwrap_or(0.0)
}

/// Compute a reference optimum for `obj`.
///
/// Linear objectives are minimized at the vertex with the smallest cost and
/// the piecewise-linear objective separates into weighted medians; Kelly
/// objectives fall back to a simplex grid search at `resolution`.
pub fn compute_reference(obj: &Objective, resolution: Option<f64>) -> Result<ReferenceOptimum> {
    match obj {
        Objective::LinearOnSimplex { cost } => {
            let (i, &c) = cost
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .expect("costs are nonempty");
            let mut x = vec![0.0; cost.len()];
            x[i] = 1.0;
            Ok(ReferenceOptimum { f_star: c, x_star: x, method: ReferenceMethod::AnalyticVertex, resolution: None })
        }
        Objective::SyntheticPiecewiseLinear { anchors, weights } => {
            let d = obj.dim();
            let x: Vec<f64> = (0..d)
                .map(|i| {
                    let column: Vec<f64> = anchors.iter().map(|a| a[i]).collect();
                    weighted_median(&column, weights)
                })
                .collect();
            Ok(ReferenceOptimum { f_star: obj.eval(&x)?, x_star: x, method: ReferenceMethod::ClosedForm, resolution: None })
        }
        Objective::Kelly(_) => grid_search(obj, resolution.unwrap_or_else(|| default_resolution(obj.dim()))),
    }
}
