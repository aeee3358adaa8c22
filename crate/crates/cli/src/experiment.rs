//! The four harness commands: solve, compare, oracle and certify.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use mirror_polyak::{run, MirrorMap, Objective, Point, RunConfig, RunResult, Termination};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{parse_config, ExperimentConfig, InitialPoint, PolicyKind, PolicySpec};
use crate::error::{HarnessError, Result};
use crate::reference::{compute_reference, ReferenceOptimum};
use crate::trace::{read_trace_file, row_cells, write_trace_file, RESIDUAL_COLUMN};

/// Residuals below this count as a failed certificate.
pub const RESIDUAL_TOL: f64 = -1e-9;

/// A parsed config with its objective, map and reference optimum.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub base_dir: PathBuf,
    pub objective: Objective,
    pub map: MirrorMap,
    /// `None` when no reference can be computed for the instance.
    pub reference: Option<ReferenceOptimum>,
}

impl Experiment {
    pub fn load(config_path: &Path) -> Result<Self> {
        let config = parse_config(config_path)?;
        let base_dir = config_path.parent().unwrap_or(Path::new(".")).to_path_buf();
        Self::from_config(config, base_dir)
    }

    pub fn from_config(config: ExperimentConfig, base_dir: PathBuf) -> Result<Self> {
        config.validate(&base_dir)?;
        let objective = config.problem.objective(&base_dir)?;
        let map = config.map.kind.mirror_map();
        let reference = match compute_reference(&objective, config.output.reference_resolution) {
            Ok(r) => Some(r),
            Err(HarnessError::Unsupported(_)) => None,
            Err(e) => return Err(e),
        };
        Ok(Experiment { config, base_dir, objective, map, reference })
    }

    /// Output prefix, resolved against the config file's directory.
    pub fn prefix(&self) -> PathBuf {
        self.base_dir.join(&self.config.output.prefix)
    }

    /// Policy settings for `kind`: the config's own when it names that
    /// policy, defaults otherwise.
    pub fn policy_spec(&self, kind: PolicyKind) -> PolicySpec {
        if self.config.policy.kind() == kind {
            self.config.policy.clone()
        } else {
            PolicySpec::default_for(kind)
        }
    }

    pub fn run_config(&self) -> Result<RunConfig> {
        let spec = &self.config.run;
        let mut cfg = RunConfig {
            max_iterations: spec.max_iterations,
            zero_grad_tol: spec.zero_grad_tol,
            initial_point: None,
            certify_every: spec.certify_every,
            target_gap: None,
            known_f_star: None,
        };
        let d = self.objective.dim();
        cfg.initial_point = match &spec.initial_point {
            None => None,
            Some(InitialPoint::Coords(x)) => Some(Point::new(x.clone())),
            Some(InitialPoint::Named(name)) if name == "barycenter" => Some(Point::barycenter(d)),
            Some(InitialPoint::Named(_)) => Some(random_simplex_point(d, spec.seed)),
        };
        if let Some(gap) = spec.target_gap {
            let r = self.reference.as_ref().ok_or_else(|| {
                HarnessError::Config("run.target_gap needs a reference optimum, which this instance lacks".into())
            })?;
            cfg.target_gap = Some(gap);
            cfg.known_f_star = Some(r.f_star);
        }
        Ok(cfg)
    }

    /// Run one policy with the config's run settings.
    pub fn run_policy(&self, spec: &PolicySpec, cfg: &RunConfig) -> Result<RunResult> {
        let policy = spec.build(self.reference.as_ref().map(|r| r.f_star))?;
        Ok(run(&self.objective, &self.map, policy, cfg)?)
    }

    pub fn gap(&self, f: f64) -> Option<f64> {
        self.reference.as_ref().map(|r| f - r.f_star)
    }
}

/// Uniform draw from the simplex (normalized unit exponentials).
pub fn random_simplex_point(d: usize, seed: u64) -> Point {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e: Vec<f64> = (0..d).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let total: f64 = e.iter().sum();
    Point::new(e.into_iter().map(|v| v / total).collect())
}

/// Files and headline numbers from one run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub policy: &'static str,
    pub result: RunResult,
    pub gap: Option<f64>,
    pub trace_path: PathBuf,
    pub summary_path: PathBuf,
    pub plot_path: PathBuf,
}

impl RunOutcome {
    pub fn domain_violation(&self) -> bool {
        self.result.termination == Termination::DomainViolation
    }
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_else(|| "n/a".into())
}

fn summary_text(exp: &Experiment, policy: &str, res: &RunResult) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "policy = {policy}");
    let _ = writeln!(s, "termination = {}", res.termination);
    let _ = writeln!(s, "iterations = {}", res.history.len());
    let _ = writeln!(s, "best_f = {}", res.best_f);
    let _ = writeln!(s, "best_x = {:?}", res.best_x.0);
    match &exp.reference {
        Some(r) => {
            let _ = writeln!(s, "reference_f_star = {} ({})", r.f_star, r.method.as_str());
            let _ = writeln!(s, "gap = {}", res.best_f - r.f_star);
        }
        None => {
            let _ = writeln!(s, "reference_f_star = n/a");
            let _ = writeln!(s, "gap = n/a");
        }
    }
    let _ = writeln!(s, "min_certifier_residual = {}", fmt_opt(res.min_residual()));
    let _ = writeln!(s, "domain_violation = {}", res.termination == Termination::DomainViolation);
    s
}

fn plot_text(exp: &Experiment, res: &RunResult) -> String {
    let mut s = String::from("k,best_f,gap\n");
    for r in &res.history {
        let gap = exp.gap(r.best_f).map(|g| g.to_string()).unwrap_or_default();
        let _ = writeln!(s, "{},{},{}", r.k, r.best_f, gap);
    }
    s
}

fn write_outputs(exp: &Experiment, prefix: &Path, policy: &'static str, result: RunResult) -> Result<RunOutcome> {
    let trace_path = with_suffix(prefix, ".trace.csv");
    let summary_path = with_suffix(prefix, ".summary.txt");
    let plot_path = with_suffix(prefix, ".plot.csv");
    ensure_parent(&trace_path)?;
    write_trace_file(&trace_path, &result.history)?;
    write_text(&summary_path, &summary_text(exp, policy, &result))?;
    write_text(&plot_path, &plot_text(exp, &result))?;
    Ok(RunOutcome { policy, gap: exp.gap(result.best_f), result, trace_path, summary_path, plot_path })
}

/// Run the configured policy and write `<prefix>.trace.csv`,
/// `<prefix>.summary.txt` and `<prefix>.plot.csv`.
pub fn solve(exp: &Experiment) -> Result<RunOutcome> {
    let cfg = exp.run_config()?;
    let spec = &exp.config.policy;
    let result = exp.run_policy(spec, &cfg)?;
    write_outputs(exp, &exp.prefix(), spec.kind().name(), result)
}

/// Run several policies on the same instance, each on its own thread.
///
/// Per-policy files go to `<prefix>.<policy>.*` and a one-row-per-policy
/// table to `<prefix>.compare.csv`.
pub fn compare(exp: &Experiment, policies: &[PolicyKind]) -> Result<Vec<RunOutcome>> {
    if policies.is_empty() {
        return Err(HarnessError::Config("--policies needs at least one policy".into()));
    }
    let mut seen = Vec::new();
    for p in policies {
        if seen.contains(p) {
            return Err(HarnessError::Config(format!("policy '{}' listed twice", p.name())));
        }
        seen.push(*p);
    }
    let cfg = exp.run_config()?;
    let specs: Vec<PolicySpec> = policies.iter().map(|&k| exp.policy_spec(k)).collect();
    for s in &specs {
        s.validate()?;
    }
    let results: Vec<Result<RunResult>> = std::thread::scope(|scope| {
        let handles: Vec<_> = specs.iter().map(|s| scope.spawn(|| exp.run_policy(s, &cfg))).collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(HarnessError::Runtime("solver thread panicked".into()))))
            .collect()
    });

    let prefix = exp.prefix();
    let mut outcomes = Vec::new();
    for (kind, res) in policies.iter().zip(results) {
        let p = with_suffix(&prefix, &format!(".{}", kind.name()));
        outcomes.push(write_outputs(exp, &p, kind.name(), res?)?);
    }
    let mut table = String::from("policy,termination,iterations,best_f,gap,min_certifier_residual,domain_violation\n");
    for o in &outcomes {
        let _ = writeln!(
            table,
            "{},{},{},{},{},{},{}",
            o.policy,
            o.result.termination,
            o.result.history.len(),
            o.result.best_f,
            o.gap.map(|g| g.to_string()).unwrap_or_default(),
            o.result.min_residual().map(|g| g.to_string()).unwrap_or_default(),
            o.domain_violation()
        );
    }
    let path = with_suffix(&prefix, ".compare.csv");
    ensure_parent(&path)?;
    write_text(&path, &table)?;
    Ok(outcomes)
}

/// Reference optimum at an explicit resolution.
pub fn oracle(exp: &Experiment, resolution: Option<f64>) -> Result<ReferenceOptimum> {
    compute_reference(&exp.objective, resolution.or(exp.config.output.reference_resolution))
}

pub fn format_reference(r: &ReferenceOptimum) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "method = {}", r.method.as_str());
    if let Some(res) = r.resolution {
        let _ = writeln!(s, "resolution = {res}");
    }
    let _ = writeln!(s, "f_star = {}", r.f_star);
    let _ = writeln!(s, "x_star = {:?}", r.x_star);
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertifyReport {
    pub rows: usize,
    pub min_residual: Option<f64>,
    /// Human-readable description of every failed check.
    pub failures: Vec<String>,
}

impl CertifyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Replay the config with the certifier on every step and check a trace
/// against it: every column but the residual must match exactly, all
/// residuals must be at least [`RESIDUAL_TOL`], and `best_f` must never
/// increase.
pub fn certify(exp: &Experiment, trace_path: &Path) -> Result<CertifyReport> {
    let rows = read_trace_file(trace_path)?;
    let mut cfg = exp.run_config()?;
    cfg.certify_every = 1;
    let replay = exp.run_policy(&exp.config.policy, &cfg)?;
    let mut failures = Vec::new();

    if rows.len() != replay.history.len() {
        failures.push(format!("trace has {} rows, replay has {}", rows.len(), replay.history.len()));
    }
    for (i, (row, rec)) in rows.iter().zip(&replay.history).enumerate() {
        let expected = row_cells(rec);
        for (j, (a, b)) in row.iter().zip(expected.iter()).enumerate() {
            if j != RESIDUAL_COLUMN && a != b {
                failures.push(format!("row {}: column {} is {a}, replay gives {b}", i + 1, crate::trace::COLUMNS[j]));
                break;
            }
        }
        if failures.len() > 20 {
            failures.push("further mismatches suppressed".into());
            break;
        }
    }
    for rec in &replay.history {
        if let Some(r) = rec.certifier_residual {
            if r < RESIDUAL_TOL {
                failures.push(format!("iteration {}: certifier residual {r}", rec.k));
            }
        }
    }
    let mut prev = f64::INFINITY;
    for (i, row) in rows.iter().enumerate() {
        match row[2].parse::<f64>() {
            Ok(b) if b <= prev => prev = b,
            Ok(b) => failures.push(format!("row {}: best_f rose from {prev} to {b}", i + 1)),
            Err(_) => failures.push(format!("row {}: best_f '{}' is not a number", i + 1, row[2])),
        }
    }
    Ok(CertifyReport { rows: rows.len(), min_residual: replay.min_residual(), failures })
}
