//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::time::{Duration, Instant};

use mirror_polyak::{
    run_observed, AdaptiveParams, LevelParams, MirrorMap, Objective, Point, Policy,
    PolicySnapshot, RunConfig, RunResult, Termination,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn symmetric_kelly() -> Objective {
    Objective::kelly(vec![vec![2.0, 1.0], vec![1.0, 2.0]], vec![0.5, 0.5]).unwrap()
}

fn sparse_kelly() -> Objective {
    Objective::kelly(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![0.5, 0.5]).unwrap()
}

/// Independent oracle for the symmetric instance: brute-force grid over the
/// 2-simplex at resolution 1e-5, checked against the symmetric point.
fn symmetric_f_star() -> f64 {
    let obj = symmetric_kelly();
    let n = 100_000;
    let grid_min = (0..=n)
        .map(|i| {
            let t = i as f64 / n as f64;
            obj.eval(&[t, 1.0 - t]).unwrap()
        })
        .fold(f64::INFINITY, f64::min);
    let closed = -(1.5f64).ln();
    assert!((grid_min - closed).abs() < 1e-12, "grid {grid_min} vs symmetric {closed}");
    closed
}

/// Run with certification on every step; returns the result, the smallest
/// residual, the number of certified steps and the smallest coordinate seen.
fn certified_run(obj: &Objective, map: MirrorMap, policy: Policy, cfg: RunConfig) -> (RunResult, f64, usize, f64) {
    let cfg = cfg.with_certify_every(1);
    let mut min_coord = f64::INFINITY;
    let res = run_observed(obj, &map, policy, &cfg, |_, x| min_coord = min_coord.min(x.min_coord())).unwrap();
    let residuals: Vec<f64> = res.history.iter().filter_map(|r| r.certifier_residual).collect();
    let steps = res.history.iter().filter(|r| r.eta.is_some()).count();
    assert_eq!(residuals.len(), steps, "every step must be certified");
    let min_res = residuals.iter().copied().fold(f64::INFINITY, f64::min);
    (res, min_res, steps, min_coord)
}

const STARTS: [[f64; 2]; 2] = [[0.5, 0.5], [0.9, 0.1]];

fn criterion_1(f_star: f64, residuals: &mut Vec<f64>) -> Outcome {
    let t0 = Instant::now();
    let params = AdaptiveParams { delta1: 0.1, delta_floor: 1e-4, beta: 0.5, gamma: 1.5, c: 1.0 };
    // default start (barycenter)
    let cfg = RunConfig::default().with_max_iterations(100_000);
    let (res, min_res, _, _) =
        certified_run(&symmetric_kelly(), MirrorMap::entropic(), Policy::adaptive(params).unwrap(), cfg);
    residuals.push(min_res);
    let gap = res.best_f - f_star;
    let elapsed = t0.elapsed();
    Outcome {
        name: "1 adaptive-estimate policy reaches f* + δ",
        pass: gap <= 1e-4 + 1e-6 && elapsed < Duration::from_secs(10),
        detail: format!("gap {gap:.3e} (≤ 1.01e-4), {elapsed:.2?} (< 10 s)"),
    }
}

fn criterion_2(f_star: f64, residuals: &mut Vec<f64>) -> Outcome {
    let t0 = Instant::now();
    let params = LevelParams { delta1: 0.1, budget: 20.0, c: 1.0 };
    let mut worst_gap = f64::NEG_INFINITY;
    for start in STARTS {
        let cfg = RunConfig::default().with_max_iterations(1_000_000).with_initial_point(start.to_vec());
        let (res, min_res, _, _) =
            certified_run(&symmetric_kelly(), MirrorMap::entropic(), Policy::level(params).unwrap(), cfg);
        residuals.push(min_res);
        worst_gap = worst_gap.max(res.best_f - f_star);
    }
    let elapsed = t0.elapsed();
    Outcome {
        name: "2 subgradient-level policy reaches f*",
        pass: worst_gap <= 1e-5 && elapsed < Duration::from_secs(60),
        detail: format!("worst gap {worst_gap:.3e} (≤ 1e-5), {elapsed:.2?} (< 60 s)"),
    }
}

fn criterion_3(residuals: &mut Vec<f64>) -> Outcome {
    let obj = Objective::linear(vec![1.0, 0.0]).unwrap();
    let cfg = RunConfig::default().with_max_iterations(1_000_000);
    let (res, min_res, _, min_coord) =
        certified_run(&obj, MirrorMap::entropic(), Policy::level(LevelParams::default()).unwrap(), cfg);
    residuals.push(min_res);
    Outcome {
        name: "3 boundary minimizer reached from the interior",
        pass: res.best_f <= 1e-4 && min_coord > 0.0,
        detail: format!("best_f {:.3e} (≤ 1e-4), min coordinate {min_coord:.3e} (> 0)", res.best_f),
    }
}

fn criterion_4(residuals: &[f64]) -> Outcome {
    let worst = residuals.iter().copied().fold(f64::INFINITY, f64::min);
    Outcome {
        name: "4 descent certifier holds on every step of runs 1-3",
        pass: residuals.len() == 4 && worst >= -1e-9,
        detail: format!("smallest residual {worst:.3e} over {} runs (≥ -1e-9)", residuals.len()),
    }
}

fn criterion_5(f_star: f64) -> Outcome {
    let x_star = Point(vec![0.5, 0.5]);
    let mut worst_increase = f64::NEG_INFINITY;
    let mut steps = 0;
    for map in [MirrorMap::entropic(), MirrorMap::euclidean_simplex()] {
        for start in [[0.9, 0.1], [0.15, 0.85]] {
            let cfg = RunConfig::default().with_max_iterations(10_000).with_initial_point(start.to_vec());
            let mut last: Option<f64> = None;
            run_observed(&symmetric_kelly(), &map, Policy::classic(f_star, 1.0).unwrap(), &cfg, |r, x| {
                let d = map.bregman(&x_star, x).unwrap();
                if let Some(prev) = last {
                    worst_increase = worst_increase.max(d - prev);
                }
                last = Some(d);
                steps += r.eta.is_some() as usize;
            })
            .unwrap();
        }
    }
    Outcome {
        name: "5 classic Polyak divergence to x* is nonincreasing",
        pass: worst_increase <= 1e-12,
        detail: format!("largest per-step increase {worst_increase:.3e} (≤ 1e-12) over {steps} steps"),
    }
}

fn random_kelly(rng: &mut ChaCha8Rng) -> Objective {
    let d = rng.gen_range(2..=5);
    let n = rng.gen_range(1..=8);
    let returns: Vec<Vec<f64>> = (0..n)
        .map(|_| loop {
            let row: Vec<f64> =
                (0..d).map(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.0..2.0) }).collect();
            if row.iter().any(|&v| v > 0.0) {
                break row;
            }
        })
        .collect();
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = w.iter().sum();
    Objective::kelly(returns, w.iter().map(|v| v / total).collect()).unwrap()
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut violations = Vec::new();
    let mut rows = 0usize;
    let map = MirrorMap::entropic();
    for instance in 0..1000 {
        let obj = random_kelly(&mut rng);
        let cfg = RunConfig::default().with_max_iterations(1000);

        let floor = rng.gen_range(1e-4..0.05);
        let ap = AdaptiveParams {
            delta1: rng.gen_range(floor..0.5),
            delta_floor: floor,
            beta: rng.gen_range(0.0..1.0),
            gamma: rng.gen_range(1.0..3.0),
            c: rng.gen_range(0.51..3.0),
        };
        let mut prev: Option<(f64, f64, f64)> = None; // (delta, target, best_f)
        run_observed(&obj, &map, Policy::adaptive(ap).unwrap(), &cfg, |r, _| {
            rows += 1;
            let PolicySnapshot::Adaptive { delta } = r.policy else { unreachable!() };
            if delta < ap.delta_floor {
                violations.push(format!("instance {instance} k {}: δ below floor", r.k));
            }
            if let Some((old, target, best)) = prev {
                let expected = if r.f_x <= target { ap.gamma * old } else { (ap.beta * old).max(ap.delta_floor) };
                if delta != expected {
                    violations.push(format!("instance {instance} k {}: δ {delta} expected {expected}", r.k));
                }
                if r.best_f > best {
                    violations.push(format!("instance {instance} k {}: best_f increased", r.k));
                }
            }
            prev = r.target.map(|t| (delta, t, r.best_f));
        })
        .unwrap();

        let lp = LevelParams {
            delta1: rng.gen_range(1e-3..1.0),
            budget: rng.gen_range(0.1..50.0),
            c: rng.gen_range(0.51..3.0),
        };
        // (delta, sigma after accumulation, level, group_record, best_f)
        let mut prev: Option<(f64, f64, u64, f64, f64)> = None;
        run_observed(&obj, &map, Policy::level(lp).unwrap(), &cfg, |r, _| {
            rows += 1;
            let PolicySnapshot::Level { delta, sigma, level, group_record } = r.policy else { unreachable!() };
            if let Some((old_delta, sigma_pre, old_level, old_record, old_best)) = prev {
                let decrease = r.f_x <= old_record - 0.5 * old_delta;
                if level == old_level + 1 {
                    if sigma != 0.0 {
                        violations.push(format!("instance {instance} k {}: σ not reset", r.k));
                    }
                    if group_record != r.best_f {
                        violations.push(format!("instance {instance} k {}: record not snapshotted", r.k));
                    }
                    let ok = if decrease {
                        delta == old_delta
                    } else {
                        sigma_pre > lp.budget && delta == 0.5 * old_delta
                    };
                    if !ok {
                        violations.push(format!("instance {instance} k {}: illegal transition", r.k));
                    }
                } else if level == old_level {
                    if r.eta.is_some() && (decrease || sigma_pre > lp.budget) {
                        violations.push(format!("instance {instance} k {}: missed transition", r.k));
                    }
                    if delta != old_delta || sigma != sigma_pre || group_record != old_record {
                        violations.push(format!("instance {instance} k {}: state changed without transition", r.k));
                    }
                } else {
                    violations.push(format!("instance {instance} k {}: level jumped", r.k));
                }
                if r.best_f > old_best {
                    violations.push(format!("instance {instance} k {}: best_f increased", r.k));
                }
            }
            prev = r.eta.map(|eta| {
                let g = r.g_dual_norm.unwrap();
                (delta, sigma + lp.c * eta * g, level, group_record, r.best_f)
            });
        })
        .unwrap();
    }
    Outcome {
        name: "6 policy state machines keep their invariants",
        pass: violations.is_empty(),
        detail: format!(
            "{} violations over {rows} iterations{}",
            violations.len(),
            violations.first().map(|v| format!(", first: {v}")).unwrap_or_default()
        ),
    }
}

const STALL_START: [f64; 2] = [0.9, 0.1];

fn criterion_7a() -> Outcome {
    let f_star = 2f64.ln();
    let cfg = RunConfig::default().with_max_iterations(10_000).with_initial_point(STALL_START.to_vec());
    let mut min_coord = f64::INFINITY;
    let res = run_observed(
        &sparse_kelly(),
        &MirrorMap::euclidean_simplex(),
        Policy::classic(f_star, 1.0).unwrap(),
        &cfg,
        |_, x| min_coord = min_coord.min(x.min_coord()),
    )
    .unwrap();
    Outcome {
        name: "7a projected iterates stall on the sparse instance",
        pass: res.termination == Termination::DomainViolation,
        detail: format!(
            "termination {} after {} iterations, min coordinate {min_coord:.3e}",
            res.termination,
            res.history.len()
        ),
    }
}

fn criterion_7b() -> Outcome {
    let f_star = 2f64.ln();
    let cfg = RunConfig::default().with_max_iterations(10_000).with_initial_point(STALL_START.to_vec());
    let mut min_coord = f64::INFINITY;
    let res = run_observed(
        &sparse_kelly(),
        &MirrorMap::entropic(),
        Policy::classic(f_star, 1.0).unwrap(),
        &cfg,
        |_, x| min_coord = min_coord.min(x.min_coord()),
    )
    .unwrap();
    Outcome {
        name: "7b entropic iterates stay interior on the sparse instance",
        pass: res.termination == Termination::MaxIterations && res.history.len() == 10_000 && min_coord > 0.0,
        detail: format!(
            "termination {} after {} iterations, min coordinate {min_coord:.3e} (> 0)",
            res.termination,
            res.history.len()
        ),
    }
}

/// Central differences along each coordinate.
fn finite_difference(obj: &Objective, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let mut up = x.to_vec();
            let mut down = x.to_vec();
            up[i] += h;
            down[i] -= h;
            (obj.eval(&up).unwrap() - obj.eval(&down).unwrap()) / (2.0 * h)
        })
        .collect()
}

fn random_simplex_interior(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..d).map(|_| rng.gen_range(0.02..1.0)).collect();
    let total: f64 = w.iter().sum();
    w.iter().map(|v| v / total).collect()
}

fn criterion_8() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let anchors = vec![vec![0.0, 1.0, -1.0], vec![2.0, 0.5, 0.0], vec![-1.0, -1.0, 1.0]];
    let objectives = vec![
        ("symmetric kelly", symmetric_kelly()),
        (
            "kelly d=4",
            Objective::kelly(
                vec![
                    vec![1.2, 0.3, 0.0, 2.0],
                    vec![0.5, 1.5, 0.7, 0.1],
                    vec![0.0, 0.9, 1.1, 0.4],
                    vec![2.2, 0.0, 0.6, 0.8],
                    vec![0.3, 0.3, 0.3, 0.3],
                    vec![1.0, 2.0, 0.0, 0.0],
                ],
                vec![0.1, 0.2, 0.15, 0.25, 0.2, 0.1],
            )
            .unwrap(),
        ),
        ("linear", Objective::linear(vec![1.0, 0.0, -0.5]).unwrap()),
        ("piecewise linear", Objective::piecewise_linear(anchors.clone(), vec![1.0, 0.5, 2.0]).unwrap()),
    ];
    let mut worst = 0.0f64;
    let mut checked = 0;
    for (_, obj) in &objectives {
        let mut count = 0;
        while count < 200 {
            let x = match obj {
                Objective::SyntheticPiecewiseLinear { .. } => {
                    let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-3.0..3.0)).collect();
                    let near_kink = anchors.iter().any(|a| a.iter().zip(&x).any(|(ai, xi)| (ai - xi).abs() < 1e-3));
                    if near_kink {
                        continue;
                    }
                    x
                }
                _ => random_simplex_interior(&mut rng, obj.dim()),
            };
            let g = obj.subgrad(&x).unwrap();
            let fd = finite_difference(obj, &x, 1e-6);
            let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
            let err = g.iter().zip(&fd).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())) / scale;
            worst = worst.max(err);
            count += 1;
            checked += 1;
        }
    }
    let elapsed = t0.elapsed();
    Outcome {
        name: "8 subgradient oracle matches finite differences",
        pass: worst <= 1e-5 && elapsed < Duration::from_secs(5),
        detail: format!("worst relative error {worst:.3e} (≤ 1e-5) over {checked} points, {elapsed:.2?} (< 5 s)"),
    }
}

fn main() {
    let f_star = symmetric_f_star();
    let (mut outcomes, residuals) = std::thread::scope(|s| {
        let h1 = s.spawn(move || {
            let mut res = Vec::new();
            let o = criterion_1(f_star, &mut res);
            (o, res)
        });
        let h2 = s.spawn(move || {
            let mut res = Vec::new();
            let o = criterion_2(f_star, &mut res);
            (o, res)
        });
        let h3 = s.spawn(|| {
            let mut res = Vec::new();
            let o = criterion_3(&mut res);
            (o, res)
        });
        let h5 = s.spawn(move || criterion_5(f_star));
        let h6 = s.spawn(criterion_6);
        let h7a = s.spawn(criterion_7a);
        let h7b = s.spawn(criterion_7b);
        let h8 = s.spawn(criterion_8);

        let mut residuals = Vec::new();
        let mut outcomes = Vec::new();
        for h in [h1, h2, h3] {
            let (o, r) = h.join().unwrap();
            outcomes.push(o);
            residuals.extend(r);
        }
        for h in [h5, h6, h7a, h7b, h8] {
            outcomes.push(h.join().unwrap());
        }
        (outcomes, residuals)
    });
    outcomes.insert(3, criterion_4(&residuals));

    let mut failed = 0;
    for o in &outcomes {
        println!("[{}] criterion {}: {}", if o.pass { "PASS" } else { "FAIL" }, o.name, o.detail);
        failed += !o.pass as usize;
    }
    println!("{} of {} criteria passed", outcomes.len() - failed, outcomes.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
