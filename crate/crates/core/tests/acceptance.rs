//! Acceptance suite: runs each criterion, prints one PASS/FAIL line per
//! criterion, and exits non-zero if any failed.

use std::f64::consts::LN_2;
use std::time::{Duration, Instant};

use cde_core::objectives::{f_gradient, gallager_e0_neg, GradientPoint, RateConstraintPoint};
use cde_core::oracle::{descent_min_gradient, grid_min, grid_min_double, GridSpec};
use cde_core::prob::{mutual_information, Channel, DivergenceWeights, JointDistribution};
use cde_core::solvers::{
    solve, solve_fixed_alpha_rho, solve_fixed_rate, sweep_curve, Scheme, SolverConfig,
    SolverOptions,
};
use cde_core::updates::{update_family_a, update_family_b, Family, FamilyAParams, FamilyBParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn random_dist(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln() + 1e-3).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / s).collect()
}

fn random_channel(rng: &mut impl Rng, nx: usize, ny: usize, with_cost: bool) -> Channel {
    let rows = (0..nx).map(|_| random_dist(rng, ny)).collect();
    let cost = with_cost.then(|| (0..nx).map(|_| rng.gen::<f64>()).collect());
    Channel::from_rows(rows, cost).unwrap()
}

fn random_joint(rng: &mut impl Rng, nx: usize, ny: usize) -> JointDistribution {
    JointDistribution::new(nx, ny, random_dist(rng, nx * ny)).unwrap()
}

fn useless() -> Channel {
    Channel::from_rows(vec![vec![0.5, 0.5], vec![0.5, 0.5]], None).unwrap()
}

fn unconstrained(rate: f64) -> RateConstraintPoint {
    RateConstraintPoint::unconstrained(rate).unwrap()
}

fn check(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn noiseless_binary() -> Outcome {
    let id = Channel::identity(2).unwrap();
    let mut worst = 0.0f64;
    let mut slowest = Duration::ZERO;
    for rate in [0.0, 0.3, LN_2, 0.8, 1.0, 1.5] {
        let start = Instant::now();
        let r = solve_fixed_rate(&id, unconstrained(rate), &SolverOptions::default())
            .map_err(|e| format!("R = {rate}: {e}"))?;
        slowest = slowest.max(start.elapsed());
        let target = (rate - LN_2).max(0.0);
        worst = worst.max((r.value - target).abs());
    }
    check(
        worst <= 1e-6 && slowest < Duration::from_secs(1),
        format!("max |E - |R - ln 2|+| = {worst:.3e}, slowest point {slowest:.2?}"),
    )
}

fn useless_binary() -> Outcome {
    let p = useless();
    let t = DivergenceWeights::new(1.0, 0.0, 0.0, 0.0).unwrap();
    let grid = GridSpec::new(200).unwrap();
    let (mut solver_err, mut grid_err) = (0.0f64, 0.0f64);
    for rate in [0.0, 0.2, 0.5, 1.0] {
        let r = solve_fixed_rate(&p, unconstrained(rate), &SolverOptions::default())
            .map_err(|e| format!("R = {rate}: {e}"))?;
        solver_err = solver_err.max((r.value - rate).abs());
        let g = grid_min_double(&p, &t, unconstrained(rate), grid).map_err(|e| e.to_string())?;
        grid_err = grid_err.max((g.value - rate).abs());
    }
    check(
        solver_err <= 1e-6 && grid_err <= 0.01,
        format!("max |E - R| = {solver_err:.3e}; grid (resolution 200) max |E - R| = {grid_err:.3e}"),
    )
}

fn bsc_below_and_above_capacity() -> Outcome {
    let p = Channel::bsc(0.1).unwrap();
    let t = DivergenceWeights::new(1.0, 0.0, 0.0, 0.0).unwrap();
    let grid = GridSpec::new(200).unwrap();
    let mut solver_time = Duration::ZERO;
    let (mut zero_err, mut mi_slack, mut grid_err) = (0.0f64, f64::INFINITY, 0.0f64);
    for rate in [0.1, 0.2, 0.3] {
        let start = Instant::now();
        let r = solve_fixed_rate(&p, unconstrained(rate), &SolverOptions::default())
            .map_err(|e| format!("R = {rate}: {e}"))?;
        solver_time += start.elapsed();
        zero_err = zero_err.max(r.value.abs());
        let q = r.final_joint.input_marginal().to_vec();
        let qp = JointDistribution::product(&q, &p).unwrap();
        mi_slack = mi_slack.min(mutual_information(&qp) - (rate - 1e-4));
    }
    let mut detail = Vec::new();
    for rate in [0.5, 0.6, 0.69] {
        let start = Instant::now();
        let r = solve_fixed_rate(&p, unconstrained(rate), &SolverOptions::default())
            .map_err(|e| format!("R = {rate}: {e}"))?;
        solver_time += start.elapsed();
        let g = grid_min_double(&p, &t, unconstrained(rate), grid).map_err(|e| e.to_string())?;
        grid_err = grid_err.max((r.value - g.value).abs());
        // diagnostic only: sup_rho min_Q [E0(-rho, Q) + rho R] on fine 1-D grids
        let legendre = (0..=1000)
            .map(|i| {
                let rho = 0.999 * i as f64 / 1000.0;
                let inner = (1..1000)
                    .map(|k| {
                        let q = k as f64 / 1000.0;
                        gallager_e0_neg(rho, &[q, 1.0 - q], &p).unwrap()
                    })
                    .fold(f64::INFINITY, f64::min);
                inner + rho * rate
            })
            .fold(f64::NEG_INFINITY, f64::max);
        detail.push(format!(
            "R={rate}: E={:.6} grid={:.6} legendre={:.6}",
            r.value, g.value, legendre
        ));
    }
    check(
        zero_err <= 1e-6 && mi_slack >= 0.0 && grid_err <= 2e-3 && solver_time < Duration::from_secs(10),
        format!(
            "max |E| below capacity = {zero_err:.3e}, min I(Q,P) - (R - 1e-4) = {mi_slack:.3e}, \
             max |E - grid| above = {grid_err:.3e} ({}), solver time {solver_time:.2?}",
            detail.join("; ")
        ),
    )
}

fn monotone_descent() -> Outcome {
    let results: Vec<Result<(f64, usize), String>> = (0..50u64)
        .into_par_iter()
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
            let nx = rng.gen_range(2..=4);
            let ny = rng.gen_range(2..=4);
            let channel = random_channel(&mut rng, nx, ny, true);
            let (lo, hi) = (channel.min_cost().unwrap(), channel.max_cost().unwrap());
            let mut worst = f64::NEG_INFINITY;
            let mut runs = 0;
            let schemes = [
                Scheme::FixedRateAlpha {
                    rate: rng.gen_range(0.0..1.2),
                    alpha: Some(lo + rng.gen_range(0.2..1.0) * (hi - lo)),
                },
                Scheme::FixedGradient {
                    rho: rng.gen_range(0.05..0.95),
                    eta: rng.gen_range(0.0..2.0),
                },
                Scheme::FixedAlphaRho {
                    alpha: lo + rng.gen_range(0.2..1.0) * (hi - lo),
                    rho: rng.gen_range(0.05..0.95),
                },
                Scheme::FixedRateEta {
                    rate: rng.gen_range(0.0..1.2),
                    eta: rng.gen_range(0.0..2.0),
                },
            ];
            for scheme in schemes {
                let family = match scheme {
                    Scheme::FixedGradient { .. } | Scheme::FixedAlphaRho { .. } if rng.gen_bool(0.5) => {
                        Family::B(FamilyBParams::new(rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0)).unwrap())
                    }
                    _ => Family::A(FamilyAParams::new(rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0)).unwrap()),
                };
                let options = SolverOptions {
                    family,
                    max_iter: 300,
                    init: Some(random_joint(&mut rng, nx, ny)),
                    ..SolverOptions::default()
                };
                let report = solve(&channel, &SolverConfig { scheme, options })
                    .map_err(|e| format!("seed {seed}, {}: {e}", scheme.name()))?;
                for w in report.objective_history.windows(2) {
                    worst = worst.max(w[1] - w[0]);
                }
                runs += 1;
            }
            Ok((worst, runs))
        })
        .collect();
    let mut worst = f64::NEG_INFINITY;
    let mut runs = 0;
    for r in results {
        let (w, n) = r?;
        worst = worst.max(w);
        runs += n;
    }
    check(
        worst <= 1e-12,
        format!("{runs} runs on 50 channels; largest increase between iterations {worst:.3e}"),
    )
}

fn sweep_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let channels = [Channel::bsc(0.1).unwrap(), random_channel(&mut rng, 3, 3, false)];
    let rho_grid: Vec<f64> = (1..=9).map(|i| i as f64 / 10.0).collect();
    let mut worst = 0.0f64;
    let mut points = 0;
    for channel in &channels {
        let curve = sweep_curve(channel, &rho_grid, &[0.0], &SolverOptions::default())
            .map_err(|e| e.to_string())?;
        for pt in curve {
            let r = solve_fixed_rate(channel, unconstrained(pt.rate), &SolverOptions::default())
                .map_err(|e| format!("R = {}: {e}", pt.rate))?;
            worst = worst.max((r.value - pt.ec).abs());
            points += 1;
        }
    }
    check(
        worst <= 1e-4,
        format!("{points} supporting-plane points; max |E_c(R) - (E0 + rho R)| = {worst:.3e}"),
    )
}

fn gallager_cross_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let random = random_channel(&mut rng, 3, 2, false);
    let cases = [
        (Channel::bsc(0.1).unwrap(), vec![0.5, 0.5]),
        (Channel::bsc(0.1).unwrap(), vec![0.3, 0.7]),
        (random, random_dist(&mut rng, 3)),
    ];
    // min over (T, V) of the Gallager-form objective is the fixed-gradient
    // objective with t = (1, 0, 0, 0) against a reference with input marginal Q
    let t = DivergenceWeights::new(1.0, 0.0, 0.0, 0.0).unwrap();
    let mut worst = 0.0f64;
    for (channel, q) in &cases {
        let ny = channel.num_outputs();
        let uniform_y = Channel::from_rows(vec![vec![1.0 / ny as f64; ny]; q.len()], None).unwrap();
        let reference = JointDistribution::product(q, &uniform_y).unwrap();
        for rho in [0.25, 0.5, 0.75] {
            let point = GradientPoint::new(rho, 0.0).unwrap();
            let brute = descent_min_gradient(channel, &reference, &t, point, 1e-12)
                .map_err(|e| e.to_string())?;
            let closed = gallager_e0_neg(rho, q, channel).map_err(|e| e.to_string())?;
            worst = worst.max((brute.value - closed).abs());
        }
    }
    check(worst <= 1e-6, format!("max |E0(-rho, Q) - inner minimum| = {worst:.3e}"))
}

fn family_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let channel = random_channel(&mut rng, 3, 3, false);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let reference = random_joint(&mut rng, 3, 3);
        for rho in [0.3, 0.7] {
            let point = GradientPoint::new(rho, 0.0).unwrap();
            let a = update_family_a(&reference, point, FamilyAParams::new(0.0, rho).unwrap(), &channel)
                .map_err(|e| e.to_string())?;
            let b = update_family_b(&reference, point, FamilyBParams::new(0.0, 1.0 - rho).unwrap(), &channel)
                .map_err(|e| e.to_string())?;
            for (x, y) in a.joint.joint().iter().zip(b.joint.joint()) {
                worst = worst.max((x - y).abs());
            }
        }
    }
    check(worst <= 1e-10, format!("40 update pairs; max entry difference {worst:.3e}"))
}

fn closed_form_optimality() -> Outcome {
    let results: Vec<Result<(f64, f64, bool), String>> = (0..200u64)
        .into_par_iter()
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(8000 + seed);
            let channel = random_channel(&mut rng, 2, 3, true);
            let reference = random_joint(&mut rng, 2, 3);
            let point = GradientPoint::new(rng.gen_range(0.0..0.95), rng.gen_range(0.0..2.0)).unwrap();
            let params = FamilyAParams::new(rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0)).unwrap();
            let t = Family::A(params).weights(point.rho).unwrap();
            let up = update_family_a(&reference, point, params, &channel).map_err(|e| e.to_string())?;
            let at_update = f_gradient(point, &up.joint, &reference, &t, &channel).unwrap();
            let mut margin = f64::INFINITY;
            for _ in 0..100 {
                let c = random_joint(&mut rng, 2, 3);
                let v = f_gradient(point, &c, &reference, &t, &channel).unwrap();
                margin = margin.min(v - at_update);
            }
            let descent = descent_min_gradient(&channel, &reference, &t, point, 1e-10)
                .map_err(|e| format!("seed {seed}: {e}"))?;
            let strictly_better = descent.value < at_update - 1e-9;
            Ok((margin, (descent.value - at_update).abs(), strictly_better))
        })
        .collect();
    let (mut margin, mut gap, mut flagged) = (f64::INFINITY, 0.0f64, 0);
    for r in results {
        let (m, g, better) = r?;
        margin = margin.min(m);
        gap = gap.max(g);
        flagged += better as usize;
    }
    check(
        margin >= -1e-9 && gap <= 1e-7,
        format!(
            "200 instances x 100 competitors: min margin {margin:.3e}; \
             max |closed form - descent| {gap:.3e}; descent strictly better in {flagged} cases"
        ),
    )
}

fn restricted_support() -> Outcome {
    let channel = Channel::from_rows(
        vec![vec![0.85, 0.15], vec![0.3, 0.7], vec![0.02, 0.98]],
        None,
    )
    .unwrap();
    let subset = [0, 1];
    let sub = channel.restrict_inputs(&subset).unwrap();
    let init = JointDistribution::new(3, 2, vec![0.25, 0.25, 0.25, 0.25, 0.0, 0.0]).unwrap();
    let t = DivergenceWeights::new(1.0, 0.0, 0.0, 0.0).unwrap();
    let grid = GridSpec::new(200).unwrap();
    let (mut worst, mut leaked) = (0.0f64, 0.0f64);
    for rate in [0.2, 0.4, 0.6] {
        let options = SolverOptions {
            init: Some(init.clone()),
            ..SolverOptions::default()
        };
        let r = solve_fixed_rate(&channel, unconstrained(rate), &options)
            .map_err(|e| format!("R = {rate}: {e}"))?;
        leaked = leaked.max(r.final_joint.get(2, 0) + r.final_joint.get(2, 1));
        let g = grid_min_double(&sub, &t, unconstrained(rate), grid).map_err(|e| e.to_string())?;
        worst = worst.max((r.value - g.value).abs());
    }
    check(
        worst <= 2e-3 && leaked == 0.0,
        format!("max |E - restricted grid minimum| = {worst:.3e}; mass outside the init support {leaked:e}"),
    )
}

fn constraint_handling() -> Outcome {
    let channel = Channel::bsc(0.1).unwrap().with_cost(vec![0.0, 1.0]).unwrap();
    let (alpha, rho) = (0.2, 0.5);
    let r = solve_fixed_alpha_rho(&channel, alpha, rho, &SolverOptions::default())
        .map_err(|e| e.to_string())?;
    let spent = r.final_joint.expected_cost(&channel).unwrap();
    let t = r.weights;
    let point = GradientPoint::new(rho, 0.0).unwrap();
    let g = grid_min(2, 2, GridSpec::new(200).unwrap(), |j| {
        if j.expected_cost(&channel)? > alpha {
            return Ok(None);
        }
        Ok(Some(f_gradient(point, j, j, &t, &channel)?))
    })
    .map_err(|e| e.to_string())?;
    let diff = (r.value - g.value).abs();
    check(
        spent <= alpha + 1e-9 && diff <= 2e-3,
        format!("E_Q[f] = {spent:.12}, |E - constrained grid| = {diff:.3e}, eta* = {:.6}", r.eta),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("noiseless binary channel", noiseless_binary),
        ("useless binary channel", useless_binary),
        ("BSC(0.1) below and above capacity", bsc_below_and_above_capacity),
        ("monotone descent, all schemes", monotone_descent),
        ("supporting-plane sweep consistency", sweep_consistency),
        ("Gallager E0 cross-check", gallager_cross_check),
        ("family A/B special-case equivalence", family_equivalence),
        ("closed-form optimality", closed_form_optimality),
        ("restricted input support", restricted_support),
        ("cost constraint handling", constraint_handling),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        match outcome {
            Ok(msg) => println!("criterion {:>2} PASS  {name}: {msg} [{elapsed:.2?}]", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {msg} [{elapsed:.2?}]", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}
