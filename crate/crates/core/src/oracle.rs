//! Slow, independent reference minimizers used to validate the solvers:
//! exhaustive search over a simplex grid, and projected gradient descent on
//! the fixed-gradient objective for arbitrary weights.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::objectives::{f_gradient, f_max, GradientPoint, RateConstraintPoint};
use crate::prob::{check_alphabets, ln0, Channel, DivergenceWeights, JointDistribution};

/// Largest number of grid points an oracle will enumerate.
pub const GRID_CAP: f64 = 1e8;

/// A simplex grid: all joints whose entries are multiples of `1/resolution`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    resolution: usize,
}

impl GridSpec {
    pub fn new(resolution: usize) -> Result<Self> {
        if resolution < 10 {
            return Err(Error::InvalidParameter(format!(
                "grid resolution must be at least 10, got {resolution}"
            )));
        }
        Ok(Self { resolution })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Number of grid points over `cells` cells: `C(resolution + cells - 1, cells - 1)`.
    pub fn points(&self, cells: usize) -> f64 {
        let n = self.resolution as f64;
        (1..cells).fold(1.0, |acc, k| acc * (n + k as f64) / k as f64)
    }

    /// Every joint lies within this L1 distance of some grid point.
    pub fn accuracy_bound(&self, cells: usize) -> f64 {
        cells as f64 / self.resolution as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub value: f64,
    pub joint: JointDistribution,
    /// L1 covering radius of the grid (see [`GridSpec::accuracy_bound`]).
    pub accuracy_bound: f64,
}

/// Calls `visit` on every composition of `total` into `parts.len()` parts,
/// in lexicographic order of the prefix.
fn compositions(parts: &mut [usize], pos: usize, total: usize, visit: &mut impl FnMut(&[usize])) {
    if pos + 1 == parts.len() {
        parts[pos] = total;
        visit(parts);
        return;
    }
    for k in 0..=total {
        parts[pos] = k;
        compositions(parts, pos + 1, total - k, visit);
    }
}

/// Objective value and composition counts of a grid point.
type Candidate = (f64, Vec<usize>);

/// Minimizes `objective` over all grid joints on `nx x ny`; the objective
/// returns `None` for points outside the feasible set.
///
/// Ties go to the first point in lexicographic order, so results do not
/// depend on thread scheduling.
pub fn grid_min<F>(nx: usize, ny: usize, grid: GridSpec, objective: F) -> Result<GridResult>
where
    F: Fn(&JointDistribution) -> Result<Option<f64>> + Sync,
{
    let cells = nx * ny;
    if cells == 0 {
        return Err(Error::InvalidInput("empty alphabet".into()));
    }
    let points = grid.points(cells);
    if points > GRID_CAP {
        return Err(Error::TooLarge { points, cap: GRID_CAP });
    }
    let res = grid.resolution;
    let scale = res as f64;
    let per_first: Vec<Result<Option<Candidate>>> = (0..=res)
        .into_par_iter()
        .map(|first| {
            let mut best: Option<Candidate> = None;
            let mut err = None;
            let mut parts = vec![0usize; cells];
            parts[0] = first;
            let mut visit = |p: &[usize]| {
                if err.is_some() {
                    return;
                }
                let joint = JointDistribution::from_checked(
                    nx,
                    ny,
                    p.iter().map(|&k| k as f64 / scale).collect(),
                );
                match objective(&joint) {
                    Ok(Some(v)) => {
                        if best.as_ref().is_none_or(|(b, _)| v < *b) {
                            best = Some((v, p.to_vec()));
                        }
                    }
                    Ok(None) => {}
                    Err(e) => err = Some(e),
                }
            };
            if cells == 1 {
                if first == res {
                    visit(&parts);
                }
            } else {
                compositions(&mut parts, 1, res - first, &mut visit);
            }
            match err {
                Some(e) => Err(e),
                None => Ok(best),
            }
        })
        .collect();
    let mut best: Option<(f64, Vec<usize>)> = None;
    for r in per_first {
        if let Some((v, p)) = r? {
            if best.as_ref().is_none_or(|(b, _)| v < *b) {
                best = Some((v, p));
            }
        }
    }
    let (value, parts) =
        best.ok_or_else(|| Error::Infeasible("no grid point satisfies the constraints".into()))?;
    Ok(GridResult {
        value,
        joint: JointDistribution::from_checked(nx, ny, parts.iter().map(|&k| k as f64 / scale).collect()),
        accuracy_bound: grid.accuracy_bound(cells),
    })
}

fn within_budget(joint: &JointDistribution, channel: &Channel, alpha: Option<f64>) -> Result<bool> {
    match alpha {
        None => Ok(true),
        Some(a) => Ok(joint.expected_cost(channel)? <= a),
    }
}

/// Grid minimum of `max(F1, F2)` against a fixed reference, under the cost budget.
pub fn grid_min_ec(
    channel: &Channel,
    reference: &JointDistribution,
    t: &DivergenceWeights,
    point: RateConstraintPoint,
    grid: GridSpec,
) -> Result<GridResult> {
    check_alphabets(reference, channel)?;
    grid_min(channel.num_inputs(), channel.num_outputs(), grid, |j| {
        if !within_budget(j, channel, point.alpha)? {
            return Ok(None);
        }
        Ok(Some(f_max(j, reference, t, channel, point.rate)?))
    })
}

/// Grid minimum of `max(F1, F2)` with the reference equal to the point itself,
/// i.e. the double minimum over the joint simplex.
pub fn grid_min_double(
    channel: &Channel,
    t: &DivergenceWeights,
    point: RateConstraintPoint,
    grid: GridSpec,
) -> Result<GridResult> {
    grid_min(channel.num_inputs(), channel.num_outputs(), grid, |j| {
        if !within_budget(j, channel, point.alpha)? {
            return Ok(None);
        }
        Ok(Some(f_max(j, j, t, channel, point.rate)?))
    })
}

/// Euclidean projection of `v` onto the probability simplex.
fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        cumulative += ui;
        let candidate = (cumulative - 1.0) / (i + 1) as f64;
        if ui - candidate > 0.0 {
            theta = candidate;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Result of [`descent_min_gradient`].
#[derive(Debug, Clone, PartialEq)]
pub struct DescentResult {
    pub value: f64,
    pub joint: JointDistribution,
    pub iterations: usize,
    /// Final max-norm of the projected-gradient step.
    pub stationarity: f64,
}

/// Minimizes the fixed-gradient objective `f_gradient(rho, eta, ., ref, t)` by
/// projected gradient descent over the joints with finite objective.
///
/// Each step starts from a spectral (Barzilai-Borwein) step length, 1.0 on
/// the first iteration, and is halved until a sufficient-decrease test holds;
/// iteration stops once the unit-step projected gradient move is at most `tol`.
pub fn descent_min_gradient(
    channel: &Channel,
    reference: &JointDistribution,
    t: &DivergenceWeights,
    point: GradientPoint,
    tol: f64,
) -> Result<DescentResult> {
    check_alphabets(reference, channel)?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {tol}")));
    }
    let (nx, ny) = (channel.num_inputs(), channel.num_outputs());
    let GradientPoint { rho, eta } = point;
    let cost: Vec<f64> = match (eta > 0.0, channel.cost()) {
        (false, _) => vec![0.0; nx],
        (true, Some(c)) => c.to_vec(),
        (true, None) => {
            return Err(Error::InvalidInput("eta > 0 requires a channel with input costs".into()))
        }
    };
    let q_ref = reference.input_marginal();
    let t_ref = reference.output_marginal();

    // cells where every active term of the objective stays finite
    let support: Vec<usize> = (0..nx * ny)
        .filter(|&i| {
            let (x, y) = (i / ny, i % ny);
            channel.p(x, y) > 0.0
                && (t.t1 == 0.0 || q_ref[x] > 0.0)
                && (t.t3 == 0.0 || t_ref[y] > 0.0)
                && (t.t2 + t.t4 == 0.0 || reference.get(x, y) > 0.0)
        })
        .collect();
    if support.is_empty() {
        return Err(Error::Infeasible("no joint has a finite objective".into()));
    }

    let s = 1.0 - rho;
    let coef_j = s * (1.0 + t.t2 + t.t4);
    let coef_q = s * (t.t1 - t.t2 - 1.0);
    let coef_t = rho + s * (t.t3 - t.t4);
    let term = |c: f64, l: f64| if c == 0.0 { 0.0 } else { c * l };
    let linear: Vec<f64> = support
        .iter()
        .map(|&i| {
            let (x, y) = (i / ny, i % ny);
            channel.log_p(x, y) - eta * cost[x]
                + s * (term(t.t1 - t.t2, ln0(q_ref[x]))
                    + term(t.t2 + t.t4, ln0(reference.get(x, y)))
                    + term(t.t3 - t.t4, ln0(t_ref[y])))
        })
        .collect();

    let embed = |v: &[f64]| -> JointDistribution {
        let mut full = vec![0.0; nx * ny];
        for (k, &i) in support.iter().enumerate() {
            full[i] = v[k];
        }
        JointDistribution::from_checked(nx, ny, full)
    };
    let objective = |j: &JointDistribution| f_gradient(point, j, reference, t, channel);
    let floor_ln = |v: f64| v.max(1e-300).ln();

    let gradient = |v: &[f64], joint: &JointDistribution| -> Vec<f64> {
        let q = joint.input_marginal();
        let tm = joint.output_marginal();
        support
            .iter()
            .enumerate()
            .map(|(k, &i)| {
                let (x, y) = (i / ny, i % ny);
                coef_j * (floor_ln(v[k]) + 1.0)
                    + coef_q * (floor_ln(q[x]) + 1.0)
                    + coef_t * (floor_ln(tm[y]) + 1.0)
                    - linear[k]
            })
            .collect()
    };

    let mut v = vec![1.0 / support.len() as f64; support.len()];
    let mut joint = embed(&v);
    let mut value = objective(&joint)?;
    let mut grad = gradient(&v, &joint);
    let mut step: f64;
    let mut previous: Option<(Vec<f64>, Vec<f64>)> = None;
    let max_iter = 1_000_000;
    for iteration in 0..max_iter {
        let unit: Vec<f64> = v.iter().zip(&grad).map(|(a, g)| a - g).collect();
        let mapped = project_simplex(&unit);
        let stationarity = v
            .iter()
            .zip(&mapped)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if stationarity <= tol {
            return Ok(DescentResult {
                value,
                joint,
                iterations: iteration,
                stationarity,
            });
        }
        step = match &previous {
            // spectral (Barzilai-Borwein) trial step from the last move
            Some((dv, dg)) => {
                let (ss, sy): (f64, f64) = dv.iter().zip(dg).fold((0.0, 0.0), |(a, b), (d, g)| (a + d * d, b + d * g));
                if sy > 0.0 { (ss / sy).clamp(1e-12, 1e6) } else { 1.0 }
            }
            None => 1.0,
        };
        loop {
            let trial: Vec<f64> = v.iter().zip(&grad).map(|(a, g)| a - step * g).collect();
            let next_v = project_simplex(&trial);
            let next_joint = embed(&next_v);
            let next_value = objective(&next_joint)?;
            let next_grad = gradient(&next_v, &next_joint);
            let (mut linear_change, mut curvature, mut sq) = (0.0, 0.0, 0.0);
            for k in 0..v.len() {
                let d = next_v[k] - v[k];
                linear_change += grad[k] * d;
                curvature += (next_grad[k] - grad[k]) * d;
                sq += d * d;
            }
            // Sufficient decrease in value, or, once value differences drown in
            // rounding, the same test phrased through gradient differences.
            let noise = 1e-13 * value.abs().max(1.0);
            let decrease = next_value <= value + linear_change + sq / (2.0 * step);
            let local = curvature <= sq / step && next_value <= value + noise;
            if decrease || local {
                previous = Some((
                    next_v.iter().zip(&v).map(|(a, b)| a - b).collect(),
                    next_grad.iter().zip(&grad).map(|(a, b)| a - b).collect(),
                ));
                v = next_v;
                joint = next_joint;
                value = next_value;
                grad = next_grad;
                break;
            }
            step *= 0.5;
            if step < 1e-40 {
                return Err(Error::NumericalFailure(format!(
                    "line search failed after {iteration} iterations: value {value}, stationarity {stationarity}"
                )));
            }
        }
    }
    Err(Error::NumericalFailure(format!(
        "descent did not reach stationarity {tol} within {max_iter} iterations"
    )))
}
