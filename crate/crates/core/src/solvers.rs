//! Iterative schemes for the correct-decoding exponent.
//!
//! Each scheme alternates an inner minimization against a fixed reference
//! joint with reassignment of the reference to the minimizer. Inner
//! minimizations over the rate/cost constraints are solved through their
//! concave duals `g(rho, eta) = E0^t(rho, eta, ref) + rho R - eta alpha`:
//! the closed-form updates give `E0^t` and its minimizer, and the envelope
//! derivatives `R - I - D^t` (in `rho`) and `E_Q[f] - alpha` (in `eta`) are
//! monotone, so each one-dimensional search is a bisection on their sign.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objectives::{f_gradient, f_max, GradientPoint, RateConstraintPoint};
use crate::prob::{
    check_alphabets, dt_combination, mutual_information, Channel, DivergenceWeights,
    JointDistribution,
};
use crate::updates::{update_family_a, Family, FamilyAParams, Update};

/// Primal/dual gap above which a run is flagged.
pub const DUALITY_GAP_WARNING: f64 = 1e-6;

/// Controls of the one-dimensional dual searches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualControls {
    /// Largest `rho` ever evaluated.
    pub rho_cap: f64,
    /// Largest `eta` tried before reporting a binding cap.
    pub eta_max: f64,
    /// Bracket width at which a bisection stops.
    pub dual_tol: f64,
}

impl Default for DualControls {
    fn default() -> Self {
        Self {
            rho_cap: 1.0 - 1e-6,
            eta_max: 1e3,
            dual_tol: 1e-10,
        }
    }
}

impl DualControls {
    fn validate(&self) -> Result<()> {
        if !(self.rho_cap > 0.0 && self.rho_cap < 1.0) {
            return Err(Error::InvalidParameter(format!("rho_cap must lie in (0, 1), got {}", self.rho_cap)));
        }
        if !(self.eta_max > 0.0 && self.eta_max.is_finite()) {
            return Err(Error::InvalidParameter(format!("eta_max must be positive, got {}", self.eta_max)));
        }
        if self.dual_tol.is_nan() || self.dual_tol <= 0.0 {
            return Err(Error::InvalidParameter(format!("dual_tol must be positive, got {}", self.dual_tol)));
        }
        Ok(())
    }

    /// Bisection stops at this bracket width; it is far below `dual_tol` because
    /// the primal value error is proportional to the bracket width.
    fn bracket(&self) -> f64 {
        (self.dual_tol * 1e-3).max(1e-15)
    }
}

/// Family-A weights held fixed while `rho` varies: `t = (1, 0, a0, b0)`,
/// i.e. `a = a0 (1 - rho)` and `b = b0 (1 - rho)`.
///
/// Searching over `rho` only makes sense for a `t` that does not depend on
/// `rho`, which rules out family B.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFamily {
    pub a0: f64,
    pub b0: f64,
}

impl Default for RateFamily {
    fn default() -> Self {
        Self { a0: 0.0, b0: 0.0 }
    }
}

impl RateFamily {
    pub fn new(a0: f64, b0: f64) -> Result<Self> {
        FamilyAParams::new(a0, b0)?;
        Ok(Self { a0, b0 })
    }

    /// Accepts any `t` with `t1 = t2 + 1`.
    pub fn from_weights(t: &DivergenceWeights) -> Result<Self> {
        if (t.t1 - t.t2 - 1.0).abs() > 1e-12 {
            return Err(Error::UnsupportedWeights(format!(
                "a rate search needs t1 = t2 + 1, got {t:?}"
            )));
        }
        Self::new(t.t2 + t.t3, t.t2 + t.t4)
    }

    /// Family-A parameters are read as their values at `rho = 0`.
    pub fn from_family(family: &Family) -> Result<Self> {
        match family {
            Family::A(p) => Self::new(p.a, p.b),
            Family::B(_) => Err(Error::UnsupportedWeights(
                "family B ties t to rho; rate searches need family A".into(),
            )),
        }
    }

    pub fn weights(&self) -> DivergenceWeights {
        DivergenceWeights {
            t1: 1.0,
            t2: 0.0,
            t3: self.a0,
            t4: self.b0,
        }
    }

    pub fn params(&self, rho: f64) -> FamilyAParams {
        FamilyAParams {
            a: self.a0 * (1.0 - rho),
            b: self.b0 * (1.0 - rho),
        }
    }

    fn update(
        &self,
        reference: &JointDistribution,
        point: GradientPoint,
        channel: &Channel,
    ) -> Result<Update> {
        update_family_a(reference, point, self.params(point.rho), channel)
    }
}

/// `E0^t(rho, eta, ref)` through the closed form of `family`.
pub fn dual_value(
    reference: &JointDistribution,
    family: &Family,
    channel: &Channel,
    point: GradientPoint,
) -> Result<f64> {
    family.e0(reference, point, channel)
}

/// Result of one inner minimization against a fixed reference.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerStep {
    pub joint: JointDistribution,
    /// Primal objective at `joint`.
    pub value: f64,
    /// Best dual value found.
    pub dual: f64,
    pub rho: f64,
    pub eta: f64,
    /// Largest concavity defect seen among evaluated dual values.
    pub concavity_violation: f64,
}

impl InnerStep {
    pub fn duality_gap(&self) -> f64 {
        self.value - self.dual
    }
}

/// Dual values visited by a search, for the concavity diagnostic.
#[derive(Default)]
struct Trace(Vec<(f64, f64)>);

impl Trace {
    fn push(&mut self, x: f64, g: f64) {
        self.0.push((x, g));
    }

    fn max_violation(mut self) -> f64 {
        self.0.sort_by(|a, b| a.0.total_cmp(&b.0));
        self.0.dedup_by(|a, b| a.0 == b.0);
        self.0
            .windows(3)
            .map(|w| {
                let (x0, g0) = w[0];
                let (x1, g1) = w[1];
                let (x2, g2) = w[2];
                let chord = g0 + (g2 - g0) * (x1 - x0) / (x2 - x0);
                chord - g1
            })
            .fold(0.0, f64::max)
    }
}

/// Points bracketing the optimum of a one-dimensional dual search.
struct Bracket {
    candidates: Vec<Update>,
    arg: f64,
    dual: f64,
}

/// `sup_rho { E0(rho, eta) + rho R }` by bisection on `R - I - D^t`.
fn rho_search(
    reference: &JointDistribution,
    family: RateFamily,
    channel: &Channel,
    eta: f64,
    rate: f64,
    controls: &DualControls,
    trace: &mut Trace,
) -> Result<Bracket> {
    let t = family.weights();
    let mut eval = |rho: f64| -> Result<(Update, f64)> {
        let up = family.update(reference, GradientPoint { rho, eta }, channel)?;
        let slope = rate - mutual_information(&up.joint) - dt_combination(&up.joint, reference, &t)?;
        trace.push(rho, up.e0 + rho * rate);
        Ok((up, slope))
    };
    let (at_zero, slope_zero) = eval(0.0)?;
    if slope_zero <= 0.0 {
        let dual = at_zero.e0;
        return Ok(Bracket { candidates: vec![at_zero], arg: 0.0, dual });
    }
    let cap = controls.rho_cap;
    let (at_cap, slope_cap) = eval(cap)?;
    if slope_cap >= 0.0 {
        let dual = at_cap.e0 + cap * rate;
        return Ok(Bracket { candidates: vec![at_cap], arg: cap, dual });
    }
    let (mut lo, mut hi) = ((0.0, at_zero), (cap, at_cap));
    while hi.0 - lo.0 > controls.bracket() {
        let mid = 0.5 * (lo.0 + hi.0);
        if mid <= lo.0 || mid >= hi.0 {
            break;
        }
        let (up, slope) = eval(mid)?;
        if slope > 0.0 {
            lo = (mid, up);
        } else {
            hi = (mid, up);
        }
    }
    let g_lo = lo.1.e0 + lo.0 * rate;
    let g_hi = hi.1.e0 + hi.0 * rate;
    let (arg, dual) = if g_lo >= g_hi { (lo.0, g_lo) } else { (hi.0, g_hi) };
    Ok(Bracket {
        candidates: vec![lo.1, hi.1],
        arg,
        dual,
    })
}

/// `sup_eta { inner(eta) - eta alpha }` by bisection on `E_Q[f] - alpha`,
/// where `inner` returns the bracket of the remaining search at that `eta`.
fn eta_search<F>(
    channel: &Channel,
    alpha: f64,
    controls: &DualControls,
    trace: &mut Trace,
    mut inner: F,
) -> Result<(Bracket, f64)>
where
    F: FnMut(f64) -> Result<Bracket>,
{
    let mut eval = |eta: f64| -> Result<(Bracket, bool)> {
        let b = inner(eta)?;
        let mut feasible = false;
        for c in &b.candidates {
            if c.joint.expected_cost(channel)? <= alpha {
                feasible = true;
            }
        }
        Ok((b, feasible))
    };
    let (at_zero, ok) = eval(0.0)?;
    trace.push(0.0, at_zero.dual);
    if ok {
        return Ok((at_zero, 0.0));
    }
    let mut lo = 0.0;
    let mut eta = 1.0f64.min(controls.eta_max);
    let mut hi = loop {
        let (b, ok) = eval(eta)?;
        trace.push(eta, b.dual - eta * alpha);
        if ok {
            break (eta, b);
        }
        if eta >= controls.eta_max {
            return Err(Error::ConstraintAtCap {
                eta_max: controls.eta_max,
            });
        }
        lo = eta;
        eta = (2.0 * eta).min(controls.eta_max);
    };
    while hi.0 - lo > controls.bracket() * hi.0.max(1.0) {
        let mid = 0.5 * (lo + hi.0);
        if mid <= lo || mid >= hi.0 {
            break;
        }
        let (b, ok) = eval(mid)?;
        trace.push(mid, b.dual - mid * alpha);
        if ok {
            hi = (mid, b);
        } else {
            lo = mid;
        }
    }
    let eta = hi.0;
    Ok((hi.1, eta))
}

fn feasible(joint: &JointDistribution, channel: &Channel, alpha: Option<f64>) -> Result<bool> {
    match alpha {
        None => Ok(true),
        Some(a) => Ok(joint.expected_cost(channel)? <= a),
    }
}

/// Picks the feasible candidate with the smallest primal value.
fn best_candidate<F>(
    candidates: impl IntoIterator<Item = JointDistribution>,
    channel: &Channel,
    alpha: Option<f64>,
    mut primal: F,
) -> Result<(JointDistribution, f64)>
where
    F: FnMut(&JointDistribution) -> Result<f64>,
{
    let mut best: Option<(JointDistribution, f64)> = None;
    for c in candidates {
        if !feasible(&c, channel, alpha)? {
            continue;
        }
        let v = primal(&c)?;
        if best.as_ref().is_none_or(|(_, b)| v < *b) {
            best = Some((c, v));
        }
    }
    best.ok_or_else(|| Error::NumericalFailure("dual search produced no feasible point".into()))
}

/// One inner minimization of `max(F1, F2)` subject to `E_Q[f] <= alpha`.
pub fn inner_step_fixed_rate(
    reference: &JointDistribution,
    family: RateFamily,
    channel: &Channel,
    point: RateConstraintPoint,
    controls: &DualControls,
) -> Result<InnerStep> {
    controls.validate()?;
    check_alphabets(reference, channel)?;
    check_alpha(reference, channel, point.alpha)?;
    let rate = point.rate;
    let mut trace = Trace::default();
    let (bracket, eta) = match point.alpha {
        None => (rho_search(reference, family, channel, 0.0, rate, controls, &mut trace)?, 0.0),
        Some(alpha) => {
            let mut inner_trace = Trace::default();
            let r = eta_search(channel, alpha, controls, &mut trace, |eta| {
                rho_search(reference, family, channel, eta, rate, controls, &mut inner_trace)
            })?;
            // the rho traces mix different eta slices; only the eta trace is a 1-D function
            r
        }
    };
    let dual = bracket.dual - eta * point.alpha.unwrap_or(0.0);
    let t = family.weights();
    let (joint, value) = best_candidate(
        bracket.candidates.into_iter().map(|u| u.joint),
        channel,
        point.alpha,
        |j| f_max(j, reference, &t, channel, rate),
    )?;
    Ok(InnerStep {
        joint,
        value,
        dual,
        rho: bracket.arg,
        eta,
        concavity_violation: trace.max_violation(),
    })
}

fn check_alpha(reference: &JointDistribution, channel: &Channel, alpha: Option<f64>) -> Result<()> {
    let Some(alpha) = alpha else { return Ok(()) };
    let cost = channel
        .cost()
        .ok_or_else(|| Error::InvalidInput("alpha given but the channel carries no costs".into()))?;
    let min = reference
        .input_marginal()
        .iter()
        .zip(cost)
        .filter(|(q, _)| **q > 0.0)
        .map(|(_, f)| *f)
        .fold(f64::INFINITY, f64::min);
    if alpha < min {
        return Err(Error::Infeasible(format!(
            "alpha = {alpha} is below the smallest input cost {min} on the reference support"
        )));
    }
    Ok(())
}

/// Which iteration to run, with the parameters it holds fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "kebab-case")]
pub enum Scheme {
    FixedRateAlpha { rate: f64, alpha: Option<f64> },
    FixedGradient { rho: f64, eta: f64 },
    FixedAlphaRho { alpha: f64, rho: f64 },
    FixedRateEta { rate: f64, eta: f64 },
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::FixedRateAlpha { .. } => "fixed-rate-alpha",
            Scheme::FixedGradient { .. } => "fixed-gradient",
            Scheme::FixedAlphaRho { .. } => "fixed-alpha-rho",
            Scheme::FixedRateEta { .. } => "fixed-rate-eta",
        }
    }
}

/// Settings shared by every scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub family: Family,
    /// Stop once an iteration decreases the objective by at most this much.
    pub tol: f64,
    pub max_iter: usize,
    /// Initial reference; `None` means uniform on `X x Y`.
    pub init: Option<JointDistribution>,
    pub controls: DualControls,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            family: Family::A(FamilyAParams { a: 0.0, b: 0.0 }),
            tol: 1e-10,
            max_iter: 100_000,
            init: None,
            controls: DualControls::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub scheme: Scheme,
    pub options: SolverOptions,
}

/// Outcome of a solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub scheme: Scheme,
    /// `E_0, E_1, ...`: the objective after each inner minimization.
    pub objective_history: Vec<f64>,
    pub converged: bool,
    /// Number of reference reassignments performed.
    pub iterations: usize,
    pub final_joint: JointDistribution,
    /// Final `(rho, eta)`; searched or fixed depending on the scheme.
    pub rho: f64,
    pub eta: f64,
    pub value: f64,
    /// Divergence weights `t` the run used (family B depends on `rho`).
    pub weights: DivergenceWeights,
    /// Primal minus dual value of the last inner step (schemes with a search).
    pub duality_gap: Option<f64>,
    pub duality_warning: bool,
    pub max_concavity_violation: f64,
}

struct StepOut {
    joint: JointDistribution,
    value: f64,
    rho: f64,
    eta: f64,
    gap: Option<f64>,
    concavity: f64,
}

fn initial_reference(channel: &Channel, options: &SolverOptions) -> Result<JointDistribution> {
    if options.tol.is_nan() || options.tol <= 0.0 {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {}", options.tol)));
    }
    if options.max_iter == 0 {
        return Err(Error::InvalidParameter("max_iter must be positive".into()));
    }
    options.controls.validate()?;
    let init = match &options.init {
        Some(j) => j.clone(),
        None => JointDistribution::uniform(channel.num_inputs(), channel.num_outputs()),
    };
    check_alphabets(&init, channel)?;
    let reachable = (0..channel.num_inputs()).any(|x| {
        init.input_marginal()[x] > 0.0 && (0..channel.num_outputs()).any(|y| channel.p(x, y) > 0.0)
    });
    if !reachable {
        return Err(Error::Infeasible(
            "the initial reference has no input the channel can use".into(),
        ));
    }
    Ok(init)
}

fn iterate<S>(
    scheme: Scheme,
    weights: DivergenceWeights,
    channel: &Channel,
    options: &SolverOptions,
    mut step: S,
) -> Result<RunReport>
where
    S: FnMut(&JointDistribution) -> Result<StepOut>,
{
    let mut reference = initial_reference(channel, options)?;
    let first = step(&reference).map_err(|e| match e {
        Error::DegenerateReference => {
            Error::Infeasible("no joint with finite objective is reachable from the initial reference".into())
        }
        e => e,
    })?;
    let mut history = vec![first.value];
    let mut concavity = first.concavity;
    let mut last = first;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < options.max_iter {
        reference = last.joint.clone();
        let next = step(&reference)?;
        iterations += 1;
        let decrement = last.value - next.value;
        history.push(next.value);
        concavity = concavity.max(next.concavity);
        last = next;
        if decrement <= options.tol {
            converged = true;
            break;
        }
    }
    let gap = last.gap;
    Ok(RunReport {
        scheme,
        objective_history: history,
        converged,
        iterations,
        final_joint: last.joint,
        rho: last.rho,
        eta: last.eta,
        value: last.value,
        weights,
        duality_gap: gap,
        duality_warning: gap.is_some_and(|g| g.abs() > DUALITY_GAP_WARNING),
        max_concavity_violation: concavity,
    })
}

/// Fixed `(R, alpha)`: minimizes `max(F1, F2)` under `E_Q[f] <= alpha`,
/// reassigning the reference to each minimizer.
pub fn solve_fixed_rate(
    channel: &Channel,
    point: RateConstraintPoint,
    options: &SolverOptions,
) -> Result<RunReport> {
    let family = RateFamily::from_family(&options.family)?;
    let t = family.weights();
    if let Some(init) = &options.init {
        check_alphabets(init, channel)?;
        check_alpha(init, channel, point.alpha)?;
    }
    let scheme = Scheme::FixedRateAlpha {
        rate: point.rate,
        alpha: point.alpha,
    };
    iterate(scheme, t, channel, options, |reference| {
        let inner = inner_step_fixed_rate(reference, family, channel, point, &options.controls)?;
        let gap = inner.duality_gap();
        // the current reference competes too, which keeps the history monotone
        let (joint, value) = best_candidate(
            [inner.joint, reference.clone()],
            channel,
            point.alpha,
            |j| f_max(j, reference, &t, channel, point.rate),
        )?;
        Ok(StepOut {
            joint,
            value,
            rho: inner.rho,
            eta: inner.eta,
            gap: Some(gap),
            concavity: inner.concavity_violation,
        })
    })
}

/// Fixed `(rho, eta)`: repeated closed-form minimization; the objective is
/// the closed-form `E0^t(rho, eta, ref)`.
pub fn solve_fixed_gradient(
    channel: &Channel,
    point: GradientPoint,
    options: &SolverOptions,
) -> Result<RunReport> {
    let family = options.family;
    let t = family.weights(point.rho)?;
    let scheme = Scheme::FixedGradient {
        rho: point.rho,
        eta: point.eta,
    };
    iterate(scheme, t, channel, options, |reference| {
        let up = family.update(reference, point, channel)?;
        Ok(StepOut {
            joint: up.joint,
            value: up.e0,
            rho: point.rho,
            eta: point.eta,
            gap: None,
            concavity: 0.0,
        })
    })
}

/// Fixed `(alpha, rho)`: minimizes the `eta = 0` fixed-gradient objective
/// under `E_Q[f] <= alpha`, searching the cost multiplier `eta`.
pub fn solve_fixed_alpha_rho(
    channel: &Channel,
    alpha: f64,
    rho: f64,
    options: &SolverOptions,
) -> Result<RunReport> {
    let zero = GradientPoint::new(rho, 0.0)?;
    RateConstraintPoint::new(0.0, Some(alpha))?;
    let family = options.family;
    let t = family.weights(rho)?;
    if let Some(init) = &options.init {
        check_alphabets(init, channel)?;
    }
    let init = options
        .init
        .clone()
        .unwrap_or_else(|| JointDistribution::uniform(channel.num_inputs(), channel.num_outputs()));
    check_alpha(&init, channel, Some(alpha))?;
    let controls = options.controls;
    let scheme = Scheme::FixedAlphaRho { alpha, rho };
    iterate(scheme, t, channel, options, |reference| {
        let mut trace = Trace::default();
        let (bracket, eta) = eta_search(channel, alpha, &controls, &mut trace, |eta| {
            let up = family.update(reference, GradientPoint { rho, eta }, channel)?;
            let dual = up.e0;
            Ok(Bracket {
                candidates: vec![up],
                arg: rho,
                dual,
            })
        })?;
        let dual = bracket.dual - eta * alpha;
        let (joint, value) = best_candidate(
            bracket
                .candidates
                .into_iter()
                .map(|u| u.joint)
                .chain([reference.clone()]),
            channel,
            Some(alpha),
            |j| f_gradient(zero, j, reference, &t, channel),
        )?;
        Ok(StepOut {
            joint,
            value,
            rho,
            eta,
            gap: Some(value - dual),
            concavity: trace.max_violation(),
        })
    })
}

/// Fixed `(R, eta)`: minimizes `max(F1, F2) + eta E_Q[f]`, searching `rho`.
pub fn solve_fixed_rate_eta(
    channel: &Channel,
    rate: f64,
    eta: f64,
    options: &SolverOptions,
) -> Result<RunReport> {
    RateConstraintPoint::new(rate, None)?;
    GradientPoint::new(0.0, eta)?;
    let family = RateFamily::from_family(&options.family)?;
    let t = family.weights();
    if eta > 0.0 && channel.cost().is_none() {
        return Err(Error::InvalidInput("eta > 0 requires a channel with input costs".into()));
    }
    let controls = options.controls;
    let scheme = Scheme::FixedRateEta { rate, eta };
    iterate(scheme, t, channel, options, |reference| {
        let mut trace = Trace::default();
        let bracket = rho_search(reference, family, channel, eta, rate, &controls, &mut trace)?;
        let primal = |j: &JointDistribution| -> Result<f64> {
            let cost = if eta > 0.0 { eta * j.expected_cost(channel)? } else { 0.0 };
            Ok(f_max(j, reference, &t, channel, rate)? + cost)
        };
        let (joint, value) = best_candidate(
            bracket
                .candidates
                .into_iter()
                .map(|u| u.joint)
                .chain([reference.clone()]),
            channel,
            None,
            primal,
        )?;
        Ok(StepOut {
            joint,
            value,
            rho: bracket.arg,
            eta,
            gap: Some(value - bracket.dual),
            concavity: trace.max_violation(),
        })
    })
}

/// Runs the scheme named in `config`.
pub fn solve(channel: &Channel, config: &SolverConfig) -> Result<RunReport> {
    let options = &config.options;
    match config.scheme {
        Scheme::FixedRateAlpha { rate, alpha } => {
            solve_fixed_rate(channel, RateConstraintPoint::new(rate, alpha)?, options)
        }
        Scheme::FixedGradient { rho, eta } => {
            solve_fixed_gradient(channel, GradientPoint::new(rho, eta)?, options)
        }
        Scheme::FixedAlphaRho { alpha, rho } => solve_fixed_alpha_rho(channel, alpha, rho, options),
        Scheme::FixedRateEta { rate, eta } => solve_fixed_rate_eta(channel, rate, eta, options),
    }
}

/// One supporting-plane point of the exponent surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub rho: f64,
    pub eta: f64,
    /// `I(Q*, W*)` at the converged fixed point.
    pub rate: f64,
    /// `E_{Q*}[f]`, absent for costless channels.
    pub alpha: Option<f64>,
    pub e0: f64,
    /// `E0 + rho R - eta alpha`.
    pub ec: f64,
    pub converged: bool,
}

/// Runs the fixed-gradient scheme at every `(rho, eta)` grid point (row-major
/// in `rho`) and reads off the touching point `(R, alpha, E)` of each plane.
pub fn sweep_curve(
    channel: &Channel,
    rho_grid: &[f64],
    eta_grid: &[f64],
    options: &SolverOptions,
) -> Result<Vec<CurvePoint>> {
    let points: Vec<GradientPoint> = rho_grid
        .iter()
        .flat_map(|&rho| eta_grid.iter().map(move |&eta| (rho, eta)))
        .map(|(rho, eta)| {
            if rho > options.controls.rho_cap || eta > options.controls.eta_max {
                return Err(Error::InvalidParameter(format!(
                    "grid point ({rho}, {eta}) outside [0, rho_cap] x [0, eta_max]"
                )));
            }
            GradientPoint::new(rho, eta)
        })
        .collect::<Result<_>>()?;
    points
        .par_iter()
        .map(|&point| {
            let report = solve_fixed_gradient(channel, point, options)?;
            let joint = &report.final_joint;
            let rate = mutual_information(joint);
            let alpha = match channel.cost() {
                Some(_) => Some(joint.expected_cost(channel)?),
                None => None,
            };
            let ec = report.value + point.rho * rate - point.eta * alpha.unwrap_or(0.0);
            Ok(CurvePoint {
                rho: point.rho,
                eta: point.eta,
                rate,
                alpha,
                e0: report.value,
                ec,
                converged: report.converged,
            })
        })
        .collect()
}
