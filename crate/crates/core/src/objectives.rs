//! Objective functions: the fixed-rate pair `F1`, `F2` and their maximum, the
//! fixed-gradient objective, and Gallager's `E0` used for cross-validation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::{
    channel_divergence, check_alphabets, dt_combination, mutual_information, Channel,
    DivergenceWeights, JointDistribution,
};

/// A rate `R` (nats per channel use) with an optional input-cost budget `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateConstraintPoint {
    pub rate: f64,
    pub alpha: Option<f64>,
}

impl RateConstraintPoint {
    pub fn new(rate: f64, alpha: Option<f64>) -> Result<Self> {
        if !rate.is_finite() || rate < 0.0 {
            return Err(Error::InvalidParameter(format!("rate must be finite and >= 0, got {rate}")));
        }
        if let Some(a) = alpha {
            if !a.is_finite() {
                return Err(Error::InvalidParameter(format!("alpha must be finite, got {a}")));
            }
        }
        Ok(Self { rate, alpha })
    }

    pub fn unconstrained(rate: f64) -> Result<Self> {
        Self::new(rate, None)
    }
}

/// A slope pair `(rho, eta)` with `0 <= rho < 1` and `eta >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientPoint {
    pub rho: f64,
    pub eta: f64,
}

impl GradientPoint {
    pub fn new(rho: f64, eta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&rho) {
            return Err(Error::InvalidParameter(format!("rho must lie in [0, 1), got {rho}")));
        }
        if !eta.is_finite() || eta < 0.0 {
            return Err(Error::InvalidParameter(format!("eta must be finite and >= 0, got {eta}")));
        }
        Ok(Self { rho, eta })
    }
}

/// `F1 = D(W||P|Q) + D^t(QW, ref)`.
pub fn f1(
    qw: &JointDistribution,
    reference: &JointDistribution,
    t: &DivergenceWeights,
    channel: &Channel,
) -> Result<f64> {
    check_alphabets(qw, channel)?;
    let d = channel_divergence(qw, channel);
    if d == f64::INFINITY {
        return Ok(d);
    }
    Ok(d + dt_combination(qw, reference, t)?)
}

/// `F2 = D(W||P|Q) - I(Q, W) + R`.
pub fn f2(qw: &JointDistribution, rate: f64, channel: &Channel) -> Result<f64> {
    check_alphabets(qw, channel)?;
    let d = channel_divergence(qw, channel);
    if d == f64::INFINITY {
        return Ok(d);
    }
    Ok(d - mutual_information(qw) + rate)
}

/// `max(F1, F2)`.
pub fn f_max(
    qw: &JointDistribution,
    reference: &JointDistribution,
    t: &DivergenceWeights,
    channel: &Channel,
    rate: f64,
) -> Result<f64> {
    Ok(f1(qw, reference, t, channel)?.max(f2(qw, rate, channel)?))
}

/// `eta * E_Q[f]`, zero when `eta = 0` regardless of whether costs exist.
pub(crate) fn cost_term(qw: &JointDistribution, eta: f64, channel: &Channel) -> Result<f64> {
    if eta == 0.0 {
        return Ok(0.0);
    }
    if channel.cost().is_none() {
        return Err(Error::InvalidInput(
            "eta > 0 requires a channel with input costs".into(),
        ));
    }
    Ok(eta * qw.expected_cost(channel)?)
}

/// The fixed-gradient objective
/// `D(W||P|Q) - rho I(Q,W) + eta E_Q[f] + (1 - rho) D^t(QW, ref)`.
pub fn f_gradient(
    point: GradientPoint,
    qw: &JointDistribution,
    reference: &JointDistribution,
    t: &DivergenceWeights,
    channel: &Channel,
) -> Result<f64> {
    check_alphabets(qw, channel)?;
    let cost = cost_term(qw, point.eta, channel)?;
    let d = channel_divergence(qw, channel);
    let dt = dt_combination(qw, reference, t)?;
    if d == f64::INFINITY || dt == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    Ok(d - point.rho * mutual_information(qw) + cost + (1.0 - point.rho) * dt)
}

/// Numerically stable `ln sum exp(v)`; `-inf` for an empty or all `-inf` input.
pub(crate) fn logsumexp<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let values: Vec<f64> = values.into_iter().collect();
    let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    if m == f64::INFINITY {
        return m;
    }
    m + values.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// Gallager's function at negative argument:
/// `E0(-rho, Q) = -ln sum_y [sum_x Q(x) P(y|x)^{1/(1-rho)}]^{1-rho}`.
pub fn gallager_e0_neg(rho: f64, q: &[f64], channel: &Channel) -> Result<f64> {
    GradientPoint::new(rho, 0.0)?;
    if q.len() != channel.num_inputs() {
        return Err(Error::DimensionMismatch {
            what: "input distribution",
            expected: channel.num_inputs(),
            found: q.len(),
        });
    }
    let s = 1.0 / (1.0 - rho);
    let log_q: Vec<f64> = q.iter().map(|&v| crate::prob::ln0(v)).collect();
    let outer = logsumexp((0..channel.num_outputs()).map(|y| {
        let inner = logsumexp(
            (0..channel.num_inputs())
                .filter(|&x| q[x] > 0.0 && channel.p(x, y) > 0.0)
                .map(|x| log_q[x] + s * channel.log_p(x, y)),
        );
        (1.0 - rho) * inner
    }));
    Ok(-outer)
}

/// The inner minimum `min_QW { max(F1, F2) : E_Q[f] <= alpha }` for a fixed
/// reference, with its minimizer.
///
/// Solved through the concave dual of the solvers module; only weights with
/// `t1 = t2 + 1` (a fixed-`t` closed-form family) are supported.
pub fn ec_inner(
    reference: &JointDistribution,
    t: &DivergenceWeights,
    channel: &Channel,
    point: RateConstraintPoint,
) -> Result<(f64, JointDistribution)> {
    let family = crate::solvers::RateFamily::from_weights(t)?;
    let step = crate::solvers::inner_step_fixed_rate(
        reference,
        family,
        channel,
        point,
        &crate::solvers::DualControls::default(),
    )?;
    Ok((step.value, step.joint))
}
