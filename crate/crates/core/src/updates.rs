//! Closed-form minimizers of the fixed-gradient objective and the matching
//! closed-form values of its minimum `E0^t(rho, eta, ref)`.
//!
//! Two parameter families admit closed forms. Written in terms of the weights
//! `t = (t1, t2, t3, t4)` on `(Q, W, T, V)`:
//!
//! * family A: `t1 = t2 + 1`, with `a = (t2 + t3)(1 - rho)`, `b = (t2 + t4)(1 - rho)`;
//! * family B: `t4 = t3 + rho / (1 - rho)`, with `a = (t2 + t3)(1 - rho)`,
//!   `c = (t1 + t3)(1 - rho)`.
//!
//! Everything is evaluated as weighted sums of logarithms with max-shifted
//! exponential sums, so tiny reference entries never underflow a power.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objectives::{logsumexp, GradientPoint};
use crate::prob::{check_alphabets, ln0, Channel, DivergenceWeights, JointDistribution};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyAParams {
    pub a: f64,
    pub b: f64,
}

impl FamilyAParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        check_param("a", a)?;
        check_param("b", b)?;
        Ok(Self { a, b })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyBParams {
    pub a: f64,
    pub c: f64,
}

impl FamilyBParams {
    pub fn new(a: f64, c: f64) -> Result<Self> {
        check_param("a", a)?;
        check_param("c", c)?;
        Ok(Self { a, c })
    }
}

fn check_param(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v < 0.0 {
        return Err(Error::InvalidParameter(format!("{name} must be finite and >= 0, got {v}")));
    }
    Ok(())
}

/// A closed-form family together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum Family {
    A(FamilyAParams),
    B(FamilyBParams),
}

impl Family {
    /// The divergence weights this family corresponds to at `rho`
    /// (one representative; `t` is only defined up to `(s, s, -s, -s)`).
    pub fn weights(&self, rho: f64) -> Result<DivergenceWeights> {
        GradientPoint::new(rho, 0.0)?;
        let s = 1.0 - rho;
        match *self {
            Family::A(p) => DivergenceWeights::new(1.0, 0.0, p.a / s, p.b / s),
            Family::B(p) => DivergenceWeights::new(p.c / s, p.a / s, 0.0, rho / s),
        }
    }

    pub fn update(
        &self,
        reference: &JointDistribution,
        point: GradientPoint,
        channel: &Channel,
    ) -> Result<Update> {
        match *self {
            Family::A(p) => update_family_a(reference, point, p, channel),
            Family::B(p) => update_family_b(reference, point, p, channel),
        }
    }

    pub fn e0(
        &self,
        reference: &JointDistribution,
        point: GradientPoint,
        channel: &Channel,
    ) -> Result<f64> {
        Ok(self.update(reference, point, channel)?.e0)
    }
}

/// `ln P_eta(x, y) = ln P(y|x) - eta f(x)`, `-inf` exactly where `P(y|x) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct TiltedChannel {
    ny: usize,
    log_values: Vec<f64>,
}

impl TiltedChannel {
    pub fn new(channel: &Channel, eta: f64) -> Result<Self> {
        let ny = channel.num_outputs();
        let mut log_values = channel.log_transition().to_vec();
        if eta != 0.0 {
            let cost = channel.cost().ok_or_else(|| {
                Error::InvalidInput("eta > 0 requires a channel with input costs".into())
            })?;
            for (i, v) in log_values.iter_mut().enumerate() {
                *v -= eta * cost[i / ny];
            }
        }
        Ok(Self { ny, log_values })
    }

    #[inline]
    pub fn log_value(&self, x: usize, y: usize) -> f64 {
        self.log_values[x * self.ny + y]
    }
}

/// Output of a closed-form update.
#[derive(Debug, Clone, PartialEq)]
pub struct Update {
    pub joint: JointDistribution,
    /// Natural log of the normalization constant `K`.
    pub log_k: f64,
    /// `E0^t(rho, eta, ref)`, the minimum value attained by `joint`.
    pub e0: f64,
}

impl Update {
    pub fn k(&self) -> f64 {
        self.log_k.exp()
    }
}

/// `e * l` with the convention that a zero exponent contributes nothing,
/// even when the logarithm is `-inf` or belongs to an undefined conditional.
#[inline]
fn pw(e: f64, l: f64) -> f64 {
    if e == 0.0 {
        0.0
    } else {
        e * l
    }
}

struct RefLogs {
    q: Vec<f64>,
    t: Vec<f64>,
    w: Vec<f64>,
    v: Vec<f64>,
}

fn ref_logs(reference: &JointDistribution) -> RefLogs {
    let (nx, ny) = (reference.num_inputs(), reference.num_outputs());
    let q: Vec<f64> = reference.input_marginal().iter().map(|&v| ln0(v)).collect();
    let t: Vec<f64> = reference.output_marginal().iter().map(|&v| ln0(v)).collect();
    let mut w = vec![f64::NEG_INFINITY; nx * ny];
    let mut v = vec![f64::NEG_INFINITY; nx * ny];
    for x in 0..nx {
        for y in 0..ny {
            let j = reference.get(x, y);
            if j > 0.0 {
                let lj = j.ln();
                w[x * ny + y] = lj - q[x];
                v[x * ny + y] = lj - t[y];
            }
        }
    }
    RefLogs { q, t, w, v }
}

fn finish(nx: usize, ny: usize, log_j: Vec<f64>, log_k: f64, e0: f64) -> Result<Update> {
    if log_k == f64::NEG_INFINITY {
        return Err(Error::DegenerateReference);
    }
    if !log_k.is_finite() {
        return Err(Error::NumericalFailure(format!("normalization ln K = {log_k}")));
    }
    let weights = log_j
        .into_iter()
        .map(|l| if l == f64::NEG_INFINITY { 0.0 } else { (l - log_k).exp() })
        .collect();
    let joint = JointDistribution::normalized(nx, ny, weights)?;
    Ok(Update { joint, log_k, e0 })
}

/// Family-A closed-form update:
/// `QW ~ u(x,y) T~(y)^{a/(a+1)} S(y)^{(b-a-rho)/(a+1)}` with
/// `u = [Q~^{1-rho} V~^b P_eta]^{1/(b+1-rho)}` and `S(y) = sum_x u(x,y)`.
pub fn update_family_a(
    reference: &JointDistribution,
    point: GradientPoint,
    params: FamilyAParams,
    channel: &Channel,
) -> Result<Update> {
    check_alphabets(reference, channel)?;
    let (nx, ny) = (reference.num_inputs(), reference.num_outputs());
    let GradientPoint { rho, eta } = point;
    let FamilyAParams { a, b } = params;
    let tilted = TiltedChannel::new(channel, eta)?;
    let logs = ref_logs(reference);

    let d = b + 1.0 - rho;
    let mut u = vec![f64::NEG_INFINITY; nx * ny];
    for x in 0..nx {
        for y in 0..ny {
            let lp = tilted.log_value(x, y);
            if lp == f64::NEG_INFINITY {
                continue;
            }
            u[x * ny + y] = (pw(1.0 - rho, logs.q[x]) + pw(b, logs.v[x * ny + y]) + lp) / d;
        }
    }
    let s: Vec<f64> = (0..ny).map(|y| logsumexp((0..nx).map(|x| u[x * ny + y]))).collect();

    let ta = a / (a + 1.0);
    let tilt = (b - a - rho) / (a + 1.0);
    let outer = d / (a + 1.0);
    let mut log_j = vec![f64::NEG_INFINITY; nx * ny];
    let mut column = vec![f64::NEG_INFINITY; ny];
    for y in 0..ny {
        if s[y] == f64::NEG_INFINITY {
            continue;
        }
        let base = pw(ta, logs.t[y]);
        if base == f64::NEG_INFINITY {
            continue;
        }
        column[y] = base + outer * s[y];
        let shift = base + pw(tilt, s[y]);
        for x in 0..nx {
            let ux = u[x * ny + y];
            if ux != f64::NEG_INFINITY {
                log_j[x * ny + y] = ux + shift;
            }
        }
    }
    let log_k = logsumexp(column);
    let e0 = -(a + 1.0) * log_k;
    finish(nx, ny, log_j, log_k, e0)
}

/// Family-B closed-form update (requires `rho > 0`):
/// `QW ~ v(x,y) Q~(x)^{c/(c+rho)} S(x)^{(a+1-c-rho)/(c+rho)}` with
/// `v = [W~^a V~^rho P_eta]^{1/(a+1)}` and `S(x) = sum_y v(x,y)`.
pub fn update_family_b(
    reference: &JointDistribution,
    point: GradientPoint,
    params: FamilyBParams,
    channel: &Channel,
) -> Result<Update> {
    check_alphabets(reference, channel)?;
    let GradientPoint { rho, eta } = point;
    if rho <= 0.0 {
        return Err(Error::InvalidParameter(
            "family B is undefined at rho = 0".into(),
        ));
    }
    let (nx, ny) = (reference.num_inputs(), reference.num_outputs());
    let FamilyBParams { a, c } = params;
    let tilted = TiltedChannel::new(channel, eta)?;
    let logs = ref_logs(reference);

    let mut v = vec![f64::NEG_INFINITY; nx * ny];
    for x in 0..nx {
        for y in 0..ny {
            let lp = tilted.log_value(x, y);
            if lp == f64::NEG_INFINITY {
                continue;
            }
            let i = x * ny + y;
            v[i] = (pw(a, logs.w[i]) + pw(rho, logs.v[i]) + lp) / (a + 1.0);
        }
    }
    let s: Vec<f64> = (0..nx).map(|x| logsumexp((0..ny).map(|y| v[x * ny + y]))).collect();

    let qc = c / (c + rho);
    let tilt = (a + 1.0 - c - rho) / (c + rho);
    let outer = (a + 1.0) / (c + rho);
    let mut log_j = vec![f64::NEG_INFINITY; nx * ny];
    let mut row = vec![f64::NEG_INFINITY; nx];
    for x in 0..nx {
        if s[x] == f64::NEG_INFINITY {
            continue;
        }
        let base = pw(qc, logs.q[x]);
        if base == f64::NEG_INFINITY {
            continue;
        }
        row[x] = base + outer * s[x];
        let shift = base + pw(tilt, s[x]);
        for y in 0..ny {
            let vx = v[x * ny + y];
            if vx != f64::NEG_INFINITY {
                log_j[x * ny + y] = vx + shift;
            }
        }
    }
    let log_k = logsumexp(row);
    let e0 = -(c + rho) * log_k;
    finish(nx, ny, log_j, log_k, e0)
}

/// `E0^t` for family A in closed form.
pub fn e0_family_a(
    reference: &JointDistribution,
    point: GradientPoint,
    params: FamilyAParams,
    channel: &Channel,
) -> Result<f64> {
    Ok(update_family_a(reference, point, params, channel)?.e0)
}

/// `E0^t` for family B in closed form.
pub fn e0_family_b(
    reference: &JointDistribution,
    point: GradientPoint,
    params: FamilyBParams,
    channel: &Channel,
) -> Result<f64> {
    Ok(update_family_b(reference, point, params, channel)?.e0)
}
