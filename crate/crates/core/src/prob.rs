//! Finite probability distributions, channels and the divergences between them.
//!
//! Every quantity is in nats. Divergences follow the usual conventions
//! `0 log(0/q) = 0` and `p log(p/0) = +inf` for `p > 0`; an infinite
//! divergence is returned as `f64::INFINITY`, never as a large finite value.
//! Logarithms are taken entry-wise (`p * (ln p - ln q)`) so that inputs down
//! to the subnormal range never overflow an intermediate ratio.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the total mass of distributions and channel rows.
pub const MASS_TOL: f64 = 1e-12;

/// `p ln(p/q)` with the information-theoretic conventions.
#[inline]
pub(crate) fn plogpq(p: f64, q: f64) -> f64 {
    if p == 0.0 {
        0.0
    } else if q == 0.0 {
        f64::INFINITY
    } else {
        p * (p.ln() - q.ln())
    }
}

/// Natural logarithm with `ln 0 = -inf`.
#[inline]
pub(crate) fn ln0(v: f64) -> f64 {
    if v > 0.0 {
        v.ln()
    } else {
        f64::NEG_INFINITY
    }
}

fn check_distribution(what: &'static str, p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::InvalidInput(format!("{what} is empty")));
    }
    let mut sum = 0.0;
    for &v in p {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::InvalidInput(format!("{what} has entry {v}")));
        }
        sum += v;
    }
    if (sum - 1.0).abs() > MASS_TOL {
        return Err(Error::InvalidInput(format!("{what} sums to {sum}")));
    }
    Ok(())
}

/// A discrete memoryless channel `P(y|x)` with an optional per-input cost `f(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    input_alphabet: Vec<String>,
    output_alphabet: Vec<String>,
    transition: Vec<f64>,
    log_transition: Vec<f64>,
    cost: Option<Vec<f64>>,
}

impl Channel {
    /// Builds a channel from labelled alphabets and transition rows indexed by input.
    pub fn new(
        input_alphabet: Vec<String>,
        output_alphabet: Vec<String>,
        rows: Vec<Vec<f64>>,
        cost: Option<Vec<f64>>,
    ) -> Result<Self> {
        let nx = input_alphabet.len();
        let ny = output_alphabet.len();
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidInput("channel alphabets must be non-empty".into()));
        }
        if rows.len() != nx {
            return Err(Error::DimensionMismatch {
                what: "transition rows",
                expected: nx,
                found: rows.len(),
            });
        }
        let mut transition = Vec::with_capacity(nx * ny);
        for (x, row) in rows.iter().enumerate() {
            if row.len() != ny {
                return Err(Error::DimensionMismatch {
                    what: "transition row length",
                    expected: ny,
                    found: row.len(),
                });
            }
            for &p in row {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::InvalidInput(format!(
                        "transition entry {p} in row {x} is outside [0, 1]"
                    )));
                }
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > MASS_TOL {
                return Err(Error::InvalidInput(format!("transition row {x} sums to {sum}")));
            }
            transition.extend_from_slice(row);
        }
        if let Some(c) = &cost {
            if c.len() != nx {
                return Err(Error::DimensionMismatch {
                    what: "cost vector",
                    expected: nx,
                    found: c.len(),
                });
            }
            if let Some(bad) = c.iter().find(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!("cost entry {bad} is not finite")));
            }
        }
        let log_transition = transition.iter().map(|&p| ln0(p)).collect();
        Ok(Self {
            input_alphabet,
            output_alphabet,
            transition,
            log_transition,
            cost,
        })
    }

    /// Builds a channel with numeric labels `0, 1, ...` on both sides.
    pub fn from_rows(rows: Vec<Vec<f64>>, cost: Option<Vec<f64>>) -> Result<Self> {
        let nx = rows.len();
        let ny = rows.first().map_or(0, Vec::len);
        Self::new(
            (0..nx).map(|i| i.to_string()).collect(),
            (0..ny).map(|i| i.to_string()).collect(),
            rows,
            cost,
        )
    }

    /// Binary symmetric channel with crossover probability `p`.
    pub fn bsc(p: f64) -> Result<Self> {
        Self::from_rows(vec![vec![1.0 - p, p], vec![p, 1.0 - p]], None)
    }

    /// Noiseless channel on `n` symbols.
    pub fn identity(n: usize) -> Result<Self> {
        let rows = (0..n)
            .map(|x| (0..n).map(|y| if x == y { 1.0 } else { 0.0 }).collect())
            .collect();
        Self::from_rows(rows, None)
    }

    /// Returns the same channel carrying the given input costs.
    pub fn with_cost(self, cost: Vec<f64>) -> Result<Self> {
        let rows = self.rows();
        Self::new(self.input_alphabet, self.output_alphabet, rows, Some(cost))
    }

    pub fn num_inputs(&self) -> usize {
        self.input_alphabet.len()
    }

    pub fn num_outputs(&self) -> usize {
        self.output_alphabet.len()
    }

    pub fn input_alphabet(&self) -> &[String] {
        &self.input_alphabet
    }

    pub fn output_alphabet(&self) -> &[String] {
        &self.output_alphabet
    }

    #[inline]
    pub fn p(&self, x: usize, y: usize) -> f64 {
        self.transition[x * self.num_outputs() + y]
    }

    #[inline]
    pub fn log_p(&self, x: usize, y: usize) -> f64 {
        self.log_transition[x * self.num_outputs() + y]
    }

    /// Row-major transition matrix.
    pub fn transition(&self) -> &[f64] {
        &self.transition
    }

    pub(crate) fn log_transition(&self) -> &[f64] {
        &self.log_transition
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.transition
            .chunks(self.num_outputs())
            .map(<[f64]>::to_vec)
            .collect()
    }

    pub fn cost(&self) -> Option<&[f64]> {
        self.cost.as_deref()
    }

    /// Smallest input cost, if costs are present.
    pub fn min_cost(&self) -> Option<f64> {
        self.cost.as_ref().map(|c| c.iter().copied().fold(f64::INFINITY, f64::min))
    }

    pub fn max_cost(&self) -> Option<f64> {
        self.cost
            .as_ref()
            .map(|c| c.iter().copied().fold(f64::NEG_INFINITY, f64::max))
    }

    /// The channel as a conditional distribution from `X` to `Y`.
    pub fn conditional(&self) -> Conditional {
        Conditional {
            cols: self.num_outputs(),
            rows: self.rows().into_iter().map(Some).collect(),
        }
    }

    /// Sub-channel keeping only the listed inputs (in the given order).
    pub fn restrict_inputs(&self, inputs: &[usize]) -> Result<Self> {
        if inputs.is_empty() {
            return Err(Error::InvalidInput("empty input subset".into()));
        }
        let rows = self.rows();
        let mut labels = Vec::with_capacity(inputs.len());
        let mut kept = Vec::with_capacity(inputs.len());
        for &x in inputs {
            let row = rows.get(x).ok_or_else(|| {
                Error::InvalidInput(format!("input index {x} out of range"))
            })?;
            labels.push(self.input_alphabet[x].clone());
            kept.push(row.clone());
        }
        let cost = self
            .cost
            .as_ref()
            .map(|c| inputs.iter().map(|&x| c[x]).collect());
        Self::new(labels, self.output_alphabet.clone(), kept, cost)
    }

    /// Removes output symbols that no input can produce.
    ///
    /// Returns the reduced channel and the labels of the dropped outputs.
    pub fn drop_zero_columns(self) -> (Self, Vec<String>) {
        let ny = self.num_outputs();
        let keep: Vec<usize> = (0..ny)
            .filter(|&y| (0..self.num_inputs()).any(|x| self.p(x, y) > 0.0))
            .collect();
        if keep.len() == ny {
            return (self, Vec::new());
        }
        let dropped = (0..ny)
            .filter(|y| !keep.contains(y))
            .map(|y| self.output_alphabet[y].clone())
            .collect();
        let rows = (0..self.num_inputs())
            .map(|x| keep.iter().map(|&y| self.p(x, y)).collect())
            .collect();
        let labels = keep.iter().map(|&y| self.output_alphabet[y].clone()).collect();
        let reduced = Self::new(self.input_alphabet, labels, rows, self.cost)
            .expect("dropping all-zero columns keeps every row normalized");
        (reduced, dropped)
    }
}

/// A conditional distribution stored row by row.
///
/// Rows conditioned on a zero-probability symbol are undefined (`None`) and
/// are skipped by every sum.
#[derive(Debug, Clone, PartialEq)]
pub struct Conditional {
    cols: usize,
    rows: Vec<Option<Vec<f64>>>,
}

impl Conditional {
    pub fn new(rows: Vec<Option<Vec<f64>>>) -> Result<Self> {
        let cols = rows
            .iter()
            .flatten()
            .map(Vec::len)
            .next()
            .ok_or_else(|| Error::InvalidInput("conditional has no defined row".into()))?;
        for row in rows.iter().flatten() {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    what: "conditional row length",
                    expected: cols,
                    found: row.len(),
                });
            }
            check_distribution("conditional row", row)?;
        }
        Ok(Self { cols, rows })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(rows.into_iter().map(Some).collect())
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> Option<&[f64]> {
        self.rows.get(i).and_then(|r| r.as_deref())
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.row(i).map(|r| r[j])
    }
}

/// A probability distribution `QW(x, y)` on `X x Y`, stored row-major by `x`.
///
/// The input marginal `Q`, output marginal `T`, and the conditionals
/// `W(y|x) = QW/Q` and `V(x|y) = QW/T` are derived views.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    nx: usize,
    ny: usize,
    joint: Vec<f64>,
    input: Vec<f64>,
    output: Vec<f64>,
}

impl JointDistribution {
    pub fn new(nx: usize, ny: usize, joint: Vec<f64>) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidInput("joint alphabets must be non-empty".into()));
        }
        if joint.len() != nx * ny {
            return Err(Error::DimensionMismatch {
                what: "joint entries",
                expected: nx * ny,
                found: joint.len(),
            });
        }
        check_distribution("joint distribution", &joint)?;
        Ok(Self::from_checked(nx, ny, joint))
    }

    pub(crate) fn from_checked(nx: usize, ny: usize, joint: Vec<f64>) -> Self {
        let mut input = vec![0.0; nx];
        let mut output = vec![0.0; ny];
        for x in 0..nx {
            for y in 0..ny {
                let v = joint[x * ny + y];
                input[x] += v;
                output[y] += v;
            }
        }
        Self {
            nx,
            ny,
            joint,
            input,
            output,
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let nx = rows.len();
        let ny = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ny) {
            return Err(Error::InvalidInput("ragged joint rows".into()));
        }
        Self::new(nx, ny, rows.concat())
    }

    /// Normalizes non-negative weights into a joint distribution.
    pub fn normalized(nx: usize, ny: usize, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != nx * ny {
            return Err(Error::DimensionMismatch {
                what: "joint entries",
                expected: nx * ny,
                found: weights.len(),
            });
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidInput("joint weights must be finite and >= 0".into()));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidInput("joint weights have zero mass".into()));
        }
        let joint = weights.into_iter().map(|w| w / total).collect();
        Ok(Self::from_checked(nx, ny, joint))
    }

    pub fn uniform(nx: usize, ny: usize) -> Self {
        let n = (nx * ny) as f64;
        Self::from_checked(nx, ny, vec![1.0 / n; nx * ny])
    }

    /// `Q(x) P(y|x)` for an input distribution and a channel.
    pub fn product(q: &[f64], channel: &Channel) -> Result<Self> {
        Self::from_input_conditional(q, &channel.conditional())
    }

    /// Joint `Q(x) W(y|x)`; rows of `w` may be undefined only where `Q(x) = 0`.
    pub fn from_input_conditional(q: &[f64], w: &Conditional) -> Result<Self> {
        check_distribution("input marginal", q)?;
        if w.num_rows() != q.len() {
            return Err(Error::DimensionMismatch {
                what: "conditional rows",
                expected: q.len(),
                found: w.num_rows(),
            });
        }
        let ny = w.num_cols();
        let mut joint = vec![0.0; q.len() * ny];
        for (x, &qx) in q.iter().enumerate() {
            if qx == 0.0 {
                continue;
            }
            let row = w.row(x).ok_or_else(|| {
                Error::InvalidInput(format!("conditional row {x} undefined where Q > 0"))
            })?;
            for y in 0..ny {
                joint[x * ny + y] = qx * row[y];
            }
        }
        Ok(Self::from_checked(q.len(), ny, joint))
    }

    /// Joint `T(y) V(x|y)`; `v` is indexed by output symbol.
    pub fn from_output_conditional(t: &[f64], v: &Conditional) -> Result<Self> {
        check_distribution("output marginal", t)?;
        if v.num_rows() != t.len() {
            return Err(Error::DimensionMismatch {
                what: "conditional rows",
                expected: t.len(),
                found: v.num_rows(),
            });
        }
        let nx = v.num_cols();
        let ny = t.len();
        let mut joint = vec![0.0; nx * ny];
        for (y, &ty) in t.iter().enumerate() {
            if ty == 0.0 {
                continue;
            }
            let row = v.row(y).ok_or_else(|| {
                Error::InvalidInput(format!("conditional row {y} undefined where T > 0"))
            })?;
            for x in 0..nx {
                joint[x * ny + y] = ty * row[x];
            }
        }
        Ok(Self::from_checked(nx, ny, joint))
    }

    pub fn num_inputs(&self) -> usize {
        self.nx
    }

    pub fn num_outputs(&self) -> usize {
        self.ny
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.joint[x * self.ny + y]
    }

    pub fn joint(&self) -> &[f64] {
        &self.joint
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.joint.chunks(self.ny).map(<[f64]>::to_vec).collect()
    }

    /// `Q(x)`.
    pub fn input_marginal(&self) -> &[f64] {
        &self.input
    }

    /// `T(y)`.
    pub fn output_marginal(&self) -> &[f64] {
        &self.output
    }

    /// `W(y|x)`, undefined where `Q(x) = 0`.
    pub fn w(&self) -> Conditional {
        let rows = (0..self.nx)
            .map(|x| {
                let qx = self.input[x];
                (qx > 0.0).then(|| (0..self.ny).map(|y| self.get(x, y) / qx).collect())
            })
            .collect();
        Conditional {
            cols: self.ny,
            rows,
        }
    }

    /// `V(x|y)`, indexed by output symbol, undefined where `T(y) = 0`.
    pub fn v(&self) -> Conditional {
        let rows = (0..self.ny)
            .map(|y| {
                let ty = self.output[y];
                (ty > 0.0).then(|| (0..self.nx).map(|x| self.get(x, y) / ty).collect())
            })
            .collect();
        Conditional {
            cols: self.nx,
            rows,
        }
    }

    /// `E_Q[f(X)]` under the channel's cost function.
    pub fn expected_cost(&self, channel: &Channel) -> Result<f64> {
        let cost = channel
            .cost()
            .ok_or_else(|| Error::InvalidInput("channel carries no input costs".into()))?;
        check_alphabets(self, channel)?;
        Ok(self.input.iter().zip(cost).map(|(q, f)| q * f).sum())
    }

    /// Convex combination `lambda * self + (1 - lambda) * other`.
    pub fn mix(&self, other: &Self, lambda: f64) -> Result<Self> {
        same_shape(self, other)?;
        let joint = self
            .joint
            .iter()
            .zip(&other.joint)
            .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
            .collect();
        Self::normalized(self.nx, self.ny, joint)
    }

    /// True when every positive entry of `self` is positive in `other`.
    pub fn is_supported_within(&self, other: &Self) -> bool {
        self.joint.len() == other.joint.len()
            && self
                .joint
                .iter()
                .zip(&other.joint)
                .all(|(a, b)| *a == 0.0 || *b > 0.0)
    }
}

pub(crate) fn same_shape(a: &JointDistribution, b: &JointDistribution) -> Result<()> {
    if a.nx != b.nx {
        return Err(Error::DimensionMismatch {
            what: "input alphabet",
            expected: a.nx,
            found: b.nx,
        });
    }
    if a.ny != b.ny {
        return Err(Error::DimensionMismatch {
            what: "output alphabet",
            expected: a.ny,
            found: b.ny,
        });
    }
    Ok(())
}

pub(crate) fn check_alphabets(qw: &JointDistribution, channel: &Channel) -> Result<()> {
    if qw.nx != channel.num_inputs() {
        return Err(Error::DimensionMismatch {
            what: "input alphabet",
            expected: channel.num_inputs(),
            found: qw.nx,
        });
    }
    if qw.ny != channel.num_outputs() {
        return Err(Error::DimensionMismatch {
            what: "output alphabet",
            expected: channel.num_outputs(),
            found: qw.ny,
        });
    }
    Ok(())
}

/// The weights `t = (t1, t2, t3, t4)` of the divergence combination
/// `t1 D(Q||Q~) + t2 D(W||W~|Q) + t3 D(T||T~) + t4 D(V||V~|T)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceWeights {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub t4: f64,
}

impl DivergenceWeights {
    pub fn new(t1: f64, t2: f64, t3: f64, t4: f64) -> Result<Self> {
        let t = Self { t1, t2, t3, t4 };
        if t.as_array().iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "divergence weights must be finite and non-negative, got {t:?}"
            )));
        }
        Ok(t)
    }

    pub const fn zero() -> Self {
        Self {
            t1: 0.0,
            t2: 0.0,
            t3: 0.0,
            t4: 0.0,
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.t1, self.t2, self.t3, self.t4]
    }
}

/// `D(p || q)` in nats.
pub fn kl(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            what: "distribution length",
            expected: p.len(),
            found: q.len(),
        });
    }
    Ok(p.iter().zip(q).map(|(&a, &b)| plogpq(a, b)).sum())
}

/// `D(W || P | Q) = sum_x Q(x) D(W(.|x) || P(.|x))`.
///
/// Inputs with `Q(x) = 0` contribute nothing; a weighted row that is
/// undefined in `w` is an error, one undefined in `p` gives `+inf`.
pub fn conditional_kl(w: &Conditional, p: &Conditional, q: &[f64]) -> Result<f64> {
    if w.num_rows() != q.len() || p.num_rows() != q.len() {
        return Err(Error::DimensionMismatch {
            what: "conditional rows",
            expected: q.len(),
            found: if w.num_rows() != q.len() {
                w.num_rows()
            } else {
                p.num_rows()
            },
        });
    }
    if w.num_cols() != p.num_cols() {
        return Err(Error::DimensionMismatch {
            what: "conditional columns",
            expected: w.num_cols(),
            found: p.num_cols(),
        });
    }
    let mut total = 0.0;
    for (x, &qx) in q.iter().enumerate() {
        if qx == 0.0 {
            continue;
        }
        let wr = w
            .row(x)
            .ok_or_else(|| Error::InvalidInput(format!("row {x} of W undefined where Q > 0")))?;
        let Some(pr) = p.row(x) else {
            return Ok(f64::INFINITY);
        };
        total += qx * kl(wr, pr)?;
    }
    Ok(total)
}

/// `I(Q, W)` of a joint distribution.
pub fn mutual_information(qw: &JointDistribution) -> f64 {
    let mut total = 0.0;
    for x in 0..qw.nx {
        for y in 0..qw.ny {
            let j = qw.get(x, y);
            if j > 0.0 {
                total += j * (j.ln() - qw.input[x].ln() - qw.output[y].ln());
            }
        }
    }
    total.max(0.0)
}

/// `D(W || P | Q)` for the conditional of `qw` against the channel.
pub(crate) fn channel_divergence(qw: &JointDistribution, channel: &Channel) -> f64 {
    let mut total = 0.0;
    for x in 0..qw.nx {
        for y in 0..qw.ny {
            let j = qw.get(x, y);
            if j == 0.0 {
                continue;
            }
            let p = channel.p(x, y);
            if p == 0.0 {
                return f64::INFINITY;
            }
            total += j * (j.ln() - qw.input[x].ln() - channel.log_p(x, y));
        }
    }
    total.max(0.0)
}

/// `sum QW (ln QW - ln M - ln QW~ + ln M~)` for a matching pair of marginals;
/// this is `D(W||W~|Q)` with `(Q, Q~)` and `D(V||V~|T)` with `(T, T~)`.
fn conditional_joint_divergence(
    qw: &JointDistribution,
    reference: &JointDistribution,
    by_input: bool,
) -> f64 {
    let mut total = 0.0;
    for x in 0..qw.nx {
        for y in 0..qw.ny {
            let j = qw.get(x, y);
            if j == 0.0 {
                continue;
            }
            let r = reference.get(x, y);
            if r == 0.0 {
                return f64::INFINITY;
            }
            let (m, mr) = if by_input {
                (qw.input[x], reference.input[x])
            } else {
                (qw.output[y], reference.output[y])
            };
            total += j * (j.ln() - m.ln() - r.ln() + mr.ln());
        }
    }
    total.max(0.0)
}

/// `D^t(QW, QW~) = t1 D(Q||Q~) + t2 D(W||W~|Q) + t3 D(T||T~) + t4 D(V||V~|T)`.
///
/// Terms with zero weight are skipped, so a support violation only yields
/// `+inf` through an active divergence.
pub fn dt_combination(
    qw: &JointDistribution,
    reference: &JointDistribution,
    t: &DivergenceWeights,
) -> Result<f64> {
    same_shape(qw, reference)?;
    let mut total = 0.0;
    if t.t1 > 0.0 {
        total += t.t1 * kl(&qw.input, &reference.input)?.max(0.0);
    }
    if t.t2 > 0.0 {
        total += t.t2 * conditional_joint_divergence(qw, reference, true);
    }
    if t.t3 > 0.0 {
        total += t.t3 * kl(&qw.output, &reference.output)?.max(0.0);
    }
    if t.t4 > 0.0 {
        total += t.t4 * conditional_joint_divergence(qw, reference, false);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Plain summation of the definitions, kept apart from the library paths.
    fn naive_kl(p: &[f64], q: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..p.len() {
            if p[i] > 0.0 {
                s += p[i] * (p[i] / q[i]).ln();
            }
        }
        s
    }

    #[test]
    fn kl_examples() {
        assert_eq!(kl(&[0.5, 0.5], &[0.5, 0.5]).unwrap(), 0.0);
        assert!((kl(&[1.0, 0.0], &[0.5, 0.5]).unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
        let expected = naive_kl(&[0.9, 0.1], &[0.5, 0.5]);
        assert!((expected - 0.368_064_207_168_497).abs() < 1e-12);
        assert!((kl(&[0.9, 0.1], &[0.5, 0.5]).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn kl_support_and_dimensions() {
        assert_eq!(kl(&[0.5, 0.5], &[1.0, 0.0]).unwrap(), f64::INFINITY);
        assert!(matches!(
            kl(&[1.0], &[0.5, 0.5]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn conditional_kl_examples() {
        let p = Channel::bsc(0.1).unwrap().conditional();
        assert_eq!(conditional_kl(&p, &p, &[0.3, 0.7]).unwrap(), 0.0);

        let w = Conditional::from_rows(vec![vec![1.0, 0.0], vec![0.5, 0.5]]).unwrap();
        let half = Conditional::from_rows(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let v = conditional_kl(&w, &half, &[1.0, 0.0]).unwrap();
        assert!((v - std::f64::consts::LN_2).abs() < 1e-15);

        let w = Channel::bsc(0.2).unwrap().conditional();
        let oracle = 0.5 * naive_kl(&[0.8, 0.2], &[0.9, 0.1]) + 0.5 * naive_kl(&[0.2, 0.8], &[0.1, 0.9]);
        assert!((oracle - 0.044_403_007_586_882_3).abs() < 1e-12);
        assert!((conditional_kl(&w, &p, &[0.5, 0.5]).unwrap() - oracle).abs() < 1e-15);
    }

    #[test]
    fn mutual_information_examples() {
        let q = [0.3, 0.7];
        let t = [0.4, 0.6];
        let prod = JointDistribution::new(2, 2, vec![0.12, 0.18, 0.28, 0.42]).unwrap();
        assert_eq!(prod.input_marginal(), &q[..]);
        assert!((prod.output_marginal()[0] - t[0]).abs() < 1e-15);
        assert!(mutual_information(&prod) < 1e-15);

        let diag = JointDistribution::new(2, 2, vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!((mutual_information(&diag) - std::f64::consts::LN_2).abs() < 1e-15);

        let qw = JointDistribution::new(2, 2, vec![0.45, 0.05, 0.05, 0.45]).unwrap();
        let oracle: f64 = [0.45f64, 0.05, 0.05, 0.45].iter().map(|j| j * (j / 0.25).ln()).sum();
        assert!((oracle - 0.368_064_207_168_497).abs() < 1e-12);
        assert!((mutual_information(&qw) - oracle).abs() < 1e-15);
    }

    #[test]
    fn dt_combination_examples() {
        let a = JointDistribution::new(2, 2, vec![0.45, 0.45, 0.02, 0.08]).unwrap();
        let b = JointDistribution::new(2, 2, vec![0.1, 0.4, 0.3, 0.2]).unwrap();
        assert_eq!(dt_combination(&a, &b, &DivergenceWeights::zero()).unwrap(), 0.0);
        let ones = DivergenceWeights::new(1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(dt_combination(&a, &a, &ones).unwrap(), 0.0);

        let q_only = DivergenceWeights::new(1.0, 0.0, 0.0, 0.0).unwrap();
        let v = dt_combination(&a, &b, &q_only).unwrap();
        assert!((v - kl(&[0.9, 0.1], &[0.5, 0.5]).unwrap()).abs() < 1e-15);
        assert!((v - 0.368_064_207_168_497).abs() < 1e-12);
    }

    #[test]
    fn dt_combination_support_violation_only_when_active() {
        let a = JointDistribution::new(2, 2, vec![0.25, 0.25, 0.25, 0.25]).unwrap();
        let b = JointDistribution::new(2, 2, vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        let q_only = DivergenceWeights::new(1.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(dt_combination(&a, &b, &q_only).unwrap(), 0.0);
        let w_only = DivergenceWeights::new(0.0, 1.0, 0.0, 0.0).unwrap();
        assert_eq!(dt_combination(&a, &b, &w_only).unwrap(), f64::INFINITY);
    }

    #[test]
    fn chain_rule_matches_full_divergence() {
        let a = JointDistribution::new(2, 3, vec![0.1, 0.2, 0.05, 0.3, 0.15, 0.2]).unwrap();
        let b = JointDistribution::new(2, 3, vec![0.2, 0.1, 0.1, 0.2, 0.2, 0.2]).unwrap();
        let full = naive_kl(a.joint(), b.joint());
        let qw = dt_combination(&a, &b, &DivergenceWeights::new(1.0, 1.0, 0.0, 0.0).unwrap()).unwrap();
        let tv = dt_combination(&a, &b, &DivergenceWeights::new(0.0, 0.0, 1.0, 1.0).unwrap()).unwrap();
        assert!((qw - full).abs() < 1e-14);
        assert!((tv - full).abs() < 1e-14);
    }

    #[test]
    fn reconstruction_from_both_factorizations() {
        let a = JointDistribution::new(2, 3, vec![0.1, 0.2, 0.0, 0.3, 0.15, 0.25]).unwrap();
        let qw = JointDistribution::from_input_conditional(a.input_marginal(), &a.w()).unwrap();
        let tv = JointDistribution::from_output_conditional(a.output_marginal(), &a.v()).unwrap();
        for i in 0..6 {
            assert!((qw.joint()[i] - a.joint()[i]).abs() < 1e-12);
            assert!((tv.joint()[i] - a.joint()[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn undefined_rows_are_skipped() {
        let a = JointDistribution::new(2, 2, vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        assert!(a.w().row(1).is_none());
        let p = Channel::bsc(0.1).unwrap().conditional();
        let v = conditional_kl(&a.w(), &p, a.input_marginal()).unwrap();
        assert!((v - naive_kl(&[0.5, 0.5], &[0.9, 0.1])).abs() < 1e-15);
    }

    #[test]
    fn tiny_entries_stay_finite() {
        let a = JointDistribution::normalized(2, 2, vec![1e-300, 1.0, 1.0, 1e-300]).unwrap();
        let b = JointDistribution::normalized(2, 2, vec![1.0, 1e-300, 1e-300, 1.0]).unwrap();
        let ones = DivergenceWeights::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let v = dt_combination(&a, &b, &ones).unwrap();
        assert!(v.is_finite() && v > 0.0);
        assert!(mutual_information(&a).is_finite());
        let sub = kl(&[1.0, 0.0], &[1e-320, 1.0]).unwrap();
        assert!(sub.is_finite() && sub > 700.0);
    }

    #[test]
    fn channel_validation() {
        assert!(Channel::from_rows(vec![vec![0.5, 0.6]], None).is_err());
        assert!(Channel::from_rows(vec![vec![1.0, 0.0]], Some(vec![0.0, 1.0])).is_err());
        assert!(Channel::from_rows(vec![], None).is_err());
        let c = Channel::from_rows(vec![vec![0.5, 0.0, 0.5], vec![1.0, 0.0, 0.0]], None).unwrap();
        let (reduced, dropped) = c.drop_zero_columns();
        assert_eq!(dropped, vec!["1".to_string()]);
        assert_eq!(reduced.rows(), vec![vec![0.5, 0.5], vec![1.0, 0.0]]);
    }

    fn joint_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.01f64..1.0, n)
    }

    proptest! {
        #[test]
        fn dt_is_jointly_convex(
            a in joint_strategy(6),
            b in joint_strategy(6),
            r in joint_strategy(6),
            t in prop::array::uniform4(0.0f64..2.0),
        ) {
            let a = JointDistribution::normalized(2, 3, a).unwrap();
            let b = JointDistribution::normalized(2, 3, b).unwrap();
            let r = JointDistribution::normalized(2, 3, r).unwrap();
            let t = DivergenceWeights::new(t[0], t[1], t[2], t[3]).unwrap();
            let da = dt_combination(&a, &r, &t).unwrap();
            let db = dt_combination(&b, &r, &t).unwrap();
            for lambda in [0.25, 0.5, 0.75] {
                let m = a.mix(&b, lambda).unwrap();
                let dm = dt_combination(&m, &r, &t).unwrap();
                prop_assert!(dm <= lambda * da + (1.0 - lambda) * db + 1e-10);
            }
        }

        #[test]
        fn divergences_are_nonnegative(a in joint_strategy(4), b in joint_strategy(4)) {
            let a = JointDistribution::normalized(2, 2, a).unwrap();
            let b = JointDistribution::normalized(2, 2, b).unwrap();
            let ones = DivergenceWeights::new(1.0, 1.0, 1.0, 1.0).unwrap();
            prop_assert!(dt_combination(&a, &b, &ones).unwrap() >= 0.0);
            prop_assert!(dt_combination(&a, &a, &ones).unwrap().abs() < 1e-12);
            prop_assert!(mutual_information(&a) >= 0.0);
        }
    }
}
