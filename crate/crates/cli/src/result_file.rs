//! JSON result files and CSV curve output.

use std::f64::consts::LN_2;
use std::io::Write;
use std::path::Path;

use cde_core::oracle::GridResult;
use cde_core::prob::mutual_information;
use cde_core::solvers::CurvePoint;
use cde_core::{Channel, DivergenceWeights, Family, JointDistribution, RunReport, Scheme};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

const HISTORY_SLACK: f64 = 1e-12;
const MASS_SLACK: f64 = 1e-9;

/// The command line that produced a result, minus output plumbing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigEcho {
    pub command: String,
    pub channel: String,
    /// Problem solved, including the scheme inferred from the flags.
    pub problem: Scheme,
    pub family: Family,
    pub tol: f64,
    pub max_iter: usize,
    pub init: String,
    /// Grid resolution, for the oracle only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DualPoint {
    pub rho: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultFile {
    pub config: ConfigEcho,
    pub input_alphabet: Vec<String>,
    pub output_alphabet: Vec<String>,
    pub dropped_outputs: Vec<String>,
    pub value_nats: f64,
    pub value_bits: f64,
    pub converged: bool,
    pub iterations: usize,
    pub objective_history: Vec<f64>,
    pub weights: DivergenceWeights,
    /// Final joint `J`, rows indexed by input.
    pub joint: Vec<Vec<f64>>,
    pub q: Vec<f64>,
    pub t: Vec<f64>,
    /// `W(y|x)`; `null` rows are inputs outside the support of `Q`.
    pub w: Vec<Option<Vec<f64>>>,
    /// `V(x|y)`; `null` rows are outputs outside the support of `T`.
    pub v: Vec<Option<Vec<f64>>>,
    /// `I(Q, W)` of the final joint.
    pub mutual_information: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_cost: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual: Option<DualPoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duality_gap: Option<f64>,
    pub duality_warning: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy_bound: Option<f64>,
}

fn conditional_rows(c: &cde_core::Conditional) -> Vec<Option<Vec<f64>>> {
    (0..c.num_rows()).map(|i| c.row(i).map(<[f64]>::to_vec)).collect()
}

struct Distributions {
    joint: Vec<Vec<f64>>,
    q: Vec<f64>,
    t: Vec<f64>,
    w: Vec<Option<Vec<f64>>>,
    v: Vec<Option<Vec<f64>>>,
    mutual_information: f64,
    expected_cost: Option<f64>,
}

fn distributions(joint: &JointDistribution, channel: &Channel) -> Result<Distributions> {
    let expected_cost = match channel.cost() {
        Some(_) => Some(joint.expected_cost(channel)?),
        None => None,
    };
    Ok(Distributions {
        joint: joint.rows(),
        q: joint.input_marginal().to_vec(),
        t: joint.output_marginal().to_vec(),
        w: conditional_rows(&joint.w()),
        v: conditional_rows(&joint.v()),
        mutual_information: mutual_information(joint),
        expected_cost,
    })
}

impl ResultFile {
    pub fn from_report(
        config: ConfigEcho,
        channel: &Channel,
        dropped_outputs: Vec<String>,
        report: &RunReport,
    ) -> Result<Self> {
        let d = distributions(&report.final_joint, channel)?;
        Ok(Self {
            config,
            input_alphabet: channel.input_alphabet().to_vec(),
            output_alphabet: channel.output_alphabet().to_vec(),
            dropped_outputs,
            value_nats: report.value,
            value_bits: report.value / LN_2,
            converged: report.converged,
            iterations: report.iterations,
            objective_history: report.objective_history.clone(),
            weights: report.weights,
            joint: d.joint,
            q: d.q,
            t: d.t,
            w: d.w,
            v: d.v,
            mutual_information: d.mutual_information,
            expected_cost: d.expected_cost,
            dual: Some(DualPoint { rho: report.rho, eta: report.eta }),
            duality_gap: report.duality_gap,
            duality_warning: report.duality_warning,
            accuracy_bound: None,
        })
    }

    pub fn from_grid(
        config: ConfigEcho,
        channel: &Channel,
        dropped_outputs: Vec<String>,
        weights: DivergenceWeights,
        grid: &GridResult,
    ) -> Result<Self> {
        let d = distributions(&grid.joint, channel)?;
        Ok(Self {
            config,
            input_alphabet: channel.input_alphabet().to_vec(),
            output_alphabet: channel.output_alphabet().to_vec(),
            dropped_outputs,
            value_nats: grid.value,
            value_bits: grid.value / LN_2,
            converged: true,
            iterations: 0,
            objective_history: vec![grid.value],
            weights,
            joint: d.joint,
            q: d.q,
            t: d.t,
            w: d.w,
            v: d.v,
            mutual_information: d.mutual_information,
            expected_cost: d.expected_cost,
            dual: None,
            duality_gap: None,
            duality_warning: false,
            accuracy_bound: Some(grid.accuracy_bound),
        })
    }

    fn floats(&self) -> impl Iterator<Item = f64> + '_ {
        let rows = |m: &'_ [Option<Vec<f64>>]| m.iter().flatten().flatten().copied().collect::<Vec<_>>();
        [self.value_nats, self.value_bits, self.mutual_information, self.config.tol]
            .into_iter()
            .chain(self.weights.as_array())
            .chain(self.objective_history.iter().copied())
            .chain(self.joint.iter().flatten().copied())
            .chain(self.q.iter().copied())
            .chain(self.t.iter().copied())
            .chain(rows(&self.w))
            .chain(rows(&self.v))
            .chain(self.expected_cost)
            .chain(self.dual.iter().flat_map(|d| [d.rho, d.eta]))
            .chain(self.duality_gap)
            .chain(self.accuracy_bound)
    }

    /// Checks the invariants every result file must satisfy.
    pub fn validate(&self) -> std::result::Result<(), String> {
        if let Some(bad) = self.floats().find(|v| !v.is_finite()) {
            return Err(format!("non-finite number {bad} in result"));
        }
        if (self.value_bits - self.value_nats / LN_2).abs() > 1e-12 * self.value_nats.abs().max(1.0) {
            return Err("value_bits is not value_nats / ln 2".into());
        }
        if self.objective_history.is_empty() {
            return Err("empty objective history".into());
        }
        if let Some(k) = self
            .objective_history
            .windows(2)
            .position(|w| w[1] > w[0] + HISTORY_SLACK)
        {
            return Err(format!("objective history increases at step {}", k + 1));
        }
        let joint = JointDistribution::from_rows(self.joint.clone()).map_err(|e| format!("joint: {e}"))?;
        if joint.num_inputs() != self.input_alphabet.len() || joint.num_outputs() != self.output_alphabet.len() {
            return Err("joint shape does not match the alphabets".into());
        }
        let close = |a: &[f64], b: &[f64]| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= MASS_SLACK);
        if !close(&self.q, joint.input_marginal()) {
            return Err("q is not the input marginal of the joint".into());
        }
        if !close(&self.t, joint.output_marginal()) {
            return Err("t is not the output marginal of the joint".into());
        }
        for (name, rows, width) in [("w", &self.w, self.output_alphabet.len()), ("v", &self.v, self.input_alphabet.len())] {
            for row in rows.iter().flatten() {
                let sum: f64 = row.iter().sum();
                if row.len() != width || row.iter().any(|&p| p < 0.0) || (sum - 1.0).abs() > MASS_SLACK {
                    return Err(format!("{name} has a row that is not a distribution"));
                }
            }
        }
        Ok(())
    }

    /// Deterministic pretty JSON with a trailing newline.
    pub fn to_json(&self) -> Result<String> {
        self.validate().map_err(CliError::Usage)?;
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    /// Reads and re-validates a result file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        let file: Self = serde_json::from_str(&text)?;
        file.validate()
            .map_err(|message| CliError::File { path: path.to_path_buf(), message })?;
        Ok(file)
    }
}

pub const CURVE_HEADER: [&str; 6] = ["rho", "eta", "R", "alpha", "E0", "Ec_point"];

fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes curve points as CSV: header row, `,` separator, LF endings, 17
/// significant digits; `alpha` is empty for costless channels.
pub fn write_curve_csv<W: Write>(out: W, points: &[CurvePoint]) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    writer.write_record(CURVE_HEADER)?;
    for p in points {
        writer.write_record([
            sci(p.rho),
            sci(p.eta),
            sci(p.rate),
            p.alpha.map(sci).unwrap_or_default(),
            sci(p.e0),
            sci(p.ec),
        ])?;
    }
    writer.flush().map_err(|e| CliError::Csv(e.into()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use cde_core::solvers::{solve_fixed_rate, SolverOptions};
    use cde_core::RateConstraintPoint;

    fn sample() -> ResultFile {
        let channel = Channel::bsc(0.1).unwrap().with_cost(vec![0.0, 1.0]).unwrap();
        let point = RateConstraintPoint::new(0.5, Some(0.4)).unwrap();
        let options = SolverOptions::default();
        let report = solve_fixed_rate(&channel, point, &options).unwrap();
        let config = ConfigEcho {
            command: "fixed-rate".into(),
            channel: "bsc.toml".into(),
            problem: report.scheme,
            family: options.family,
            tol: options.tol,
            max_iter: options.max_iter,
            init: "uniform".into(),
            resolution: None,
        };
        ResultFile::from_report(config, &channel, vec![], &report).unwrap()
    }

    #[test]
    fn json_round_trip_is_exact() {
        let file = sample();
        file.validate().unwrap();
        let text = file.to_json().unwrap();
        let back: ResultFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.to_json().unwrap(), text);
    }

    #[test]
    fn validation_catches_broken_files() {
        let mut file = sample();
        file.value_bits *= 1.001;
        assert!(file.validate().is_err());

        let mut file = sample();
        file.objective_history.push(file.objective_history[0] + 1.0);
        assert!(file.validate().is_err());

        let mut file = sample();
        file.joint[0][0] += 0.01;
        assert!(file.validate().is_err());

        let mut file = sample();
        file.q.reverse();
        file.q[0] += 0.1;
        assert!(file.validate().is_err());
    }

    #[test]
    fn csv_format() {
        let points = [CurvePoint { rho: 0.5, eta: 0.0, rate: 0.25, alpha: None, e0: -0.1, ec: 0.025, converged: true }];
        let mut out = Vec::new();
        write_curve_csv(&mut out, &points).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(
            text,
            "rho,eta,R,alpha,E0,Ec_point\n\
             5.0000000000000000e-1,0.0000000000000000e0,2.5000000000000000e-1,,\
             -1.0000000000000001e-1,2.5000000000000001e-2\n"
        );
        let parsed: f64 = text.lines().nth(1).unwrap().split(',').nth(4).unwrap().parse().unwrap();
        assert_eq!(parsed, -0.1);
    }
}
