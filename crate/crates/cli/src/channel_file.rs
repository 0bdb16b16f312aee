//! Channel and initial-joint ingestion from TOML files.
//!
//! A channel file looks like
//!
//! ```toml
//! input_alphabet = ["0", "1"]
//! output_alphabet = ["0", "1"]
//! transition = [[0.9, 0.1], [0.1, 0.9]]
//! cost = [0.0, 1.0]   # optional
//! ```

use std::ops::Range;
use std::path::{Path, PathBuf};

use cde_core::{Channel, JointDistribution};
use serde::Deserialize;
use toml::Spanned;

use crate::error::{line_col, CliError, Result};

/// Row sums this close to 1 are renormalized silently.
pub const SILENT_ROW_TOL: f64 = 1e-9;
/// Row sums this close to 1 are renormalized with a warning; beyond, rejected.
pub const WARN_ROW_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub input_alphabet: Vec<String>,
    pub output_alphabet: Vec<String>,
    pub transition: Spanned<Vec<Spanned<Vec<f64>>>>,
    #[serde(default)]
    pub cost: Option<Spanned<Vec<f64>>>,
}

/// A loaded channel plus anything the user should be told about it.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedChannel {
    pub channel: Channel,
    pub warnings: Vec<String>,
    /// Output labels removed because no input reaches them.
    pub dropped_outputs: Vec<String>,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

struct Locator<'a> {
    path: &'a Path,
    text: &'a str,
}

impl Locator<'_> {
    fn at(&self, span: Range<usize>, message: impl Into<String>) -> CliError {
        let (line, column) = line_col(self.text, span.start);
        CliError::Located { path: self.path.to_path_buf(), line, column, message: message.into() }
    }

    fn toml(&self, err: toml::de::Error) -> CliError {
        match err.span() {
            Some(span) => self.at(span, err.message().trim()),
            None => CliError::File { path: self.path.to_path_buf(), message: err.message().trim().into() },
        }
    }
}

pub fn load_channel(path: &Path) -> Result<LoadedChannel> {
    parse_channel(&read(path)?, path)
}

/// Parses and validates channel-file text; `path` is only used in messages.
pub fn parse_channel(text: &str, path: &Path) -> Result<LoadedChannel> {
    let loc = Locator { path, text };
    let file: ChannelFile = toml::from_str(text).map_err(|e| loc.toml(e))?;
    let nx = file.input_alphabet.len();
    let ny = file.output_alphabet.len();
    if nx == 0 || ny == 0 {
        return Err(loc.at(file.transition.span(), "input and output alphabets must be non-empty"));
    }
    let matrix_span = file.transition.span();
    let rows = file.transition.into_inner();
    if rows.len() != nx {
        return Err(loc.at(
            matrix_span,
            format!("transition has {} rows but the input alphabet has {nx} symbols", rows.len()),
        ));
    }

    let mut warnings = Vec::new();
    let mut transition = Vec::with_capacity(nx);
    for (x, row) in rows.into_iter().enumerate() {
        let span = row.span();
        let row = row.into_inner();
        if row.len() != ny {
            return Err(loc.at(
                span,
                format!("row {x} has {} entries but the output alphabet has {ny} symbols", row.len()),
            ));
        }
        if let Some(bad) = row.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(loc.at(span, format!("row {x} contains invalid probability {bad}")));
        }
        let sum: f64 = row.iter().sum();
        let off = (sum - 1.0).abs();
        if off > WARN_ROW_TOL {
            return Err(loc.at(span, format!("row {x} sums to {sum}, not 1")));
        }
        if off > SILENT_ROW_TOL {
            let (line, _) = line_col(text, span.start);
            warnings.push(format!(
                "{}:{line}: row {x} sums to {sum}; renormalized",
                path.display()
            ));
        }
        transition.push(row.into_iter().map(|v| v / sum).collect());
    }

    let cost = match file.cost {
        None => None,
        Some(cost) => {
            let span = cost.span();
            let cost = cost.into_inner();
            if cost.len() != nx {
                return Err(loc.at(
                    span,
                    format!("cost has {} entries but the input alphabet has {nx} symbols", cost.len()),
                ));
            }
            if let Some(bad) = cost.iter().find(|v| !v.is_finite()) {
                return Err(loc.at(span, format!("cost contains non-finite value {bad}")));
            }
            Some(cost)
        }
    };

    let channel = Channel::new(file.input_alphabet, file.output_alphabet, transition, cost)
        .map_err(|e| CliError::File { path: path.to_path_buf(), message: e.to_string() })?;
    let (channel, dropped_outputs) = channel.drop_zero_columns();
    if !dropped_outputs.is_empty() {
        warnings.push(format!(
            "{}: dropped output symbols never produced by any input: {}",
            path.display(),
            dropped_outputs.join(", ")
        ));
    }
    Ok(LoadedChannel { channel, warnings, dropped_outputs })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InitFile {
    joint: Spanned<Vec<Vec<f64>>>,
}

/// Loads an initial joint distribution from a TOML file holding `joint = [[...], ...]`.
pub fn load_init(path: &Path) -> Result<JointDistribution> {
    let text = read(path)?;
    let loc = Locator { path, text: &text };
    let file: InitFile = toml::from_str(&text).map_err(|e| loc.toml(e))?;
    let span = file.joint.span();
    JointDistribution::from_rows(file.joint.into_inner()).map_err(|e| loc.at(span, e.to_string()))
}

/// Where the initial reference comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum InitSource {
    Uniform,
    File(PathBuf),
}

impl std::str::FromStr for InitSource {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "" => Err("empty --init value".into()),
            "uniform" => Ok(Self::Uniform),
            path => Ok(Self::File(PathBuf::from(path))),
        }
    }
}

impl std::fmt::Display for InitSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Uniform => f.write_str("uniform"),
            Self::File(path) => write!(f, "{}", path.display()),
        }
    }
}
