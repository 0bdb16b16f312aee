//! Command-line surface of the `exponent` binary.

use std::io::Write;
use std::path::{Path, PathBuf};

use cde_core::oracle::{grid_min_double, GridSpec};
use cde_core::solvers::{solve, sweep_curve, RateFamily, SolverConfig, SolverOptions};
use cde_core::{Family, FamilyAParams, FamilyBParams, RateConstraintPoint, Scheme};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::channel_file::{load_channel, load_init, InitSource, LoadedChannel};
use crate::error::{CliError, Result};
use crate::result_file::{write_curve_csv, ConfigEcho, ResultFile};

#[derive(Debug, Parser)]
#[command(name = "exponent", version, about = "Correct-decoding exponents of discrete memoryless channels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exponent at a fixed rate and optional cost budget.
    FixedRate(FixedRateArgs),
    /// Fixed slope(s): `--rho [--eta]`, `--rho --alpha`, or `--eta --rate`.
    FixedSlope(FixedSlopeArgs),
    /// Sweep supporting planes over a (rho, eta) grid and emit CSV.
    Curve(CurveArgs),
    /// Brute-force grid minimum of the fixed-rate problem.
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyName {
    A,
    B,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Channel description (TOML).
    #[arg(long)]
    pub channel: PathBuf,
    /// Update family.
    #[arg(long, value_enum, ignore_case = true, default_value = "a")]
    pub family: FamilyName,
    /// Family parameter `a` (both families).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub a: f64,
    /// Family A parameter `b`.
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    /// Family B parameter `c`.
    #[arg(long, allow_negative_numbers = true)]
    pub c: Option<f64>,
    /// Stop when an iteration decreases the objective by at most this.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iter: usize,
    /// Initial reference: `uniform` or a TOML file holding `joint = [[...]]`.
    #[arg(long, default_value = "uniform")]
    pub init: InitSource,
    /// Output path; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct FixedRateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Rate `R` in nats.
    #[arg(long, allow_negative_numbers = true)]
    pub rate: f64,
    /// Input cost budget.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct FixedSlopeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub rho: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub eta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub rate: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct CurveArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// `lo:hi:step`.
    #[arg(long, allow_hyphen_values = true)]
    pub rho_grid: Grid,
    /// `lo:hi:step`; defaults to the single point 0.
    #[arg(long, default_value = "0:0:1", allow_hyphen_values = true)]
    pub eta_grid: Grid,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub rate: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Grid points per unit mass.
    #[arg(long, default_value_t = 200)]
    pub resolution: usize,
}

/// An inclusive arithmetic grid `lo:hi:step`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

impl std::str::FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, step] = parts.as_slice() else {
            return Err(format!("expected lo:hi:step, got {s:?}"));
        };
        let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
        let (lo, hi, step) = (parse(lo)?, parse(hi)?, parse(step)?);
        if !(lo.is_finite() && hi.is_finite() && step.is_finite()) || step <= 0.0 || hi < lo {
            return Err(format!("need finite lo <= hi and step > 0, got {s:?}"));
        }
        // tolerate rounding in (hi - lo) / step so that e.g. 0.1:0.9:0.1 includes 0.9
        let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
        if count > 1_000_000 {
            return Err(format!("grid {s:?} has too many points"));
        }
        Ok(Grid((0..count).map(|i| (lo + i as f64 * step).min(hi)).collect()))
    }
}

/// What a command produced, for choosing the exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Converged,
    NotConverged,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Converged => 0,
            Outcome::NotConverged => 2,
        }
    }
}

fn family(common: &CommonArgs) -> Result<Family> {
    match common.family {
        FamilyName::A => {
            if common.c.is_some() {
                return Err(CliError::Usage("--c applies to family B only".into()));
            }
            Ok(Family::A(FamilyAParams::new(common.a, common.b.unwrap_or(0.0))?))
        }
        FamilyName::B => {
            if common.b.is_some() {
                return Err(CliError::Usage("--b applies to family A only".into()));
            }
            Ok(Family::B(FamilyBParams::new(common.a, common.c.unwrap_or(0.0))?))
        }
    }
}

struct Prepared {
    loaded: LoadedChannel,
    options: SolverOptions,
}

fn prepare(common: &CommonArgs, warn: &mut dyn FnMut(&str)) -> Result<Prepared> {
    let loaded = load_channel(&common.channel)?;
    for w in &loaded.warnings {
        warn(w);
    }
    if !(common.tol.is_finite() && common.tol >= 0.0) {
        return Err(CliError::Usage(format!("--tol must be a non-negative number, got {}", common.tol)));
    }
    let init = match &common.init {
        InitSource::Uniform => None,
        InitSource::File(path) => Some(load_init(path)?),
    };
    let options = SolverOptions {
        family: family(common)?,
        tol: common.tol,
        max_iter: common.max_iter,
        init,
        ..SolverOptions::default()
    };
    Ok(Prepared { loaded, options })
}

fn echo(command: &str, common: &CommonArgs, problem: Scheme, options: &SolverOptions) -> ConfigEcho {
    ConfigEcho {
        command: command.into(),
        channel: common.channel.display().to_string(),
        problem,
        family: options.family,
        tol: options.tol,
        max_iter: options.max_iter,
        init: common.init.to_string(),
        resolution: None,
    }
}

fn emit(out: Option<&Path>, bytes: &[u8], stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, bytes)
            .map_err(|source| CliError::Io { path: path.to_path_buf(), source }),
        None => stdout
            .write_all(bytes)
            .and_then(|()| stdout.flush())
            .map_err(|source| CliError::Io { path: "<stdout>".into(), source }),
    }
}

/// Infers the scheme from which of `--rho`, `--eta`, `--alpha`, `--rate` were given.
pub fn slope_scheme(args: &FixedSlopeArgs) -> Result<Scheme> {
    match (args.rho, args.eta, args.alpha, args.rate) {
        (Some(rho), eta, None, None) => Ok(Scheme::FixedGradient { rho, eta: eta.unwrap_or(0.0) }),
        (Some(rho), None, Some(alpha), None) => Ok(Scheme::FixedAlphaRho { alpha, rho }),
        (None, Some(eta), None, Some(rate)) => Ok(Scheme::FixedRateEta { rate, eta }),
        _ => Err(CliError::Usage(
            "fixed-slope takes --rho [--eta], --rho --alpha, or --eta --rate".into(),
        )),
    }
}

fn run_scheme(
    command: &str,
    common: &CommonArgs,
    scheme: Scheme,
    warn: &mut dyn FnMut(&str),
    stdout: &mut dyn Write,
) -> Result<Outcome> {
    let Prepared { loaded, options } = prepare(common, warn)?;
    let config = SolverConfig { scheme, options };
    let report = solve(&loaded.channel, &config)?;
    if report.duality_warning {
        warn(&format!(
            "duality gap {:.3e} exceeds the warning threshold",
            report.duality_gap.unwrap_or(f64::NAN)
        ));
    }
    let echo = echo(command, common, scheme, &config.options);
    let file = ResultFile::from_report(echo, &loaded.channel, loaded.dropped_outputs, &report)?;
    emit(common.out.as_deref(), file.to_json()?.as_bytes(), stdout)?;
    Ok(if report.converged { Outcome::Converged } else { Outcome::NotConverged })
}

/// Runs a parsed command line. Warnings go to `warn`; output without `--out`
/// goes to `stdout`.
pub fn run(cli: &Cli, warn: &mut dyn FnMut(&str), stdout: &mut dyn Write) -> Result<Outcome> {
    match &cli.command {
        Command::FixedRate(args) => {
            let scheme = Scheme::FixedRateAlpha { rate: args.rate, alpha: args.alpha };
            run_scheme("fixed-rate", &args.common, scheme, warn, stdout)
        }
        Command::FixedSlope(args) => {
            let scheme = slope_scheme(args)?;
            run_scheme("fixed-slope", &args.common, scheme, warn, stdout)
        }
        Command::Curve(args) => {
            let Prepared { loaded, options } = prepare(&args.common, warn)?;
            let points = sweep_curve(&loaded.channel, &args.rho_grid.0, &args.eta_grid.0, &options)?;
            let mut bytes = Vec::new();
            write_curve_csv(&mut bytes, &points)?;
            emit(args.common.out.as_deref(), &bytes, stdout)?;
            let stalled = points.iter().filter(|p| !p.converged).count();
            if stalled > 0 {
                warn(&format!("{stalled} of {} grid points did not converge", points.len()));
                return Ok(Outcome::NotConverged);
            }
            Ok(Outcome::Converged)
        }
        Command::Oracle(args) => {
            let Prepared { loaded, options } = prepare(&args.common, warn)?;
            let grid = GridSpec::new(args.resolution)?;
            let point = RateConstraintPoint::new(args.rate, args.alpha)?;
            let weights = RateFamily::from_family(&options.family)?.weights();
            let result = grid_min_double(&loaded.channel, &weights, point, grid)?;
            let mut echo = echo(
                "oracle",
                &args.common,
                Scheme::FixedRateAlpha { rate: args.rate, alpha: args.alpha },
                &options,
            );
            echo.resolution = Some(args.resolution);
            let file = ResultFile::from_grid(echo, &loaded.channel, loaded.dropped_outputs, weights, &result)?;
            emit(args.common.out.as_deref(), file.to_json()?.as_bytes(), stdout)?;
            Ok(Outcome::Converged)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_are_inclusive() {
        let g: Grid = "0.1:0.9:0.1".parse().unwrap();
        assert_eq!(g.0.len(), 9);
        assert_eq!(*g.0.last().unwrap(), 0.9);
        assert_eq!("0:0:1".parse::<Grid>().unwrap().0, vec![0.0]);
        assert_eq!("0:1:0.5".parse::<Grid>().unwrap().0, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn bad_grids_rejected() {
        for s in ["0:1", "1:0:0.1", "0:1:0", "0:1:-1", "a:1:1", "0:inf:1"] {
            assert!(s.parse::<Grid>().is_err(), "{s}");
        }
    }

    fn slope(rho: Option<f64>, eta: Option<f64>, alpha: Option<f64>, rate: Option<f64>) -> Result<Scheme> {
        let cli = Cli::parse_from(["exponent", "fixed-slope", "--channel", "c.toml"]);
        let Command::FixedSlope(mut args) = cli.command else { unreachable!() };
        (args.rho, args.eta, args.alpha, args.rate) = (rho, eta, alpha, rate);
        slope_scheme(&args)
    }

    #[test]
    fn slope_routing() {
        assert_eq!(slope(Some(0.5), None, None, None).unwrap(), Scheme::FixedGradient { rho: 0.5, eta: 0.0 });
        assert_eq!(slope(Some(0.5), Some(1.0), None, None).unwrap(), Scheme::FixedGradient { rho: 0.5, eta: 1.0 });
        assert_eq!(slope(Some(0.5), None, Some(0.2), None).unwrap(), Scheme::FixedAlphaRho { alpha: 0.2, rho: 0.5 });
        assert_eq!(slope(None, Some(1.0), None, Some(0.3)).unwrap(), Scheme::FixedRateEta { rate: 0.3, eta: 1.0 });
        assert!(slope(None, None, None, None).is_err());
        assert!(slope(Some(0.5), Some(1.0), Some(0.2), None).is_err());
        assert!(slope(None, Some(1.0), None, None).is_err());
        assert!(slope(Some(0.5), None, None, Some(0.3)).is_err());
    }

    #[test]
    fn family_flags_checked() {
        let cli = Cli::parse_from(["exponent", "fixed-rate", "--channel", "c", "--rate", "1", "--c", "1"]);
        let Command::FixedRate(args) = cli.command else { unreachable!() };
        assert!(family(&args.common).is_err());
        let cli = Cli::parse_from(["exponent", "fixed-rate", "--channel", "c", "--rate", "1", "--family", "B", "--c", "1"]);
        let Command::FixedRate(args) = cli.command else { unreachable!() };
        assert_eq!(family(&args.common).unwrap(), Family::B(FamilyBParams { a: 0.0, c: 1.0 }));
    }
}
