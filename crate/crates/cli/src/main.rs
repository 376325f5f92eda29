//! `rateloss`: key-rate bounds and protocol rates over lossy optical links.
//!
//! Exit status is 0 on success, 2 on invalid input, 1 on I/O or numerical
//! failure.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rateloss::bounds::{
    finite_n_bound, ideal_bb84_rate, rci_lower_bound, tgw_bound, two_way_bound, ChannelPoint,
    SecurityBudget,
};
use rateloss::config::{cv_params_from_str, decoy_params_from_str};
use rateloss::protocols::{cv_optimal_rate, decoy_optimal_rate, CvParams, CvScenario, DecoyParams};
use rateloss::sweep::{
    distance_to_eta, figure3, format_value, parse_curve_list, run_sweep, Axis, Grid, Spacing,
    SweepSpec, ATTENUATION_ENV, DEFAULT_ATTENUATION_DB_PER_KM,
};
use rateloss::{Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "rateloss",
    version,
    about = "Secret-key rate bounds for pure-loss optical channels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Upper and lower bounds at one transmittance or distance.
    Bound(BoundArgs),
    /// Optimized key rate of one protocol at one point.
    Rate(RateArgs),
    /// Evaluate curves over a grid and emit CSV.
    Sweep(SweepArgs),
    /// Regenerate the standard comparison figure data (CSV + JSON sidecar).
    Figure3(FigureArgs),
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct Point {
    /// Channel transmittance in [0, 1].
    #[arg(long)]
    eta: Option<f64>,
    /// Fiber length in km, converted with --attenuation.
    #[arg(long)]
    distance_km: Option<f64>,
}

#[derive(Args, Debug)]
struct BoundArgs {
    #[command(flatten)]
    point: Point,
    /// Fiber loss in dB/km [default: 0.2, or $RATELOSS_ATTENUATION_DB_PER_KM].
    #[arg(long)]
    attenuation: Option<f64>,
    /// Mean input photon number (energy-constrained bound).
    #[arg(long)]
    ns: Option<f64>,
    /// Security parameter for the finite-use bound (needs --n-uses).
    #[arg(long, requires = "n_uses")]
    epsilon: Option<f64>,
    /// Number of channel uses for the finite-use bound (needs --epsilon).
    #[arg(long, requires = "epsilon")]
    n_uses: Option<u64>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Protocol {
    Decoy,
    CvUncal,
    CvCal,
}

#[derive(Args, Debug)]
struct RateArgs {
    #[command(flatten)]
    point: Point,
    #[arg(long, value_enum)]
    protocol: Protocol,
    /// `methods`, or a key = value file overriding the reference preset.
    #[arg(long, default_value = "methods")]
    preset: String,
    /// Fiber loss in dB/km [default: 0.2, or $RATELOSS_ATTENUATION_DB_PER_KM].
    #[arg(long)]
    attenuation: Option<f64>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum AxisArg {
    Eta,
    DistanceKm,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SpacingArg {
    Linear,
    Log,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// key = value file with the sweep fields; excludes the grid flags.
    #[arg(long, conflicts_with_all = ["axis", "start", "stop", "points", "spacing", "curves", "ns", "epsilon", "n_uses", "attenuation"])]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "eta")]
    axis: AxisArg,
    #[arg(long)]
    start: Option<f64>,
    #[arg(long)]
    stop: Option<f64>,
    #[arg(long, default_value_t = 100)]
    points: usize,
    #[arg(long, value_enum, default_value = "linear")]
    spacing: SpacingArg,
    /// Comma-separated curve names, e.g. `tgw,rci,decoy_bb84`.
    #[arg(long, default_value = "tgw,rci,bb84_ideal")]
    curves: String,
    #[arg(long)]
    ns: Option<f64>,
    #[arg(long, requires = "n_uses")]
    epsilon: Option<f64>,
    #[arg(long, requires = "epsilon")]
    n_uses: Option<u64>,
    /// Fiber loss in dB/km [default: 0.2, or $RATELOSS_ATTENUATION_DB_PER_KM].
    #[arg(long)]
    attenuation: Option<f64>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 0 picks one per core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Args, Debug)]
struct FigureArgs {
    /// CSV destination; the sidecar goes next to it with a .json extension.
    #[arg(long, default_value = "figure3.csv")]
    out: PathBuf,
    /// Worker threads; 0 picks one per core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

fn default_attenuation() -> Result<f64> {
    match std::env::var(ATTENUATION_ENV) {
        Ok(s) => {
            let v: f64 = s
                .trim()
                .parse()
                .map_err(|_| Error::validation(ATTENUATION_ENV, format!("cannot parse `{s}`")))?;
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::validation(
                    ATTENUATION_ENV,
                    "must be finite and non-negative",
                ));
            }
            Ok(v)
        }
        Err(_) => Ok(DEFAULT_ATTENUATION_DB_PER_KM),
    }
}

fn attenuation(flag: Option<f64>) -> Result<f64> {
    match flag {
        Some(v) => Ok(v),
        None => default_attenuation(),
    }
}

fn resolve_eta(point: &Point, atten: Option<f64>) -> Result<f64> {
    match (point.eta, point.distance_km) {
        (Some(eta), _) => Ok(eta),
        (None, Some(km)) => distance_to_eta(km, attenuation(atten)?),
        (None, None) => Err(Error::validation("eta", "give --eta or --distance-km")),
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn print_pairs(pairs: &[(&str, f64)]) -> Result<()> {
    let mut out = io::stdout().lock();
    for (k, v) in pairs {
        writeln!(out, "{k} = {}", format_value(*v))?;
    }
    Ok(())
}

fn cmd_bound(a: &BoundArgs) -> Result<()> {
    let eta = resolve_eta(&a.point, a.attenuation)?;
    let point = ChannelPoint::new(eta, a.ns)?;
    let upper = point.upper_bound()?;
    let upper_name = match a.ns {
        Some(_) => "tgw_finite_energy",
        None => "tgw",
    };
    let mut pairs = vec![
        ("eta", eta),
        (upper_name, upper),
        ("rci", rci_lower_bound(eta)?),
        ("bb84_ideal", ideal_bb84_rate(eta)?),
        ("two_way", two_way_bound(eta)?),
    ];
    if a.ns.is_some() {
        pairs.insert(1, ("tgw", tgw_bound(eta)?));
    }
    if let (Some(eps), Some(n)) = (a.epsilon, a.n_uses) {
        let budget = SecurityBudget::new(eps, n)?;
        pairs.push(("finite_n", finite_n_bound(eta, &budget, Some(upper))?));
    }
    print_pairs(&pairs)
}

fn cmd_rate(a: &RateArgs) -> Result<()> {
    let eta = resolve_eta(&a.point, a.attenuation)?;
    let custom = match a.preset.as_str() {
        "methods" => None,
        path => Some(read_text(Path::new(path))?),
    };
    match a.protocol {
        Protocol::Decoy => {
            let params = match &custom {
                Some(text) => decoy_params_from_str(text)?,
                None => DecoyParams::methods(),
            };
            let r = decoy_optimal_rate(eta, &params)?;
            print_pairs(&[("eta", eta), ("mu", r.mu), ("key_rate", r.key_rate)])
        }
        Protocol::CvUncal | Protocol::CvCal => {
            let scenario = match a.protocol {
                Protocol::CvCal => CvScenario::Calibrated,
                _ => CvScenario::Uncalibrated,
            };
            let params = match &custom {
                Some(text) => cv_params_from_str(text, scenario)?,
                None => CvParams::methods(scenario),
            };
            let r = cv_optimal_rate(eta, &params)?;
            print_pairs(&[("eta", eta), ("v", r.v), ("key_rate", r.key_rate)])?;
            if r.at_boundary {
                eprintln!("warning: optimum at the modulation-variance search cap");
            }
            Ok(())
        }
    }
}

fn sweep_spec(a: &SweepArgs) -> Result<SweepSpec> {
    if let Some(path) = &a.config {
        return SweepSpec::from_config_str(&read_text(path)?, default_attenuation()?);
    }
    let axis = match a.axis {
        AxisArg::Eta => Axis::Eta,
        AxisArg::DistanceKm => Axis::DistanceKm,
    };
    let grid = Grid {
        start: a
            .start
            .ok_or_else(|| Error::validation("start", "missing --start"))?,
        stop: a
            .stop
            .ok_or_else(|| Error::validation("stop", "missing --stop"))?,
        points: a.points,
        spacing: match a.spacing {
            SpacingArg::Linear => Spacing::Linear,
            SpacingArg::Log => Spacing::Log,
        },
    };
    let mut spec = SweepSpec::new(axis, grid, parse_curve_list(&a.curves)?);
    spec.n_s = a.ns;
    if let (Some(eps), Some(n)) = (a.epsilon, a.n_uses) {
        spec.budget = Some(
            SecurityBudget::new(eps, n)
                .map_err(|e| Error::validation("epsilon/n_uses", e.to_string()))?,
        );
    }
    spec.attenuation_db_per_km = attenuation(a.attenuation)?;
    spec.validate()?;
    Ok(spec)
}

fn cmd_sweep(a: &SweepArgs) -> Result<()> {
    let csv = run_sweep(&sweep_spec(a)?, a.jobs)?.to_csv();
    match &a.out {
        Some(path) => {
            fs::write(path, csv).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
        }
        None => Ok(io::stdout().lock().write_all(csv.as_bytes())?),
    }
}

fn cmd_figure3(a: &FigureArgs) -> Result<()> {
    let out = figure3(&a.out, a.jobs)?;
    eprintln!(
        "wrote {} and {}",
        out.csv_path.display(),
        out.json_path.display()
    );
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) | Error::Evaluation { .. } | Error::NumericalDomain { .. } => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Bound(a) => cmd_bound(a),
        Command::Rate(a) => cmd_rate(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Figure3(a) => cmd_figure3(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
