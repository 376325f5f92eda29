//! Grid sweeps over transmittance or fiber length, CSV emission, and the
//! rate-versus-transmittance figure dataset.
//!
//! CSV schema: a header `axis,eta,<curve>...` followed by one row per grid
//! point in ascending axis order. Numbers use the shortest decimal that
//! round-trips to the same `f64`; divergent values are written `inf` and
//! zero as `0`.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{
    finite_n_bound, ideal_bb84_rate, rci_lower_bound, tgw_bound, tgw_bound_finite_energy,
    two_way_bound, ChannelPoint, SecurityBudget,
};
use crate::config::KeyValues;
use crate::error::{check_nonneg, Error, Result};
use crate::protocols::{
    cv_optimal_rate, decoy_optimal_rate, CvParams, CvScenario, DecoyParams, MU_MAX,
    PROTOCOL_SCAN_POINTS, V_MAX,
};

/// Standard telecom fiber loss.
pub const DEFAULT_ATTENUATION_DB_PER_KM: f64 = 0.2;

/// Environment variable that overrides the default attenuation in the CLI.
pub const ATTENUATION_ENV: &str = "RATELOSS_ATTENUATION_DB_PER_KM";

/// Lower end of the figure grid.
pub const FIGURE3_ETA_MIN: f64 = 1e-6;
/// Figure grid density: one point every 1/67 decade puts every decade
/// boundary (1e-5, 1e-4, ...) exactly on the grid.
pub const FIGURE3_POINTS_PER_DECADE: u32 = 67;
pub const FIGURE3_POINTS: usize = 400;

/// Transmittance of `km` of fiber with `db_per_km` attenuation.
pub fn distance_to_eta(km: f64, db_per_km: f64) -> Result<f64> {
    check_nonneg("distance_km", km)?;
    check_nonneg("attenuation_db_per_km", db_per_km)?;
    Ok(10f64.powf(-db_per_km * km / 10.0))
}

/// Inverse of [`distance_to_eta`]; requires a positive attenuation.
pub fn eta_to_distance(eta: f64, db_per_km: f64) -> Result<f64> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::domain("eta", eta, "(0, 1]"));
    }
    if !(db_per_km > 0.0 && db_per_km.is_finite()) {
        return Err(Error::domain(
            "attenuation_db_per_km",
            db_per_km,
            "(0, inf)",
        ));
    }
    Ok(-10.0 * eta.log10() / db_per_km)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Curve {
    Tgw,
    TgwFiniteEnergy,
    Rci,
    Bb84Ideal,
    DecoyBb84,
    CvUncalibrated,
    CvCalibrated,
    TwoWay,
    FiniteN,
}

impl Curve {
    pub const ALL: [Curve; 9] = [
        Curve::Tgw,
        Curve::TgwFiniteEnergy,
        Curve::Rci,
        Curve::Bb84Ideal,
        Curve::DecoyBb84,
        Curve::CvUncalibrated,
        Curve::CvCalibrated,
        Curve::TwoWay,
        Curve::FiniteN,
    ];

    /// The six curve families of the rate-versus-transmittance figure.
    pub const FIGURE3: [Curve; 6] = [
        Curve::Tgw,
        Curve::Rci,
        Curve::Bb84Ideal,
        Curve::DecoyBb84,
        Curve::CvUncalibrated,
        Curve::CvCalibrated,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Curve::Tgw => "tgw",
            Curve::TgwFiniteEnergy => "tgw_finite_energy",
            Curve::Rci => "rci",
            Curve::Bb84Ideal => "bb84_ideal",
            Curve::DecoyBb84 => "decoy_bb84",
            Curve::CvUncalibrated => "cv_uncalibrated",
            Curve::CvCalibrated => "cv_calibrated",
            Curve::TwoWay => "two_way",
            Curve::FiniteN => "finite_n",
        }
    }
}

impl fmt::Display for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Curve {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Curve::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::validation("curves", format!("unknown curve `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Eta,
    DistanceKm,
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eta" => Ok(Axis::Eta),
            "distance_km" | "distance" => Ok(Axis::DistanceKm),
            _ => Err(Error::validation(
                "axis",
                format!("`{s}` is not eta or distance_km"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Log,
}

impl FromStr for Spacing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Spacing::Linear),
            "log" => Ok(Spacing::Log),
            _ => Err(Error::validation(
                "spacing",
                format!("`{s}` is not linear or log"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl Grid {
    /// Grid values in ascending order, with both endpoints exact.
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        let last = (n - 1) as f64;
        let mut out: Vec<f64> = match self.spacing {
            Spacing::Linear => (0..n)
                .map(|k| self.start + (self.stop - self.start) * (k as f64 / last))
                .collect(),
            Spacing::Log => {
                let (a, b) = (self.start.log10(), self.stop.log10());
                (0..n)
                    .map(|k| 10f64.powf(a + (b - a) * (k as f64 / last)))
                    .collect()
            }
        };
        out[0] = self.start;
        out[n - 1] = self.stop;
        out
    }
}

/// A full sweep request.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub axis: Axis,
    pub grid: Grid,
    pub curves: Vec<Curve>,
    /// Mean photon number constraint for the energy-limited curves.
    pub n_s: Option<f64>,
    pub budget: Option<SecurityBudget>,
    pub attenuation_db_per_km: f64,
    pub decoy: DecoyParams,
    /// Device parameters for both GG02 curves; the scenario is set per curve.
    pub cv: CvParams,
}

const SPEC_KEYS: [&str; 10] = [
    "axis",
    "start",
    "stop",
    "points",
    "spacing",
    "curves",
    "n_s",
    "epsilon",
    "n_uses",
    "attenuation_db_per_km",
];

impl SweepSpec {
    /// A spec over `grid` with the reference presets and default attenuation.
    pub fn new(axis: Axis, grid: Grid, curves: Vec<Curve>) -> Self {
        Self {
            axis,
            grid,
            curves,
            n_s: None,
            budget: None,
            attenuation_db_per_km: DEFAULT_ATTENUATION_DB_PER_KM,
            decoy: DecoyParams::methods(),
            cv: CvParams::methods(CvScenario::Uncalibrated),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        if !(g.start.is_finite() && g.stop.is_finite()) || g.start >= g.stop {
            return Err(Error::validation(
                "start/stop",
                format!("need finite start < stop, got {} and {}", g.start, g.stop),
            ));
        }
        if g.points < 2 {
            return Err(Error::validation("points", "need at least 2 grid points"));
        }
        if g.start < 0.0 {
            return Err(Error::validation("start", "must be non-negative"));
        }
        if g.spacing == Spacing::Log && g.start <= 0.0 {
            return Err(Error::validation("start", "log spacing needs start > 0"));
        }
        if self.axis == Axis::Eta && g.stop > 1.0 {
            return Err(Error::validation(
                "stop",
                "transmittance grid must lie in [0, 1]",
            ));
        }
        if self.curves.is_empty() {
            return Err(Error::validation("curves", "no curves requested"));
        }
        for (k, c) in self.curves.iter().enumerate() {
            if self.curves[..k].contains(c) {
                return Err(Error::validation("curves", format!("`{c}` listed twice")));
            }
        }
        if self.curves.contains(&Curve::FiniteN) && self.budget.is_none() {
            return Err(Error::validation(
                "epsilon/n_uses",
                "the finite_n curve needs a security budget",
            ));
        }
        if self.curves.contains(&Curve::TgwFiniteEnergy) && self.n_s.is_none() {
            return Err(Error::validation(
                "n_s",
                "the tgw_finite_energy curve needs n_s",
            ));
        }
        if let Some(n) = self.n_s {
            check_nonneg("n_s", n).map_err(|e| Error::validation("n_s", e.to_string()))?;
        }
        if !(self.attenuation_db_per_km >= 0.0 && self.attenuation_db_per_km.is_finite()) {
            return Err(Error::validation(
                "attenuation_db_per_km",
                "must be finite and non-negative",
            ));
        }
        self.decoy.validate()?;
        self.cv.validate()?;
        Ok(())
    }

    /// Parses a `key = value` config. Required keys: `axis`, `start`,
    /// `stop`, `points`, `curves` (comma-separated). Optional: `spacing`
    /// (default linear), `n_s`, `epsilon` with `n_uses`, and
    /// `attenuation_db_per_km` (default `default_attenuation`).
    pub fn from_config_str(text: &str, default_attenuation: f64) -> Result<Self> {
        let kv = KeyValues::parse(text)?;
        kv.expect_keys(&SPEC_KEYS)?;
        let require = |key: &str| {
            kv.get(key)
                .ok_or_else(|| Error::validation(key.to_string(), "missing required key"))
        };
        let axis: Axis = require("axis")?.parse()?;
        let grid = Grid {
            start: kv
                .parse_value("start")?
                .ok_or_else(|| Error::validation("start", "missing required key"))?,
            stop: kv
                .parse_value("stop")?
                .ok_or_else(|| Error::validation("stop", "missing required key"))?,
            points: kv
                .parse_value("points")?
                .ok_or_else(|| Error::validation("points", "missing required key"))?,
            spacing: kv
                .get("spacing")
                .map(str::parse)
                .transpose()?
                .unwrap_or(Spacing::Linear),
        };
        let curves = parse_curve_list(require("curves")?)?;
        let mut spec = SweepSpec::new(axis, grid, curves);
        spec.n_s = kv.parse_value("n_s")?;
        spec.budget = match (
            kv.parse_value::<f64>("epsilon")?,
            kv.parse_value::<u64>("n_uses")?,
        ) {
            (Some(eps), Some(n)) => Some(
                SecurityBudget::new(eps, n)
                    .map_err(|e| Error::validation("epsilon/n_uses", e.to_string()))?,
            ),
            (None, None) => None,
            _ => {
                return Err(Error::validation(
                    "epsilon/n_uses",
                    "epsilon and n_uses must be given together",
                ))
            }
        };
        spec.attenuation_db_per_km = kv
            .parse_value("attenuation_db_per_km")?
            .unwrap_or(default_attenuation);
        spec.validate()?;
        Ok(spec)
    }

    fn eta_at(&self, axis_value: f64) -> Result<f64> {
        match self.axis {
            Axis::Eta => Ok(axis_value),
            Axis::DistanceKm => distance_to_eta(axis_value, self.attenuation_db_per_km),
        }
    }

    /// Value of one curve at transmittance `eta`, using this spec's
    /// photon-number constraint, budget and device parameters.
    pub fn evaluate(&self, curve: Curve, eta: f64) -> Result<f64> {
        match curve {
            Curve::Tgw => tgw_bound(eta),
            Curve::TgwFiniteEnergy => {
                let n_s = self
                    .n_s
                    .ok_or_else(|| Error::validation("n_s", "required by tgw_finite_energy"))?;
                tgw_bound_finite_energy(eta, n_s)
            }
            Curve::Rci => rci_lower_bound(eta),
            Curve::Bb84Ideal => ideal_bb84_rate(eta),
            Curve::TwoWay => two_way_bound(eta),
            Curve::FiniteN => {
                let budget = self
                    .budget
                    .as_ref()
                    .ok_or_else(|| Error::validation("epsilon/n_uses", "required by finite_n"))?;
                let e_sq = ChannelPoint::new(eta, self.n_s)?.upper_bound()?;
                finite_n_bound(eta, budget, Some(e_sq))
            }
            Curve::DecoyBb84 => Ok(decoy_optimal_rate(eta, &self.decoy)?.key_rate),
            Curve::CvUncalibrated => self.cv_rate(eta, CvScenario::Uncalibrated),
            Curve::CvCalibrated => self.cv_rate(eta, CvScenario::Calibrated),
        }
    }

    fn cv_rate(&self, eta: f64, scenario: CvScenario) -> Result<f64> {
        // no transmission, no key: the 1/eta noise referral is singular here
        if eta == 0.0 {
            return Ok(0.0);
        }
        Ok(cv_optimal_rate(eta, &self.cv.with_scenario(scenario))?.key_rate)
    }

    fn row(&self, axis_value: f64) -> Result<SweepRow> {
        let eta = self.eta_at(axis_value)?;
        let values = self
            .curves
            .iter()
            .map(|&c| self.evaluate(c, eta))
            .collect::<Result<Vec<_>>>()?;
        Ok(SweepRow {
            axis: axis_value,
            eta,
            values,
        })
    }
}

/// Parses a comma-separated curve list such as `tgw,rci,decoy_bb84`.
pub fn parse_curve_list(s: &str) -> Result<Vec<Curve>> {
    s.split(',')
        .map(str::trim)
        .filter(|c| !c.is_empty())
        .map(str::parse)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis: f64,
    pub eta: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub axis: Axis,
    pub curves: Vec<Curve>,
    pub rows: Vec<SweepRow>,
}

/// Shortest round-trip decimal; `inf` for +infinity, `0` for zero.
pub fn format_value(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else if v == f64::INFINITY {
        "inf".to_string()
    } else if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{v:?}")
    }
}

impl SweepTable {
    pub fn header(&self) -> String {
        let mut cols = vec!["axis".to_string(), "eta".to_string()];
        cols.extend(self.curves.iter().map(|c| c.name().to_string()));
        cols.join(",")
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header();
        out.push('\n');
        for row in &self.rows {
            let mut cells = vec![format_value(row.axis), format_value(row.eta)];
            cells.extend(row.values.iter().map(|&v| format_value(v)));
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// Column of values for `curve`, if present.
    pub fn column(&self, curve: Curve) -> Option<Vec<f64>> {
        let idx = self.curves.iter().position(|&c| c == curve)?;
        Some(self.rows.iter().map(|r| r.values[idx]).collect())
    }
}

/// Parses CSV produced by [`SweepTable::to_csv`].
pub fn parse_csv(text: &str, axis: Axis) -> Result<SweepTable> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::validation("csv", "empty input"))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 3 || cols[0] != "axis" || cols[1] != "eta" {
        return Err(Error::validation(
            "csv",
            format!("unexpected header `{header}`"),
        ));
    }
    let curves = cols[2..]
        .iter()
        .map(|c| c.parse())
        .collect::<Result<Vec<Curve>>>()?;
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate() {
        let cells = line
            .split(',')
            .map(|c| {
                c.parse::<f64>().map_err(|_| {
                    Error::validation(format!("csv row {}", k + 1), format!("bad number `{c}`"))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if cells.len() != cols.len() {
            return Err(Error::validation(
                format!("csv row {}", k + 1),
                "wrong column count",
            ));
        }
        rows.push(SweepRow {
            axis: cells[0],
            eta: cells[1],
            values: cells[2..].to_vec(),
        });
    }
    Ok(SweepTable { axis, curves, rows })
}

/// Evaluates every curve on every grid point. `jobs == 1` evaluates
/// serially, `jobs == 0` uses rayon's default pool, and larger values use a
/// dedicated pool of that size. Output is identical in all cases.
pub fn run_sweep(spec: &SweepSpec, jobs: usize) -> Result<SweepTable> {
    spec.validate()?;
    let points = spec.grid.values();
    let rows = match jobs {
        1 => points
            .iter()
            .map(|&x| spec.row(x))
            .collect::<Result<Vec<_>>>()?,
        0 => points
            .par_iter()
            .map(|&x| spec.row(x))
            .collect::<Result<Vec<_>>>()?,
        n => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::validation("jobs", e.to_string()))?
            .install(|| {
                points
                    .par_iter()
                    .map(|&x| spec.row(x))
                    .collect::<Result<Vec<_>>>()
            })?,
    };
    Ok(SweepTable {
        axis: spec.axis,
        curves: spec.curves.clone(),
        rows,
    })
}

/// The figure sweep: 400 log-spaced transmittances from 1e-6 upward at
/// 67 points per decade (ending near 0.90), six curve families, reference
/// device presets.
pub fn figure3_spec() -> SweepSpec {
    let stop = 10f64.powf(
        FIGURE3_ETA_MIN.log10() + (FIGURE3_POINTS - 1) as f64 / FIGURE3_POINTS_PER_DECADE as f64,
    );
    SweepSpec::new(
        Axis::Eta,
        Grid {
            start: FIGURE3_ETA_MIN,
            stop,
            points: FIGURE3_POINTS,
            spacing: Spacing::Log,
        },
        Curve::FIGURE3.to_vec(),
    )
}

#[derive(Debug, Serialize)]
struct SearchSettings {
    mu_max: f64,
    v_max: f64,
    scan_points: usize,
}

#[derive(Debug, Serialize)]
struct Sidecar<'a> {
    tool: &'static str,
    version: &'static str,
    csv: String,
    axis: Axis,
    grid: &'a Grid,
    points_per_decade: u32,
    curves: Vec<&'static str>,
    decoy_preset: &'a DecoyParams,
    cv_uncalibrated_preset: CvParams,
    cv_calibrated_preset: CvParams,
    search: SearchSettings,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Figure3Output {
    pub csv_path: PathBuf,
    pub json_path: PathBuf,
    pub table: SweepTable,
}

/// Writes the figure CSV to `out_path` and a JSON sidecar (same stem,
/// `.json` extension) recording grid, presets and tool version.
pub fn figure3(out_path: &Path, jobs: usize) -> Result<Figure3Output> {
    let spec = figure3_spec();
    let table = run_sweep(&spec, jobs)?;
    let json_path = out_path.with_extension("json");
    if json_path == out_path {
        return Err(Error::validation(
            "out",
            "output path must not end in .json (reserved for the sidecar)",
        ));
    }
    let sidecar = Sidecar {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        csv: out_path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
        axis: spec.axis,
        grid: &spec.grid,
        points_per_decade: FIGURE3_POINTS_PER_DECADE,
        curves: spec.curves.iter().map(|c| c.name()).collect(),
        decoy_preset: &spec.decoy,
        cv_uncalibrated_preset: spec.cv.with_scenario(CvScenario::Uncalibrated),
        cv_calibrated_preset: spec.cv.with_scenario(CvScenario::Calibrated),
        search: SearchSettings {
            mu_max: MU_MAX,
            v_max: V_MAX,
            scan_points: PROTOCOL_SCAN_POINTS,
        },
    };
    let mut json = serde_json::to_string_pretty(&sidecar)
        .map_err(|e| Error::Io(format!("serializing sidecar: {e}")))?;
    json.push('\n');
    fs::write(out_path, table.to_csv())?;
    fs::write(&json_path, json)?;
    Ok(Figure3Output {
        csv_path: out_path.to_path_buf(),
        json_path,
        table,
    })
}
