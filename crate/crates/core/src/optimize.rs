//! Deterministic one-dimensional extremum search.
//!
//! A uniform (or logarithmic) pre-scan locates the best grid cell, and a
//! golden-section search refines inside the bracket formed by its two
//! neighbours. The pre-scan keeps the search honest on objectives that are
//! flat near a boundary or only piecewise smooth, such as clamped key rates.

use crate::error::{Error, Result};

/// Default argument tolerance.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Default number of pre-scan points.
pub const DEFAULT_SCAN_POINTS: usize = 64;

const INV_PHI: f64 = 0.618_033_988_749_894_9;
const MAX_GOLDEN_ITER: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizationResult {
    /// Location of the extremum.
    pub argopt: f64,
    /// Objective value at `argopt`.
    pub value: f64,
    /// Number of objective evaluations spent.
    pub evaluations: usize,
}

/// How pre-scan points are placed over the search interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScanSpacing {
    #[default]
    Linear,
    /// Geometric spacing; requires a strictly positive lower bound.
    Log,
}

/// Scan-then-refine search configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarSearch {
    pub tol: f64,
    pub scan_points: usize,
    pub spacing: ScanSpacing,
}

impl Default for ScalarSearch {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            scan_points: DEFAULT_SCAN_POINTS,
            spacing: ScanSpacing::Linear,
        }
    }
}

struct Tracker<F> {
    f: F,
    evaluations: usize,
    best_x: f64,
    best_value: f64,
}

impl<F: FnMut(f64) -> Result<f64>> Tracker<F> {
    fn eval(&mut self, x: f64) -> Result<f64> {
        let value = (self.f)(x)?;
        self.evaluations += 1;
        if !value.is_finite() {
            return Err(Error::Evaluation { x, value });
        }
        if value < self.best_value {
            self.best_value = value;
            self.best_x = x;
        }
        Ok(value)
    }
}

impl ScalarSearch {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }

    pub fn scan_points(mut self, n: usize) -> Self {
        self.scan_points = n;
        self
    }

    pub fn spacing(mut self, spacing: ScanSpacing) -> Self {
        self.spacing = spacing;
        self
    }

    fn validate(&self, lo: f64, hi: f64) -> Result<()> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::validation(
                "interval",
                format!("need finite lo < hi, got [{lo}, {hi}]"),
            ));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::domain("tol", self.tol, "(0, inf)"));
        }
        if self.scan_points < 2 {
            return Err(Error::validation("scan_points", "need at least 2 points"));
        }
        if self.spacing == ScanSpacing::Log && lo <= 0.0 {
            return Err(Error::domain("lo", lo, "(0, inf) for log spacing"));
        }
        Ok(())
    }

    fn scan_grid(&self, lo: f64, hi: f64) -> Vec<f64> {
        let n = self.scan_points;
        let last = (n - 1) as f64;
        let mut grid: Vec<f64> = match self.spacing {
            ScanSpacing::Linear => (0..n).map(|k| lo + (hi - lo) * (k as f64 / last)).collect(),
            ScanSpacing::Log => {
                let (a, b) = (lo.ln(), hi.ln());
                (0..n)
                    .map(|k| (a + (b - a) * (k as f64 / last)).exp())
                    .collect()
            }
        };
        grid[0] = lo;
        grid[n - 1] = hi;
        grid
    }

    /// Minimizes a fallible objective over `[lo, hi]`.
    pub fn try_minimize<F>(&self, f: F, lo: f64, hi: f64) -> Result<OptimizationResult>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        self.validate(lo, hi)?;
        let mut t = Tracker {
            f,
            evaluations: 0,
            best_x: f64::NAN,
            best_value: f64::INFINITY,
        };

        let grid = self.scan_grid(lo, hi);
        let mut best_k = 0;
        let mut best_scan = f64::INFINITY;
        for (k, &x) in grid.iter().enumerate() {
            let v = t.eval(x)?;
            if v < best_scan {
                best_scan = v;
                best_k = k;
            }
        }

        let mut a = grid[best_k.saturating_sub(1)];
        let mut b = grid[(best_k + 1).min(grid.len() - 1)];
        let mut c = b - INV_PHI * (b - a);
        let mut d = a + INV_PHI * (b - a);
        let mut fc = t.eval(c)?;
        let mut fd = t.eval(d)?;
        let mut iter = 0;
        while b - a > self.tol && iter < MAX_GOLDEN_ITER {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - INV_PHI * (b - a);
                fc = t.eval(c)?;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + INV_PHI * (b - a);
                fd = t.eval(d)?;
            }
            iter += 1;
        }

        Ok(OptimizationResult {
            argopt: t.best_x,
            value: t.best_value,
            evaluations: t.evaluations,
        })
    }

    /// Maximizes a fallible objective over `[lo, hi]`.
    pub fn try_maximize<F>(&self, mut f: F, lo: f64, hi: f64) -> Result<OptimizationResult>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let r = self.try_minimize(|x| f(x).map(|v| -v), lo, hi)?;
        Ok(OptimizationResult {
            value: -r.value,
            ..r
        })
    }

    pub fn minimize<F: FnMut(f64) -> f64>(
        &self,
        mut f: F,
        lo: f64,
        hi: f64,
    ) -> Result<OptimizationResult> {
        self.try_minimize(|x| Ok(f(x)), lo, hi)
    }

    pub fn maximize<F: FnMut(f64) -> f64>(
        &self,
        mut f: F,
        lo: f64,
        hi: f64,
    ) -> Result<OptimizationResult> {
        self.try_maximize(|x| Ok(f(x)), lo, hi)
    }
}

/// Minimizes `f` over `[lo, hi]` to argument tolerance `tol`, with the
/// default 64-point linear pre-scan.
pub fn minimize_scalar<F: FnMut(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<OptimizationResult> {
    ScalarSearch::with_tol(tol).minimize(f, lo, hi)
}

/// Maximizes `f` over `[lo, hi]`; see [`minimize_scalar`].
pub fn maximize_scalar<F: FnMut(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<OptimizationResult> {
    ScalarSearch::with_tol(tol).maximize(f, lo, hi)
}
