//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Oracles here are written independently of the library.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rateloss::bounds::{
    finite_n_bound, ideal_bb84_rate, optimal_squash, rci_lower_bound, tgw_bound,
    tgw_bound_at_squash, SecurityBudget,
};
use rateloss::gaussian::{squash_bound_via_covariance, squashed_loss_state};
use rateloss::protocols::{
    cv_optimal_rate, cv_point, decoy_optimal_rate, decoy_point, CvParams, CvScenario, DecoyParams,
    MU_MAX, MU_MIN, V_MAX,
};
use rateloss::sweep::parse_csv;
use rateloss::sweep::Axis;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

/// Plain `(x+1)log2(x+1) - x log2 x`.
fn g(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        (x + 1.0) * (x + 1.0).log2() - x * x.log2()
    }
}

fn h2(p: f64) -> f64 {
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// Within one unit of the 4th significant digit of `quoted`.
fn four_digits(got: f64, quoted: f64) -> bool {
    let unit = 10f64.powf(quoted.abs().log10().floor() - 3.0);
    (got - quoted).abs() <= unit
}

fn c1() -> Outcome {
    let (eta, eps, n) = (1e-4, 1e-10, 10_000u64);
    let mut best = Duration::MAX;
    let mut out = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..50 {
        let t = Instant::now();
        let budget = SecurityBudget::new(eps, n).map_err(|e| e.to_string())?;
        let tgw = tgw_bound(eta).map_err(|e| e.to_string())?;
        let fin = finite_n_bound(eta, &budget, None).map_err(|e| e.to_string())?;
        out = (tgw, fin, budget.prefactor(), budget.correction());
        best = best.min(t.elapsed());
    }
    let (tgw, fin, pre, corr) = out;
    ensure(four_digits(tgw, 2.885e-4), format!("tgw = {tgw:e}"))?;
    ensure(four_digits(fin, 2.887e-4), format!("finite_n = {fin:e}"))?;
    ensure(
        (1.00015..=1.00025).contains(&pre),
        format!("prefactor = {pre}"),
    )?;
    ensure(
        ((corr - 1.36e-7) / 1.36e-7).abs() <= 0.02,
        format!("correction = {corr:e}"),
    )?;
    let want_corr = 4.0 * h2(2.0 * eps.sqrt()) / n as f64;
    ensure(
        (corr - want_corr).abs() < 1e-12 * want_corr,
        "correction disagrees with oracle",
    )?;
    ensure(best < Duration::from_millis(1), format!("took {best:?}"))?;
    Ok(format!(
        "tgw={tgw:.4e} finite_n={fin:.4e} prefactor={pre:.6} correction={corr:.3e} time={best:?}"
    ))
}

fn c2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_arg: f64 = 0.0;
    let mut worst_val: f64 = 0.0;
    for _ in 0..20 {
        let eta = rng.gen_range(0.01..=0.99);
        let n_s = rng.gen_range(0.1..=100.0);
        let r = optimal_squash(eta, n_s).map_err(|e| e.to_string())?;
        let want = g((1.0 + eta) * n_s / 2.0) - g((1.0 - eta) * n_s / 2.0);
        worst_arg = worst_arg.max((r.argopt - 0.5).abs());
        worst_val = worst_val.max((r.value - want).abs());
    }
    ensure(worst_arg <= 1e-6, format!("argopt off by {worst_arg:e}"))?;
    ensure(worst_val <= 1e-9, format!("value off by {worst_val:e}"))?;
    Ok(format!(
        "20 draws, max |argopt-0.5|={worst_arg:.1e}, max value err={worst_val:.1e}"
    ))
}

/// Hand-derived output block of the thermal input after both beamsplitters.
fn three_mode_block(eta: f64, n: f64, eta1: f64) -> [[f64; 3]; 3] {
    let two_n = 2.0 * n;
    let c = (eta * (1.0 - eta)).sqrt() * two_n;
    let b01 = -c * eta1.sqrt();
    let b02 = c * (1.0 - eta1).sqrt();
    let b12 = -(eta1 * (1.0 - eta1)).sqrt() * (1.0 - eta) * two_n;
    [
        [1.0 + eta * two_n, b01, b02],
        [b01, 1.0 + eta1 * (1.0 - eta) * two_n, b12],
        [b02, b12, 1.0 + (1.0 - eta1) * (1.0 - eta) * two_n],
    ]
}

fn c3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let start = Instant::now();
    let (mut worst_val, mut worst_entry): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let eta = rng.gen_range(0.0..=1.0);
        let n_s = rng.gen_range(0.0..=100.0);
        let eta1 = rng.gen_range(0.0..=1.0);
        let pipe = squash_bound_via_covariance(eta, n_s, eta1).map_err(|e| e.to_string())?;
        let closed = tgw_bound_at_squash(eta, n_s, eta1).map_err(|e| e.to_string())?;
        worst_val = worst_val.max((pipe - closed).abs());
        let cm = squashed_loss_state(eta, n_s, eta1).map_err(|e| e.to_string())?;
        let want = three_mode_block(eta, n_s, eta1);
        for block in [cm.x_block(), cm.p_block()] {
            for (i, row) in want.iter().enumerate() {
                for (j, w) in row.iter().enumerate() {
                    worst_entry = worst_entry.max((block[(i, j)] - w).abs());
                }
            }
        }
    }
    let took = start.elapsed();
    ensure(worst_val <= 1e-9, format!("bound mismatch {worst_val:e}"))?;
    ensure(
        worst_entry <= 1e-12,
        format!("matrix mismatch {worst_entry:e}"),
    )?;
    ensure(took < Duration::from_secs(1), format!("took {took:?}"))?;
    Ok(format!(
        "100 draws, max bound err={worst_val:.1e}, max entry err={worst_entry:.1e}, time={took:?}"
    ))
}

fn c4() -> Outcome {
    let eta = 1e-4;
    let tgw = tgw_bound(eta).map_err(|e| e.to_string())?;
    let rci = rci_lower_bound(eta).map_err(|e| e.to_string())?;
    let bb = ideal_bb84_rate(eta).map_err(|e| e.to_string())?;
    let (r1, r2) = (tgw / rci, rci / bb);
    ensure((1.99..=2.01).contains(&r1), format!("tgw/rci = {r1}"))?;
    ensure((2.87..=2.90).contains(&r2), format!("rci/bb84 = {r2}"))?;
    Ok(format!("tgw/rci={r1:.5} rci/bb84={r2:.5}"))
}

fn c5() -> Outcome {
    let decoy = DecoyParams::methods();
    let uc = CvParams::methods(CvScenario::Uncalibrated);
    let cal = CvParams::methods(CvScenario::Calibrated);
    for k in 1..=1000 {
        let eta = k as f64 / 1001.0;
        let tgw = tgw_bound(eta).map_err(|e| e.to_string())?;
        let rci = rci_lower_bound(eta).map_err(|e| e.to_string())?;
        let bb = ideal_bb84_rate(eta).map_err(|e| e.to_string())?;
        ensure(
            bb < rci && rci <= tgw,
            format!("bound ordering fails at eta={eta}"),
        )?;
        let rates = [
            decoy_optimal_rate(eta, &decoy)
                .map_err(|e| e.to_string())?
                .key_rate,
            cv_optimal_rate(eta, &uc)
                .map_err(|e| e.to_string())?
                .key_rate,
            cv_optimal_rate(eta, &cal)
                .map_err(|e| e.to_string())?
                .key_rate,
        ];
        ensure(
            rates.iter().all(|&r| r <= tgw),
            format!("protocol rate above tgw at eta={eta}: {rates:?}"),
        )?;
    }
    Ok("1000 points, bb84 < rci <= tgw and decoy, cv_uc, cv_c <= tgw".into())
}

fn log_points(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let (a, b) = (lo.log10(), hi.log10());
    (0..n)
        .map(|k| 10f64.powf(a + (b - a) * k as f64 / (n - 1) as f64))
        .collect()
}

/// Geometric bisection for the first transmittance where `positive` holds.
fn threshold(mut lo: f64, mut hi: f64, positive: impl Fn(f64) -> bool) -> f64 {
    for _ in 0..60 {
        let mid = (lo * hi).sqrt();
        if positive(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn c6() -> Outcome {
    let p = DecoyParams::methods();
    let rate = |eta: f64| {
        decoy_optimal_rate(eta, &p)
            .map(|r| r.key_rate)
            .unwrap_or(f64::NAN)
    };
    let (lo, hi) = (1e-6, 1.0 - 1e-9);
    ensure(
        rate(lo) == 0.0 && rate(hi) > 0.0,
        "no sign change across (1e-6, 1)",
    )?;
    let star = threshold(lo, hi, |eta| rate(eta) > 0.0);
    for eta in log_points(200, lo, hi) {
        let k = rate(eta);
        let ok = if eta < star { k == 0.0 } else { k > 0.0 };
        ensure(ok, format!("K={k:e} at eta={eta:e} vs eta*={star:e}"))?;
    }
    Ok(format!(
        "eta*={star:.4e} ({:.1} km at 0.2 dB/km)",
        -50.0 * star.log10()
    ))
}

fn c7() -> Outcome {
    let lowest = |s: CvScenario| {
        let p = CvParams::methods(s);
        let rate = |eta: f64| {
            cv_optimal_rate(eta, &p)
                .map(|r| r.key_rate)
                .unwrap_or(f64::NAN)
        };
        let floor = 1e-6;
        if rate(floor) > 0.0 {
            // positive across the whole search range
            (floor, true)
        } else {
            (threshold(floor, 1.0, |eta| rate(eta) > 0.0), false)
        }
    };
    let (uc, uc_floor) = lowest(CvScenario::Uncalibrated);
    let (cal, cal_floor) = lowest(CvScenario::Calibrated);
    ensure(!uc_floor, "uncalibrated positive at 1e-6")?;
    ensure(
        cal < uc,
        format!("calibrated {cal:e} !< uncalibrated {uc:e}"),
    )?;
    let cal_txt = if cal_floor {
        "positive down to 1e-6".to_string()
    } else {
        format!("{cal:.4e}")
    };
    Ok(format!("uncalibrated eta*={uc:.4e}, calibrated {cal_txt}"))
}

fn c8() -> Outcome {
    let start = Instant::now();
    let decoy = DecoyParams::methods();
    let mut worst: f64 = 0.0;
    let rel = |opt: f64, grid: f64| {
        let grid = grid.max(0.0);
        if opt == grid {
            0.0
        } else {
            (opt - grid).abs() / grid.abs()
        }
    };
    for eta in [0.05, 0.1, 0.5] {
        let opt = decoy_optimal_rate(eta, &decoy)
            .map_err(|e| e.to_string())?
            .key_rate;
        let n = 100_000;
        let grid = (0..n)
            .map(|k| MU_MIN + (MU_MAX - MU_MIN) * k as f64 / (n - 1) as f64)
            .map(|mu| {
                decoy_point(mu, eta, &decoy)
                    .map(|p| p.key_rate)
                    .unwrap_or(f64::NAN)
            })
            .fold(f64::NEG_INFINITY, f64::max);
        worst = worst.max(rel(opt, grid));
        for s in [CvScenario::Uncalibrated, CvScenario::Calibrated] {
            let p = CvParams::methods(s);
            let opt = cv_optimal_rate(eta, &p)
                .map_err(|e| e.to_string())?
                .key_rate;
            let grid = log_points(10_000, 1.0, V_MAX)
                .into_iter()
                .map(|v| cv_point(v, eta, &p).map(|c| c.key_rate).unwrap_or(f64::NAN))
                .fold(f64::NEG_INFINITY, f64::max);
            worst = worst.max(rel(opt, grid));
        }
    }
    let took = start.elapsed();
    ensure(worst <= 1e-5, format!("relative gap {worst:e}"))?;
    ensure(took < Duration::from_secs(10), format!("took {took:?}"))?;
    Ok(format!("max relative gap={worst:.1e}, time={took:?}"))
}

fn run_figure(out: &Path, jobs: &str) -> Result<Vec<u8>, String> {
    let status = Command::new(env!("CARGO_BIN_EXE_rateloss"))
        .args(["figure3", "--out"])
        .arg(out)
        .args(["--jobs", jobs])
        .output()
        .map_err(|e| e.to_string())?;
    ensure(
        status.status.success(),
        format!("figure3 failed: {status:?}"),
    )?;
    std::fs::read(out).map_err(|e| e.to_string())
}

fn c9() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let a = run_figure(&dir.path().join("a.csv"), "1")?;
    let b = run_figure(&dir.path().join("b.csv"), "1")?;
    let c = run_figure(&dir.path().join("c.csv"), "4")?;
    let d = run_figure(&dir.path().join("d.csv"), "0")?;
    ensure(a == b, "serial runs differ")?;
    ensure(a == c && a == d, "parallel output differs from serial")?;
    let text = String::from_utf8(a).map_err(|e| e.to_string())?;
    let table = parse_csv(&text, Axis::Eta).map_err(|e| e.to_string())?;
    let row = table
        .rows
        .iter()
        .find(|r| r.eta == 1e-4)
        .ok_or("eta = 1e-4 not on the figure grid")?;
    let tgw = row.values[0];
    ensure(four_digits(tgw, 2.885e-4), format!("tgw at 1e-4 = {tgw:e}"))?;
    ensure(
        tgw == tgw_bound(1e-4).unwrap(),
        "CSV value differs from library call",
    )?;
    Ok(format!(
        "{} rows identical across jobs 1/1/4/auto, tgw(1e-4)={tgw:.4e}",
        table.rows.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("long-haul worked example", c1),
        ("squash optimality", c2),
        ("gaussian oracle equivalence", c3),
        ("asymptotic factor of two", c4),
        ("ordering suite", c5),
        ("dark-count cliff", c6),
        ("cv scenario separation", c7),
        ("optimizer vs grid", c8),
        ("cli determinism", c9),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {} PASS {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} FAIL {name}: {detail}", k + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
