//! Asymptotic key rates of decoy-state BB84 and GG02 (Gaussian-modulated
//! coherent states with homodyne detection) under device imperfections.
//!
//! The component formulas return raw values, negative key rates included.
//! Only the `*_optimal_rate` functions clamp to zero.
//!
//! Decoy-state formulas are evaluated exactly as published, including two
//! asymmetries worth knowing about: the vacuum yield numerator carries
//! `e^{-mu}` while its denominator carries `e^{-mu t}`, and the single-photon
//! error denominator is `t + 2(1-t)p_d` rather than the `t(1-p_d) + 2(1-t)p_d`
//! used by the single-photon yield.

use serde::{Deserialize, Serialize};

use crate::dd::Dd;
use crate::entropy::{binary_entropy, g_entropy};
use crate::error::{check_closed, check_nonneg, check_unit, Error, Result};
use crate::optimize::{ScalarSearch, ScanSpacing};

/// Upper end of the decoy intensity search.
pub const MU_MAX: f64 = 2.0;
/// Lower end of the decoy intensity search (the formulas need `mu > 0`).
pub const MU_MIN: f64 = 1e-9;
/// Upper end of the GG02 variance search.
pub const V_MAX: f64 = 1e6;
/// Pre-scan points used by both protocol optimizations.
pub const PROTOCOL_SCAN_POINTS: usize = 256;

const NUMERICAL_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecoyParams {
    /// Interference visibility `V` at Bob's receiver.
    pub visibility: f64,
    /// Transmittance of Bob's optics `eta_B`.
    pub bob_transmittance: f64,
    /// Detector quantum efficiency `eta_d`.
    pub detector_efficiency: f64,
    /// Dark-count probability per pulse `p_d`.
    pub dark_count: f64,
    /// Error-correction inefficiency `f >= 1`.
    pub ec_inefficiency: f64,
}

impl DecoyParams {
    /// Device parameters representative of current technology.
    pub fn methods() -> Self {
        Self {
            visibility: 0.99,
            bob_transmittance: 1.0,
            detector_efficiency: 0.2,
            dark_count: 1e-6,
            ec_inefficiency: 1.2,
        }
    }

    /// Noiseless, lossless devices with Shannon-limit error correction.
    pub fn perfect() -> Self {
        Self {
            visibility: 1.0,
            bob_transmittance: 1.0,
            detector_efficiency: 1.0,
            dark_count: 0.0,
            ec_inefficiency: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_unit("visibility", self.visibility)?;
        check_unit("bob_transmittance", self.bob_transmittance)?;
        check_unit("detector_efficiency", self.detector_efficiency)?;
        check_unit("dark_count", self.dark_count)?;
        check_closed(
            "ec_inefficiency",
            self.ec_inefficiency,
            1.0,
            f64::MAX,
            "[1, inf)",
        )?;
        Ok(())
    }

    /// Intrinsic error probability `(1 - V) / 2`.
    pub fn misalignment(&self) -> f64 {
        (1.0 - self.visibility) / 2.0
    }
}

/// All intermediate quantities of the decoy-state rate at one intensity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecoyPoint {
    pub mu: f64,
    /// Detection rate per mode per pulse.
    pub detection_rate: f64,
    pub y0: f64,
    pub y1: f64,
    /// Single-photon error rate.
    pub eps1: f64,
    /// Quantum bit error rate.
    pub qber: f64,
    /// Raw (unclamped) key rate, bits per mode per pulse.
    pub key_rate: f64,
}

fn entropy_of(term: &'static str, p: f64) -> Result<f64> {
    binary_entropy(p).map_err(|_| Error::NumericalDomain {
        term,
        detail: format!("binary entropy argument {p} outside [0, 1]"),
    })
}

/// Decoy-state BB84 quantities at signal intensity `mu` over a channel of
/// transmittance `eta`.
pub fn decoy_point(mu: f64, eta: f64, params: &DecoyParams) -> Result<DecoyPoint> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::domain("mu", mu, "(0, inf)"));
    }
    check_unit("eta", eta)?;
    params.validate()?;

    let pd = params.dark_count;
    let e = params.misalignment();
    let t = eta * params.bob_transmittance * params.detector_efficiency;
    let click_free = (-mu * t).exp();
    // 1 - (1 - 2 p_d) e^{-mu t}, kept accurate for mu t << 1
    let denom = -(-mu * t).exp_m1() + 2.0 * pd * click_free;

    let detection_rate = denom * (1.0 - pd) / 2.0;
    if denom <= 0.0 {
        return Ok(DecoyPoint {
            mu,
            detection_rate: 0.0,
            y0: 0.0,
            y1: 0.0,
            eps1: 0.0,
            qber: 0.0,
            key_rate: 0.0,
        });
    }

    let y0 = 2.0 * pd * (-mu).exp() / denom;
    let y1 = mu * (-mu).exp() * (t * (1.0 - pd) + 2.0 * (1.0 - t) * pd) / denom;
    let eps1_denom = t + 2.0 * (1.0 - t) * pd;
    let eps1 = if eps1_denom > 0.0 {
        (t * e + (1.0 - t) * pd) / eps1_denom
    } else {
        0.0
    };
    let qber = (e - (e - pd) * click_free) / denom;

    let key_rate = detection_rate
        * (y0 + y1 * (1.0 - entropy_of("eps1", eps1)?)
            - params.ec_inefficiency * entropy_of("qber", qber)?);

    Ok(DecoyPoint {
        mu,
        detection_rate,
        y0,
        y1,
        eps1,
        qber,
        key_rate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecoyOptimum {
    /// Intensity maximizing the raw key rate (reported even when clamped).
    pub mu: f64,
    /// `max(0, max_mu K^mu)`.
    pub key_rate: f64,
}

/// Maximizes the decoy-state key rate over `mu in (0, MU_MAX]`.
pub fn decoy_optimal_rate(eta: f64, params: &DecoyParams) -> Result<DecoyOptimum> {
    check_unit("eta", eta)?;
    params.validate()?;
    let r = ScalarSearch::default()
        .scan_points(PROTOCOL_SCAN_POINTS)
        .try_maximize(
            |mu| Ok(decoy_point(mu, eta, params)?.key_rate),
            MU_MIN,
            MU_MAX,
        )?;
    Ok(DecoyOptimum {
        mu: r.argopt,
        key_rate: r.value.max(0.0),
    })
}

/// Who is credited with the homodyne detector's loss and noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CvScenario {
    /// Eve controls the detector imperfections.
    Uncalibrated,
    /// The detector is characterized in a trusted lab and excluded from Eve.
    Calibrated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvParams {
    /// Reconciliation efficiency `beta`.
    pub reconciliation: f64,
    /// Optical excess noise, shot-noise units.
    pub excess_noise: f64,
    /// Homodyne quantum efficiency `eta_d`.
    pub detector_efficiency: f64,
    /// Electronic noise `v_el`, shot-noise units.
    pub electronic_noise: f64,
    pub scenario: CvScenario,
}

impl CvParams {
    pub fn methods(scenario: CvScenario) -> Self {
        Self {
            reconciliation: 0.9,
            excess_noise: 0.005,
            detector_efficiency: 0.5,
            electronic_noise: 0.01,
            scenario,
        }
    }

    /// Noiseless unit-efficiency detection with perfect reconciliation.
    pub fn perfect(scenario: CvScenario) -> Self {
        Self {
            reconciliation: 1.0,
            excess_noise: 0.0,
            detector_efficiency: 1.0,
            electronic_noise: 0.0,
            scenario,
        }
    }

    pub fn with_scenario(self, scenario: CvScenario) -> Self {
        Self { scenario, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        check_unit("reconciliation", self.reconciliation)?;
        check_nonneg("excess_noise", self.excess_noise)?;
        check_nonneg("electronic_noise", self.electronic_noise)?;
        let d = self.detector_efficiency;
        if !(d > 0.0 && d <= 1.0) {
            return Err(Error::domain("detector_efficiency", d, "(0, 1]"));
        }
        Ok(())
    }
}

/// Noise referred to the channel input, in shot-noise units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CvNoise {
    /// `(1 - eta)/eta + excess_noise`.
    pub channel: f64,
    /// `(1 + v_el)/eta_d - 1`.
    pub detector: f64,
    /// `channel + detector / eta`.
    pub total: f64,
}

fn check_cv_eta(eta: f64) -> Result<f64> {
    if eta == 0.0 {
        return Err(Error::Singular("GG02 noise referred to the input (1/eta)"));
    }
    check_unit("eta", eta)
}

pub fn cv_noise_terms(eta: f64, params: &CvParams) -> Result<CvNoise> {
    check_cv_eta(eta)?;
    params.validate()?;
    let channel = (1.0 - eta) / eta + params.excess_noise;
    let detector = (1.0 + params.electronic_noise) / params.detector_efficiency - 1.0;
    Ok(CvNoise {
        channel,
        detector,
        total: channel + detector / eta,
    })
}

/// Alice-Bob mutual information `½ log2((delta + v)/(delta + 1))`.
pub fn cv_mutual_information(v: f64, delta: f64) -> Result<f64> {
    check_closed("v", v, 1.0, f64::MAX, "[1, inf)")?;
    check_nonneg("delta", delta)?;
    Ok(0.5 * ((delta + v) / (delta + 1.0)).log2())
}

/// Roots `(l1, l2)` of `l^2 - a l + b = 0`, i.e. `½(a ± sqrt(a^2 - 4b))`.
/// The smaller root is recovered as `b / l1` to avoid cancellation.
fn quadratic_pair(term: &'static str, a: Dd, b: Dd) -> Result<(Dd, Dd)> {
    let disc = a.square() - 4.0 * b;
    if disc.to_f64() < -NUMERICAL_FLOOR * a.square().to_f64() {
        return Err(Error::NumericalDomain {
            term,
            detail: format!(
                "negative discriminant {:e} (a = {}, b = {})",
                disc.to_f64(),
                a.to_f64(),
                b.to_f64()
            ),
        });
    }
    let big = (a + disc.sqrt()) * 0.5;
    let small = if big.to_f64() > 0.0 {
        b / big
    } else {
        Dd::ZERO
    };
    Ok((big, small))
}

/// `g((lambda - 1)/2)` from a squared symplectic eigenvalue.
fn g_of_squared(term: &'static str, lambda_sq: Dd) -> Result<f64> {
    let x = ((lambda_sq.sqrt() - 1.0) * 0.5).to_f64();
    if x < -NUMERICAL_FLOOR {
        return Err(Error::NumericalDomain {
            term,
            detail: format!("symplectic eigenvalue^2 {} < 1", lambda_sq.to_f64()),
        });
    }
    g_entropy(x.max(0.0))
}

/// Holevo information between Bob's homodyne outcome and Eve, in bits,
/// for the scenario selected in `params`. Floored at zero.
///
/// The symplectic invariants are evaluated in double-double precision: at
/// small modulation the eigenvalue pairs become nearly degenerate, and the
/// steep slope of `g` near zero would otherwise turn f64 rounding in the
/// discriminants into errors of order 1e-7 bits.
pub fn cv_holevo(v: f64, eta: f64, params: &CvParams) -> Result<f64> {
    check_closed("v", v, 1.0, f64::MAX, "[1, inf)")?;
    cv_noise_terms(eta, params)?;
    let one = Dd::ONE;
    let (vv, e) = (Dd::from(v), Dd::from(eta));
    let dch = (one - e) / e + params.excess_noise;
    let dh = (one + params.electronic_noise) / params.detector_efficiency - one;
    let delta = dch + dh / e;

    let chi = match params.scenario {
        CvScenario::Uncalibrated => {
            let t = e * params.detector_efficiency;
            let a = vv.square() * (one - t * 2.0) + t * 2.0 + (t * (vv + delta)).square();
            let b = (t * (vv * delta + one)).square();
            let (l1, l2) = quadratic_pair("A, B", a, b)?;
            let l3 = vv * (one + vv * delta) / (vv + delta);
            g_of_squared("lambda_1", l1)? + g_of_squared("lambda_2", l2)?
                - g_of_squared("lambda_3", l3)?
        }
        CvScenario::Calibrated => {
            let a = vv.square() * (one - e * 2.0) + e * 2.0 + (e * (vv + dch)).square();
            let b = (e * (vv * dch + one)).square();
            let sqrt_b = e * (vv * dch + one);
            let norm = e * (vv + delta);
            let c = (vv * sqrt_b + e * (vv + dch) + a * dh) / norm;
            let d = (vv * sqrt_b + b * dh) / norm;
            let (l1, l2) = quadratic_pair("A', B'", a, b)?;
            let (l3, l4) = quadratic_pair("C', D'", c, d)?;
            g_of_squared("lambda'_1", l1)? + g_of_squared("lambda'_2", l2)?
                - g_of_squared("lambda'_3", l3)?
                - g_of_squared("lambda'_4", l4)?
        }
    };
    if chi < -NUMERICAL_FLOOR {
        return Err(Error::NumericalDomain {
            term: "chi",
            detail: format!("Holevo information {chi} < 0 at v = {v}, eta = {eta}"),
        });
    }
    Ok(chi.max(0.0))
}

/// All intermediate quantities of the GG02 rate at one modulation variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CvPoint {
    pub v: f64,
    pub noise: CvNoise,
    pub mutual_information: f64,
    pub holevo: f64,
    /// Raw key rate `beta I - chi`, bits per channel use.
    pub key_rate: f64,
}

pub fn cv_point(v: f64, eta: f64, params: &CvParams) -> Result<CvPoint> {
    let noise = cv_noise_terms(eta, params)?;
    let mutual_information = cv_mutual_information(v, noise.total)?;
    let holevo = cv_holevo(v, eta, params)?;
    Ok(CvPoint {
        v,
        noise,
        mutual_information,
        holevo,
        key_rate: params.reconciliation * mutual_information - holevo,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CvOptimum {
    pub v: f64,
    /// `max(0, max_v K(v))`.
    pub key_rate: f64,
    /// The optimum sits against the `V_MAX` search cap.
    pub at_boundary: bool,
}

/// Maximizes the GG02 key rate over `v in [1, V_MAX]`.
pub fn cv_optimal_rate(eta: f64, params: &CvParams) -> Result<CvOptimum> {
    check_cv_eta(eta)?;
    params.validate()?;
    let r = ScalarSearch::default()
        .scan_points(PROTOCOL_SCAN_POINTS)
        .spacing(ScanSpacing::Log)
        .try_maximize(|v| Ok(cv_point(v, eta, params)?.key_rate), 1.0, V_MAX)?;
    Ok(CvOptimum {
        v: r.argopt,
        key_rate: r.value.max(0.0),
        at_boundary: r.argopt >= 0.99 * V_MAX,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decoy_noiseless_point() {
        let p = decoy_point(0.5, 1.0, &DecoyParams::perfect()).unwrap();
        assert_eq!(p.qber, 0.0);
        assert_eq!(p.eps1, 0.0);
        assert_eq!(p.y0, 0.0);
        let want = 0.5 * (-0.5f64).exp() / 2.0;
        assert!((p.key_rate - want).abs() < 1e-15, "{p:?}");
        assert!((p.key_rate - 0.151_633).abs() < 1e-6);
    }

    #[test]
    fn decoy_no_detections() {
        for &mu in &[0.1, 0.5, 1.7] {
            let p = decoy_point(mu, 0.0, &DecoyParams::perfect()).unwrap();
            assert_eq!(p.detection_rate, 0.0);
            assert_eq!(p.key_rate, 0.0);
        }
    }

    #[test]
    fn decoy_rejects_bad_input() {
        let m = DecoyParams::methods();
        assert!(decoy_point(0.0, 0.1, &m).is_err());
        assert!(decoy_point(0.5, 1.2, &m).is_err());
        let bad = DecoyParams {
            ec_inefficiency: 0.9,
            ..m
        };
        assert!(decoy_point(0.5, 0.1, &bad).is_err());
        let bad = DecoyParams {
            visibility: 1.5,
            ..m
        };
        assert!(decoy_optimal_rate(0.1, &bad).is_err());
    }

    #[test]
    fn decoy_perfect_optimum() {
        let r = decoy_optimal_rate(1.0, &DecoyParams::perfect()).unwrap();
        assert!((r.mu - 1.0).abs() < 1e-6, "{r:?}");
        assert!((r.key_rate - (-1.0f64).exp() / 2.0).abs() < 1e-12);
        assert!((r.key_rate - 0.18394).abs() < 1e-5);
    }

    #[test]
    fn decoy_deterministic() {
        let m = DecoyParams::methods();
        let a = decoy_point(0.48, 0.1, &m).unwrap();
        let b = decoy_point(0.48, 0.1, &m).unwrap();
        assert_eq!(a.key_rate.to_bits(), b.key_rate.to_bits());
    }

    #[test]
    fn decoy_dark_count_cliff() {
        let m = DecoyParams::methods();
        assert_eq!(decoy_optimal_rate(1e-6, &m).unwrap().key_rate, 0.0);
        assert!(decoy_optimal_rate(0.1, &m).unwrap().key_rate > 0.0);
    }

    #[test]
    fn cv_noise_examples() {
        let n = cv_noise_terms(1.0, &CvParams::perfect(CvScenario::Uncalibrated)).unwrap();
        assert_eq!((n.channel, n.detector, n.total), (0.0, 0.0, 0.0));
        let n = cv_noise_terms(0.5, &CvParams::methods(CvScenario::Uncalibrated)).unwrap();
        assert!((n.channel - 1.005).abs() < 1e-15);
        assert!((n.detector - 1.02).abs() < 1e-15);
        assert!((n.total - 3.045).abs() < 1e-14);
        assert!(matches!(
            cv_noise_terms(0.0, &CvParams::methods(CvScenario::Calibrated)),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn cv_noise_decreasing_in_eta() {
        let p = CvParams::methods(CvScenario::Calibrated);
        let mut prev = f64::INFINITY;
        for k in 1..=200 {
            let total = cv_noise_terms(k as f64 / 200.0, &p).unwrap().total;
            assert!(total < prev);
            prev = total;
        }
    }

    #[test]
    fn mutual_information_examples() {
        assert_eq!(cv_mutual_information(1.0, 3.0).unwrap(), 0.0);
        assert!((cv_mutual_information(2.0, 0.0).unwrap() - 0.5).abs() < 1e-15);
        let i = cv_mutual_information(21.0, 3.045).unwrap();
        assert!((i - 0.5 * (24.045f64 / 4.045).log2()).abs() < 1e-15);
        assert!((i - 1.2857).abs() < 1e-4);
        assert!(cv_mutual_information(0.5, 0.0).is_err());
        assert!(cv_mutual_information(2.0, -1.0).is_err());
    }

    #[test]
    fn holevo_vanishes_at_noiseless_lossless_point() {
        for scenario in [CvScenario::Uncalibrated, CvScenario::Calibrated] {
            let p = CvParams::perfect(scenario);
            for &v in &[1.0, 2.0, 50.0, 1e5] {
                let chi = cv_holevo(v, 1.0, &p).unwrap();
                assert!(chi.abs() < 1e-9, "{scenario:?} v={v} chi={chi}");
            }
        }
    }

    #[test]
    fn cv_clamps_without_reconciliation() {
        let p = CvParams {
            reconciliation: 0.0,
            ..CvParams::methods(CvScenario::Uncalibrated)
        };
        let r = cv_optimal_rate(0.5, &p).unwrap();
        assert_eq!(r.key_rate, 0.0);
    }

    #[test]
    fn cv_rejects_bad_input() {
        let p = CvParams::methods(CvScenario::Calibrated);
        assert!(cv_holevo(0.9, 0.5, &p).is_err());
        assert!(cv_optimal_rate(0.0, &p).is_err());
        let bad = CvParams {
            detector_efficiency: 0.0,
            ..p
        };
        assert!(cv_point(2.0, 0.5, &bad).is_err());
    }
}
