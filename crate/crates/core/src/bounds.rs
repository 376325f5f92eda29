//! Secret-key capacity bounds for the pure-loss bosonic channel.
//!
//! Every rate is in bits per channel use (per mode). The upper bounds come
//! from squashed entanglement with a pure-loss squashing channel; the lower
//! bound is the reverse coherent information.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::entropy::{binary_entropy, g_entropy};
use crate::error::{check_nonneg, check_unit, Error, Result};
use crate::optimize::{OptimizationResult, ScalarSearch, DEFAULT_TOL};

/// A channel transmittance with an optional mean-photon-number constraint.
/// `n_s == None` means unconstrained input energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelPoint {
    pub eta: f64,
    pub n_s: Option<f64>,
}

impl ChannelPoint {
    pub fn new(eta: f64, n_s: Option<f64>) -> Result<Self> {
        check_unit("eta", eta)?;
        if let Some(n) = n_s {
            check_nonneg("n_s", n)?;
        }
        Ok(Self { eta, n_s })
    }

    /// The squashed-entanglement upper bound at this point: the energy-
    /// constrained form when `n_s` is set, the energy-independent one otherwise.
    pub fn upper_bound(&self) -> Result<f64> {
        match self.n_s {
            Some(n_s) => tgw_bound_finite_energy(self.eta, n_s),
            None => tgw_bound(self.eta),
        }
    }
}

/// Security parameter and block length for the weak-converse correction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecurityBudget {
    epsilon: f64,
    n_uses: u64,
}

impl SecurityBudget {
    pub fn new(epsilon: f64, n_uses: u64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::domain("epsilon", epsilon, "(0, 1/256)"));
        }
        if 16.0 * epsilon.sqrt() >= 1.0 {
            return Err(Error::DegenerateBudget { epsilon });
        }
        if n_uses == 0 {
            return Err(Error::domain("n_uses", 0.0, "[1, inf)"));
        }
        Ok(Self { epsilon, n_uses })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn n_uses(&self) -> u64 {
        self.n_uses
    }

    /// `1 / (1 - 16 sqrt(eps))`.
    pub fn prefactor(&self) -> f64 {
        1.0 / (1.0 - 16.0 * self.epsilon.sqrt())
    }

    /// `4 h2(2 sqrt(eps)) / n`.
    pub fn correction(&self) -> f64 {
        let h =
            binary_entropy(2.0 * self.epsilon.sqrt()).expect("2 sqrt(eps) < 1/8 by construction");
        4.0 * h / self.n_uses as f64
    }
}

fn check_eta(eta: f64) -> Result<f64> {
    check_unit("eta", eta)
}

/// Upper bound at a fixed squashing transmittance `eta1`:
/// `½[g((1-η1+ηη1)N) + g((η1+η(1-η1))N) - g(η1(1-η)N) - g((1-η1)(1-η)N)]`.
pub fn tgw_bound_at_squash(eta: f64, n_s: f64, eta1: f64) -> Result<f64> {
    check_eta(eta)?;
    check_nonneg("n_s", n_s)?;
    check_unit("eta1", eta1)?;
    let loss = 1.0 - eta;
    let squash_out = 1.0 - eta1;
    let bf = g_entropy((squash_out + eta * eta1) * n_s)?;
    let be = g_entropy((eta1 + eta * squash_out) * n_s)?;
    let e = g_entropy(eta1 * loss * n_s)?;
    let f = g_entropy(squash_out * loss * n_s)?;
    Ok(0.5 * (bf + be - e - f))
}

/// Energy-constrained upper bound `g((1+η)N/2) - g((1-η)N/2)`, the value of
/// [`tgw_bound_at_squash`] at its minimizer `η1 = 1/2`.
pub fn tgw_bound_finite_energy(eta: f64, n_s: f64) -> Result<f64> {
    check_eta(eta)?;
    check_nonneg("n_s", n_s)?;
    Ok(g_entropy((1.0 + eta) * n_s / 2.0)? - g_entropy((1.0 - eta) * n_s / 2.0)?)
}

/// Energy-independent upper bound `log2((1+η)/(1-η))`; infinite at `η = 1`.
pub fn tgw_bound(eta: f64) -> Result<f64> {
    check_eta(eta)?;
    if eta == 1.0 {
        return Ok(f64::INFINITY);
    }
    Ok((eta.ln_1p() - (-eta).ln_1p()) / LN_2)
}

/// Reverse-coherent-information lower bound `-log2(1-η)`; infinite at `η = 1`.
pub fn rci_lower_bound(eta: f64) -> Result<f64> {
    check_eta(eta)?;
    if eta == 1.0 {
        return Ok(f64::INFINITY);
    }
    Ok(-(-eta).ln_1p() / LN_2)
}

/// Key rate of ideal single-photon BB84 over the channel, `η/2`.
pub fn ideal_bb84_rate(eta: f64) -> Result<f64> {
    Ok(check_eta(eta)? / 2.0)
}

/// Bound for a two-way quantum channel, counting the key generated by
/// transmissions in both directions.
pub fn two_way_bound(eta: f64) -> Result<f64> {
    Ok(2.0 * tgw_bound(eta)?)
}

/// Finite block-length weak-converse bound
/// `(E_sq + 4 h2(2 sqrt(eps))/n) / (1 - 16 sqrt(eps))`.
///
/// `e_sq` defaults to [`tgw_bound`]; pass the energy-constrained value to
/// use that estimate instead.
pub fn finite_n_bound(eta: f64, budget: &SecurityBudget, e_sq: Option<f64>) -> Result<f64> {
    let e_sq = match e_sq {
        Some(v) if v >= 0.0 => v,
        Some(v) => return Err(Error::domain("e_sq", v, "[0, inf]")),
        None => tgw_bound(eta)?,
    };
    check_eta(eta)?;
    Ok(budget.prefactor() * (e_sq + budget.correction()))
}

/// Numerically minimizes [`tgw_bound_at_squash`] over `η1 ∈ [0, 1]`.
pub fn optimal_squash(eta: f64, n_s: f64) -> Result<OptimizationResult> {
    check_eta(eta)?;
    if !(n_s > 0.0 && n_s.is_finite()) {
        return Err(Error::domain("n_s", n_s, "(0, inf)"));
    }
    ScalarSearch::with_tol(DEFAULT_TOL).try_minimize(|x| tgw_bound_at_squash(eta, n_s, x), 0.0, 1.0)
}
