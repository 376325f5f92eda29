//! Entropy functions shared by every bound and protocol formula.
//!
//! All logarithms are base 2, so results are in bits.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};

/// Below this magnitude `x log x` is replaced by its limit 0.
const DEGENERATE: f64 = 1e-300;

/// Entropy of a thermal state (geometric photon distribution) with mean
/// photon number `x`: `g(x) = (x+1) log2(x+1) - x log2 x`, with `g(0) = 0`.
///
/// Evaluated as `log2(1+x) + x log2(1 + 1/x)`, which avoids the cancellation
/// of the textbook form at large `x`.
pub fn g_entropy(x: f64) -> Result<f64> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::domain("x", x, "[0, inf)"));
    }
    if x < DEGENERATE {
        return Ok(0.0);
    }
    Ok((x.ln_1p() + x * (1.0 / x).ln_1p()) / LN_2)
}

/// Binary entropy `h2(p) = -p log2 p - (1-p) log2(1-p)`, zero at both endpoints.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain("p", p, "[0, 1]"));
    }
    let q = 1.0 - p;
    Ok((xlog2x(p) + xlog2x(q)).abs())
}

fn xlog2x(x: f64) -> f64 {
    if x < DEGENERATE {
        0.0
    } else {
        -x * x.log2()
    }
}
