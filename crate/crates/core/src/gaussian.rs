//! Zero-mean Gaussian states of bosonic modes, stored as separate position
//! and momentum covariance blocks (no x-p cross terms). The vacuum is the
//! identity, so a thermal state with mean photon number `N` has blocks
//! `1 + 2N`.
//!
//! This module rebuilds the pure-loss squashed-entanglement bound from
//! first principles (thermal input, two beamsplitters, marginal entropies)
//! and serves as an independent check of the closed forms in
//! [`crate::bounds`].

use nalgebra::{DMatrix, SymmetricEigen};

use crate::entropy::g_entropy;
use crate::error::{check_nonneg, check_unit, Error, Result};

const SYMMETRY_TOL: f64 = 1e-12;
const PHYSICALITY_TOL: f64 = 1e-9;

/// Mode index of the channel input (later Bob's output) in the squashing pipeline.
pub const MODE_B: usize = 0;
/// Mode index of Eve's retained share after squashing.
pub const MODE_E: usize = 1;
/// Mode index of the squashing channel's environment.
pub const MODE_F: usize = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    x: DMatrix<f64>,
    p: DMatrix<f64>,
}

impl CovarianceMatrix {
    /// Builds a state from its quadrature blocks, checking shape, symmetry
    /// and that every symplectic eigenvalue is at least 1.
    pub fn new(x: DMatrix<f64>, p: DMatrix<f64>) -> Result<Self> {
        let n = x.nrows();
        if n == 0 || !x.is_square() || p.shape() != x.shape() {
            return Err(Error::Physicality(format!(
                "blocks must be equal-sized square matrices, got {:?} and {:?}",
                x.shape(),
                p.shape()
            )));
        }
        for (name, m) in [("x", &x), ("p", &p)] {
            if m.iter().any(|v| !v.is_finite()) {
                return Err(Error::Physicality(format!(
                    "{name} block has non-finite entries"
                )));
            }
            let asym = (m - m.transpose()).amax();
            if asym > SYMMETRY_TOL * m.amax().max(1.0) {
                return Err(Error::Physicality(format!(
                    "{name} block is not symmetric (max deviation {asym:e})"
                )));
            }
        }
        let cov = Self { x, p };
        cov.symplectic_eigenvalues()?;
        Ok(cov)
    }

    /// The n-mode vacuum.
    pub fn vacuum(modes: usize) -> Self {
        Self {
            x: DMatrix::identity(modes, modes),
            p: DMatrix::identity(modes, modes),
        }
    }

    pub fn modes(&self) -> usize {
        self.x.nrows()
    }

    pub fn x_block(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn p_block(&self) -> &DMatrix<f64> {
        &self.p
    }

    /// Symplectic spectrum, sorted descending: the square roots of the
    /// eigenvalues of `x·p`, obtained from the symmetric matrix
    /// `x^{1/2} p x^{1/2}`.
    pub fn symplectic_eigenvalues(&self) -> Result<Vec<f64>> {
        let ex = SymmetricEigen::new(self.x.clone());
        if ex.eigenvalues.iter().any(|&l| l <= 0.0) {
            return Err(Error::Physicality(
                "x block is not positive definite".to_string(),
            ));
        }
        let sqrt_diag = DMatrix::from_diagonal(&ex.eigenvalues.map(f64::sqrt));
        let x_half = &ex.eigenvectors * sqrt_diag * ex.eigenvectors.transpose();
        let mut m = &x_half * &self.p * &x_half;
        m = (&m + m.transpose()) * 0.5;

        let mut nu: Vec<f64> = SymmetricEigen::new(m)
            .eigenvalues
            .iter()
            .map(|&l| l.max(0.0).sqrt())
            .collect();
        nu.sort_by(|a, b| b.total_cmp(a));
        if let Some(&min) = nu.last() {
            if min < 1.0 - PHYSICALITY_TOL {
                return Err(Error::Physicality(format!(
                    "symplectic eigenvalue {min} < 1"
                )));
            }
        }
        Ok(nu)
    }

    /// Von Neumann entropy in bits, `sum_k g((nu_k - 1) / 2)`.
    pub fn von_neumann_entropy(&self) -> Result<f64> {
        self.symplectic_eigenvalues()?
            .into_iter()
            .map(|nu| g_entropy(((nu - 1.0) / 2.0).max(0.0)))
            .sum()
    }

    /// Block-diagonal extension by `k` vacuum modes.
    pub fn append_vacuum(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Modes("must append at least one mode".to_string()));
        }
        let n = self.modes();
        let extend = |m: &DMatrix<f64>| {
            let mut out = DMatrix::identity(n + k, n + k);
            out.view_mut((0, 0), (n, n)).copy_from(m);
            out
        };
        Ok(Self {
            x: extend(&self.x),
            p: extend(&self.p),
        })
    }

    /// Mixes modes `i` and `j` on a beamsplitter of transmittance `tau`:
    /// `gamma -> S gamma S^T` in both quadratures, with
    /// `S = [[sqrt(tau), sqrt(1-tau)], [-sqrt(1-tau), sqrt(tau)]]` on `(i, j)`.
    pub fn beamsplitter(&self, i: usize, j: usize, tau: f64) -> Result<Self> {
        let n = self.modes();
        if i >= n || j >= n || i == j {
            return Err(Error::Modes(format!(
                "beamsplitter needs two distinct modes below {n}, got ({i}, {j})"
            )));
        }
        check_unit("tau", tau)?;
        let (t, r) = (tau.sqrt(), (1.0 - tau).sqrt());
        let mut s = DMatrix::identity(n, n);
        s[(i, i)] = t;
        s[(i, j)] = r;
        s[(j, i)] = -r;
        s[(j, j)] = t;
        let congruence = |m: &DMatrix<f64>| {
            let out = &s * m * s.transpose();
            (&out + out.transpose()) * 0.5
        };
        Ok(Self {
            x: congruence(&self.x),
            p: congruence(&self.p),
        })
    }

    /// Reduced state on the modes in `keep`, in the given order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        let n = self.modes();
        if keep.is_empty() {
            return Err(Error::Modes("keep set is empty".to_string()));
        }
        for (pos, &k) in keep.iter().enumerate() {
            if k >= n || keep[..pos].contains(&k) {
                return Err(Error::Modes(format!(
                    "keep set {keep:?} is invalid for {n} modes"
                )));
            }
        }
        let sub = |m: &DMatrix<f64>| {
            DMatrix::from_fn(keep.len(), keep.len(), |a, b| m[(keep[a], keep[b])])
        };
        Ok(Self {
            x: sub(&self.x),
            p: sub(&self.p),
        })
    }
}

/// Single-mode thermal state with mean photon number `n`.
pub fn thermal_state(n: f64) -> Result<CovarianceMatrix> {
    check_nonneg("N", n)?;
    let block = DMatrix::from_element(1, 1, 1.0 + 2.0 * n);
    Ok(CovarianceMatrix {
        x: block.clone(),
        p: block,
    })
}

/// Three-mode state (B, E', F) produced by sending one share of a
/// two-mode squeezed vacuum with mean photon number `n_s` through a
/// pure-loss channel of transmittance `eta`, then squashing Eve's share
/// through a second pure-loss channel of transmittance `eta1`.
pub fn squashed_loss_state(eta: f64, n_s: f64, eta1: f64) -> Result<CovarianceMatrix> {
    check_unit("eta", eta)?;
    check_unit("eta1", eta1)?;
    thermal_state(n_s)?
        .append_vacuum(2)?
        .beamsplitter(MODE_B, MODE_E, eta)?
        .beamsplitter(MODE_E, MODE_F, eta1)
}

/// Marginal entropies of the squashing pipeline, in bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquashEntropies {
    pub e: f64,
    pub f: f64,
    pub be: f64,
    pub bf: f64,
}

impl SquashEntropies {
    /// `½[H(BE') - H(E') + H(BF) - H(F)]`.
    pub fn half_conditional_sum(&self) -> f64 {
        0.5 * (self.be - self.e + self.bf - self.f)
    }
}

pub fn squash_entropies(eta: f64, n_s: f64, eta1: f64) -> Result<SquashEntropies> {
    let state = squashed_loss_state(eta, n_s, eta1)?;
    let h = |keep: &[usize]| state.partial_trace(keep)?.von_neumann_entropy();
    Ok(SquashEntropies {
        e: h(&[MODE_E])?,
        f: h(&[MODE_F])?,
        be: h(&[MODE_B, MODE_E])?,
        bf: h(&[MODE_B, MODE_F])?,
    })
}

/// The squashed-entanglement upper bound at squash transmittance `eta1`,
/// evaluated through covariance matrices rather than the closed form.
pub fn squash_bound_via_covariance(eta: f64, n_s: f64, eta1: f64) -> Result<f64> {
    Ok(squash_entropies(eta, n_s, eta1)?.half_conditional_sum())
}
