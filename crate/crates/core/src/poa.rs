//! Price-of-anarchy analysis: how much revenue decentralized pricing loses.
//!
//! For a fixed market the ratio of equilibrium to optimal revenue depends on
//! the intercept vector `a` only through a Rayleigh quotient: with
//! `H = -B`, `G` the positive definite negation of the doubled-diagonal
//! matrix, and `Y = H^{1/2} G^{-1} H^{1/2}`, the ratio equals
//! `x^T M x / x^T x` for `M = 4 Y (I - Y)` and a change of variables in
//! `a`. The worst and best ratios over all nonzero intercepts are therefore
//! the extreme eigenvalues of `M`.
//!
//! Two scalar summaries bound and pin down the worst case:
//!
//! - the row-sum dominance parameter `mu` gives the universal bound
//!   `lambda_min(M) >= 4(1-mu)/(2-mu)^2`, tight for the uniform symmetric
//!   market;
//! - the spectrum of the normalized interaction matrix (cross effects
//!   scaled by the geometric mean of the own effects) gives the exact
//!   value: each eigenvalue `lambda` of that matrix contributes the ratio
//!   `4(1-lambda)/(2-lambda)^2`, and the worst intercept is the
//!   corresponding eigenvector pushed back through `D^{1/2}`.
//!
//! The exact minimum is taken over the actual eigenvalues rather than by
//! evaluating the formula at the largest absolute eigenvalue, so it is
//! correct in mixed-sign markets where the dominant eigenvalue may be
//! negative; the two agree whenever the dominant eigenvalue is positive
//! (all-substitute markets, stars, the uniform model).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::demand::DemandSystem;
use crate::equilibrium::{centralized_optimum, nash_equilibrium, nash_matrix};
use crate::error::{Error, Result};
use crate::linalg::{eig_sym, spd_inverse, spd_sqrt};

/// Absolute tolerance for the spectral identities on unit-scaled systems.
pub const POA_TOL: f64 = 1e-9;

/// The matrix cast of one market's efficiency analysis.
///
/// All members are symmetric; `h`, `g`, `l_tilde`, `k_tilde`, `y`, and `m`
/// are positive definite, `k` is negative definite. Assembled eagerly;
/// problem sizes are small.
#[derive(Debug, Clone, PartialEq)]
pub struct PoaMatrices {
    /// `-B`.
    pub h: DMatrix<f64>,
    /// Negation of the doubled-diagonal equilibrium matrix.
    pub g: DMatrix<f64>,
    /// Equilibrium-revenue matrix: `R(p_ne) = -a^T K a / 4`.
    pub k: DMatrix<f64>,
    /// `-B^{-1} = H^{-1}`.
    pub l_tilde: DMatrix<f64>,
    /// `-K = 4 (G^{-1} - G^{-1} H G^{-1})`.
    pub k_tilde: DMatrix<f64>,
    /// `H^{1/2} G^{-1} H^{1/2}`; eigenvalues in (0, 1).
    pub y: DMatrix<f64>,
    /// `H^{1/2} K_tilde H^{1/2} = 4 Y (I - Y)`; eigenvalues in (0, 1].
    pub m: DMatrix<f64>,
    g_inv: DMatrix<f64>,
}

/// Normalized interaction matrix and its spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionSpectrum {
    /// Zero diagonal, off-diagonal `b_ij / sqrt(d_i d_j)`.
    pub m_norm: DMatrix<f64>,
    /// Largest absolute eigenvalue; in `[0, max_i mu_i]`.
    pub mu_spectral: f64,
    /// Full spectrum, ascending.
    pub lambda: Vec<f64>,
}

/// Everything the analysis produces for one market.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoaReport {
    /// Ratio at this market's own intercept; absent when the intercept is
    /// zero.
    pub poa_of_a: Option<f64>,
    /// Worst ratio over all nonzero intercepts (`lambda_min(M)`).
    pub poa_min: f64,
    /// Best ratio over all nonzero intercepts (`lambda_max(M)`).
    pub poa_max: f64,
    /// Row-sum dominance parameter.
    pub mu: f64,
    /// Universal bound `4(1-mu)/(2-mu)^2`.
    pub mu_bound: f64,
    /// Largest absolute eigenvalue of the normalized interaction matrix.
    pub mu_spectral: f64,
    /// Exact worst ratio from the interaction spectrum; equals `poa_min`.
    pub exact_poa_min: f64,
    /// Intercept direction attaining `exact_poa_min`.
    pub worst_intercept: Vec<f64>,
    /// Spectrum of the normalized interaction matrix, ascending.
    pub lambda_norm: Vec<f64>,
    /// `(2-mu)/(1-mu)`.
    pub alpha_mu: f64,
    /// `(2+mu)/(1+mu)`.
    pub beta_mu: f64,
}

fn symmetrized(m: DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let mut s = m;
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (s[(i, j)] + s[(j, i)]);
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    s
}

/// Ratio contributed by one eigenvalue of the normalized interaction
/// matrix: `4 (1 - lambda) / (2 - lambda)^2`.
pub fn poa_at_eigenvalue(lambda: f64) -> f64 {
    4.0 * (1.0 - lambda) / ((2.0 - lambda) * (2.0 - lambda))
}

/// Universal worst-case bound `4(1-mu)/(2-mu)^2` for dominance parameter
/// `mu` in `[0, 1)`. Equals 1 at `mu = 0` and decreases strictly.
pub fn mu_bound(mu: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&mu) {
        return Err(Error::MuOutOfRange { mu });
    }
    Ok(poa_at_eigenvalue(mu))
}

/// `alpha(mu) = (2-mu)/(1-mu)`, the upper comparison constant.
pub fn alpha(mu: f64) -> f64 {
    (2.0 - mu) / (1.0 - mu)
}

/// `beta(mu) = (2+mu)/(1+mu)`, the lower comparison constant.
pub fn beta(mu: f64) -> f64 {
    (2.0 + mu) / (1.0 + mu)
}

/// Assemble the full matrix cast for one market.
pub fn poa_matrices(s: &DemandSystem) -> Result<PoaMatrices> {
    let h = -s.sensitivity();
    let g = -nash_matrix(s);
    let g_inv = spd_inverse(&g)?;
    let l_tilde = spd_inverse(&h)?;
    let k_tilde = symmetrized(4.0 * (&g_inv - &g_inv * &h * &g_inv));
    let k = -&k_tilde;
    let h_sqrt = spd_sqrt(&h)?;
    let y = symmetrized(&h_sqrt * &g_inv * &h_sqrt);
    let m = symmetrized(&h_sqrt * &k_tilde * &h_sqrt);
    Ok(PoaMatrices {
        h,
        g,
        k,
        l_tilde,
        k_tilde,
        y,
        m,
        g_inv,
    })
}

impl PoaMatrices {
    /// Cached inverse of `g`, shared by the assembly and the comparison
    /// check.
    pub fn g_inv(&self) -> &DMatrix<f64> {
        &self.g_inv
    }

    /// Ratio of the two revenue quadratic forms at intercept `a`:
    /// `a^T K_tilde a / a^T L_tilde a`. This is the spectral route to the
    /// same number [`poa_of_intercept`] obtains from the two revenues.
    pub fn intercept_ratio(&self, a: &DVector<f64>) -> Result<f64> {
        if a.len() != self.h.nrows() {
            return Err(Error::DimensionMismatch {
                what: "intercept length",
                expected: self.h.nrows(),
                actual: a.len(),
            });
        }
        if a.iter().all(|v| *v == 0.0) {
            return Err(Error::ZeroIntercept);
        }
        let num = (a.transpose() * &self.k_tilde * a)[(0, 0)];
        let den = (a.transpose() * &self.l_tilde * a)[(0, 0)];
        Ok(num / den)
    }
}

/// Equilibrium revenue as a fraction of the optimal revenue at this
/// market's own intercept. Lies in (0, 1]; rejects a zero intercept.
pub fn poa_of_intercept(s: &DemandSystem) -> Result<f64> {
    if s.intercept().iter().all(|v| *v == 0.0) {
        return Err(Error::ZeroIntercept);
    }
    let (_, r_star) = centralized_optimum(s);
    let (_, r_ne) = nash_equilibrium(s);
    Ok(r_ne / r_star)
}

/// Worst and best ratios over all nonzero intercepts: the extreme
/// eigenvalues of `m`.
pub fn poa_extremes(pm: &PoaMatrices) -> (f64, f64) {
    let eig = eig_sym(&pm.m).expect("m is symmetric by construction");
    (eig.min_eigenvalue(), eig.max_eigenvalue())
}

fn interaction_matrix(s: &DemandSystem) -> DMatrix<f64> {
    let n = s.n();
    let b = s.sensitivity();
    let d: Vec<f64> = (0..n).map(|i| -b[(i, i)]).collect();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            b[(i, j)] / (d[i] * d[j]).sqrt()
        }
    })
}

/// Normalized interaction matrix, its spectrum, and the spectral
/// interaction parameter.
pub fn normalized_interaction(s: &DemandSystem) -> InteractionSpectrum {
    let m_norm = interaction_matrix(s);
    let eig = eig_sym(&m_norm).expect("normalized interaction matrix is symmetric");
    let lambda: Vec<f64> = eig.eigenvalues().iter().copied().collect();
    let mu_spectral = lambda[0].abs().max(lambda[lambda.len() - 1].abs());
    InteractionSpectrum {
        m_norm,
        mu_spectral,
        lambda,
    }
}

/// Exact worst-case ratio and an intercept attaining it.
///
/// Minimizes `4(1-lambda)/(2-lambda)^2` over the eigenvalues of the
/// normalized interaction matrix; the worst intercept is `D^{1/2} v` for
/// the minimizing eigenvector `v` (deterministic up to the kernel's sign
/// convention; any vector in a repeated eigenspace attains the same ratio).
pub fn exact_poa_min(s: &DemandSystem) -> (f64, Vec<f64>) {
    let n = s.n();
    let b = s.sensitivity();
    let eig = eig_sym(&interaction_matrix(s)).expect("normalized interaction matrix is symmetric");

    let mut best_k = 0;
    let mut best_value = f64::INFINITY;
    for (k, &lambda) in eig.eigenvalues().iter().enumerate() {
        let value = poa_at_eigenvalue(lambda);
        if value < best_value {
            best_value = value;
            best_k = k;
        }
    }
    let v = eig.eigenvector(best_k);
    let worst: Vec<f64> = (0..n).map(|i| (-b[(i, i)]).sqrt() * v[i]).collect();
    (best_value, worst)
}

/// Verify the two-sided comparison `beta(mu) G^{-1} <= H^{-1} <=
/// alpha(mu) G^{-1}` in the Loewner order, within [`POA_TOL`]. Holds for
/// every valid system; exposed as a test hook rather than a runtime gate.
pub fn loewner_comparison_check(pm: &PoaMatrices, mu: f64) -> bool {
    let upper = alpha(mu) * pm.g_inv() - &pm.l_tilde;
    let lower = &pm.l_tilde - beta(mu) * pm.g_inv();
    let min_upper = eig_sym(&upper).map(|e| e.min_eigenvalue());
    let min_lower = eig_sym(&lower).map(|e| e.min_eigenvalue());
    match (min_upper, min_lower) {
        (Ok(u), Ok(l)) => u >= -POA_TOL && l >= -POA_TOL,
        _ => false,
    }
}

/// Run the full analysis for one market.
pub fn poa_report(s: &DemandSystem) -> Result<PoaReport> {
    let profile = s.dominance_profile();
    let pm = poa_matrices(s)?;
    let (poa_min, poa_max) = poa_extremes(&pm);
    let spectrum = normalized_interaction(s);
    let (exact, worst_intercept) = exact_poa_min(s);
    let poa_of_a = if s.intercept().iter().all(|v| *v == 0.0) {
        None
    } else {
        Some(poa_of_intercept(s)?)
    };
    Ok(PoaReport {
        poa_of_a,
        poa_min,
        poa_max,
        mu: profile.mu,
        mu_bound: mu_bound(profile.mu)?,
        mu_spectral: spectrum.mu_spectral,
        exact_poa_min: exact,
        worst_intercept,
        lambda_norm: spectrum.lambda,
        alpha_mu: alpha(profile.mu),
        beta_mu: beta(profile.mu),
    })
}
