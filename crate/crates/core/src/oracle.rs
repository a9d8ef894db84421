//! Brute-force verification oracles.
//!
//! Every closed form in this crate has an independent check that shares no
//! code with it:
//!
//! - the centralized optimum is re-derived by line-searched gradient ascent
//!   on the revenue function from the zero price vector;
//! - the equilibrium is re-derived as the limit of best-response iteration
//!   and then stress-tested with random unilateral deviations;
//! - the worst-case efficiency ratio is approached by random intercept
//!   sampling of the revenue quadratic-form ratio plus projected descent,
//!   which can never undercut the eigenvalue it is checking.
//!
//! The oracles call the closed forms only at the very end, to measure the
//! discrepancy they report.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::demand::DemandSystem;
use crate::dynamics::best_response_dynamics;
use crate::equilibrium::{centralized_optimum, nash_equilibrium, player_payoff, PriceVector};
use crate::poa::{poa_extremes, poa_matrices};

/// Which closed form an oracle run validated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleQuantity {
    CentralizedRevenue,
    NashPrices,
    PoaMinSampled,
}

/// Value produced by the independent route.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OracleValue {
    Scalar(f64),
    Vector(Vec<f64>),
}

/// Outcome of one oracle run. `passed` holds exactly when `discrepancy`
/// is within `tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub quantity: OracleQuantity,
    pub value: OracleValue,
    pub discrepancy: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Relative tolerance for the ascent oracle.
pub const CENTRALIZED_TOL: f64 = 1e-6;

/// Max-norm tolerance between the fixed-point limit and the closed form.
pub const NASH_TOL: f64 = 1e-8;

/// Payoff slack allowed to random unilateral deviations.
pub const DEVIATION_SLACK: f64 = 1e-9;

/// Two-sided tolerance for the sampled worst-ratio sandwich.
pub const POA_MIN_TOL: f64 = 1e-9;

const ARMIJO: f64 = 1e-4;

/// Re-derive the optimal revenue by gradient ascent with a backtracking
/// (halving) line search from `p = 0`, running at most `iters` ascent
/// steps. Reports `|value - R*| / max(1, R*)` against the closed form.
pub fn oracle_centralized(s: &DemandSystem, iters: usize) -> OracleResult {
    let a = s.intercept();
    let b = s.sensitivity();
    let revenue = |p: &DVector<f64>| a.dot(p) + (p.transpose() * b * p)[(0, 0)];

    let mut p = DVector::zeros(s.n());
    let mut r = 0.0;
    for _ in 0..iters {
        let grad = a + 2.0 * b * &p;
        if grad.amax() <= 1e-14 * (1.0 + a.amax()) {
            break;
        }
        let slope = grad.norm_squared();
        let mut t = 1.0;
        loop {
            let candidate = &p + t * &grad;
            let r_candidate = revenue(&candidate);
            if r_candidate >= r + ARMIJO * t * slope {
                p = candidate;
                r = r_candidate;
                break;
            }
            t *= 0.5;
            if t < 1e-18 {
                break;
            }
        }
    }

    let (_, r_star) = centralized_optimum(s);
    let discrepancy = (r - r_star).abs() / r_star.abs().max(1.0);
    OracleResult {
        quantity: OracleQuantity::CentralizedRevenue,
        value: OracleValue::Scalar(r),
        discrepancy,
        tolerance: CENTRALIZED_TOL,
        passed: discrepancy <= CENTRALIZED_TOL,
    }
}

/// Re-derive the equilibrium as a best-response fixed point, then confirm
/// with 1000 random unilateral deviations per product that none improves
/// its own payoff by more than [`DEVIATION_SLACK`]. The reported
/// discrepancy is the max-norm gap to the closed form.
pub fn oracle_nash(s: &DemandSystem) -> OracleResult {
    let n = s.n();
    let record = best_response_dynamics(s, &PriceVector::zeros(n), 100_000, 1e-12)
        .expect("dimensions match");
    let limit = record.iterates.last().unwrap().clone();

    let mut rng = ChaCha20Rng::seed_from_u64(0x0bac1e);
    let mut no_profitable_deviation = true;
    for i in 0..n {
        let u_star = player_payoff(s, &limit, i).expect("valid index");
        let width = 1.0 + limit[i].abs();
        for _ in 0..1000 {
            let mut deviated = limit.to_vec();
            deviated[i] = limit[i] + rng.random_range(-width..width);
            let deviated = PriceVector::new(deviated).expect("finite prices");
            let u = player_payoff(s, &deviated, i).expect("valid index");
            if u > u_star + DEVIATION_SLACK {
                no_profitable_deviation = false;
            }
        }
    }

    let (p_ne, _) = nash_equilibrium(s);
    let discrepancy = limit.max_distance(&p_ne);
    OracleResult {
        quantity: OracleQuantity::NashPrices,
        value: OracleValue::Vector(limit.to_vec()),
        discrepancy,
        tolerance: NASH_TOL,
        passed: record.converged && no_profitable_deviation && discrepancy <= NASH_TOL,
    }
}

/// Approach the worst efficiency ratio from above: sample the revenue
/// quadratic-form ratio at `samples` random unit intercepts plus the
/// analytic worst-intercept candidate, then run 50 steps of projected
/// gradient descent on that generalized Rayleigh quotient from the best
/// sample. The result is reported as `sampled_min - lambda_min`, which
/// must be nonnegative (up to [`POA_MIN_TOL`]) by the Rayleigh bound and
/// nonpositive because the candidate attains the minimum.
pub fn oracle_poa_min(s: &DemandSystem, samples: usize, seed: u64) -> OracleResult {
    let n = s.n();
    let pm = poa_matrices(s).expect("validated system is within dominance margins");
    let ratio_of = |a: &DVector<f64>| pm.intercept_ratio(a).expect("nonzero unit intercept");

    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut best_a = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut best_ratio = ratio_of(&best_a);
    for _ in 0..samples {
        let mut a = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
        let norm = a.norm();
        if norm == 0.0 {
            continue;
        }
        a /= norm;
        let ratio = ratio_of(&a);
        if ratio < best_ratio {
            best_ratio = ratio;
            best_a = a;
        }
    }

    let (_, worst) = crate::poa::exact_poa_min(s);
    let mut candidate = DVector::from_vec(worst);
    let norm = candidate.norm();
    if norm > 0.0 {
        candidate /= norm;
        let ratio = ratio_of(&candidate);
        if ratio < best_ratio {
            best_ratio = ratio;
            best_a = candidate;
        }
    }

    // Projected descent on q(a) = (a^T Kt a) / (a^T Lt a) over the unit
    // sphere; the gradient is 2 (Kt a - q Lt a) / (a^T Lt a).
    let mut a = best_a;
    for _ in 0..50 {
        let q = ratio_of(&a);
        let denominator = (a.transpose() * &pm.l_tilde * &a)[(0, 0)];
        let grad = 2.0 / denominator * (&pm.k_tilde * &a - q * (&pm.l_tilde * &a));
        let mut t = 1.0;
        loop {
            let mut stepped = &a - t * &grad;
            let norm = stepped.norm();
            if norm > 0.0 {
                stepped /= norm;
                let q_stepped = ratio_of(&stepped);
                if q_stepped < q {
                    a = stepped;
                    break;
                }
            }
            t *= 0.5;
            if t < 1e-16 {
                break;
            }
        }
    }
    best_ratio = best_ratio.min(ratio_of(&a));

    let (lambda_min, _) = poa_extremes(&pm);
    let discrepancy = best_ratio - lambda_min;
    OracleResult {
        quantity: OracleQuantity::PoaMinSampled,
        value: OracleValue::Scalar(best_ratio),
        discrepancy,
        tolerance: POA_MIN_TOL,
        passed: discrepancy.abs() <= POA_MIN_TOL,
    }
}
