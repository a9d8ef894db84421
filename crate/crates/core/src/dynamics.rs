//! Decentralized learning dynamics and their convergence to the equilibrium.
//!
//! Two dynamics whose convergence follows directly from the demand
//! assumptions, with no external machinery:
//!
//! - **Simultaneous best response**: every product replaces its price by its
//!   best response to the previous round. The update matrix has entries
//!   `|b_ij| / (2 |b_ii|)` off the diagonal, so its absolute row sums are at
//!   most `mu / 2 < 1/2`: a max-norm contraction with a unique fixed point
//!   at the equilibrium.
//! - **Gradient play**: every product ascends its own revenue gradient with
//!   a common step `eta`. The iteration matrix is `I + eta * A` for the
//!   doubled-diagonal matrix `A`; any `eta` below [`eta_max`] keeps its
//!   spectral radius under 1 (Gershgorin on `A`), giving linear convergence
//!   to the same fixed point.
//!
//! Records keep every iterate up to 1000 steps; longer runs are thinned
//! geometrically (first and last always kept) with the surviving step
//! numbers in `step_index`.

use nalgebra::DVector;

use crate::demand::DemandSystem;
use crate::equilibrium::{nash_equilibrium, total_revenue, PriceVector};
use crate::error::{Error, Result};

/// Default termination threshold on the max-norm step size.
pub const DEFAULT_EPS: f64 = 1e-10;

/// Default iteration cap.
pub const DEFAULT_MAX_ITERS: usize = 10_000;

/// Stored iterates above which trajectories are thinned.
const THIN_ABOVE: usize = 1000;

/// One simulated price trajectory.
///
/// `iterates[k]` was produced at global step `step_index[k]`; the two agree
/// (`step_index[k] == k`) whenever `steps <= 1000`. `dist_to_ne` is the
/// max-norm distance to the closed-form equilibrium and `revenues` the
/// total revenue, both per stored iterate. `converged` means the run ended
/// because the last step moved less than `eps` in max norm, not because the
/// iteration cap was hit; `steps` counts updates actually performed.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub iterates: Vec<PriceVector>,
    pub step_index: Vec<usize>,
    pub dist_to_ne: Vec<f64>,
    pub revenues: Vec<f64>,
    pub converged: bool,
    pub steps: usize,
}

/// Largest gradient-play step size accepted: `1 / (2 max_i |b_ii| (1 + mu))`.
///
/// Conservative by Gershgorin: every eigenvalue of the doubled-diagonal
/// matrix has magnitude at most `(2 + mu) max_i |b_ii|`, so steps below
/// this bound keep the iteration matrix's spectral radius under 1.
pub fn eta_max(s: &DemandSystem) -> f64 {
    let profile = s.dominance_profile();
    let d_max = profile.d.iter().copied().fold(0.0, f64::max);
    1.0 / (2.0 * d_max * (1.0 + profile.mu))
}

fn finish(
    s: &DemandSystem,
    raw: Vec<DVector<f64>>,
    steps: usize,
    converged: bool,
) -> TrajectoryRecord {
    let (p_ne, _) = nash_equilibrium(s);
    let keep: Vec<usize> = if steps <= THIN_ABOVE {
        (0..raw.len()).collect()
    } else {
        // Geometric thinning toward ~THIN_ABOVE points, endpoints pinned.
        let ratio = (steps as f64).powf(1.0 / (THIN_ABOVE as f64 - 1.0));
        let mut keep = vec![0usize];
        let mut x = 1.0f64;
        loop {
            x *= ratio;
            let idx = x.round() as usize;
            if idx >= steps {
                break;
            }
            if idx > *keep.last().unwrap() {
                keep.push(idx);
            }
        }
        keep.push(steps);
        keep
    };

    let mut iterates = Vec::with_capacity(keep.len());
    let mut dist_to_ne = Vec::with_capacity(keep.len());
    let mut revenues = Vec::with_capacity(keep.len());
    for &k in &keep {
        let p = PriceVector::from_dvector(raw[k].clone()).expect("iterates stay finite");
        dist_to_ne.push(p.max_distance(&p_ne));
        revenues.push(total_revenue(s, &p).expect("dimensions match"));
        iterates.push(p);
    }
    TrajectoryRecord {
        iterates,
        step_index: keep,
        dist_to_ne,
        revenues,
        converged,
        steps,
    }
}

/// Iterate simultaneous best responses from `p0` until the max-norm step
/// drops below `eps` or `max_iters` updates have run.
///
/// When the run terminates on `eps`, the final iterate is within
/// `eps / (1 - mu/2)` of the equilibrium by the contraction bound.
pub fn best_response_dynamics(
    s: &DemandSystem,
    p0: &PriceVector,
    max_iters: usize,
    eps: f64,
) -> Result<TrajectoryRecord> {
    if p0.len() != s.n() {
        return Err(Error::DimensionMismatch {
            what: "initial price length",
            expected: s.n(),
            actual: p0.len(),
        });
    }
    assert!(eps > 0.0, "eps must be positive");
    let n = s.n();
    let b = s.sensitivity();
    let a = s.intercept();

    let mut raw = vec![p0.as_dvector().clone()];
    let mut converged = false;
    let mut steps = 0;
    while steps < max_iters {
        let current = raw.last().unwrap();
        let mut next = DVector::zeros(n);
        for i in 0..n {
            let cross: f64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| b[(i, j)] * current[j])
                .sum();
            next[i] = (-a[i] - cross) / (2.0 * b[(i, i)]);
        }
        let step_size = (&next - current).amax();
        raw.push(next);
        steps += 1;
        if step_size <= eps {
            converged = true;
            break;
        }
    }
    Ok(finish(s, raw, steps, converged))
}

/// Let every product ascend its own revenue gradient with step `eta` from
/// `p0`, until the max-norm step drops below `eps` or `max_iters` updates
/// have run. Rejects steps outside `(0, eta_max]`.
pub fn gradient_play(
    s: &DemandSystem,
    p0: &PriceVector,
    eta: f64,
    max_iters: usize,
    eps: f64,
) -> Result<TrajectoryRecord> {
    if p0.len() != s.n() {
        return Err(Error::DimensionMismatch {
            what: "initial price length",
            expected: s.n(),
            actual: p0.len(),
        });
    }
    assert!(eps > 0.0, "eps must be positive");
    let limit = eta_max(s);
    if !(eta > 0.0 && eta <= limit) {
        return Err(Error::StepSizeTooLarge {
            eta,
            eta_max: limit,
        });
    }
    let a = s.intercept();
    let nash = crate::equilibrium::nash_matrix(s);

    let mut raw = vec![p0.as_dvector().clone()];
    let mut converged = false;
    let mut steps = 0;
    while steps < max_iters {
        let current = raw.last().unwrap();
        // Per-product payoff gradient is (a + A p)_i.
        let next = current + eta * (a + &nash * current);
        let step_size = (&next - current).amax();
        raw.push(next);
        steps += 1;
        if step_size <= eps {
            converged = true;
            break;
        }
    }
    Ok(finish(s, raw, steps, converged))
}
