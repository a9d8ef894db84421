//! Centralized optimum and decentralized Nash equilibrium in closed form.
//!
//! Total revenue at price vector `p` is the strongly concave quadratic
//! `R(p) = a^T p + p^T B p`. A central planner maximizes it at
//! `p* = -B^{-1} a / 2`. When each product sets its own price to maximize
//! its own revenue `p_i (a + B p)_i`, the simultaneous first-order
//! conditions form a linear system in the matrix obtained from `B` by
//! doubling its diagonal; that matrix is negative definite under the demand
//! assumptions, so the game has exactly one equilibrium.
//!
//! Both solves go through Cholesky on the positive definite negations; no
//! inverse is ever formed here. Returned revenues are recomputed from
//! `R(p)` directly rather than from the quadratic-form shortcuts, which are
//! asserted as test invariants instead.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::demand::DemandSystem;
use crate::error::{Error, Result};
use crate::linalg::solve_spd;

/// A vector of prices, one per product. Entries are finite by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceVector(DVector<f64>);

impl PriceVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinitePrice { index, value });
            }
        }
        Ok(Self(DVector::from_vec(values)))
    }

    pub fn from_dvector(values: DVector<f64>) -> Result<Self> {
        Self::new(values.iter().copied().collect())
    }

    pub fn zeros(n: usize) -> Self {
        Self(DVector::zeros(n))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.len() == 0
    }

    pub fn as_dvector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.0.iter().copied().collect()
    }

    /// Largest absolute coordinate difference to another price vector.
    pub fn max_distance(&self, other: &PriceVector) -> f64 {
        (&self.0 - &other.0).amax()
    }
}

impl std::ops::Index<usize> for PriceVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Serialize for PriceVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.as_slice().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PriceVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let values = Vec::<f64>::deserialize(deserializer)?;
        PriceVector::new(values).map_err(serde::de::Error::custom)
    }
}

/// Centralized optimum and Nash equilibrium side by side, with revenues.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumPair {
    pub p_star: PriceVector,
    pub p_ne: PriceVector,
    pub r_star: f64,
    pub r_ne: f64,
}

/// Total revenue `a^T p + p^T B p`.
pub fn total_revenue(s: &DemandSystem, p: &PriceVector) -> Result<f64> {
    if p.len() != s.n() {
        return Err(Error::DimensionMismatch {
            what: "price vector length",
            expected: s.n(),
            actual: p.len(),
        });
    }
    let p = p.as_dvector();
    Ok(s.intercept().dot(p) + (p.transpose() * s.sensitivity() * p)[(0, 0)])
}

/// Revenue of product `i` alone: `p_i * (a + B p)_i`.
pub fn player_payoff(s: &DemandSystem, p: &PriceVector, i: usize) -> Result<f64> {
    if i >= s.n() {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: s.n(),
        });
    }
    let demand = s.expected_demand(p.as_dvector())?;
    Ok(p[i] * demand[i])
}

/// Unique revenue-maximizing price for product `i` when the other products
/// charge `others` (length N-1, product i's slot removed).
pub fn best_response(s: &DemandSystem, others: &[f64], i: usize) -> Result<f64> {
    let n = s.n();
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, len: n });
    }
    if others.len() != n - 1 {
        return Err(Error::DimensionMismatch {
            what: "opponent price count",
            expected: n - 1,
            actual: others.len(),
        });
    }
    let b = s.sensitivity();
    let mut cross = 0.0;
    for (slot, &p_j) in others.iter().enumerate() {
        let j = if slot < i { slot } else { slot + 1 };
        cross += b[(i, j)] * p_j;
    }
    Ok((-s.intercept()[i] - cross) / (2.0 * b[(i, i)]))
}

/// Best response of product `i` against a full price profile (its own entry
/// is ignored). Convenience form used by the learning dynamics.
pub fn best_response_against(s: &DemandSystem, p: &PriceVector, i: usize) -> Result<f64> {
    let n = s.n();
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, len: n });
    }
    if p.len() != n {
        return Err(Error::DimensionMismatch {
            what: "price vector length",
            expected: n,
            actual: p.len(),
        });
    }
    let b = s.sensitivity();
    let cross: f64 = (0..n).filter(|&j| j != i).map(|j| b[(i, j)] * p[j]).sum();
    Ok((-s.intercept()[i] - cross) / (2.0 * b[(i, i)]))
}

/// The matrix whose linear system characterizes the equilibrium: `B` with
/// its diagonal doubled. Symmetric negative definite for any valid system.
pub fn nash_matrix(s: &DemandSystem) -> DMatrix<f64> {
    let mut m = s.sensitivity().clone();
    for i in 0..s.n() {
        m[(i, i)] *= 2.0;
    }
    m
}

/// Jointly revenue-maximizing prices and the revenue they earn.
///
/// Solves `-2B p = a` through the positive definite matrix `-B`.
pub fn centralized_optimum(s: &DemandSystem) -> (PriceVector, f64) {
    let h = -s.sensitivity();
    let rhs = s.intercept() * 0.5;
    let p = solve_spd(&h, &rhs)
        .expect("-B is positive definite for a validated demand system");
    let p = PriceVector::from_dvector(p).expect("finite solve result");
    let revenue = total_revenue(s, &p).expect("dimensions match");
    (p, revenue)
}

/// The game's unique equilibrium prices and the total revenue they earn.
///
/// Solves the first-order-condition system through the positive definite
/// negation of the doubled-diagonal matrix.
pub fn nash_equilibrium(s: &DemandSystem) -> (PriceVector, f64) {
    let g = -nash_matrix(s);
    let p = solve_spd(&g, s.intercept())
        .expect("doubled-diagonal matrix is negative definite for a validated demand system");
    let p = PriceVector::from_dvector(p).expect("finite solve result");
    let revenue = total_revenue(s, &p).expect("dimensions match");
    (p, revenue)
}

/// Both solution concepts for one system.
pub fn equilibrium_pair(s: &DemandSystem) -> EquilibriumPair {
    let (p_star, r_star) = centralized_optimum(s);
    let (p_ne, r_ne) = nash_equilibrium(s);
    EquilibriumPair {
        p_star,
        p_ne,
        r_star,
        r_ne,
    }
}
