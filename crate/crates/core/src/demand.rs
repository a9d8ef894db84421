//! Linear multi-product demand systems and their structural validation.
//!
//! A demand system pairs baseline demands `a` with a price-sensitivity matrix
//! `B`: expected demand at price vector `p` is `a + B p`. Construction
//! enforces the three structural requirements everything downstream relies
//! on:
//!
//! 1. `B` is exactly symmetric (inputs within tolerance are averaged with
//!    their transpose; anything further off is rejected),
//! 2. every own-price effect `b_ii` is strictly negative,
//! 3. every row is strictly diagonally dominant: the absolute cross effects
//!    sum to less than `|b_ii|`.
//!
//! Dominance is summarized by `mu = max_i sum_{j != i} |b_ij| / |b_ii|`,
//! which lives in `[0, 1)` for any valid system and drives all efficiency
//! bounds. Off-diagonal magnitudes enter with absolute values, so `mu` is a
//! valid certificate for substitute, complement, and mixed markets alike.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default relative symmetry tolerance used by the JSON parser: asymmetries
/// up to `1e-12 * max|b_ij|` are averaged away, larger ones are rejected.
pub const DEFAULT_SYMMETRY_TOL: f64 = 1e-12;

/// A validated linear demand system.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandSystem {
    a: DVector<f64>,
    b: DMatrix<f64>,
}

/// Diagonal-dominance summary of a demand system.
///
/// `d[i] = |b_ii|` is the own-effect magnitude, `mu_local[i]` the ratio of
/// product i's absolute cross effects to `d[i]`, and `mu` the maximum of the
/// local values, the smallest dominance parameter the system satisfies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceProfile {
    pub d: Vec<f64>,
    pub mu_local: Vec<f64>,
    pub mu: f64,
}

/// On-disk instance schema: full row-major sensitivity matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceJson {
    pub n: usize,
    pub a: Vec<f64>,
    pub b: Vec<Vec<f64>>,
}

impl DemandSystem {
    /// Validate and build a demand system.
    ///
    /// `symmetry_tol` is relative to the largest entry of `b`: the input is
    /// symmetrized via `(b + b^T) / 2` when its worst asymmetry is at most
    /// `symmetry_tol * max|b_ij|` and rejected otherwise. Passing zero
    /// demands exact symmetry.
    pub fn new(a: &[f64], b: &DMatrix<f64>, symmetry_tol: f64) -> Result<Self> {
        let n = a.len();
        if b.nrows() != n {
            return Err(Error::DimensionMismatch {
                what: "sensitivity matrix rows vs intercept length",
                expected: n,
                actual: b.nrows(),
            });
        }
        if b.ncols() != n {
            return Err(Error::DimensionMismatch {
                what: "sensitivity matrix must be square",
                expected: n,
                actual: b.ncols(),
            });
        }
        if n == 0 {
            return Err(Error::DimensionMismatch {
                what: "system must have at least one product",
                expected: 1,
                actual: 0,
            });
        }
        // NaN slips through sign and dominance comparisons, so screen for
        // finiteness before anything else.
        for (row, value) in a.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFiniteEntry {
                    what: "intercept",
                    row,
                    col: 0,
                });
            }
        }
        for row in 0..n {
            for col in 0..n {
                if !b[(row, col)].is_finite() {
                    return Err(Error::NonFiniteEntry {
                        what: "sensitivity matrix",
                        row,
                        col,
                    });
                }
            }
        }

        let threshold = symmetry_tol * b.amax();
        for i in 0..n {
            for j in (i + 1)..n {
                let asymmetry = (b[(i, j)] - b[(j, i)]).abs();
                if asymmetry > threshold {
                    return Err(Error::AsymmetryExceedsTolerance {
                        i,
                        j,
                        asymmetry,
                        threshold,
                    });
                }
            }
        }
        let mut sym = b.clone();
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (b[(i, j)] + b[(j, i)]);
                sym[(i, j)] = v;
                sym[(j, i)] = v;
            }
        }

        for i in 0..n {
            if sym[(i, i)] >= 0.0 {
                return Err(Error::NonNegativeOwnEffect {
                    index: i,
                    value: sym[(i, i)],
                });
            }
        }
        for i in 0..n {
            let d_i = -sym[(i, i)];
            let off: f64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| sym[(i, j)].abs())
                .sum();
            let mu_i = off / d_i;
            if mu_i >= 1.0 {
                return Err(Error::DominanceViolated {
                    index: i,
                    mu_local: mu_i,
                });
            }
        }

        Ok(Self {
            a: DVector::from_column_slice(a),
            b: sym,
        })
    }

    /// Number of products.
    pub fn n(&self) -> usize {
        self.a.len()
    }

    /// Baseline demand intercepts.
    pub fn intercept(&self) -> &DVector<f64> {
        &self.a
    }

    /// Price-sensitivity matrix (symmetric, negative diagonal).
    pub fn sensitivity(&self) -> &DMatrix<f64> {
        &self.b
    }

    /// Same market, different intercept vector.
    pub fn with_intercept(&self, a: &[f64]) -> Result<Self> {
        if a.len() != self.n() {
            return Err(Error::DimensionMismatch {
                what: "replacement intercept length",
                expected: self.n(),
                actual: a.len(),
            });
        }
        for (row, value) in a.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFiniteEntry {
                    what: "intercept",
                    row,
                    col: 0,
                });
            }
        }
        Ok(Self {
            a: DVector::from_column_slice(a),
            b: self.b.clone(),
        })
    }

    /// Own-effect magnitudes, local dominance ratios, and their maximum.
    pub fn dominance_profile(&self) -> DominanceProfile {
        let n = self.n();
        let mut d = Vec::with_capacity(n);
        let mut mu_local = Vec::with_capacity(n);
        for i in 0..n {
            let d_i = -self.b[(i, i)];
            let off: f64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| self.b[(i, j)].abs())
                .sum();
            d.push(d_i);
            mu_local.push(off / d_i);
        }
        let mu = mu_local.iter().copied().fold(0.0, f64::max);
        DominanceProfile { d, mu_local, mu }
    }

    /// Expected demand `a + B p`.
    pub fn expected_demand(&self, p: &DVector<f64>) -> Result<DVector<f64>> {
        if p.len() != self.n() {
            return Err(Error::DimensionMismatch {
                what: "price vector length",
                expected: self.n(),
                actual: p.len(),
            });
        }
        Ok(&self.a + &self.b * p)
    }

    /// Parse and validate an instance from its JSON representation.
    pub fn from_json_str(text: &str) -> std::result::Result<Self, String> {
        let raw: InstanceJson =
            serde_json::from_str(text).map_err(|e| format!("invalid instance JSON: {e}"))?;
        Self::from_instance_json(&raw).map_err(|e| e.to_string())
    }

    /// Validate a decoded instance record.
    pub fn from_instance_json(raw: &InstanceJson) -> Result<Self> {
        if raw.a.len() != raw.n {
            return Err(Error::DimensionMismatch {
                what: "intercept length vs declared n",
                expected: raw.n,
                actual: raw.a.len(),
            });
        }
        if raw.b.len() != raw.n {
            return Err(Error::DimensionMismatch {
                what: "sensitivity row count vs declared n",
                expected: raw.n,
                actual: raw.b.len(),
            });
        }
        for row in &raw.b {
            if row.len() != raw.n {
                return Err(Error::DimensionMismatch {
                    what: "sensitivity row length vs declared n",
                    expected: raw.n,
                    actual: row.len(),
                });
            }
        }
        let b = DMatrix::from_fn(raw.n, raw.n, |i, j| raw.b[i][j]);
        Self::new(&raw.a, &b, DEFAULT_SYMMETRY_TOL)
    }

    /// Instance record in the on-disk schema.
    pub fn to_instance_json(&self) -> InstanceJson {
        let n = self.n();
        InstanceJson {
            n,
            a: self.a.iter().copied().collect(),
            b: (0..n)
                .map(|i| (0..n).map(|j| self.b[(i, j)]).collect())
                .collect(),
        }
    }
}
