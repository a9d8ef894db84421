//! Error type shared across the crate.

/// Everything that can go wrong when constructing or analyzing a demand
/// system. Variants carry the offending index or value so callers can report
/// precisely which assumption failed.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Vector/matrix dimensions do not agree.
    #[error("DimensionMismatch: {what}: expected {expected}, got {actual}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    /// The sensitivity matrix is further from symmetric than the stated
    /// tolerance allows.
    #[error("AsymmetryExceedsTolerance at ({i},{j}): |b_ij - b_ji| = {asymmetry:e} > {threshold:e}")]
    AsymmetryExceedsTolerance {
        i: usize,
        j: usize,
        asymmetry: f64,
        threshold: f64,
    },

    /// Some own-price effect b_ii is not strictly negative.
    #[error("NonNegativeOwnEffect at i={index}: b_ii = {value}")]
    NonNegativeOwnEffect { index: usize, value: f64 },

    /// Some row violates strict diagonal dominance (mu_i >= 1).
    #[error("DominanceViolated at i={index}: mu_i = {mu_local} >= 1")]
    DominanceViolated { index: usize, mu_local: f64 },

    /// A matrix handed to the symmetric eigensolver is not symmetric.
    #[error("NotSymmetric: max asymmetry {max_asymmetry:e} exceeds {threshold:e}")]
    NotSymmetric {
        max_asymmetry: f64,
        threshold: f64,
    },

    /// A matrix required to be positive definite is not.
    #[error("NotPositiveDefinite: smallest eigenvalue {min_eigenvalue:e} below floor {floor:e}")]
    NotPositiveDefinite { min_eigenvalue: f64, floor: f64 },

    /// Product index out of range.
    #[error("IndexOutOfRange: index {index} not in 0..{len}")]
    IndexOutOfRange { index: usize, len: usize },

    /// The price-of-anarchy ratio is undefined for a zero intercept vector.
    #[error("ZeroIntercept: intercept vector is zero")]
    ZeroIntercept,

    /// The dominance parameter must lie in [0, 1).
    #[error("MuOutOfRange: mu = {mu} not in [0, 1)")]
    MuOutOfRange { mu: f64 },

    /// An instance-generator specification is invalid.
    #[error("SpecInvalid: {reason}")]
    SpecInvalid { reason: String },

    /// Gradient-play step size exceeds the stability bound.
    #[error("StepSizeTooLarge: eta = {eta} exceeds eta_max = {eta_max}")]
    StepSizeTooLarge { eta: f64, eta_max: f64 },

    /// A price vector contains NaN or infinity.
    #[error("NonFinitePrice at index {index}: {value}")]
    NonFinitePrice { index: usize, value: f64 },

    /// A demand-system entry is NaN or infinite. The structural checks
    /// are meaningless on such inputs, so they are rejected up front.
    #[error("NonFiniteEntry in {what} at ({row},{col})")]
    NonFiniteEntry {
        what: &'static str,
        row: usize,
        col: usize,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
