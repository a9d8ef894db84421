//! Dense symmetric linear-algebra kernel.
//!
//! Everything downstream (equilibrium solves, spectral price-of-anarchy
//! analysis) runs through the three primitives here: a full symmetric
//! eigendecomposition, the symmetric positive definite square root, and SPD
//! linear solves. Problem sizes are desk scale (N up to a few hundred), so
//! dense O(N^3) methods with tight tolerances are the right trade.
//!
//! Outputs are deterministic for a fixed input: eigenvalues are returned in
//! ascending order and each eigenvector is sign-normalized so that its first
//! nonzero component is positive.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Absolute tolerance on unit-scaled matrices for symmetry checks and
/// factorization residuals.
pub const KERNEL_TOL: f64 = 1e-10;

/// Relative floor below which an eigenvalue is treated as numerically
/// non-positive: `pd_floor = PD_FLOOR_REL * lambda_max`.
pub const PD_FLOOR_REL: f64 = 1e-12;

/// Spectrum of a symmetric matrix: eigenvalues ascending, orthonormal
/// eigenvectors as columns in the matching order.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
}

impl SymmetricEigen {
    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    /// Orthonormal eigenvectors, column k paired with eigenvalue k.
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    /// Column of the eigenvector matrix as an owned vector.
    pub fn eigenvector(&self, k: usize) -> DVector<f64> {
        self.eigenvectors.column(k).into_owned()
    }
}

fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut s = m.clone();
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    s
}

/// Full spectrum of a symmetric matrix with deterministic ordering and signs.
///
/// Rejects matrices whose asymmetry exceeds `KERNEL_TOL` relative to the
/// largest entry; smaller asymmetries are averaged away before factorization
/// so that repeated calls on the same input agree bitwise.
pub fn eig_sym(m: &DMatrix<f64>) -> Result<SymmetricEigen> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::DimensionMismatch {
            what: "matrix must be square",
            expected: n,
            actual: m.ncols(),
        });
    }
    let scale = m.amax().max(1.0);
    let asym = max_asymmetry(m);
    let threshold = KERNEL_TOL * scale;
    if asym > threshold {
        return Err(Error::NotSymmetric {
            max_asymmetry: asym,
            threshold,
        });
    }

    let decomp = symmetrize(m).symmetric_eigen();

    // Sort eigenpairs ascending, then fix each eigenvector's sign so the
    // first component that is not numerically zero is positive.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| decomp.eigenvalues[a].total_cmp(&decomp.eigenvalues[b]));

    let mut eigenvalues = DVector::zeros(n);
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (k, &src) in order.iter().enumerate() {
        eigenvalues[k] = decomp.eigenvalues[src];
        let col = decomp.eigenvectors.column(src);
        let cutoff = 1e-12 * col.amax();
        let flip = col
            .iter()
            .find(|v| v.abs() > cutoff)
            .map(|v| *v < 0.0)
            .unwrap_or(false);
        for i in 0..n {
            eigenvectors[(i, k)] = if flip { -col[i] } else { col[i] };
        }
    }

    Ok(SymmetricEigen {
        eigenvalues,
        eigenvectors,
    })
}

/// Unique symmetric positive definite square root, built from the
/// eigendecomposition as Q sqrt(Lambda) Q^T.
pub fn spd_sqrt(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = eig_sym(m)?;
    let floor = PD_FLOOR_REL * eig.max_eigenvalue();
    if eig.min_eigenvalue() <= floor {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: eig.min_eigenvalue(),
            floor,
        });
    }
    let q = eig.eigenvectors();
    let sqrt_lambda = DMatrix::from_diagonal(&eig.eigenvalues().map(f64::sqrt));
    Ok(symmetrize(&(q * sqrt_lambda * q.transpose())))
}

/// Solve `m x = rhs` for symmetric positive definite `m` via Cholesky
/// factorization. No explicit inverse is formed.
pub fn solve_spd(m: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    if rhs.len() != m.nrows() {
        return Err(Error::DimensionMismatch {
            what: "right-hand side length",
            expected: m.nrows(),
            actual: rhs.len(),
        });
    }
    let chol = m.clone().cholesky().ok_or(Error::NotPositiveDefinite {
        min_eigenvalue: f64::NAN,
        floor: 0.0,
    })?;
    Ok(chol.solve(rhs))
}

/// Explicit SPD inverse. Needed only where a matrix-valued formula is
/// assembled (the price-of-anarchy matrices); vector solves should use
/// [`solve_spd`].
pub fn spd_inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let chol = m.clone().cholesky().ok_or(Error::NotPositiveDefinite {
        min_eigenvalue: f64::NAN,
        floor: 0.0,
    })?;
    Ok(symmetrize(&chol.inverse()))
}
