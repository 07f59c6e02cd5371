//! Covariance matrices, the symplectic form and symplectic conjugation.
//!
//! Quadratures are ordered `(x₁, p₁, …, xₙ, pₙ)` everywhere in the public
//! API. Covariance matrices use the convention in which the vacuum is the
//! identity, so every physical state has symplectic eigenvalues `νᵢ ≥ 1`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::invariants::{self, SymplecticSpectrum};
use crate::linalg;

/// Default absolute tolerance for symmetry and symplecticity checks.
pub const DEFAULT_TOL: f64 = 1e-9;

fn mode_count(m: &DMatrix<f64>) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::InvalidDimension(format!(
            "matrix is {}x{}, expected square",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() == 0 || !m.nrows().is_multiple_of(2) {
        return Err(Error::InvalidDimension(format!(
            "dimension {} is not a positive even number",
            m.nrows()
        )));
    }
    Ok(m.nrows() / 2)
}

/// The symplectic form `Ω = ⊕ [[0, 1], [-1, 0]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm {
    n: usize,
    matrix: DMatrix<f64>,
}

impl SymplecticForm {
    pub fn modes(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

pub fn omega(n: usize) -> Result<SymplecticForm> {
    if n == 0 {
        return Err(Error::InvalidDimension("mode count must be at least 1".into()));
    }
    Ok(SymplecticForm {
        n,
        matrix: linalg::omega_matrix(n),
    })
}

/// Result of [`is_valid_covariance`]: either valid, or the first check that failed.
#[derive(Debug, Clone, PartialEq)]
pub enum CovarianceCheck {
    Valid,
    NotSymmetric { residual: f64 },
    NotPositiveDefinite { min_eigenvalue: f64 },
    ViolatesUncertainty { min_nu: f64 },
}

impl CovarianceCheck {
    pub fn is_valid(&self) -> bool {
        matches!(self, CovarianceCheck::Valid)
    }
}

impl std::fmt::Display for CovarianceCheck {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CovarianceCheck::Valid => write!(f, "valid"),
            CovarianceCheck::NotSymmetric { residual } => {
                write!(f, "not symmetric (max |σ - σᵀ| = {residual:.3e})")
            }
            CovarianceCheck::NotPositiveDefinite { min_eigenvalue } => {
                write!(f, "not positive definite (min eigenvalue {min_eigenvalue:.3e})")
            }
            CovarianceCheck::ViolatesUncertainty { min_nu } => {
                write!(f, "violates the uncertainty principle (min ν = {min_nu})")
            }
        }
    }
}

/// Checks symmetry, positive definiteness and `min νᵢ ≥ 1 - tol`, in that order.
pub fn is_valid_covariance(sigma: &DMatrix<f64>, tol: f64) -> Result<CovarianceCheck> {
    mode_count(sigma)?;
    let asym = linalg::max_abs_diff(sigma, &sigma.transpose());
    if asym > tol * linalg::max_abs(sigma).max(1.0) {
        return Ok(CovarianceCheck::NotSymmetric { residual: asym });
    }
    let (eigs, _) = linalg::sym_eigen_desc(sigma);
    let min_eig = eigs[eigs.len() - 1];
    if min_eig <= 0.0 {
        return Ok(CovarianceCheck::NotPositiveDefinite {
            min_eigenvalue: min_eig,
        });
    }
    let spec = invariants::spectrum_of(&linalg::symmetrize(sigma))?;
    let min_nu = spec.min();
    if min_nu < 1.0 - tol {
        return Ok(CovarianceCheck::ViolatesUncertainty { min_nu });
    }
    Ok(CovarianceCheck::Valid)
}

/// `‖SΩSᵀ − Ω‖ ≤ tol` in the max-entry norm.
pub fn is_symplectic(s: &DMatrix<f64>, tol: f64) -> Result<bool> {
    Ok(symplectic_residual(s)? <= tol)
}

pub(crate) fn symplectic_residual(s: &DMatrix<f64>) -> Result<f64> {
    let n = mode_count(s)?;
    let omega = linalg::omega_matrix(n);
    Ok(linalg::max_abs_diff(&(s * &omega * s.transpose()), &omega))
}

/// A validated covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    matrix: DMatrix<f64>,
}

impl CovarianceMatrix {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        Self::with_tolerance(matrix, DEFAULT_TOL)
    }

    pub fn with_tolerance(matrix: DMatrix<f64>, tol: f64) -> Result<Self> {
        match is_valid_covariance(&matrix, tol)? {
            CovarianceCheck::Valid => Ok(Self {
                matrix: linalg::symmetrize(&matrix),
            }),
            CovarianceCheck::NotPositiveDefinite { min_eigenvalue } => {
                Err(Error::NotPositiveDefinite { min_eigenvalue })
            }
            other => Err(Error::UnphysicalState(other.to_string())),
        }
    }

    /// Wraps the output of an operation known to preserve validity.
    pub(crate) fn from_trusted(matrix: DMatrix<f64>) -> Self {
        Self {
            matrix: linalg::symmetrize(&matrix),
        }
    }

    pub fn modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn determinant(&self) -> f64 {
        self.matrix.determinant()
    }

    pub fn spectrum(&self) -> Result<SymplecticSpectrum> {
        invariants::symplectic_eigenvalues(self)
    }
}

/// A symplectic matrix, `SΩSᵀ = Ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMatrix {
    matrix: DMatrix<f64>,
}

impl SymplecticMatrix {
    /// Validates with [`DEFAULT_TOL`] scaled by `max(1, ‖S‖²)`, since the
    /// residual of `SΩSᵀ` grows with the squared entries.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let residual = symplectic_residual(&matrix)?;
        let scale = linalg::max_abs(&matrix).powi(2).max(1.0);
        if residual > DEFAULT_TOL * scale {
            return Err(Error::NotSymplectic { residual });
        }
        Ok(Self { matrix })
    }

    pub fn with_tolerance(matrix: DMatrix<f64>, tol: f64) -> Result<Self> {
        let residual = symplectic_residual(&matrix)?;
        if residual > tol {
            return Err(Error::NotSymplectic { residual });
        }
        Ok(Self { matrix })
    }

    pub(crate) fn from_trusted(matrix: DMatrix<f64>) -> Self {
        Self { matrix }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: DMatrix::identity(2 * n, 2 * n),
        }
    }

    /// Local squeezer `diag(z₁, 1/z₁, …)`.
    pub fn squeezer(zs: &[f64]) -> Result<Self> {
        if zs.is_empty() {
            return Err(Error::InvalidDimension("no modes".into()));
        }
        if let Some(z) = zs.iter().find(|z| !(**z > 0.0) || !z.is_finite()) {
            return Err(Error::Domain(format!("squeezing factor {z} must be positive")));
        }
        Ok(Self {
            matrix: linalg::squeezer(zs),
        })
    }

    pub fn modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn inverse(&self) -> Self {
        Self {
            matrix: linalg::symplectic_inverse(&self.matrix),
        }
    }

    /// `self · other`.
    pub fn compose(&self, other: &SymplecticMatrix) -> Result<Self> {
        if self.modes() != other.modes() {
            return Err(Error::DimensionMismatch {
                expected: self.matrix.nrows(),
                got: other.matrix.nrows(),
            });
        }
        Ok(Self {
            matrix: &self.matrix * &other.matrix,
        })
    }

    pub fn transpose(&self) -> Self {
        Self {
            matrix: self.matrix.transpose(),
        }
    }
}

/// `σ → SσSᵀ`.
pub fn apply_symplectic(sigma: &CovarianceMatrix, s: &SymplecticMatrix) -> Result<CovarianceMatrix> {
    if sigma.matrix.nrows() != s.matrix.nrows() {
        return Err(Error::DimensionMismatch {
            expected: sigma.matrix.nrows(),
            got: s.matrix.nrows(),
        });
    }
    Ok(CovarianceMatrix::from_trusted(
        &s.matrix * &sigma.matrix * s.matrix.transpose(),
    ))
}

pub fn vacuum(n: usize) -> Result<CovarianceMatrix> {
    if n == 0 {
        return Err(Error::InvalidDimension("mode count must be at least 1".into()));
    }
    Ok(CovarianceMatrix::from_trusted(DMatrix::identity(2 * n, 2 * n)))
}

/// `⊕ νᵢ I₂`.
pub fn thermal(nus: &[f64]) -> Result<CovarianceMatrix> {
    if nus.is_empty() {
        return Err(Error::InvalidDimension("mode count must be at least 1".into()));
    }
    if let Some(nu) = nus.iter().find(|nu| !(**nu >= 1.0) || !nu.is_finite()) {
        return Err(Error::UnphysicalState(format!(
            "symplectic eigenvalue {nu} is below 1"
        )));
    }
    Ok(CovarianceMatrix::from_trusted(linalg::block_diag_pairs(nus)))
}

/// Two-mode squeezed thermal state
/// `γ [[c,0,s,0],[0,c,0,-s],[s,0,c,0],[0,-s,0,c]]` with `c = cosh 2r`, `s = sinh 2r`.
pub fn two_mode_squeezed(gamma: f64, r: f64) -> Result<CovarianceMatrix> {
    if !(gamma >= 1.0) || !gamma.is_finite() {
        return Err(Error::UnphysicalState(format!("gamma ≥ 1 required, got {gamma}")));
    }
    if !r.is_finite() {
        return Err(Error::Domain(format!("squeezing r = {r} is not finite")));
    }
    let c = gamma * (2.0 * r).cosh();
    let s = gamma * (2.0 * r).sinh();
    #[rustfmt::skip]
    let m = DMatrix::from_row_slice(4, 4, &[
        c, 0.0, s, 0.0,
        0.0, c, 0.0, -s,
        s, 0.0, c, 0.0,
        0.0, -s, 0.0, c,
    ]);
    Ok(CovarianceMatrix::from_trusted(m))
}

/// Bath parameters of the lossy channel: `χ = 2N̄ + 1` and loss rate `η` (1/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathParams {
    chi: f64,
    eta: f64,
}

impl BathParams {
    pub fn new(chi: f64, eta: f64) -> Result<Self> {
        if !(chi >= 1.0) || !chi.is_finite() {
            return Err(Error::Domain(format!("chi ≥ 1 required, got {chi}")));
        }
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::Domain(format!("eta > 0 required, got {eta}")));
        }
        Ok(Self { chi, eta })
    }

    pub fn from_mean_photons(n_bar: f64, eta: f64) -> Result<Self> {
        if !(n_bar >= 0.0) {
            return Err(Error::Domain(format!("mean photon number ≥ 0 required, got {n_bar}")));
        }
        Self::new(2.0 * n_bar + 1.0, eta)
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn mean_photons(&self) -> f64 {
        (self.chi - 1.0) / 2.0
    }

    pub fn to_rescaled(&self, t_phys: f64) -> f64 {
        t_phys * self.eta
    }

    pub fn to_physical(&self, t_rescaled: f64) -> f64 {
        t_rescaled / self.eta
    }
}
