//! Symplectic eigenvalues and the elementary-symmetric invariants `ϑ₂ₖ[Ωσ]`.
//!
//! Two independent routes produce `ϑ₂ₖ`: the characteristic polynomial of
//! `Ωσ` through the Faddeev–LeVerrier recursion, and the elementary symmetric
//! polynomials of the squared symplectic eigenvalues. With the sign
//! convention `det(X − λI) = Σ cₖ λ^{m−k}`, `c₀ = 1`, the even coefficients of
//! `Ωσ` are the invariants directly: `c₂ₖ = ϑ₂ₖ`, while the odd ones vanish.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::gaussian::{CovarianceMatrix, DEFAULT_TOL};
use crate::linalg;
use crate::williamson;

/// Relative tolerance for pairing the `±iν` eigenvalues of `Ωσ`.
pub const PAIRING_TOL: f64 = 1e-7;

/// Symplectic eigenvalues in descending order.
///
/// A spectrum built from a positive matrix that is not a physical covariance
/// matrix (a partial transpose, say) may have entries below one; such spectra
/// carry the `pseudo` flag.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticSpectrum {
    nus: Vec<f64>,
    pseudo: bool,
}

impl SymplecticSpectrum {
    /// Physical spectrum; every entry must be at least `1 - DEFAULT_TOL`.
    pub fn new(mut nus: Vec<f64>) -> Result<Self> {
        if nus.is_empty() {
            return Err(Error::InvalidDimension("empty spectrum".into()));
        }
        if let Some(nu) = nus.iter().find(|nu| !(**nu >= 1.0 - DEFAULT_TOL)) {
            return Err(Error::UnphysicalState(format!(
                "symplectic eigenvalue {nu} is below 1"
            )));
        }
        nus.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { nus, pseudo: false })
    }

    /// Spectrum without the `ν ≥ 1` requirement; entries must be positive.
    pub fn pseudo(mut nus: Vec<f64>) -> Result<Self> {
        if nus.is_empty() {
            return Err(Error::InvalidDimension("empty spectrum".into()));
        }
        if let Some(nu) = nus.iter().find(|nu| !(**nu > 0.0)) {
            return Err(Error::Domain(format!("symplectic eigenvalue {nu} is not positive")));
        }
        nus.sort_by(|a, b| b.total_cmp(a));
        let pseudo = nus[nus.len() - 1] < 1.0 - DEFAULT_TOL;
        Ok(Self { nus, pseudo })
    }

    pub fn nus(&self) -> &[f64] {
        &self.nus
    }

    pub fn modes(&self) -> usize {
        self.nus.len()
    }

    pub fn is_pseudo(&self) -> bool {
        self.pseudo
    }

    pub fn min(&self) -> f64 {
        self.nus[self.nus.len() - 1]
    }

    pub fn max(&self) -> f64 {
        self.nus[0]
    }

    /// `W = ⊕ νᵢ I₂`.
    pub fn w_matrix(&self) -> DMatrix<f64> {
        linalg::block_diag_pairs(&self.nus)
    }
}

/// Symplectic spectrum of a symmetric positive-definite matrix.
///
/// With `A = m^{1/2} Ω m^{1/2}` antisymmetric, the eigenvalues `±iνᵢ` of `Ωm`
/// are those of `A`, so `AᵀA` is symmetric with every `νᵢ²` appearing twice.
/// Working with `AᵀA` avoids a non-symmetric eigensolver.
pub fn spectrum_of(m: &DMatrix<f64>) -> Result<SymplecticSpectrum> {
    if m.nrows() != m.ncols() || m.nrows() == 0 || !m.nrows().is_multiple_of(2) {
        return Err(Error::InvalidDimension(format!(
            "matrix is {}x{}, expected even square",
            m.nrows(),
            m.ncols()
        )));
    }
    let n = m.nrows() / 2;
    let (eigs, vecs) = linalg::sym_eigen_desc(m);
    let min_eig = eigs[eigs.len() - 1];
    if !(min_eig > 0.0) {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: min_eig,
        });
    }
    let sqrt = linalg::symmetrize(&(&vecs * DMatrix::from_diagonal(&eigs.map(f64::sqrt)) * vecs.transpose()));
    let a = &sqrt * linalg::omega_matrix(n) * &sqrt;
    let (squares, _) = linalg::sym_eigen_desc(&(a.transpose() * &a));
    let scale = squares[0];
    let mut residual = 0.0_f64;
    let mut nus = Vec::with_capacity(n);
    for i in 0..n {
        let (hi, lo) = (squares[2 * i], squares[2 * i + 1]);
        residual = residual.max((hi - lo).abs() / scale);
        nus.push((0.5 * (hi + lo)).sqrt());
    }
    if residual > PAIRING_TOL {
        return Err(Error::NumericalDegeneracy { residual });
    }
    SymplecticSpectrum::pseudo(nus)
}

pub fn symplectic_eigenvalues(sigma: &CovarianceMatrix) -> Result<SymplecticSpectrum> {
    let spec = spectrum_of(sigma.matrix())?;
    if spec.is_pseudo() {
        return Err(Error::UnphysicalState(format!(
            "symplectic eigenvalue {} is below 1",
            spec.min()
        )));
    }
    Ok(spec)
}

/// Characteristic polynomial coefficients `c₀ … c_m` of `det(X − λI) = Σ cₖ λ^{m−k}`
/// by the Faddeev–LeVerrier recursion `cₖ = −(1/k) Σᵢ tr[X^{k−i}] cᵢ`.
pub fn char_poly_coeffs(x: &DMatrix<f64>) -> Result<Vec<f64>> {
    if x.nrows() != x.ncols() || x.nrows() == 0 {
        return Err(Error::InvalidDimension(format!(
            "matrix is {}x{}, expected non-empty square",
            x.nrows(),
            x.ncols()
        )));
    }
    let m = x.nrows();
    // power_traces[j] = tr[X^j]
    let mut power_traces = vec![m as f64; m + 1];
    let mut power = x.clone();
    for (j, slot) in power_traces.iter_mut().enumerate().skip(1) {
        *slot = power.trace();
        if j < m {
            power = &power * x;
        }
    }
    let mut c = vec![0.0; m + 1];
    c[0] = 1.0;
    for k in 1..=m {
        let acc: f64 = (0..k).map(|i| power_traces[k - i] * c[i]).sum();
        c[k] = -acc / k as f64;
    }
    Ok(c)
}

/// `ϑ₀ … ϑ₂ₙ` (even orders only).
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantSet {
    thetas: Vec<f64>,
}

impl InvariantSet {
    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    /// `ϑ₂ₖ`.
    pub fn get(&self, k: usize) -> Option<f64> {
        self.thetas.get(k).copied()
    }

    pub fn modes(&self) -> usize {
        self.thetas.len() - 1
    }
}

/// All invariants of a positive matrix through the characteristic polynomial of `Ωm`.
pub fn invariant_set_of(m: &DMatrix<f64>) -> Result<InvariantSet> {
    if m.nrows() != m.ncols() || m.nrows() == 0 || !m.nrows().is_multiple_of(2) {
        return Err(Error::InvalidDimension(format!(
            "matrix is {}x{}, expected even square",
            m.nrows(),
            m.ncols()
        )));
    }
    let n = m.nrows() / 2;
    let c = char_poly_coeffs(&(linalg::omega_matrix(n) * m))?;
    Ok(InvariantSet {
        thetas: (0..=n).map(|k| c[2 * k]).collect(),
    })
}

pub fn invariant_set(sigma: &CovarianceMatrix) -> Result<InvariantSet> {
    invariant_set_of(sigma.matrix())
}

/// `ϑ₂ₖ[Ωσ]` for `1 ≤ k ≤ n` via the characteristic polynomial.
pub fn theta(sigma: &CovarianceMatrix, k: usize) -> Result<f64> {
    let n = sigma.modes();
    if k < 1 || k > n {
        return Err(Error::OutOfRange { index: k, lo: 1, hi: n });
    }
    Ok(invariant_set(sigma)?.thetas[k])
}

/// Elementary symmetric polynomials `e₀ … e_m` of `values`.
pub fn elementary_symmetric(values: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; values.len() + 1];
    e[0] = 1.0;
    for (count, v) in values.iter().enumerate() {
        for k in (1..=count + 1).rev() {
            e[k] += v * e[k - 1];
        }
    }
    e
}

/// `ϑ₂ₖ = Σ_{|E|=k} Π_{j∈E} νⱼ²`, for `0 ≤ k ≤ n`.
pub fn theta_from_spectrum(spec: &SymplecticSpectrum, k: usize) -> Result<f64> {
    let n = spec.modes();
    if k > n {
        return Err(Error::OutOfRange { index: k, lo: 0, hi: n });
    }
    let squares: Vec<f64> = spec.nus.iter().map(|nu| nu * nu).collect();
    Ok(elementary_symmetric(&squares)[k])
}

/// Reduced invariant `ϑ̄ⁱ₂ₖ`: order-`k` elementary symmetric polynomial of the
/// squared symplectic eigenvalues with mode `i` (0-based, in spectrum order) left out.
pub fn theta_reduced(spec: &SymplecticSpectrum, k: usize, i: usize) -> Result<f64> {
    let n = spec.modes();
    if i >= n {
        return Err(Error::OutOfRange { index: i, lo: 0, hi: n - 1 });
    }
    if k > n - 1 {
        return Err(Error::OutOfRange { index: k, lo: 0, hi: n - 1 });
    }
    let rest: Vec<f64> = spec
        .nus
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != i)
        .map(|(_, nu)| nu * nu)
        .collect();
    Ok(elementary_symmetric(&rest)[k])
}

/// `Vₖ = ⊕ᵢ (νᵢ ϑ̄ⁱ₂₍ₖ₋₁₎) I₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct VMatrix {
    k: usize,
    weights: Vec<f64>,
}

impl VMatrix {
    pub fn order(&self) -> usize {
        self.k
    }

    /// Per-mode weights `νᵢ ϑ̄ⁱ₂₍ₖ₋₁₎`, in spectrum order.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        linalg::block_diag_pairs(&self.weights)
    }
}

pub fn v_matrix(spec: &SymplecticSpectrum, k: usize) -> Result<VMatrix> {
    let n = spec.modes();
    if k < 1 || k > n {
        return Err(Error::OutOfRange { index: k, lo: 1, hi: n });
    }
    let weights = (0..n)
        .map(|i| theta_reduced(spec, k - 1, i).map(|t| spec.nus[i] * t))
        .collect::<Result<Vec<_>>>()?;
    Ok(VMatrix { k, weights })
}

/// `dϑ₂ₖ/dt = −2k ϑ₂ₖ + χ tr[S Vₖ Sᵀ]` under `σ̇ = −σ + χI`, for any
/// positive-definite `m` with Williamson form `m = SWSᵀ`.
pub fn invariant_rate_of(m: &DMatrix<f64>, k: usize, chi: f64) -> Result<f64> {
    let n = m.nrows() / 2;
    if k < 1 || k > n {
        return Err(Error::OutOfRange { index: k, lo: 1, hi: n });
    }
    let wd = williamson::williamson_of(m)?;
    let spec = wd.spectrum();
    let theta = theta_from_spectrum(spec, k)?;
    let v = v_matrix(spec, k)?;
    Ok(-2.0 * k as f64 * theta + chi * weighted_trace(wd.s().matrix(), v.weights()))
}

pub fn invariant_rate(sigma: &CovarianceMatrix, k: usize, chi: f64) -> Result<f64> {
    if !(chi >= 1.0) {
        return Err(Error::Domain(format!("chi ≥ 1 required, got {chi}")));
    }
    invariant_rate_of(sigma.matrix(), k, chi)
}

/// `tr[S (⊕ yᵢ I₂) Sᵀ] = Σᵢ yᵢ (‖S col 2i‖² + ‖S col 2i+1‖²)`.
pub(crate) fn weighted_trace(s: &DMatrix<f64>, ys: &[f64]) -> f64 {
    ys.iter()
        .enumerate()
        .map(|(i, y)| y * (s.column(2 * i).norm_squared() + s.column(2 * i + 1).norm_squared()))
        .sum()
}

/// `μ = 1/√det σ`.
pub fn purity(sigma: &CovarianceMatrix) -> f64 {
    1.0 / sigma.determinant().sqrt()
}

/// Single-mode von Neumann entropy
/// `κ(ν) = ((ν+1)/2) ln((ν+1)/2) − ((ν−1)/2) ln((ν−1)/2)`, with `κ(1) = 0`.
pub fn von_neumann_entropy_single(nu: f64) -> Result<f64> {
    if !(nu >= 1.0) || !nu.is_finite() {
        return Err(Error::Domain(format!("ν ≥ 1 required, got {nu}")));
    }
    let plus = (nu + 1.0) / 2.0;
    let minus = (nu - 1.0) / 2.0;
    let minus_term = if minus == 0.0 { 0.0 } else { minus * minus.ln() };
    Ok(plus * plus.ln() - minus_term)
}

/// `ν = (1 + e^{−βω})/(1 − e^{−βω}) = coth(βω/2)`.
pub fn nu_from_temperature(beta_omega: f64) -> Result<f64> {
    if !(beta_omega > 0.0) {
        return Err(Error::Domain(format!("βω > 0 required, got {beta_omega}")));
    }
    Ok(1.0 / (0.5 * beta_omega).tanh())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{apply_symplectic, thermal, two_mode_squeezed, vacuum};
    use crate::sampling;
    use nalgebra::dvector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
    }

    #[test]
    fn spectrum_examples() {
        for n in 1..=4 {
            let spec = symplectic_eigenvalues(&vacuum(n).unwrap()).unwrap();
            assert!(spec.nus().iter().all(|nu| (nu - 1.0).abs() < 1e-12));
        }
        let tms = symplectic_eigenvalues(&two_mode_squeezed(2.0, 0.4).unwrap()).unwrap();
        assert!(tms.nus().iter().all(|nu| (nu - 2.0).abs() < 1e-12));
        let sq = CovarianceMatrix::new(DMatrix::from_diagonal(&dvector![4.0, 0.25])).unwrap();
        assert!((symplectic_eigenvalues(&sq).unwrap().nus()[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spectrum_rejects_indefinite_input() {
        let m = DMatrix::from_diagonal(&dvector![1.0, -1.0]);
        assert!(matches!(spectrum_of(&m), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn char_poly_small_examples() {
        let x = DMatrix::from_diagonal(&dvector![1.0, 2.0]);
        assert_eq!(char_poly_coeffs(&x).unwrap(), vec![1.0, -3.0, 2.0]);
        let omega = linalg::omega_matrix(1);
        assert_eq!(char_poly_coeffs(&omega).unwrap(), vec![1.0, 0.0, 1.0]);
        assert!(char_poly_coeffs(&DMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn theta_examples() {
        assert!((theta(&vacuum(3).unwrap(), 2).unwrap() - 3.0).abs() < 1e-12);
        let tms = two_mode_squeezed(2.0, 0.4).unwrap();
        let det = tms.determinant();
        assert!((det - 16.0).abs() < 1e-10);
        assert!(rel(theta(&tms, 2).unwrap(), det) < 1e-10);
        assert!(theta(&tms, 0).is_err());
        assert!(theta(&tms, 3).is_err());
    }

    #[test]
    fn theta_from_spectrum_matches_subset_sum() {
        let nus = [1.3, 2.1, 1.7, 3.2];
        let spec = SymplecticSpectrum::new(nus.to_vec()).unwrap();
        // ordered descending: 3.2, 2.1, 1.7, 1.3
        let s: Vec<f64> = nus.iter().map(|v| v * v).collect();
        let expected = s[0] * s[1] * s[2] + s[0] * s[2] * s[3] + s[0] * s[1] * s[3] + s[1] * s[2] * s[3];
        assert!(rel(theta_from_spectrum(&spec, 3).unwrap(), expected) < 1e-14);
    }

    #[test]
    fn theta_reduced_examples() {
        let spec = SymplecticSpectrum::new(vec![4.0, 3.0, 2.0, 1.5]).unwrap();
        for i in 0..4 {
            assert_eq!(theta_reduced(&spec, 0, i).unwrap(), 1.0);
        }
        // leaving out the second eigenvalue (3.0)
        let (a, c, d) = (16.0, 4.0, 2.25);
        let expected = a * c + a * d + c * d;
        assert!(rel(theta_reduced(&spec, 2, 1).unwrap(), expected) < 1e-14);
        let two = SymplecticSpectrum::new(vec![2.0, 3.0]).unwrap();
        // spectrum order is (3, 2); dropping 2.0 leaves 9
        assert_eq!(theta_reduced(&two, 1, 1).unwrap(), 9.0);
        assert!(theta_reduced(&two, 2, 0).is_err());
        assert!(theta_reduced(&two, 0, 2).is_err());
    }

    #[test]
    fn v_matrix_examples() {
        let spec = SymplecticSpectrum::new(vec![2.0, 3.0]).unwrap();
        let v1 = v_matrix(&spec, 1).unwrap();
        assert_eq!(v1.matrix(), spec.w_matrix());
        let v2 = v_matrix(&spec, 2).unwrap();
        // spectrum order (3, 2): 3·4 and 2·9
        assert_eq!(v2.weights(), &[12.0, 18.0]);
        let vac = SymplecticSpectrum::new(vec![1.0; 4]).unwrap();
        let binom = [1.0, 3.0, 3.0, 1.0];
        for k in 1..=4 {
            let v = v_matrix(&vac, k).unwrap();
            assert!(v.weights().iter().all(|w| *w == binom[k - 1]));
        }
        assert!(v_matrix(&spec, 0).is_err());
        assert!(v_matrix(&spec, 3).is_err());
    }

    #[test]
    fn rate_vanishes_at_fixed_point() {
        for chi in [1.0, 1.5, 3.0] {
            let sigma = thermal(&[chi, chi, chi]).unwrap();
            for k in 1..=3 {
                let r = invariant_rate(&sigma, k, chi).unwrap();
                assert!(r.abs() < 1e-10 * chi.powi(2 * k as i32), "χ={chi} k={k}: {r}");
            }
        }
    }

    #[test]
    fn rate_of_single_mode_squeezed_vacuum() {
        let chi = 1.7;
        for z in [1.0, 1.5, 3.0] {
            let sigma =
                CovarianceMatrix::new(DMatrix::from_diagonal(&dvector![z * z, 1.0 / (z * z)])).unwrap();
            let expected = -2.0 + chi * (z * z + 1.0 / (z * z));
            assert!(rel(invariant_rate(&sigma, 1, chi).unwrap(), expected) < 1e-12);
        }
    }

    #[test]
    fn rate_of_pure_two_mode_squeezed_state() {
        let chi = 1.000013;
        let sigma = two_mode_squeezed(1.0, 0.4).unwrap();
        let analytic = invariant_rate(&sigma, 2, chi).unwrap();
        // ϑ₄ = det σ along the exact flow σ(t) = χI + (σ₀ − χI)e^{−t}
        let h = 1e-6;
        let det_at = |t: f64| {
            let m = DMatrix::identity(4, 4) * chi
                + (sigma.matrix() - DMatrix::identity(4, 4) * chi) * (-t).exp();
            m.determinant()
        };
        let fd = (det_at(h) - det_at(-h)) / (2.0 * h);
        assert!(rel(analytic, fd) < 1e-5, "{analytic} vs {fd}");
        assert!((analytic - (-4.0 + chi * 4.0 * 0.8_f64.cosh())).abs() < 1e-10);
    }

    #[test]
    fn purity_examples() {
        assert!((purity(&vacuum(3).unwrap()) - 1.0).abs() < 1e-14);
        assert!((purity(&two_mode_squeezed(2.0, 0.4).unwrap()) - 0.25).abs() < 1e-12);
        let chi = 1.000013;
        let steady = purity(&thermal(&[chi, chi]).unwrap());
        assert!((steady - 1.0 / (chi * chi)).abs() < 1e-15);
        assert!((steady - 0.999974).abs() < 1e-6);
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(von_neumann_entropy_single(1.0).unwrap(), 0.0);
        assert!((von_neumann_entropy_single(3.0).unwrap() - 2.0 * 2f64.ln()).abs() < 1e-14);
        assert!(von_neumann_entropy_single(2.0).unwrap() < von_neumann_entropy_single(5.0).unwrap());
        assert!(von_neumann_entropy_single(0.9).is_err());
    }

    #[test]
    fn temperature_examples() {
        assert!((nu_from_temperature(3f64.ln()).unwrap() - 2.0).abs() < 1e-14);
        assert!((nu_from_temperature(2f64.ln()).unwrap() - 3.0).abs() < 1e-14);
        assert!((nu_from_temperature(60.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(nu_from_temperature(1e-6).unwrap() > 1e6);
        assert!(nu_from_temperature(0.0).is_err());
        assert!(nu_from_temperature(-1.0).is_err());
    }

    #[test]
    fn invariants_survive_symplectic_conjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for i in 0..40 {
            let n = 1 + i % 4;
            let sigma = sampling::random_covariance(&mut rng, n, 3.0, 2.0);
            let s = sampling::random_symplectic(&mut rng, n, 2.0);
            let moved = apply_symplectic(&sigma, &s).unwrap();
            let (a, b) = (invariant_set(&sigma).unwrap(), invariant_set(&moved).unwrap());
            for k in 0..=n {
                assert!(rel(a.thetas()[k], b.thetas()[k]) < 1e-9, "n={n} k={k}");
            }
        }
    }
}
