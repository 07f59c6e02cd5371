//! Partial transposition and the PPT indicator `Σ̃ = ∏(ν̃ᵢ² − 1)`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::gaussian::CovarianceMatrix;
use crate::invariants::{self, SymplecticSpectrum};

/// Split of `n = p + q` modes: the first `p` form one party.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bipartition {
    p: usize,
    q: usize,
}

impl Bipartition {
    pub fn new(p: usize, q: usize) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(Error::InvalidDimension(format!(
                "both parties need at least one mode, got {p}+{q}"
            )));
        }
        Ok(Self { p, q })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn modes(&self) -> usize {
        self.p + self.q
    }

    /// Diagonal of `T`: momentum of each first-party mode flipped.
    fn signs(&self) -> Vec<f64> {
        (0..2 * self.modes())
            .map(|i| if i < 2 * self.p && i % 2 == 1 { -1.0 } else { 1.0 })
            .collect()
    }

    fn check(&self, sigma: &CovarianceMatrix) -> Result<()> {
        if sigma.modes() != self.modes() {
            return Err(Error::DimensionMismatch {
                expected: self.modes(),
                got: sigma.modes(),
            });
        }
        Ok(())
    }
}

/// `σ̃ = TσT`. Positive definite, but not necessarily a physical covariance.
pub fn partial_transpose(sigma: &CovarianceMatrix, part: Bipartition) -> Result<DMatrix<f64>> {
    part.check(sigma)?;
    let t = part.signs();
    let m = sigma.matrix();
    Ok(DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| t[r] * m[(r, c)] * t[c]))
}

/// Symplectic spectrum of `σ̃`, flagged pseudo when some `ν̃ < 1`.
pub fn partial_transpose_spectrum(sigma: &CovarianceMatrix, part: Bipartition) -> Result<SymplecticSpectrum> {
    invariants::spectrum_of(&partial_transpose(sigma, part)?)
}

fn alternating(n: usize, k: usize) -> f64 {
    if (n + k).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `Σ̃ = Σₖ (−1)^{n+k} ϑ₂ₖ[Ωσ̃]`; negative values witness entanglement.
pub fn sigma_tilde_indicator(sigma: &CovarianceMatrix, part: Bipartition) -> Result<f64> {
    let tilde = partial_transpose(sigma, part)?;
    let set = invariants::invariant_set_of(&tilde)?;
    let n = part.modes();
    Ok(set
        .thetas()
        .iter()
        .enumerate()
        .map(|(k, th)| alternating(n, k) * th)
        .sum())
}

/// Rate of `Σ̃` under the lossy flow. `σ̃` obeys the same flow as `σ`, so each
/// term is the invariant rate of `σ̃`; the `k = 0` term is constant.
pub fn sigma_tilde_rate(sigma: &CovarianceMatrix, part: Bipartition, chi: f64) -> Result<f64> {
    if !(chi >= 1.0) {
        return Err(Error::Domain(format!("chi ≥ 1 required, got {chi}")));
    }
    let tilde = partial_transpose(sigma, part)?;
    let n = part.modes();
    let mut rate = 0.0;
    for k in 1..=n {
        rate += alternating(n, k) * invariants::invariant_rate_of(&tilde, k, chi)?;
    }
    Ok(rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::evolve;
    use crate::gaussian::{thermal, two_mode_squeezed, vacuum};
    use crate::linalg;

    fn one_one() -> Bipartition {
        Bipartition::new(1, 1).unwrap()
    }

    #[test]
    fn bipartition_validation() {
        assert!(Bipartition::new(0, 2).is_err());
        assert!(partial_transpose(&vacuum(3).unwrap(), one_one()).is_err());
    }

    #[test]
    fn transpose_is_an_involution() {
        let sigma = two_mode_squeezed(1.7, 0.6).unwrap();
        let once = partial_transpose(&sigma, one_one()).unwrap();
        let twice = partial_transpose(&CovarianceMatrix::from_trusted(once.clone()), one_one()).unwrap();
        assert_eq!(&twice, sigma.matrix());
        assert!(linalg::max_abs_diff(&once, sigma.matrix()) > 0.1);
    }

    #[test]
    fn product_state_spectrum_unchanged() {
        let sigma = thermal(&[2.0, 3.5]).unwrap();
        let spec = partial_transpose_spectrum(&sigma, one_one()).unwrap();
        assert!((spec.nus()[0] - 3.5).abs() < 1e-12);
        assert!((spec.nus()[1] - 2.0).abs() < 1e-12);
        assert!(sigma_tilde_indicator(&sigma, one_one()).unwrap() > 0.0);
    }

    #[test]
    fn two_mode_squeezed_is_entangled() {
        let r = 0.4_f64;
        let sigma = two_mode_squeezed(1.0, r).unwrap();
        let spec = partial_transpose_spectrum(&sigma, one_one()).unwrap();
        assert!(spec.is_pseudo());
        assert!((spec.min() - (-2.0 * r).exp()).abs() < 1e-12);
        assert!((spec.max() - (2.0 * r).exp()).abs() < 1e-12);
        let expected = ((-4.0 * r).exp() - 1.0) * ((4.0 * r).exp() - 1.0);
        let value = sigma_tilde_indicator(&sigma, one_one()).unwrap();
        assert!(value < 0.0);
        assert!((value - expected).abs() < 1e-10);
    }

    #[test]
    fn vacuum_sits_on_the_boundary() {
        assert!(sigma_tilde_indicator(&vacuum(2).unwrap(), one_one()).unwrap().abs() < 1e-14);
    }

    fn fd_rate(sigma: &CovarianceMatrix, part: Bipartition, chi: f64) -> f64 {
        let h = 1e-6;
        let ahead = sigma_tilde_indicator(&evolve(sigma, chi, h).unwrap(), part).unwrap();
        // backward step along the same closed form
        let back = crate::dynamics::evolve_matrix(sigma.matrix(), chi, -h);
        let behind = sigma_tilde_indicator(&CovarianceMatrix::from_trusted(back), part).unwrap();
        (ahead - behind) / (2.0 * h)
    }

    #[test]
    fn fixed_point_rate_vanishes() {
        let chi = 1.8;
        let sigma = thermal(&[chi, chi]).unwrap();
        let rate = sigma_tilde_rate(&sigma, one_one(), chi).unwrap();
        assert!(rate.abs() < 1e-10);
        assert!(fd_rate(&sigma, one_one(), chi).abs() < 1e-6);
    }

    #[test]
    fn loss_pushes_towards_separability() {
        let sigma = two_mode_squeezed(1.0, 0.4).unwrap();
        let rate = sigma_tilde_rate(&sigma, one_one(), 1.0).unwrap();
        let fd = fd_rate(&sigma, one_one(), 1.0);
        assert!(rate > 0.0);
        assert!(((rate - fd) / rate).abs() < 1e-5);
    }
}
