//! Random orthogonal-symplectic, symplectic and covariance matrices.
//!
//! Orthogonal-symplectic matrices are drawn through the isomorphism with
//! `U(n)`: a Haar unitary `U = X + iY` maps to `[[X, Y], [−Y, X]]` in xxpp
//! ordering. General symplectics are `R₁ Z R₂` with log-uniform squeezing.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::gaussian::{CovarianceMatrix, SymplecticMatrix};
use crate::linalg;

/// Haar-distributed `n×n` unitary (QR of a complex Ginibre matrix with the
/// phases of `diag(R)` divided out).
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut u = q;
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            u[(i, j)] *= phase;
        }
    }
    u
}

/// Real xpxp representation of a unitary acting on the mode amplitudes.
pub fn orthosymplectic_from_unitary(u: &DMatrix<Complex64>) -> DMatrix<f64> {
    let n = u.nrows();
    let mut xxpp = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let (re, im) = (u[(i, j)].re, u[(i, j)].im);
            xxpp[(i, j)] = re;
            xxpp[(n + i, n + j)] = re;
            xxpp[(i, n + j)] = im;
            xxpp[(n + i, j)] = -im;
        }
    }
    let p = linalg::xpxp_to_xxpp(n);
    p.transpose() * xxpp * p
}

pub fn random_orthosymplectic<R: Rng + ?Sized>(rng: &mut R, n: usize) -> SymplecticMatrix {
    SymplecticMatrix::from_trusted(orthosymplectic_from_unitary(&random_unitary(rng, n)))
}

/// Log-uniform draw in `[1, z_max]`.
pub fn log_uniform<R: Rng + ?Sized>(rng: &mut R, z_max: f64) -> f64 {
    if z_max <= 1.0 {
        return 1.0;
    }
    (rng.random::<f64>() * z_max.ln()).exp()
}

/// `R₁ Z R₂` with each `zᵢ` log-uniform in `[1, zbars[i]]`.
pub fn random_budgeted_symplectic<R: Rng + ?Sized>(rng: &mut R, zbars: &[f64]) -> SymplecticMatrix {
    let n = zbars.len();
    let zs: Vec<f64> = zbars.iter().map(|zb| log_uniform(rng, *zb)).collect();
    let r1 = random_orthosymplectic(rng, n);
    let r2 = random_orthosymplectic(rng, n);
    SymplecticMatrix::from_trusted(r1.matrix() * linalg::squeezer(&zs) * r2.matrix())
}

pub fn random_symplectic<R: Rng + ?Sized>(rng: &mut R, n: usize, z_max: f64) -> SymplecticMatrix {
    random_budgeted_symplectic(rng, &vec![z_max; n])
}

/// `S W Sᵀ` with `νᵢ` uniform in `[1, nu_max]` and `S` from [`random_symplectic`].
pub fn random_covariance<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    nu_max: f64,
    z_max: f64,
) -> CovarianceMatrix {
    let nus: Vec<f64> = (0..n)
        .map(|_| 1.0 + rng.random::<f64>() * (nu_max - 1.0).max(0.0))
        .collect();
    let s = random_symplectic(rng, n, z_max);
    CovarianceMatrix::from_trusted(s.matrix() * linalg::block_diag_pairs(&nus) * s.matrix().transpose())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::williamson::orthosymplectic_residual;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sampled_orthosymplectics_are_orthosymplectic() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..=6 {
            let r = random_orthosymplectic(&mut rng, n);
            assert!(orthosymplectic_residual(r.matrix()).unwrap() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn log_uniform_stays_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let z = log_uniform(&mut rng, 7.0);
            assert!((1.0..=7.0).contains(&z));
        }
        assert_eq!(log_uniform(&mut rng, 1.0), 1.0);
    }
}
