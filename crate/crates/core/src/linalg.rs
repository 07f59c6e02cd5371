//! Dense helpers shared by the decompositions.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Largest absolute entry.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Largest absolute entry of `a - b`.
pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).abs()))
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Symmetric eigendecomposition with eigenvalues sorted in descending order;
/// eigenvectors are the matching columns.
pub fn sym_eigen_desc(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(symmetrize(m));
    let dim = m.nrows();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = DVector::from_iterator(dim, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(dim, dim);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Applies `f` to the eigenvalues of a symmetric matrix.
pub fn sym_fn(m: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let (vals, vecs) = sym_eigen_desc(m);
    let mapped = DMatrix::from_diagonal(&vals.map(f));
    symmetrize(&(&vecs * mapped * vecs.transpose()))
}

/// `⊕ vᵢ I₂`.
pub fn block_diag_pairs(values: &[f64]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(2 * values.len(), 2 * values.len());
    for (i, v) in values.iter().enumerate() {
        m[(2 * i, 2 * i)] = *v;
        m[(2 * i + 1, 2 * i + 1)] = *v;
    }
    m
}

/// `diag(z₁, 1/z₁, …, zₙ, 1/zₙ)`.
pub fn squeezer(zs: &[f64]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(2 * zs.len(), 2 * zs.len());
    for (i, z) in zs.iter().enumerate() {
        m[(2 * i, 2 * i)] = *z;
        m[(2 * i + 1, 2 * i + 1)] = 1.0 / *z;
    }
    m
}

/// Permutation taking xpxp ordering to xxpp ordering (`v_xxpp = P v_xpxp`).
pub fn xpxp_to_xxpp(n: usize) -> DMatrix<f64> {
    let mut p = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        p[(k, 2 * k)] = 1.0;
        p[(n + k, 2 * k + 1)] = 1.0;
    }
    p
}

pub(crate) fn omega_matrix(n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        m[(2 * i, 2 * i + 1)] = 1.0;
        m[(2 * i + 1, 2 * i)] = -1.0;
    }
    m
}

/// Inverse of a symplectic matrix, `S⁻¹ = -Ω Sᵀ Ω`.
pub fn symplectic_inverse(s: &DMatrix<f64>) -> DMatrix<f64> {
    let omega = omega_matrix(s.nrows() / 2);
    -(&omega * s.transpose() * &omega)
}

/// Orthogonal polar factor `U Vᵀ` of a square matrix.
pub fn orthogonal_polar(m: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested Vᵀ");
    u * v_t
}
