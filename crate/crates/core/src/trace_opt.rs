//! Extremes of `tr[S Y Sᵀ]` over symplectics with bounded per-mode squeezing.
//!
//! For `Y = ⊕ yᵢ I₂` and a budget `z̄₁ ≥ … ≥ z̄ₙ`, the supremum is
//! `Σ 2ζ⁺(z̄ᵢ) yᵢ` with the sequences paired in descending order, attained by
//! `S = Z̄`; the infimum is `tr Y = 2Σ yᵢ`, attained by any
//! orthogonal-symplectic `S`. The reduction goes through the unistochastic
//! matrix `Pᵢⱼ = |Uᵢⱼ|²` of the passive factor, whose extremes over the
//! Birkhoff polytope sit at permutation matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::gaussian::SymplecticMatrix;
use crate::invariants::weighted_trace;
use crate::linalg;
use crate::sampling;
use crate::williamson::orthosymplectic_residual;

fn check_z(z: f64) -> Result<()> {
    if !(z >= 1.0) || !z.is_finite() {
        return Err(Error::Domain(format!("squeezing z ≥ 1 required, got {z}")));
    }
    Ok(())
}

/// `ζ⁺_z = (z² + z⁻²)/2`.
pub fn zeta_plus(z: f64) -> Result<f64> {
    check_z(z)?;
    Ok(0.5 * (z * z + 1.0 / (z * z)))
}

/// `ζ⁻_z = (z² − z⁻²)/2`.
pub fn zeta_minus(z: f64) -> Result<f64> {
    check_z(z)?;
    Ok(0.5 * (z * z - 1.0 / (z * z)))
}

fn is_descending(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] >= w[1])
}

fn sorted_desc(v: &[f64]) -> Vec<f64> {
    let mut out = v.to_vec();
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

/// Maximum local squeezing per mode, descending.
#[derive(Debug, Clone, PartialEq)]
pub struct SqueezeBudget {
    zbars: Vec<f64>,
}

impl SqueezeBudget {
    pub fn new(zbars: Vec<f64>) -> Result<Self> {
        if zbars.is_empty() {
            return Err(Error::InvalidDimension("empty squeezing budget".into()));
        }
        for z in &zbars {
            check_z(*z)?;
        }
        if !is_descending(&zbars) {
            return Err(Error::ContractViolation(
                "squeezing budget must be sorted in descending order".into(),
            ));
        }
        Ok(Self { zbars })
    }

    pub fn sorted(zbars: &[f64]) -> Result<Self> {
        Self::new(sorted_desc(zbars))
    }

    pub fn uniform(n: usize, zbar: f64) -> Result<Self> {
        Self::new(vec![zbar; n])
    }

    pub fn zbars(&self) -> &[f64] {
        &self.zbars
    }

    pub fn modes(&self) -> usize {
        self.zbars.len()
    }
}

/// Weights `y₁ ≥ … ≥ yₙ > 0` of `Y = ⊕ yᵢ I₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalTarget {
    ys: Vec<f64>,
}

impl DiagonalTarget {
    pub fn new(ys: Vec<f64>) -> Result<Self> {
        if ys.is_empty() {
            return Err(Error::InvalidDimension("empty target".into()));
        }
        if let Some(y) = ys.iter().find(|y| !(**y > 0.0) || !y.is_finite()) {
            return Err(Error::Domain(format!("target weight {y} must be positive")));
        }
        if !is_descending(&ys) {
            return Err(Error::ContractViolation(
                "target weights must be sorted in descending order".into(),
            ));
        }
        Ok(Self { ys })
    }

    pub fn sorted(ys: &[f64]) -> Result<Self> {
        Self::new(sorted_desc(ys))
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn modes(&self) -> usize {
        self.ys.len()
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        linalg::block_diag_pairs(&self.ys)
    }
}

/// A bound on `tr[SYSᵀ]` and a symplectic attaining it.
#[derive(Debug, Clone)]
pub struct TraceBound {
    pub value: f64,
    pub s_star: SymplecticMatrix,
}

/// `tr[S (⊕ yᵢ I₂) Sᵀ]`.
pub fn block_trace(s: &SymplecticMatrix, y: &DiagonalTarget) -> Result<f64> {
    if s.modes() != y.modes() {
        return Err(Error::DimensionMismatch {
            expected: 2 * y.modes(),
            got: s.matrix().nrows(),
        });
    }
    Ok(weighted_trace(s.matrix(), y.ys()))
}

pub fn trace_sup(y: &DiagonalTarget, budget: &SqueezeBudget) -> Result<TraceBound> {
    if y.modes() != budget.modes() {
        return Err(Error::DimensionMismatch {
            expected: y.modes(),
            got: budget.modes(),
        });
    }
    let value = y
        .ys
        .iter()
        .zip(&budget.zbars)
        .map(|(yi, zi)| zeta_plus(*zi).map(|zp| 2.0 * zp * yi))
        .sum::<Result<f64>>()?;
    Ok(TraceBound {
        value,
        s_star: SymplecticMatrix::squeezer(&budget.zbars)?,
    })
}

pub fn trace_inf(y: &DiagonalTarget) -> TraceBound {
    TraceBound {
        value: 2.0 * y.ys.iter().sum::<f64>(),
        s_star: SymplecticMatrix::identity(y.modes()),
    }
}

/// Optimal pairing of an unsorted budget with unsorted per-mode weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SqueezeAssignment {
    /// `Σ 2ζ⁺ yᵢ` at the optimum.
    pub value: f64,
    /// Squeezing assigned to each mode, in the caller's mode order.
    pub zs: Vec<f64>,
    /// `order[r]` is the mode receiving the `r`-th largest budget entry.
    pub order: Vec<usize>,
}

/// Sorts both sequences, pairs the largest `z̄` with the largest weight and
/// maps the assignment back to the caller's mode order.
pub fn assign_squeezing(weights: &[f64], zbars: &[f64]) -> Result<SqueezeAssignment> {
    if weights.len() != zbars.len() {
        return Err(Error::DimensionMismatch {
            expected: weights.len(),
            got: zbars.len(),
        });
    }
    let budget = SqueezeBudget::sorted(zbars)?;
    let mut order: Vec<usize> = (0..weights.len()).collect();
    // stable: ties keep mode order
    order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]));
    let target = DiagonalTarget::new(order.iter().map(|&i| weights[i]).collect())?;
    let value = trace_sup(&target, &budget)?.value;
    let mut zs = vec![1.0; weights.len()];
    for (rank, &mode) in order.iter().enumerate() {
        zs[mode] = budget.zbars[rank];
    }
    Ok(SqueezeAssignment { value, zs, order })
}

/// `(sup, inf)` of `αᵀXβ` over bistochastic `X`: `α↓ᵀβ↓` and `α↑ᵀβ↓`.
pub fn bistochastic_extremes(alpha: &[f64], beta: &[f64]) -> Result<(f64, f64)> {
    if alpha.len() != beta.len() {
        return Err(Error::DimensionMismatch {
            expected: alpha.len(),
            got: beta.len(),
        });
    }
    let a_desc = sorted_desc(alpha);
    let b_desc = sorted_desc(beta);
    let sup = a_desc.iter().zip(&b_desc).map(|(a, b)| a * b).sum();
    let inf = a_desc.iter().rev().zip(&b_desc).map(|(a, b)| a * b).sum();
    Ok((sup, inf))
}

/// Both sides of `tr[Z²R₂YR₂ᵀ] = 2αᵀPβ`.
#[derive(Debug, Clone)]
pub struct UnistochasticCheck {
    pub raw_trace: f64,
    pub reduced: f64,
    pub residual: f64,
    /// `Pᵢⱼ = |Uᵢⱼ|²` for the unitary block of `R₂`.
    pub p: DMatrix<f64>,
}

/// The xpxp → complex-amplitude change of basis `QP`, with
/// `Q = (1/√2)[[I, iI], [I, −iI]]`.
fn qp_basis(n: usize) -> DMatrix<Complex64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut q = DMatrix::from_element(2 * n, 2 * n, Complex64::new(0.0, 0.0));
    for k in 0..n {
        q[(k, k)] = Complex64::new(s, 0.0);
        q[(k, n + k)] = Complex64::new(0.0, s);
        q[(n + k, k)] = Complex64::new(s, 0.0);
        q[(n + k, n + k)] = Complex64::new(0.0, -s);
    }
    let p = linalg::xpxp_to_xxpp(n).map(|v| Complex64::new(v, 0.0));
    q * p
}

/// Unitary `U` with `(QP) R (QP)⁻¹ = diag(U*, U)` for an orthogonal-symplectic `R`.
pub fn unitary_block(r: &SymplecticMatrix) -> Result<DMatrix<Complex64>> {
    let residual = orthosymplectic_residual(r.matrix())?;
    if residual > 1e-9 {
        return Err(Error::NotOrthoSymplectic { residual });
    }
    let n = r.modes();
    let qp = qp_basis(n);
    let rc = r.matrix().map(|v| Complex64::new(v, 0.0));
    let rotated = &qp * rc * qp.adjoint();
    Ok(rotated.view((n, n), (n, n)).into_owned())
}

pub fn verify_unistochastic_reduction(
    zs: &[f64],
    r2: &SymplecticMatrix,
    y: &DiagonalTarget,
) -> Result<UnistochasticCheck> {
    let n = y.modes();
    if zs.len() != n || r2.modes() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: if zs.len() != n { zs.len() } else { r2.modes() },
        });
    }
    let u = unitary_block(r2)?;
    let z2 = linalg::squeezer(zs).map(|v| v * v);
    let raw_trace = (z2 * r2.matrix() * y.matrix() * r2.matrix().transpose()).trace();
    let p = u.map(|c| c.norm_sqr());
    let alpha: Vec<f64> = zs.iter().map(|z| 0.5 * (z * z + 1.0 / (z * z))).collect();
    let mut reduced = 0.0;
    for i in 0..n {
        for j in 0..n {
            reduced += alpha[i] * p[(i, j)] * y.ys[j];
        }
    }
    reduced *= 2.0;
    Ok(UnistochasticCheck {
        raw_trace,
        reduced,
        residual: (raw_trace - reduced).abs(),
        p,
    })
}

/// Outcome of a Monte-Carlo check of the trace bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct SandwichReport {
    pub sup: f64,
    pub inf: f64,
    pub max_sampled: f64,
    pub min_sampled: f64,
    pub samples: usize,
    /// Samples outside `[inf − slack, sup + slack]`.
    pub violations: usize,
}

/// Samples budgeted symplectics `R₁ZR₂` (`zᵢ` log-uniform in `[1, z̄ᵢ]`) and
/// checks that every `tr[SYSᵀ]` lies within the bounds.
pub fn sandwich_check(
    y: &DiagonalTarget,
    budget: &SqueezeBudget,
    samples: usize,
    seed: u64,
    slack: f64,
    exec: Execution,
) -> Result<SandwichReport> {
    let sup = trace_sup(y, budget)?.value;
    let inf = trace_inf(y).value;
    let values = exec::map_indices(exec, samples, |i| {
        let mut rng = exec::sample_rng(seed, i as u64);
        let s = sampling::random_budgeted_symplectic(&mut rng, budget.zbars());
        weighted_trace(s.matrix(), y.ys())
    });
    let max_sampled = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min_sampled = values.iter().copied().fold(f64::INFINITY, f64::min);
    let violations = values
        .iter()
        .filter(|v| **v > sup + slack || **v < inf - slack)
        .count();
    Ok(SandwichReport {
        sup,
        inf,
        max_sampled,
        min_sampled,
        samples,
        violations,
    })
}
