//! Lossy-channel evolution `σ̇ = −σ + χI` with impulsive symplectic control.
//!
//! Time is rescaled by the loss rate (`t = η t_phys`) throughout this module.
//! Between control actions the state follows the closed form
//! `σ(t) = χI + (σ(0) − χI)e^{−t}`; an action at time `t` replaces `σ` by `SσSᵀ`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::gaussian::{apply_symplectic, BathParams, CovarianceMatrix, SymplecticMatrix};
use crate::invariants::{self, InvariantSet};
use crate::linalg;
use crate::trace_opt::{assign_squeezing, zeta_plus, SqueezeBudget};
use crate::williamson::{self, squeezing_measure};

fn check_chi(chi: f64) -> Result<()> {
    if !(chi >= 1.0) || !chi.is_finite() {
        return Err(Error::Domain(format!("chi ≥ 1 required, got {chi}")));
    }
    Ok(())
}

/// Closed-form flow without domain checks; negative `t` extrapolates backwards.
pub fn evolve_matrix(m: &DMatrix<f64>, chi: f64, t: f64) -> DMatrix<f64> {
    let id = DMatrix::<f64>::identity(m.nrows(), m.ncols());
    let decay = (-t).exp();
    &id * chi + (m - &id * chi) * decay
}

/// Exact state after rescaled time `t` of free lossy evolution.
pub fn evolve(sigma0: &CovarianceMatrix, chi: f64, t: f64) -> Result<CovarianceMatrix> {
    check_chi(chi)?;
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("evolution time must be ≥ 0, got {t}")));
    }
    Ok(CovarianceMatrix::from_trusted(evolve_matrix(sigma0.matrix(), chi, t)))
}

/// An instantaneous symplectic action at rescaled time `time`.
#[derive(Debug, Clone)]
pub struct ControlAction {
    pub time: f64,
    pub s: SymplecticMatrix,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    initial: CovarianceMatrix,
    bath: BathParams,
    schedule: Vec<ControlAction>,
    horizon: f64,
    sample_step: f64,
}

impl Scenario {
    pub fn new(
        initial: CovarianceMatrix,
        bath: BathParams,
        schedule: Vec<ControlAction>,
        horizon: f64,
        sample_step: f64,
    ) -> Result<Self> {
        if !(horizon >= 0.0) || !horizon.is_finite() {
            return Err(Error::Domain(format!("horizon must be ≥ 0, got {horizon}")));
        }
        if !(sample_step > 0.0) {
            return Err(Error::Domain(format!("sample step must be > 0, got {sample_step}")));
        }
        for (i, a) in schedule.iter().enumerate() {
            if !(a.time >= 0.0 && a.time <= horizon) {
                return Err(Error::ContractViolation(format!(
                    "control action {i} at t = {} lies outside [0, {horizon}]",
                    a.time
                )));
            }
            if i > 0 && !(a.time > schedule[i - 1].time) {
                return Err(Error::ContractViolation(
                    "control times must be strictly increasing".into(),
                ));
            }
            if a.s.modes() != initial.modes() {
                return Err(Error::DimensionMismatch {
                    expected: initial.matrix().nrows(),
                    got: a.s.matrix().nrows(),
                });
            }
        }
        Ok(Self {
            initial,
            bath,
            schedule,
            horizon,
            sample_step,
        })
    }

    pub fn initial(&self) -> &CovarianceMatrix {
        &self.initial
    }

    pub fn bath(&self) -> &BathParams {
        &self.bath
    }

    pub fn schedule(&self) -> &[ControlAction] {
        &self.schedule
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn sample_step(&self) -> f64 {
        self.sample_step
    }
}

#[derive(Debug, Clone)]
pub struct Sample {
    pub time: f64,
    pub sigma: CovarianceMatrix,
    pub invariants: InvariantSet,
    pub purity: f64,
    /// Squeezing measure of the state's Williamson factor.
    pub squeezing: f64,
    pub min_nu: f64,
}

impl Sample {
    pub fn of(time: f64, sigma: CovarianceMatrix) -> Result<Self> {
        let invariants = invariants::invariant_set(&sigma)?;
        let wd = williamson::williamson(&sigma)?;
        let squeezing = squeezing_measure(wd.s())?;
        Ok(Self {
            time,
            purity: invariants::purity(&sigma),
            min_nu: wd.spectrum().min(),
            invariants,
            squeezing,
            sigma,
        })
    }
}

/// Piece of closed-form evolution starting at `start` from `sigma`.
#[derive(Debug, Clone)]
pub struct Segment {
    pub start: f64,
    pub sigma: CovarianceMatrix,
}

/// Samples of a controlled run. Times are non-decreasing; a control time
/// appears twice, before and after the action.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    segments: Vec<Segment>,
    chi: f64,
    horizon: f64,
}

impl Trajectory {
    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Exact state at `t` (after any action scheduled exactly at `t`).
    pub fn state_at(&self, t: f64) -> DMatrix<f64> {
        let seg = self
            .segments
            .iter()
            .rev()
            .find(|s| s.start <= t)
            .unwrap_or(&self.segments[0]);
        evolve_matrix(seg.sigma.matrix(), self.chi, (t - seg.start).max(0.0))
    }

    /// Segment boundaries: `0`, every control time, and the horizon.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.segments.iter().map(|s| s.start).collect();
        b.push(self.horizon);
        b
    }
}

pub fn run_scenario(sc: &Scenario) -> Result<Trajectory> {
    let chi = sc.bath.chi();
    let mut samples = Vec::new();
    let mut segments = vec![Segment {
        start: 0.0,
        sigma: sc.initial.clone(),
    }];
    let mut grid: Vec<f64> = Vec::new();
    let steps = (sc.horizon / sc.sample_step).floor() as usize;
    for k in 0..=steps {
        grid.push(k as f64 * sc.sample_step);
    }
    if grid.last().is_none_or(|t| *t < sc.horizon) {
        grid.push(sc.horizon);
    }

    let mut actions = sc.schedule.iter().peekable();
    let mut current = sc.initial.clone();
    let mut seg_start = 0.0;
    for t in grid {
        while let Some(action) = actions.next_if(|a| a.time <= t) {
            let before = evolve(&current, chi, action.time - seg_start)?;
            let after = apply_symplectic(&before, &action.s)?;
            samples.push(Sample::of(action.time, before)?);
            samples.push(Sample::of(action.time, after.clone())?);
            current = after;
            seg_start = action.time;
            segments.push(Segment {
                start: seg_start,
                sigma: current.clone(),
            });
        }
        if samples.last().is_some_and(|s| s.time == t) {
            continue;
        }
        samples.push(Sample::of(t, evolve(&current, chi, t - seg_start)?)?);
    }
    Ok(Trajectory {
        samples,
        segments,
        chi,
        horizon: sc.horizon,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Heat,
    Cool,
}

/// Locally optimal instantaneous control for the rate of `ϑ₂ₖ`.
///
/// Cooling returns `S_W⁻¹`, leaving the thermal form `W`. Heating returns
/// `Z̄ S_W⁻¹`, leaving `Z̄WZ̄ᵀ`, with the budget matched to the modes by
/// descending weight of `Vₖ`.
pub fn optimal_control_for_order(
    sigma: &CovarianceMatrix,
    budget: &SqueezeBudget,
    direction: Direction,
    k: usize,
) -> Result<SymplecticMatrix> {
    let n = sigma.modes();
    if budget.modes() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: budget.modes(),
        });
    }
    let wd = williamson::williamson(sigma)?;
    let unsqueeze = wd.s().inverse();
    match direction {
        Direction::Cool => Ok(unsqueeze),
        Direction::Heat => {
            let v = invariants::v_matrix(wd.spectrum(), k)?;
            let assignment = assign_squeezing(v.weights(), budget.zbars())?;
            SymplecticMatrix::squeezer(&assignment.zs)?.compose(&unsqueeze)
        }
    }
}

/// [`optimal_control_for_order`] for the determinant invariant `ϑ₂ₙ = det σ`,
/// i.e. the purity.
pub fn optimal_control(
    sigma: &CovarianceMatrix,
    budget: &SqueezeBudget,
    direction: Direction,
) -> Result<SymplecticMatrix> {
    optimal_control_for_order(sigma, budget, direction, sigma.modes())
}

/// How a control schedule is synthesized from the model.
#[derive(Debug, Clone)]
pub enum ControlPolicy {
    None,
    /// One optimal action at `at`.
    Once {
        at: f64,
        direction: Direction,
        budget: SqueezeBudget,
    },
    /// Optimal actions at `start`, `start + period`, … up to the horizon.
    Periodic {
        start: f64,
        period: f64,
        direction: Direction,
        budget: SqueezeBudget,
    },
    Explicit(Vec<ControlAction>),
}

/// Open-loop schedule for `policy`: each action is computed from the
/// model-predicted state at its time.
pub fn synthesize_schedule(
    initial: &CovarianceMatrix,
    chi: f64,
    horizon: f64,
    policy: &ControlPolicy,
) -> Result<Vec<ControlAction>> {
    check_chi(chi)?;
    let (times, direction, budget) = match policy {
        ControlPolicy::None => return Ok(Vec::new()),
        ControlPolicy::Explicit(actions) => return Ok(actions.clone()),
        ControlPolicy::Once { at, direction, budget } => (vec![*at], *direction, budget),
        ControlPolicy::Periodic {
            start,
            period,
            direction,
            budget,
        } => {
            if !(*period > 0.0) {
                return Err(Error::Domain(format!("control period must be > 0, got {period}")));
            }
            let count = ((horizon - start) / period).floor().max(0.0) as usize;
            ((0..=count).map(|i| start + i as f64 * period).collect(), *direction, budget)
        }
    };
    let mut actions = Vec::with_capacity(times.len());
    let mut state = initial.clone();
    let mut last = 0.0;
    for t in times {
        if t > horizon {
            break;
        }
        state = evolve(&state, chi, t - last)?;
        let s = optimal_control(&state, budget, direction)?;
        state = apply_symplectic(&state, &s)?;
        last = t;
        actions.push(ControlAction { time: t, s });
    }
    Ok(actions)
}

/// `νᵢ(t) = χζ⁺_z + (νᵢ₀ − χζ⁺_z)e^{−t}` for a decoupled mode held at squeezing `z`.
pub fn single_mode_nu(nu0: f64, z: f64, chi: f64, t: f64) -> Result<f64> {
    check_chi(chi)?;
    if !(nu0 >= 1.0) {
        return Err(Error::Domain(format!("ν₀ ≥ 1 required, got {nu0}")));
    }
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("t ≥ 0 required, got {t}")));
    }
    let target = chi * zeta_plus(z)?;
    Ok(target + (nu0 - target) * (-t).exp())
}

/// Locally optimal heating time to `|νᵢ − χ| < ε` for every mode, squeezing
/// each decoupled mode at its budget. The largest budget goes to the coldest
/// mode, which minimizes the slowest mode's time. Returns `∞` when a mode
/// cannot reach the target (`z̄ = 1` with `ε = 0`).
pub fn t_heat(nu0s: &[f64], zbars: &[f64], chi: f64, eps: f64) -> Result<f64> {
    check_chi(chi)?;
    if nu0s.len() != zbars.len() || nu0s.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: nu0s.len(),
            got: zbars.len(),
        });
    }
    if !(eps >= 0.0) {
        return Err(Error::Domain(format!("ε ≥ 0 required, got {eps}")));
    }
    if let Some(nu) = nu0s.iter().find(|nu| !(**nu < chi)) {
        return Err(Error::WrongDirection(format!(
            "ν₀ = {nu} ≥ χ = {chi}: the channel is not heating this mode"
        )));
    }
    let weights: Vec<f64> = nu0s.iter().map(|nu| 1.0 / nu).collect();
    let assignment = assign_squeezing(&weights, zbars)?;
    let mut worst = 0.0_f64;
    for (nu0, z) in nu0s.iter().zip(&assignment.zs) {
        let zp = zeta_plus(*z)?;
        let denom = chi * (zp - 1.0) + eps;
        if denom <= 0.0 {
            return Ok(f64::INFINITY);
        }
        worst = worst.max(((chi * zp - nu0) / denom).ln().max(0.0));
    }
    Ok(worst)
}

/// Optimal cooling time `sup ln[(νᵢ₀ − χ)/ε]`; `∞` for `ε = 0`.
pub fn t_cool(nu0s: &[f64], chi: f64, eps: f64) -> Result<f64> {
    check_chi(chi)?;
    if nu0s.is_empty() {
        return Err(Error::InvalidDimension("no modes".into()));
    }
    if let Some(nu) = nu0s.iter().find(|nu| !(**nu > chi)) {
        return Err(Error::WrongDirection(format!(
            "ν₀ = {nu} ≤ χ = {chi}: the channel is not cooling this mode"
        )));
    }
    if eps < 0.0 || eps.is_nan() {
        return Err(Error::Domain(format!("ε ≥ 0 required, got {eps}")));
    }
    if eps == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(nu0s
        .iter()
        .map(|nu| ((nu - chi) / eps).ln().max(0.0))
        .fold(0.0, f64::max))
}

/// Free relaxation time of a single mode with initial symplectic eigenvalue
/// `ν₀` and squeezing `z₀`.
pub fn t_free_single_mode(nu0: f64, z0: f64, chi: f64, eps: f64) -> Result<f64> {
    check_chi(chi)?;
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("ε > 0 required, got {eps}")));
    }
    if !(nu0 >= 1.0) {
        return Err(Error::Domain(format!("ν₀ ≥ 1 required, got {nu0}")));
    }
    let zp = zeta_plus(z0)?;
    let chi2 = chi * chi;
    let radicand = (chi - nu0 * zp).powi(2) + nu0 * nu0 * (zp * zp - 1.0) * (chi2 - 1.0) / (chi2 + 1.0);
    let arg = radicand.sqrt() / eps;
    if arg <= 0.0 {
        return Ok(0.0);
    }
    Ok(arg.ln().max(0.0))
}

/// Distance `ε = 2√(χ²−1)√ε′` equivalent, to first order, to a fidelity
/// tolerance `ε′` around the bath state.
pub fn epsilon_from_fidelity_tolerance(chi: f64, eps_prime: f64) -> Result<f64> {
    check_chi(chi)?;
    if !(eps_prime >= 0.0) {
        return Err(Error::Domain(format!("ε′ ≥ 0 required, got {eps_prime}")));
    }
    Ok(2.0 * (chi * chi - 1.0).sqrt() * eps_prime.sqrt())
}

/// Single-mode cooling time expressed through the purity target
/// `μ = (1/χ)[1 − 2(√ε′/χ)√(χ²−1)]`, with `1/μ` expanded to first order in `√ε′`.
pub fn t_cool_fidelity(nu0: f64, chi: f64, eps_prime: f64) -> Result<f64> {
    check_chi(chi)?;
    if !(nu0 > chi) {
        return Err(Error::WrongDirection(format!(
            "ν₀ = {nu0} ≤ χ = {chi}: the channel is not cooling"
        )));
    }
    let a = 2.0 * eps_prime.sqrt() * (chi * chi - 1.0).sqrt() / chi;
    // 1/μ ≈ χ(1 + a)
    let inv_mu = chi * (1.0 + a);
    let gap = inv_mu - chi;
    if !(gap > 0.0) {
        return Ok(f64::INFINITY);
    }
    Ok(((nu0 - chi) / gap).ln().max(0.0))
}

/// Cooling purity target `μ = (1/χ)[1 − 2(√ε′/χ)√(χ²−1)]`.
pub fn cooling_purity_target(chi: f64, eps_prime: f64) -> Result<f64> {
    check_chi(chi)?;
    Ok((1.0 - 2.0 * eps_prime.sqrt() * (chi * chi - 1.0).sqrt() / chi) / chi)
}

/// Block-diagonality residual: largest entry coupling different modes.
pub fn intermode_coupling(m: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0_f64;
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            if r / 2 != c / 2 {
                worst = worst.max(m[(r, c)].abs());
            }
        }
    }
    worst
}

/// `‖σ − χI‖` in the max-entry norm.
pub fn distance_to_fixed_point(m: &DMatrix<f64>, chi: f64) -> f64 {
    linalg::max_abs_diff(m, &(DMatrix::identity(m.nrows(), m.ncols()) * chi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{thermal, two_mode_squeezed, vacuum};
    use crate::invariants::{invariant_rate, purity};
    use nalgebra::dvector;

    #[test]
    fn fixed_point_is_stationary() {
        let chi = 2.5;
        let sigma = thermal(&[chi, chi]).unwrap();
        for t in [0.0, 0.3, 7.0] {
            let out = evolve(&sigma, chi, t).unwrap();
            assert!(linalg::max_abs_diff(out.matrix(), sigma.matrix()) < 1e-15);
        }
    }

    #[test]
    fn long_times_reach_the_bath() {
        let sigma = two_mode_squeezed(3.0, 0.7).unwrap();
        let out = evolve(&sigma, 1.4, 60.0).unwrap();
        assert!(distance_to_fixed_point(out.matrix(), 1.4) < 1e-20_f64.max(1e-12));
    }

    #[test]
    fn initial_slope_matches_generator() {
        let sigma = two_mode_squeezed(1.5, 0.4).unwrap();
        let chi = 1.3;
        let h = 1e-6;
        let fd = (evolve(&sigma, chi, h).unwrap().into_matrix() - sigma.matrix()) / h;
        let generator = -sigma.matrix() + DMatrix::identity(4, 4) * chi;
        assert!(linalg::max_abs_diff(&fd, &generator) < 1e-5);
    }

    #[test]
    fn evolve_rejects_negative_time() {
        assert!(evolve(&vacuum(1).unwrap(), 1.0, -0.1).is_err());
        assert!(evolve(&vacuum(1).unwrap(), 0.5, 0.1).is_err());
    }

    #[test]
    fn semigroup_and_contraction() {
        let sigma = two_mode_squeezed(2.0, 0.4).unwrap();
        let chi = 1.7;
        let (s, t) = (0.37, 1.21);
        let direct = evolve(&sigma, chi, s + t).unwrap();
        let stepped = evolve(&evolve(&sigma, chi, s).unwrap(), chi, t).unwrap();
        assert!(linalg::max_abs_diff(direct.matrix(), stepped.matrix()) < 1e-12);
        let d0 = distance_to_fixed_point(sigma.matrix(), chi);
        let dt = distance_to_fixed_point(direct.matrix(), chi);
        assert!((dt - d0 * (-(s + t)).exp()).abs() < 1e-12);
    }

    fn bath(chi: f64) -> BathParams {
        BathParams::new(chi, 1e5).unwrap()
    }

    #[test]
    fn free_scenario_matches_evolve() {
        let sigma = two_mode_squeezed(2.0, 0.4).unwrap();
        let sc = Scenario::new(sigma.clone(), bath(1.2), vec![], 3.0, 0.25).unwrap();
        let traj = run_scenario(&sc).unwrap();
        assert_eq!(traj.samples.len(), 13);
        for s in &traj.samples {
            let expected = evolve(&sigma, 1.2, s.time).unwrap();
            assert!(linalg::max_abs_diff(s.sigma.matrix(), expected.matrix()) < 1e-12);
        }
    }

    #[test]
    fn identity_action_changes_nothing() {
        let sigma = two_mode_squeezed(2.0, 0.4).unwrap();
        let free = run_scenario(&Scenario::new(sigma.clone(), bath(1.2), vec![], 2.0, 0.5).unwrap()).unwrap();
        let action = ControlAction {
            time: 0.75,
            s: SymplecticMatrix::identity(2),
        };
        let ctl = run_scenario(&Scenario::new(sigma, bath(1.2), vec![action], 2.0, 0.5).unwrap()).unwrap();
        for s in &ctl.samples {
            let reference = free.state_at(s.time);
            assert!(linalg::max_abs_diff(s.sigma.matrix(), &reference) < 1e-12);
        }
    }

    #[test]
    fn purity_is_continuous_across_actions() {
        let sigma = two_mode_squeezed(2.0, 0.4).unwrap();
        let at_half = evolve(&sigma, 1.1, 0.5).unwrap();
        let s = optimal_control(&at_half, &SqueezeBudget::uniform(2, 1.0).unwrap(), Direction::Cool).unwrap();
        let sc = Scenario::new(sigma, bath(1.1), vec![ControlAction { time: 0.5, s }], 1.0, 0.1).unwrap();
        let traj = run_scenario(&sc).unwrap();
        let at: Vec<&Sample> = traj.samples.iter().filter(|s| s.time == 0.5).collect();
        assert_eq!(at.len(), 2);
        assert!((at[0].purity - at[1].purity).abs() < 1e-10);
        assert!(at[0].squeezing > 0.1);
        assert!(at[1].squeezing < 1e-9);
    }

    #[test]
    fn scenario_validation() {
        let sigma = vacuum(1).unwrap();
        let a = |t| ControlAction {
            time: t,
            s: SymplecticMatrix::identity(1),
        };
        assert!(Scenario::new(sigma.clone(), bath(1.0), vec![a(0.5), a(0.5)], 1.0, 0.1).is_err());
        assert!(Scenario::new(sigma.clone(), bath(1.0), vec![a(1.5)], 1.0, 0.1).is_err());
        assert!(Scenario::new(sigma.clone(), bath(1.0), vec![], 1.0, 0.0).is_err());
        let wrong = ControlAction {
            time: 0.1,
            s: SymplecticMatrix::identity(2),
        };
        assert!(Scenario::new(sigma, bath(1.0), vec![wrong], 1.0, 0.1).is_err());
    }

    #[test]
    fn cooling_control_of_thermal_state_is_trivial() {
        let sigma = thermal(&[3.0, 2.0]).unwrap();
        let c = optimal_control(&sigma, &SqueezeBudget::uniform(2, 2.0).unwrap(), Direction::Cool).unwrap();
        let after = apply_symplectic(&sigma, &c).unwrap();
        assert!(linalg::max_abs_diff(after.matrix(), sigma.matrix()) < 1e-12);
    }

    #[test]
    fn cooling_undoes_two_mode_squeezing() {
        let sigma = two_mode_squeezed(2.0, 0.4).unwrap();
        let c = optimal_control(&sigma, &SqueezeBudget::uniform(2, 1.0).unwrap(), Direction::Cool).unwrap();
        let after = apply_symplectic(&sigma, &c).unwrap();
        assert!(linalg::max_abs_diff(after.matrix(), &(DMatrix::identity(4, 4) * 2.0)) < 1e-10);
    }

    #[test]
    fn heating_squeezes_the_thermal_mode() {
        let chi = 1.5;
        let sigma = thermal(&[3.0]).unwrap();
        let c = optimal_control(&sigma, &SqueezeBudget::new(vec![2.0]).unwrap(), Direction::Heat).unwrap();
        let after = apply_symplectic(&sigma, &c).unwrap();
        let expected = DMatrix::from_diagonal(&dvector![12.0, 0.75]);
        assert!(linalg::max_abs_diff(after.matrix(), &expected) < 1e-12);
        let before_rate = invariant_rate(&sigma, 1, chi).unwrap();
        let after_rate = invariant_rate(&after, 1, chi).unwrap();
        assert!(after_rate > before_rate);
        // ϑ̇₂ = −2ν² + 2χζ⁺ν
        assert!((before_rate - (-18.0 + 2.0 * chi * 3.0)).abs() < 1e-10);
        assert!((after_rate - (-18.0 + 2.0 * chi * 2.125 * 3.0)).abs() < 1e-10);
    }

    #[test]
    fn decoupled_state_stays_block_diagonal() {
        let sigma = two_mode_squeezed(1.0, 0.4).unwrap();
        let budget = SqueezeBudget::new(vec![2.0, 1.5]).unwrap();
        let c = optimal_control(&sigma, &budget, Direction::Heat).unwrap();
        let after = apply_symplectic(&sigma, &c).unwrap();
        assert!(intermode_coupling(after.matrix()) < 1e-10);
        for t in [0.1, 0.5, 2.0, 10.0] {
            let m = evolve(&after, 1.3, t).unwrap();
            assert!(intermode_coupling(m.matrix()) < 1e-10);
        }
    }

    #[test]
    fn heat_pairing_favours_the_cold_mode_for_the_determinant() {
        let sigma = thermal(&[3.0, 1.0]).unwrap();
        let budget = SqueezeBudget::new(vec![3.0, 1.0]).unwrap();
        let c = optimal_control(&sigma, &budget, Direction::Heat).unwrap();
        let after = apply_symplectic(&sigma, &c).unwrap();
        // the ν = 1 mode carries the larger V₂ weight (3² vs 1²)
        let block = |i: usize| (after.matrix()[(2 * i, 2 * i)], after.matrix()[(2 * i + 1, 2 * i + 1)]);
        let (hot, cold) = (block(0), block(1));
        assert!((hot.0 - 3.0).abs() < 1e-12 && (hot.1 - 3.0).abs() < 1e-12);
        assert!((cold.0 - 9.0).abs() < 1e-12 && (cold.1 - 1.0 / 9.0).abs() < 1e-12);
        // for ϑ₂ the hot mode wins instead
        let c1 = optimal_control_for_order(&sigma, &budget, Direction::Heat, 1).unwrap();
        let after1 = apply_symplectic(&sigma, &c1).unwrap();
        assert!((after1.matrix()[(0, 0)] - 27.0).abs() < 1e-10);
    }

    #[test]
    fn single_mode_nu_examples() {
        assert!((single_mode_nu(5.0, 1.0, 1.0, 50.0).unwrap() - 1.0).abs() < 1e-15);
        let zp4 = zeta_plus(4.0).unwrap();
        assert!((zp4 - 8.03125).abs() < 1e-15);
        assert!(single_mode_nu(5.0, 4.0, 1.0, 0.1).unwrap() > 5.0);
        let zp3 = zeta_plus(3.0).unwrap();
        assert!(zp3 < 5.0);
        let mut prev = 5.0;
        for i in 1..=100 {
            let nu = single_mode_nu(5.0, 3.0, 1.0, i as f64 * 0.05).unwrap();
            assert!(nu < prev);
            prev = nu;
        }
        assert!(single_mode_nu(0.5, 1.0, 1.0, 0.0).is_err());
        assert!(single_mode_nu(2.0, 1.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn t_heat_examples() {
        // ν₀ = 1, χ = 2, ζ⁺ = 3
        let z = (3.0_f64 + 8.0_f64.sqrt()).sqrt();
        assert!((zeta_plus(z).unwrap() - 3.0).abs() < 1e-12);
        let t = t_heat(&[1.0], &[z], 2.0, 0.0).unwrap();
        assert!((t - 1.25_f64.ln()).abs() < 1e-12);
        let chi = 1.5;
        let nu0 = chi - 1e-3;
        assert!(t_heat(&[nu0], &[1e4], chi, 0.0).unwrap() < 1e-6);
        // ε chosen so that the log argument is 1
        let (nu0, z) = (1.0, 2.0);
        let zp = zeta_plus(z).unwrap();
        let eps = chi * zp - nu0 - chi * (zp - 1.0);
        assert!(t_heat(&[nu0], &[z], chi, eps).unwrap().abs() < 1e-12);
        assert_eq!(t_heat(&[1.0, 1.2], &[1.0, 1.0], chi, 0.0).unwrap(), f64::INFINITY);
        assert!(matches!(t_heat(&[2.0], &[2.0], chi, 0.1), Err(Error::WrongDirection(_))));
    }

    #[test]
    fn t_heat_gives_the_largest_budget_to_the_coldest_mode() {
        let z = |zp: f64| (zp + (zp * zp - 1.0).sqrt()).sqrt();
        let t = t_heat(&[1.0, 1.5], &[z(3.0), z(1.5)], 2.0, 0.0).unwrap();
        // ln(5/4) for the cold mode and ln(1.5) for the warm one
        assert!((t - 1.5_f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn t_cool_examples() {
        let (chi, eps) = (1.0, 0.04);
        assert!(t_cool(&[chi + eps], chi, eps).unwrap().abs() < 1e-12);
        assert!((t_cool(&[5.0], chi, eps).unwrap() - 100f64.ln()).abs() < 1e-12);
        assert!((t_cool(&[5.0, 2.0], chi, eps).unwrap() - 100f64.ln()).abs() < 1e-12);
        assert_eq!(t_cool(&[5.0], chi, 0.0).unwrap(), f64::INFINITY);
        assert!(matches!(t_cool(&[1.0], 1.0, 0.1), Err(Error::WrongDirection(_))));
        assert!(t_cool(&[5.0], 1.0, -0.1).is_err());
    }

    #[test]
    fn t_free_examples() {
        assert_eq!(t_free_single_mode(2.0, 1.0, 2.0, 0.1).unwrap(), 0.0);
        assert!((t_free_single_mode(2.0, 1.0, 1.0, 0.01).unwrap() - 100f64.ln()).abs() < 1e-12);
        let z = (2.0_f64 + 3.0_f64.sqrt()).sqrt();
        let t = t_free_single_mode(1.0, z, 3.0, 0.1).unwrap();
        assert!((t - (10.0 * 3.4_f64.sqrt()).ln()).abs() < 1e-12);
        assert!(t_free_single_mode(2.0, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn unsqueezed_free_cooling_coincides_with_t_cool() {
        for (nu0, chi, eps) in [(2.0, 1.0, 0.01), (4.0, 1.0, 0.2)] {
            let a = t_free_single_mode(nu0, 1.0, chi, eps).unwrap();
            let b = t_cool(&[nu0], chi, eps).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn fidelity_mapping() {
        let (nu0, chi, eps_prime) = (3.0, 1.4, 1e-6);
        let eps = epsilon_from_fidelity_tolerance(chi, eps_prime).unwrap();
        let a = t_cool(&[nu0], chi, eps).unwrap();
        let b = t_cool_fidelity(nu0, chi, eps_prime).unwrap();
        assert!((a - b).abs() < 1e-9);
        // the exact purity target differs at order √ε′
        let mu = cooling_purity_target(chi, eps_prime).unwrap();
        let exact = ((nu0 - chi) / (1.0 / mu - chi)).ln();
        assert!((exact - a).abs() < 10.0 * eps_prime.sqrt());
    }

    #[test]
    fn periodic_squeezing_prevents_cooling() {
        // χ < ν₀ < χζ⁺: the cooling channel never lowers ν below its start
        let (chi, nu0, zbar) = (1.0, 2.0, 2.0);
        assert!(chi * zeta_plus(zbar).unwrap() > nu0);
        let sigma = thermal(&[nu0]).unwrap();
        let policy = ControlPolicy::Periodic {
            start: 0.0,
            period: 0.05,
            direction: Direction::Heat,
            budget: SqueezeBudget::new(vec![zbar]).unwrap(),
        };
        let schedule = synthesize_schedule(&sigma, chi, 1.0, &policy).unwrap();
        assert_eq!(schedule.len(), 21);
        let sc = Scenario::new(sigma, bath(chi), schedule, 1.0, 0.01).unwrap();
        let traj = run_scenario(&sc).unwrap();
        for s in &traj.samples {
            assert!(s.min_nu >= nu0 - 1e-9, "t={} ν={}", s.time, s.min_nu);
        }
        // and without control it does cool
        let free = evolve(&thermal(&[nu0]).unwrap(), chi, 1.0).unwrap();
        assert!(purity(&free) > 1.0 / nu0);
    }
}
