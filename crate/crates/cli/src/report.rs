//! Running a scenario and condensing its trajectory into a summary.

use std::fmt::Write as _;

use gausscontrol::dynamics::{run_scenario, synthesize_schedule, t_cool, t_free_single_mode, t_heat, Scenario, Trajectory};
use gausscontrol::invariants::spectrum_of;
use gausscontrol::williamson::{squeezing_measure, williamson};

use crate::scenario::ScenarioFile;

/// Bisection stops once the bracket is this narrow (rescaled time).
pub const CROSSING_TOL: f64 = 1e-9;
/// Extra evaluation points per sample interval when scanning for sign changes.
const SUBSTEPS: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct Crossing {
    pub level: f64,
    /// Rescaled time of the first crossing, if reached within the horizon.
    pub t: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub value: f64,
    pub t: f64,
}

/// Optimal and free relaxation times in rescaled units.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControlTimes {
    pub t_heat: Option<f64>,
    pub t_cool: Option<f64>,
    pub t_free: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRecord {
    pub name: String,
    pub modes: usize,
    pub chi: f64,
    pub eta_hz: f64,
    pub samples: usize,
    pub control_actions: usize,
    pub steady_state_purity: f64,
    pub initial_purity: f64,
    pub final_purity: f64,
    pub purity_crossings: Vec<Crossing>,
    pub purity_min: Extremum,
    pub purity_max: Extremum,
    /// First time `det σ` reaches `χ^{2n}`.
    pub determinant_crossing: Option<Crossing>,
    pub purity_deviation: f64,
    /// Time after which `|μ − μ∞|` stays within the deviation band.
    pub relaxation: Option<f64>,
    pub epsilon: Option<f64>,
    pub times: ControlTimes,
}

impl SummaryRecord {
    fn us(&self, t: f64) -> f64 {
        t / self.eta_hz * 1e6
    }

    /// Flat `key = value` document (valid TOML).
    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "\"{k}\" = {v}");
        };
        let num = |v: f64| format!("{v:.16e}");
        let opt = |v: Option<f64>| v.map_or_else(|| "\"none\"".to_string(), num);
        put("name", format!("{:?}", self.name));
        put("modes", self.modes.to_string());
        put("chi", num(self.chi));
        put("eta_hz", num(self.eta_hz));
        put("samples", self.samples.to_string());
        put("control_actions", self.control_actions.to_string());
        put("steady_state_purity", num(self.steady_state_purity));
        put("initial_purity", num(self.initial_purity));
        put("final_purity", num(self.final_purity));
        for c in &self.purity_crossings {
            put(&format!("purity_crossing[{}].t_us", c.level), opt(c.t.map(|t| self.us(t))));
            put(&format!("purity_crossing[{}].t_rescaled", c.level), opt(c.t));
        }
        put("purity_min", num(self.purity_min.value));
        put("purity_min.t_us", num(self.us(self.purity_min.t)));
        put("purity_min.t_rescaled", num(self.purity_min.t));
        put("purity_max", num(self.purity_max.value));
        put("purity_max.t_us", num(self.us(self.purity_max.t)));
        put("purity_max.t_rescaled", num(self.purity_max.t));
        if let Some(d) = &self.determinant_crossing {
            put("determinant_crossing.level", num(d.level));
            put("determinant_crossing.t_us", opt(d.t.map(|t| self.us(t))));
            put("determinant_crossing.t_rescaled", opt(d.t));
        }
        put("purity_deviation", num(self.purity_deviation));
        put("relaxation.t_us", opt(self.relaxation.map(|t| self.us(t))));
        put("relaxation.t_rescaled", opt(self.relaxation));
        if let Some(eps) = self.epsilon {
            put("epsilon", num(eps));
            for (key, v) in [
                ("t_heat", self.times.t_heat),
                ("t_cool", self.times.t_cool),
                ("t_free", self.times.t_free),
            ] {
                if let Some(v) = v {
                    put(&format!("{key}.t_us"), num(self.us(v)));
                    put(&format!("{key}.t_rescaled"), num(v));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trajectory: Trajectory,
    pub summary: SummaryRecord,
}

/// Runs the scenario and computes its summary.
pub fn execute(sc: &ScenarioFile) -> gausscontrol::Result<RunOutput> {
    let chi = sc.bath.chi();
    let schedule = synthesize_schedule(&sc.initial, chi, sc.horizon(), &sc.policy()?)?;
    let control_actions = schedule.len();
    let scenario = Scenario::new(sc.initial.clone(), sc.bath, schedule, sc.horizon(), sc.step())?;
    let trajectory = run_scenario(&scenario)?;
    let summary = summarize(sc, &trajectory, control_actions)?;
    Ok(RunOutput { trajectory, summary })
}

fn purity_at(traj: &Trajectory, t: f64) -> f64 {
    1.0 / traj.state_at(t).determinant().sqrt()
}

/// Sorted, de-duplicated evaluation points refined with sub-steps.
fn scan_points(traj: &Trajectory) -> Vec<f64> {
    let mut base: Vec<f64> = traj.samples.iter().map(|s| s.time).collect();
    base.dedup();
    let mut pts = Vec::with_capacity(base.len() * SUBSTEPS);
    for w in base.windows(2) {
        for j in 0..SUBSTEPS {
            pts.push(w[0] + (w[1] - w[0]) * j as f64 / SUBSTEPS as f64);
        }
    }
    pts.extend(base.last());
    pts
}

fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let fa_pos = f(a) > 0.0;
    while b - a > CROSSING_TOL {
        let m = 0.5 * (a + b);
        if (f(m) > 0.0) == fa_pos {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// First `t` with `f(t) = 0`, scanning for a sign change from `f(0)`.
pub fn first_crossing(f: impl Fn(f64) -> f64, points: &[f64]) -> Option<f64> {
    let f0 = f(points[0]);
    if f0 == 0.0 {
        return Some(points[0]);
    }
    for w in points.windows(2) {
        let fb = f(w[1]);
        if fb == 0.0 {
            return Some(w[1]);
        }
        if (fb > 0.0) != (f0 > 0.0) {
            return Some(bisect(&f, w[0], w[1]));
        }
    }
    None
}

/// Start of the final stretch on which `f ≤ 0`; `None` if `f > 0` at the end.
pub fn last_entry(f: impl Fn(f64) -> f64, points: &[f64]) -> Option<f64> {
    if f(*points.last()?) > 0.0 {
        return None;
    }
    for w in points.windows(2).rev() {
        if f(w[0]) > 0.0 {
            return Some(bisect(&f, w[0], w[1]));
        }
    }
    Some(points[0])
}

/// Golden-section minimum of `f` on `[a, b]`.
fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> Extremum {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > CROSSING_TOL {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let t = 0.5 * (a + b);
    Extremum { value: f(t), t }
}

fn refine_extremum(traj: &Trajectory, points: &[f64], sign: f64) -> Extremum {
    let vals: Vec<f64> = points.iter().map(|t| sign * purity_at(traj, *t)).collect();
    let i = vals
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let lo = points[i.saturating_sub(1)];
    let hi = points[(i + 1).min(points.len() - 1)];
    let refined = golden_min(|t| sign * purity_at(traj, t), lo, hi);
    // keep the sample if refinement landed on a kink (e.g. a control time)
    let best = if refined.value <= vals[i] {
        refined
    } else {
        Extremum { value: vals[i], t: points[i] }
    };
    Extremum {
        value: sign * best.value,
        t: best.t,
    }
}

/// `T_heat`, `T_cool` and `T_free` for the initial state, where they apply.
pub fn control_times(sc: &ScenarioFile) -> gausscontrol::Result<ControlTimes> {
    let Some(eps) = sc.thresholds.epsilon else {
        return Ok(ControlTimes::default());
    };
    let chi = sc.bath.chi();
    let wd = williamson(&sc.initial)?;
    let nus = wd.spectrum().nus();
    let mut times = ControlTimes::default();
    if nus.iter().all(|nu| *nu > chi) {
        times.t_cool = Some(t_cool(nus, chi, eps)?);
    }
    if let Some(zbar) = sc.zbar() {
        if nus.iter().all(|nu| *nu < chi) {
            times.t_heat = Some(t_heat(nus, zbar, chi, eps)?);
        }
    }
    if sc.modes() == 1 {
        let z0 = (1.0 + squeezing_measure(wd.s())?).sqrt();
        times.t_free = Some(t_free_single_mode(nus[0], z0, chi, eps)?);
    }
    Ok(times)
}

pub fn summarize(sc: &ScenarioFile, traj: &Trajectory, control_actions: usize) -> gausscontrol::Result<SummaryRecord> {
    let chi = traj.chi();
    let n = sc.modes();
    let points = scan_points(traj);
    let steady = chi.powi(-(n as i32));

    let purity_crossings = sc
        .thresholds
        .purity
        .iter()
        .map(|&level| Crossing {
            level,
            t: first_crossing(|t| purity_at(traj, t) - level, &points),
        })
        .collect();

    let determinant_crossing = sc.thresholds.determinant_crossing.then(|| {
        let level = chi.powi(2 * n as i32);
        Crossing {
            level,
            t: first_crossing(|t| traj.state_at(t).determinant() - level, &points),
        }
    });

    let band = sc.thresholds.purity_deviation;
    let relaxation = last_entry(|t| (purity_at(traj, t) - steady).abs() - band, &points);

    // every sampled state must still have a well-defined symplectic spectrum
    for s in &traj.samples {
        spectrum_of(s.sigma.matrix())?;
    }

    Ok(SummaryRecord {
        name: sc.name.clone(),
        modes: n,
        chi,
        eta_hz: sc.bath.eta(),
        samples: traj.samples.len(),
        control_actions,
        steady_state_purity: steady,
        initial_purity: traj.samples[0].purity,
        final_purity: traj.samples.last().map_or(f64::NAN, |s| s.purity),
        purity_crossings,
        purity_min: refine_extremum(traj, &points, 1.0),
        purity_max: refine_extremum(traj, &points, -1.0),
        determinant_crossing,
        purity_deviation: band,
        relaxation,
        epsilon: sc.thresholds.epsilon,
        times: control_times(sc)?,
    })
}

/// Trajectory as delimited text:
/// `t_phys,t_rescaled,purity,xi,theta_2,…,theta_2n,min_nu` with `t_phys` in seconds.
pub fn trajectory_csv(sc: &ScenarioFile, traj: &Trajectory) -> String {
    let n = sc.modes();
    let mut out = String::from("t_phys,t_rescaled,purity,xi");
    for k in 1..=n {
        let _ = write!(out, ",theta_{}", 2 * k);
    }
    out.push_str(",min_nu\n");
    for s in &traj.samples {
        let _ = write!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e}",
            sc.bath.to_physical(s.time),
            s.time,
            s.purity,
            s.squeezing
        );
        for th in &s.invariants.thetas()[1..] {
            let _ = write!(out, ",{th:.16e}");
        }
        let _ = writeln!(out, ",{:.16e}", s.min_nu);
    }
    out
}
