//! Scenario files: TOML documents describing an initial state, a bath, a
//! control policy, the sampling horizon and the quantities to report.
//!
//! ```toml
//! name = "cooling_controlled"          # optional, defaults to the file stem
//!
//! [state]
//! kind = "two_mode_squeezed"           # vacuum | thermal | two_mode_squeezed | matrix
//! gamma = 2.0
//! r = 0.4
//!
//! [bath]
//! chi = 1.000013                       # or n_bar = …
//! eta_hz = 1e5
//!
//! [control]
//! policy = "cool"                      # none | cool | heat | explicit
//! at_us = 0.0
//!
//! [run]
//! horizon_us = 100.0
//! step_us = 0.5
//!
//! [thresholds]
//! purity = [0.9, 0.99]
//! ```
//!
//! The full grammar is documented in the repository README.

use std::ops::Range;

use nalgebra::DMatrix;
use serde::Deserialize;
use toml::Spanned;

use gausscontrol::dynamics::{ControlAction, ControlPolicy, Direction};
use gausscontrol::gaussian::{thermal, two_mode_squeezed, vacuum, BathParams, CovarianceMatrix, SymplecticMatrix};
use gausscontrol::trace_opt::SqueezeBudget;

/// Default purity-deviation band used for the relaxation time.
pub const DEFAULT_PURITY_DEVIATION: f64 = 5e-7;
const DEFAULT_SAMPLES: f64 = 200.0;

/// One problem found while reading a scenario, with a 1-based position when known.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "line {l}, column {c}: {}", self.message),
            (Some(l), None) => write!(f, "line {l}: {}", self.message),
            _ => write!(f, "{}", self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{}", render(.0))]
pub struct ParseError(pub Vec<Diagnostic>);

fn render(diags: &[Diagnostic]) -> String {
    diags.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n")
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    name: Option<String>,
    state: RawState,
    bath: RawBath,
    control: Option<RawControl>,
    run: RawRun,
    thresholds: Option<RawThresholds>,
    output: Option<RawOutput>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawState {
    kind: Spanned<String>,
    gamma: Option<Spanned<f64>>,
    r: Option<Spanned<f64>>,
    modes: Option<Spanned<i64>>,
    nus: Option<Spanned<Vec<f64>>>,
    matrix: Option<Spanned<Vec<Vec<f64>>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBath {
    chi: Option<Spanned<f64>>,
    n_bar: Option<Spanned<f64>>,
    eta_hz: Spanned<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawControl {
    policy: Spanned<String>,
    at_us: Option<Spanned<f64>>,
    period_us: Option<Spanned<f64>>,
    zbar: Option<Spanned<Vec<f64>>>,
    actions: Option<Vec<RawAction>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAction {
    at_us: Spanned<f64>,
    squeeze: Option<Spanned<Vec<f64>>>,
    matrix: Option<Spanned<Vec<Vec<f64>>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    horizon_us: Spanned<f64>,
    step_us: Option<Spanned<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawThresholds {
    purity: Option<Spanned<Vec<f64>>>,
    epsilon: Option<Spanned<f64>>,
    purity_deviation: Option<Spanned<f64>>,
    determinant_crossing: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    trajectory: Option<String>,
    summary: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    Vacuum { modes: usize },
    Thermal { nus: Vec<f64> },
    TwoModeSqueezed { gamma: f64, r: f64 },
    Matrix(DMatrix<f64>),
}

#[derive(Debug, Clone)]
pub enum ControlSpec {
    None,
    Cool { at_us: f64, period_us: Option<f64> },
    Heat { at_us: f64, period_us: Option<f64>, zbar: Vec<f64> },
    Explicit(Vec<(f64, SymplecticMatrix)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Thresholds {
    pub purity: Vec<f64>,
    pub epsilon: Option<f64>,
    pub purity_deviation: f64,
    pub determinant_crossing: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputPaths {
    pub trajectory: String,
    pub summary: String,
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct ScenarioFile {
    pub name: String,
    pub state: StateSpec,
    pub initial: CovarianceMatrix,
    pub bath: BathParams,
    pub control: ControlSpec,
    pub horizon_us: f64,
    pub step_us: f64,
    pub thresholds: Thresholds,
    pub output: OutputPaths,
}

impl ScenarioFile {
    pub fn modes(&self) -> usize {
        self.initial.modes()
    }

    /// Microseconds to rescaled time `η t`.
    pub fn rescale_us(&self, t_us: f64) -> f64 {
        t_us * self.bath.eta() / 1e6
    }

    /// Rescaled time to microseconds.
    pub fn to_us(&self, t: f64) -> f64 {
        self.bath.to_physical(t) * 1e6
    }

    pub fn horizon(&self) -> f64 {
        self.rescale_us(self.horizon_us)
    }

    pub fn step(&self) -> f64 {
        self.rescale_us(self.step_us)
    }

    /// The squeezing budget of a heating policy.
    pub fn zbar(&self) -> Option<&[f64]> {
        match &self.control {
            ControlSpec::Heat { zbar, .. } => Some(zbar),
            _ => None,
        }
    }

    pub fn policy(&self) -> gausscontrol::Result<ControlPolicy> {
        let n = self.modes();
        let timed = |at_us: f64, period_us: Option<f64>, direction, budget| match period_us {
            Some(p) => ControlPolicy::Periodic {
                start: self.rescale_us(at_us),
                period: self.rescale_us(p),
                direction,
                budget,
            },
            None => ControlPolicy::Once {
                at: self.rescale_us(at_us),
                direction,
                budget,
            },
        };
        Ok(match &self.control {
            ControlSpec::None => ControlPolicy::None,
            ControlSpec::Cool { at_us, period_us } => {
                timed(*at_us, *period_us, Direction::Cool, SqueezeBudget::uniform(n, 1.0)?)
            }
            ControlSpec::Heat { at_us, period_us, zbar } => {
                timed(*at_us, *period_us, Direction::Heat, SqueezeBudget::sorted(zbar)?)
            }
            ControlSpec::Explicit(actions) => ControlPolicy::Explicit(
                actions
                    .iter()
                    .map(|(t, s)| ControlAction {
                        time: self.rescale_us(*t),
                        s: s.clone(),
                    })
                    .collect(),
            ),
        })
    }
}

struct Collector<'a> {
    text: &'a str,
    diags: Vec<Diagnostic>,
}

impl<'a> Collector<'a> {
    fn position(&self, offset: usize) -> (usize, usize) {
        let before = &self.text[..offset.min(self.text.len())];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        (line, column)
    }

    fn at(&mut self, span: Option<Range<usize>>, message: impl Into<String>) {
        let (line, column) = match span {
            Some(s) => {
                let (l, c) = self.position(s.start);
                (Some(l), Some(c))
            }
            None => (None, None),
        };
        self.diags.push(Diagnostic {
            line,
            column,
            message: message.into(),
        });
    }

    fn check(&mut self, value: &Spanned<f64>, ok: bool, message: impl Into<String>) -> bool {
        if !ok {
            self.at(Some(value.span()), message);
        }
        ok
    }

    fn unused<T>(&mut self, field: &Option<Spanned<T>>, key: &str, kind: &str) {
        if let Some(f) = field {
            self.at(Some(f.span()), format!("key `{key}` does not apply to state kind `{kind}`"));
        }
    }
}

fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>, String> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err("matrix must be a non-empty square array of rows".into());
    }
    if !n.is_multiple_of(2) {
        return Err(format!("matrix dimension must be even, got {n}"));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// Parses a scenario, using `default_name` when the file has no `name` key.
pub fn parse_scenario_named(text: &str, default_name: &str) -> Result<ScenarioFile, ParseError> {
    let raw: RawFile = toml::from_str(text).map_err(|e| {
        let mut c = Collector { text, diags: vec![] };
        c.at(e.span(), e.message().to_string());
        ParseError(c.diags)
    })?;
    let mut c = Collector { text, diags: vec![] };

    let state = resolve_state(&mut c, &raw.state);
    let initial = state.as_ref().and_then(|s| {
        let built = match s {
            StateSpec::Vacuum { modes } => vacuum(*modes),
            StateSpec::Thermal { nus } => thermal(nus),
            StateSpec::TwoModeSqueezed { gamma, r } => two_mode_squeezed(*gamma, *r),
            StateSpec::Matrix(m) => CovarianceMatrix::new(m.clone()),
        };
        built.map_err(|e| c.at(Some(raw.state.kind.span()), format!("invalid state: {e}"))).ok()
    });
    let modes = initial.as_ref().map(|s| s.modes());

    let bath = resolve_bath(&mut c, &raw.bath);

    let horizon_us = *raw.run.horizon_us.get_ref();
    c.check(
        &raw.run.horizon_us,
        horizon_us > 0.0 && horizon_us.is_finite(),
        format!("horizon_us > 0 required, got {horizon_us}"),
    );
    let step_us = match &raw.run.step_us {
        Some(s) => {
            let v = *s.get_ref();
            c.check(s, v > 0.0 && v.is_finite(), format!("step_us > 0 required, got {v}"));
            v
        }
        None => horizon_us / DEFAULT_SAMPLES,
    };

    let control = resolve_control(&mut c, raw.control.as_ref(), modes, horizon_us);
    let thresholds = resolve_thresholds(&mut c, raw.thresholds.as_ref());

    let name = raw.name.unwrap_or_else(|| default_name.to_string());
    let output = OutputPaths {
        trajectory: raw
            .output
            .as_ref()
            .and_then(|o| o.trajectory.clone())
            .unwrap_or_else(|| format!("{name}.trajectory.csv")),
        summary: raw
            .output
            .as_ref()
            .and_then(|o| o.summary.clone())
            .unwrap_or_else(|| format!("{name}.summary.toml")),
    };

    match (state, initial, bath, control) {
        (Some(state), Some(initial), Some(bath), Some(control)) if c.diags.is_empty() => Ok(ScenarioFile {
            name,
            state,
            initial,
            bath,
            control,
            horizon_us,
            step_us,
            thresholds,
            output,
        }),
        _ => Err(ParseError(c.diags)),
    }
}

pub fn parse_scenario(text: &str) -> Result<ScenarioFile, ParseError> {
    parse_scenario_named(text, "scenario")
}

fn resolve_state(c: &mut Collector<'_>, s: &RawState) -> Option<StateSpec> {
    let kind = s.kind.get_ref().as_str();
    match kind {
        "vacuum" => {
            c.unused(&s.gamma, "gamma", kind);
            c.unused(&s.r, "r", kind);
            c.unused(&s.nus, "nus", kind);
            c.unused(&s.matrix, "matrix", kind);
            let modes = s.modes.as_ref().map_or(1, |m| *m.get_ref());
            if modes < 1 {
                c.at(s.modes.as_ref().map(|m| m.span()), format!("modes ≥ 1 required, got {modes}"));
                return None;
            }
            Some(StateSpec::Vacuum { modes: modes as usize })
        }
        "thermal" => {
            c.unused(&s.gamma, "gamma", kind);
            c.unused(&s.r, "r", kind);
            c.unused(&s.modes, "modes", kind);
            c.unused(&s.matrix, "matrix", kind);
            let Some(nus) = &s.nus else {
                c.at(Some(s.kind.span()), "state kind `thermal` requires `nus`");
                return None;
            };
            if nus.get_ref().is_empty() {
                c.at(Some(nus.span()), "`nus` must list at least one mode");
                return None;
            }
            if let Some(nu) = nus.get_ref().iter().find(|nu| !(**nu >= 1.0)) {
                c.at(Some(nus.span()), format!("every ν ≥ 1 required, got {nu}"));
                return None;
            }
            Some(StateSpec::Thermal { nus: nus.get_ref().clone() })
        }
        "two_mode_squeezed" => {
            c.unused(&s.modes, "modes", kind);
            c.unused(&s.nus, "nus", kind);
            c.unused(&s.matrix, "matrix", kind);
            let gamma = match &s.gamma {
                Some(g) => {
                    let v = *g.get_ref();
                    if !c.check(g, v >= 1.0 && v.is_finite(), format!("gamma ≥ 1 required, got {v}")) {
                        return None;
                    }
                    v
                }
                None => 1.0,
            };
            let Some(r) = &s.r else {
                c.at(Some(s.kind.span()), "state kind `two_mode_squeezed` requires `r`");
                return None;
            };
            if !c.check(r, r.get_ref().is_finite(), "r must be finite") {
                return None;
            }
            Some(StateSpec::TwoModeSqueezed { gamma, r: *r.get_ref() })
        }
        "matrix" => {
            c.unused(&s.gamma, "gamma", kind);
            c.unused(&s.r, "r", kind);
            c.unused(&s.modes, "modes", kind);
            c.unused(&s.nus, "nus", kind);
            let Some(rows) = &s.matrix else {
                c.at(Some(s.kind.span()), "state kind `matrix` requires `matrix`");
                return None;
            };
            match matrix_from_rows(rows.get_ref()) {
                Ok(m) => Some(StateSpec::Matrix(m)),
                Err(msg) => {
                    c.at(Some(rows.span()), msg);
                    None
                }
            }
        }
        other => {
            c.at(
                Some(s.kind.span()),
                format!("unknown state kind `{other}`; expected vacuum, thermal, two_mode_squeezed or matrix"),
            );
            None
        }
    }
}

fn resolve_bath(c: &mut Collector<'_>, b: &RawBath) -> Option<BathParams> {
    let eta = *b.eta_hz.get_ref();
    let eta_ok = c.check(&b.eta_hz, eta > 0.0 && eta.is_finite(), format!("eta_hz > 0 required, got {eta}"));
    let chi = match (&b.chi, &b.n_bar) {
        (Some(chi), None) => {
            let v = *chi.get_ref();
            c.check(chi, v >= 1.0 && v.is_finite(), format!("chi ≥ 1 required, got {v}"))
                .then_some(v)
        }
        (None, Some(n)) => {
            let v = *n.get_ref();
            c.check(n, v >= 0.0 && v.is_finite(), format!("n_bar ≥ 0 required, got {v}"))
                .then_some(2.0 * v + 1.0)
        }
        (Some(chi), Some(_)) => {
            c.at(Some(chi.span()), "give either `chi` or `n_bar`, not both");
            None
        }
        (None, None) => {
            c.at(Some(b.eta_hz.span()), "[bath] requires `chi` or `n_bar`");
            None
        }
    };
    match (chi, eta_ok) {
        (Some(chi), true) => BathParams::new(chi, eta).ok(),
        _ => None,
    }
}

fn resolve_control(
    c: &mut Collector<'_>,
    raw: Option<&RawControl>,
    modes: Option<usize>,
    horizon_us: f64,
) -> Option<ControlSpec> {
    let Some(raw) = raw else {
        return Some(ControlSpec::None);
    };
    let policy = raw.policy.get_ref().as_str();
    let time_ok = |c: &mut Collector<'_>, t: &Spanned<f64>| {
        let v = *t.get_ref();
        c.check(
            t,
            (0.0..=horizon_us).contains(&v),
            format!("control time {v} μs lies outside [0, {horizon_us}]"),
        )
    };
    let at_us = match &raw.at_us {
        Some(t) => time_ok(c, t).then_some(*t.get_ref())?,
        None => 0.0,
    };
    let period_us = match &raw.period_us {
        Some(p) => {
            let v = *p.get_ref();
            c.check(p, v > 0.0 && v.is_finite(), format!("period_us > 0 required, got {v}"))
                .then_some(Some(v))?
        }
        None => None,
    };
    let reject = |c: &mut Collector<'_>, present: bool, span: Option<Range<usize>>, key: &str| {
        if present {
            c.at(span, format!("key `{key}` does not apply to policy `{policy}`"));
        }
    };
    match policy {
        "none" => {
            reject(c, raw.at_us.is_some(), raw.at_us.as_ref().map(|v| v.span()), "at_us");
            reject(c, raw.period_us.is_some(), raw.period_us.as_ref().map(|v| v.span()), "period_us");
            reject(c, raw.zbar.is_some(), raw.zbar.as_ref().map(|v| v.span()), "zbar");
            reject(c, raw.actions.is_some(), Some(raw.policy.span()), "actions");
            Some(ControlSpec::None)
        }
        "cool" => {
            reject(c, raw.zbar.is_some(), raw.zbar.as_ref().map(|v| v.span()), "zbar");
            reject(c, raw.actions.is_some(), Some(raw.policy.span()), "actions");
            Some(ControlSpec::Cool { at_us, period_us })
        }
        "heat" => {
            reject(c, raw.actions.is_some(), Some(raw.policy.span()), "actions");
            let Some(zbar) = &raw.zbar else {
                c.at(Some(raw.policy.span()), "policy `heat` requires `zbar`");
                return None;
            };
            if let Some(z) = zbar.get_ref().iter().find(|z| !(**z >= 1.0) || !z.is_finite()) {
                c.at(Some(zbar.span()), format!("every z̄ ≥ 1 required, got {z}"));
                return None;
            }
            if let Some(n) = modes {
                if zbar.get_ref().len() != n {
                    c.at(
                        Some(zbar.span()),
                        format!("`zbar` has {} entries but the state has {n} modes", zbar.get_ref().len()),
                    );
                    return None;
                }
            }
            Some(ControlSpec::Heat {
                at_us,
                period_us,
                zbar: zbar.get_ref().clone(),
            })
        }
        "explicit" => {
            reject(c, raw.at_us.is_some(), raw.at_us.as_ref().map(|v| v.span()), "at_us");
            reject(c, raw.period_us.is_some(), raw.period_us.as_ref().map(|v| v.span()), "period_us");
            reject(c, raw.zbar.is_some(), raw.zbar.as_ref().map(|v| v.span()), "zbar");
            let Some(actions) = &raw.actions else {
                c.at(Some(raw.policy.span()), "policy `explicit` requires [[control.actions]]");
                return None;
            };
            let mut out = Vec::with_capacity(actions.len());
            let mut last = f64::NEG_INFINITY;
            for a in actions {
                let t = *a.at_us.get_ref();
                if !time_ok(c, &a.at_us) {
                    continue;
                }
                if !(t > last) {
                    c.at(Some(a.at_us.span()), "control times must be strictly increasing");
                }
                last = t;
                let s = match (&a.squeeze, &a.matrix) {
                    (Some(z), None) => SymplecticMatrix::squeezer(z.get_ref()).map_err(|e| (z.span(), e.to_string())),
                    (None, Some(m)) => matrix_from_rows(m.get_ref())
                        .map_err(|e| (m.span(), e))
                        .and_then(|mat| SymplecticMatrix::new(mat).map_err(|e| (m.span(), e.to_string()))),
                    _ => Err((a.at_us.span(), "each action needs exactly one of `squeeze` or `matrix`".into())),
                };
                match s {
                    Ok(s) => {
                        if modes.is_some_and(|n| n != s.modes()) {
                            c.at(Some(a.at_us.span()), "action dimension does not match the state");
                        }
                        out.push((t, s));
                    }
                    Err((span, msg)) => c.at(Some(span), msg),
                }
            }
            Some(ControlSpec::Explicit(out))
        }
        other => {
            c.at(
                Some(raw.policy.span()),
                format!("unknown policy `{other}`; expected none, cool, heat or explicit"),
            );
            None
        }
    }
}

fn resolve_thresholds(c: &mut Collector<'_>, raw: Option<&RawThresholds>) -> Thresholds {
    let mut t = Thresholds {
        purity: vec![],
        epsilon: None,
        purity_deviation: DEFAULT_PURITY_DEVIATION,
        determinant_crossing: true,
    };
    let Some(raw) = raw else {
        return t;
    };
    if let Some(p) = &raw.purity {
        if let Some(bad) = p.get_ref().iter().find(|v| !(**v > 0.0 && **v <= 1.0)) {
            c.at(Some(p.span()), format!("purity thresholds must lie in (0, 1], got {bad}"));
        }
        t.purity = p.get_ref().clone();
    }
    if let Some(e) = &raw.epsilon {
        let v = *e.get_ref();
        if c.check(e, v > 0.0 && v.is_finite(), format!("epsilon > 0 required, got {v}")) {
            t.epsilon = Some(v);
        }
    }
    if let Some(d) = &raw.purity_deviation {
        let v = *d.get_ref();
        if c.check(d, v > 0.0 && v.is_finite(), format!("purity_deviation > 0 required, got {v}")) {
            t.purity_deviation = v;
        }
    }
    if let Some(b) = raw.determinant_crossing {
        t.determinant_crossing = b;
    }
    t
}
