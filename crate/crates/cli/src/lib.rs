//! Scenario runner behind the `gausscontrol` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod report;
pub mod scenario;

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rand::SeedableRng as _;

use gausscontrol::dynamics::{optimal_control, Direction};
use gausscontrol::gaussian::apply_symplectic;
use gausscontrol::invariants::invariant_rate;
use gausscontrol::sampling::random_budgeted_symplectic;
use gausscontrol::trace_opt::SqueezeBudget;
use gausscontrol::williamson::williamson;

pub use report::{execute, trajectory_csv, RunOutput, SummaryRecord};
pub use scenario::{parse_scenario, parse_scenario_named, ParseError, ScenarioFile};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Parse { path: String, source: ParseError },
    #[error("{context}: {source}")]
    Numerical {
        context: String,
        source: gausscontrol::Error,
    },
    #[error("{0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    /// 0 success, 1 I/O, 2 invalid input, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Parse { .. } | CliError::Invalid(_) => 2,
            CliError::Numerical { .. } => 3,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn load_scenario(path: &Path) -> Result<ScenarioFile, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
    parse_scenario_named(&text, stem).map_err(|source| CliError::Parse {
        path: path.display().to_string(),
        source,
    })
}

pub fn run(sc: &ScenarioFile) -> Result<RunOutput, CliError> {
    execute(sc).map_err(|source| CliError::Numerical {
        context: format!("scenario `{}`", sc.name),
        source,
    })
}

/// Writes `contents` to a sibling temporary file, then renames it over `path`.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
    f.write_all(contents.as_bytes()).map_err(io_err(&tmp))?;
    f.sync_all().map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

/// Writes the trajectory and summary files under `out_dir`.
pub fn write_outputs(sc: &ScenarioFile, out: &RunOutput, out_dir: &Path) -> Result<(PathBuf, PathBuf), CliError> {
    let traj = out_dir.join(&sc.output.trajectory);
    let summary = out_dir.join(&sc.output.summary);
    write_atomic(&traj, &trajectory_csv(sc, &out.trajectory))?;
    write_atomic(&summary, &out.summary.render())?;
    Ok((traj, summary))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub label: String,
    /// Microseconds.
    pub a: Option<f64>,
    pub b: Option<f64>,
}

impl CompareRow {
    /// Time saved by A relative to B.
    pub fn speed_up(&self) -> Option<f64> {
        Some(self.b? - self.a?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub a: String,
    pub b: String,
    pub rows: Vec<CompareRow>,
}

impl CompareReport {
    pub fn render(&self) -> String {
        let cell = |v: Option<f64>| v.map_or_else(|| "—".to_string(), |v| format!("{v:.6e}"));
        let mut out = String::new();
        let _ = writeln!(out, "{:<28} {:>16} {:>16} {:>16}", "quantity [μs]", self.a, self.b, "speed-up");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<28} {:>16} {:>16} {:>16}",
                r.label,
                cell(r.a),
                cell(r.b),
                cell(r.speed_up())
            );
        }
        out
    }
}

/// Runs two scenarios concurrently and tabulates their summary times.
pub fn compare(a: &ScenarioFile, b: &ScenarioFile) -> Result<(CompareReport, RunOutput, RunOutput), CliError> {
    if a.modes() != b.modes() {
        return Err(CliError::Invalid(format!(
            "cannot compare a {}-mode scenario with a {}-mode scenario",
            a.modes(),
            b.modes()
        )));
    }
    let (ra, rb) = std::thread::scope(|s| {
        let ha = s.spawn(|| run(a));
        let rb = run(b);
        (ha.join().expect("scenario thread panicked"), rb)
    });
    let (ra, rb) = (ra?, rb?);
    let (sa, sb) = (&ra.summary, &rb.summary);
    let us = |s: &SummaryRecord, t: Option<f64>| t.map(|t| t / s.eta_hz * 1e6);

    let mut levels: Vec<f64> = sa.purity_crossings.iter().map(|c| c.level).collect();
    for c in &sb.purity_crossings {
        if !levels.contains(&c.level) {
            levels.push(c.level);
        }
    }
    levels.sort_by(f64::total_cmp);
    let find = |s: &SummaryRecord, level: f64| s.purity_crossings.iter().find(|c| c.level == level).and_then(|c| c.t);
    let mut rows: Vec<CompareRow> = levels
        .iter()
        .map(|&l| CompareRow {
            label: format!("purity {l}"),
            a: us(sa, find(sa, l)),
            b: us(sb, find(sb, l)),
        })
        .collect();
    let det = |s: &SummaryRecord| s.determinant_crossing.as_ref().and_then(|d| d.t);
    rows.push(CompareRow {
        label: "det σ = χ^2n".into(),
        a: us(sa, det(sa)),
        b: us(sb, det(sb)),
    });
    rows.push(CompareRow {
        label: "relaxation".into(),
        a: us(sa, sa.relaxation),
        b: us(sb, sb.relaxation),
    });
    rows.push(CompareRow {
        label: "purity minimum at".into(),
        a: us(sa, Some(sa.purity_min.t)),
        b: us(sb, Some(sb.purity_min.t)),
    });
    Ok((
        CompareReport {
            a: a.name.clone(),
            b: b.name.clone(),
            rows,
        },
        ra,
        rb,
    ))
}

/// Monte-Carlo check that no sampled budgeted Williamson factor beats the
/// heating optimum or undercuts the cooling optimum of the determinant rate.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlVerification {
    pub samples: usize,
    pub heat_rate: f64,
    pub cool_rate: f64,
    pub max_sampled: f64,
    pub min_sampled: f64,
    pub violations: usize,
}

pub fn verify_control(sc: &ScenarioFile, samples: usize, seed: u64) -> Result<ControlVerification, CliError> {
    let numerical = |source| CliError::Numerical {
        context: format!("control verification for `{}`", sc.name),
        source,
    };
    let n = sc.modes();
    let chi = sc.bath.chi();
    let budget = match sc.zbar() {
        Some(z) => SqueezeBudget::sorted(z),
        None => SqueezeBudget::uniform(n, 1.0),
    }
    .map_err(numerical)?;
    let sigma = &sc.initial;
    let rate_after = |c: &gausscontrol::gaussian::SymplecticMatrix| -> gausscontrol::Result<f64> { invariant_rate(&apply_symplectic(sigma, c)?, n, chi) };
    let heat = optimal_control(sigma, &budget, Direction::Heat).map_err(numerical)?;
    let cool = optimal_control(sigma, &budget, Direction::Cool).map_err(numerical)?;
    let heat_rate = rate_after(&heat).map_err(numerical)?;
    let cool_rate = rate_after(&cool).map_err(numerical)?;
    let unsqueeze = williamson(sigma).map_err(numerical)?.s().inverse();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let (mut max_sampled, mut min_sampled, mut violations) = (f64::NEG_INFINITY, f64::INFINITY, 0);
    let slack = 1e-9 * heat_rate.abs().max(1.0);
    for _ in 0..samples {
        let s = random_budgeted_symplectic(&mut rng, budget.zbars());
        let control = s.compose(&unsqueeze).map_err(numerical)?;
        let r = rate_after(&control).map_err(numerical)?;
        max_sampled = max_sampled.max(r);
        min_sampled = min_sampled.min(r);
        if r > heat_rate + slack || r < cool_rate - slack {
            violations += 1;
        }
    }
    Ok(ControlVerification {
        samples,
        heat_rate,
        cool_rate,
        max_sampled,
        min_sampled,
        violations,
    })
}

/// Text for the `times` subcommand.
pub fn render_times(sc: &ScenarioFile) -> Result<String, CliError> {
    let mut out = String::new();
    let Some(eps) = sc.thresholds.epsilon else {
        let _ = writeln!(out, "{}: no [thresholds] epsilon given; nothing to report", sc.name);
        return Ok(out);
    };
    let times = report::control_times(sc).map_err(|source| CliError::Numerical {
        context: format!("control times for `{}`", sc.name),
        source,
    })?;
    let _ = writeln!(out, "scenario {} (χ = {}, ε = {eps})", sc.name, sc.bath.chi());
    for (label, v) in [("T_heat", times.t_heat), ("T_cool", times.t_cool), ("T_free", times.t_free)] {
        match v {
            Some(t) => {
                let _ = writeln!(out, "{label} = {t:.9e} (rescaled) = {:.9e} μs", sc.to_us(t));
            }
            None => {
                let _ = writeln!(out, "{label} = not applicable");
            }
        }
    }
    Ok(out)
}
