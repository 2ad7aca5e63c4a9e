//! Dispatch from a validated problem to a report.

use std::path::Path;

use annihilator_core::function::independent_subset;
use annihilator_core::hobby_rice::moment_residual;
use annihilator_core::sobolev::{scaling_level, ScalingLevel};
use annihilator_core::{
    solve_annihilator, solve_hobby_rice, IntervalMask, PiecewiseComplexFunction, SmoothPhase,
};
use rayon::prelude::*;

use crate::error::{InputError, OutputError};
use crate::report::{
    to_json, AnnihilateReport, HobbyRiceReport, LevelDto, ScalingReportDto, Status, SEMINORM_NOTE,
};
use crate::samples::export_samples;
use crate::spec::{Mode, ProblemSpec};
use crate::threads;

/// Default sample count when a CSV path is given without a grid size.
pub const DEFAULT_GRID: usize = 1001;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    InputError = 1,
    SolverFailure = 2,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

/// A rendered report plus the phase to sample, if any.
#[derive(Debug)]
pub struct Evaluation {
    pub status: ExitStatus,
    pub report: String,
    pub theta: Option<SmoothPhase>,
    /// Rows of the scaling trend CSV.
    pub trend: Option<Vec<LevelDto>>,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub status: ExitStatus,
    /// `None` when the spec did not validate.
    pub report: Option<String>,
    pub message: Option<String>,
}

fn functions(spec: &ProblemSpec) -> Result<Vec<PiecewiseComplexFunction>, InputError> {
    spec.functions
        .iter()
        .enumerate()
        .map(|(i, f)| {
            f.to_function()
                .map_err(|e| InputError::Invalid(format!("function {i}: {e}")))
        })
        .collect()
}

/// Solves the problem without touching the filesystem.
pub fn evaluate(spec: &ProblemSpec) -> Result<Evaluation, InputError> {
    spec.validate()?;
    let fs = functions(spec)?;
    Ok(match spec.mode {
        Mode::Annihilate => annihilate(spec, &fs),
        Mode::HobbyRice => hobby_rice(spec, &fs),
        Mode::Scaling => scaling(spec, &fs[0]),
    })
}

fn annihilate(spec: &ProblemSpec, fs: &[PiecewiseComplexFunction]) -> Evaluation {
    let opts = spec.annihilator_options();
    let mut report = AnnihilateReport {
        mode: "annihilate",
        status: Status::Ok,
        error: None,
        functions: fs.len(),
        seed: spec.seed,
        tol: opts.tol,
        solution: None,
    };
    match solve_annihilator(fs, &opts) {
        Ok(r) => {
            report.solution = Some((&r).into());
            Evaluation {
                status: ExitStatus::Success,
                report: to_json(&report),
                theta: Some(r.theta),
                trend: None,
            }
        }
        Err(e) => {
            report.status = Status::Failed;
            report.error = Some(e.to_string());
            Evaluation {
                status: ExitStatus::SolverFailure,
                report: to_json(&report),
                theta: None,
                trend: None,
            }
        }
    }
}

/// Real and imaginary parts that are not identically zero, labelled `re[k]` / `im[k]`.
pub fn real_parts(fs: &[PiecewiseComplexFunction]) -> (Vec<String>, Vec<PiecewiseComplexFunction>) {
    let mut labels = Vec::new();
    let mut parts = Vec::new();
    for (k, f) in fs.iter().enumerate() {
        for (name, g) in [("re", f.real_part()), ("im", f.imag_part())] {
            if !g.is_zero() {
                labels.push(format!("{name}[{k}]"));
                parts.push(g);
            }
        }
    }
    (labels, parts)
}

fn hobby_rice(spec: &ProblemSpec, fs: &[PiecewiseComplexFunction]) -> Evaluation {
    let (labels, parts) = real_parts(fs);
    let mask = IntervalMask::full();
    let failed = |error: String| Evaluation {
        status: ExitStatus::SolverFailure,
        report: to_json(&HobbyRiceReport {
            mode: "hobby-rice",
            status: Status::Failed,
            error: Some(error),
            parts: labels.clone(),
            switch_points: Vec::new(),
            leading_sign: 1,
            residuals: Vec::new(),
        }),
        theta: None,
        trend: None,
    };
    if parts.is_empty() {
        return failed("every function is identically zero".into());
    }
    // Dependent parts are annihilated along with the ones they depend on.
    let keep = independent_subset(&parts, spec.annihilator_options().gram_tol);
    let solver_input: Vec<_> = keep.iter().map(|&i| parts[i].clone()).collect();
    match solve_hobby_rice(&solver_input, &mask, &spec.hobby_rice_options()) {
        Ok(s) => {
            let residuals = moment_residual(&parts, &s, &mask);
            Evaluation {
                status: ExitStatus::Success,
                report: to_json(&HobbyRiceReport::from_pattern(labels, &s, residuals)),
                theta: None,
                trend: None,
            }
        }
        Err(e) => failed(e.to_string()),
    }
}

/// Runs every level on the worker pool; the result keeps the requested order.
pub fn scaling_levels(
    f: &PiecewiseComplexFunction,
    p: f64,
    levels: &[u32],
    opts: &annihilator_core::AnnihilatorOptions,
) -> Vec<ScalingLevel> {
    threads::pool().install(|| {
        levels
            .par_iter()
            .map(|&n| scaling_level(f, p, n, opts))
            .collect()
    })
}

fn scaling(spec: &ProblemSpec, f: &PiecewiseComplexFunction) -> Evaluation {
    let levels = scaling_levels(
        f,
        spec.scaling.p,
        &spec.scaling.levels,
        &spec.annihilator_options(),
    );
    let dtos: Vec<LevelDto> = levels.iter().map(LevelDto::from).collect();
    let ratios: Vec<Option<f64>> = dtos
        .windows(2)
        .map(|w| match (w[0].seminorm_power, w[1].seminorm_power) {
            (Some(a), Some(b)) if a > 0.0 => Some(b / a),
            _ => None,
        })
        .collect();
    let all_ok = dtos.iter().all(|l| l.status == Status::Ok);
    let strictly_increasing = all_ok
        && dtos
            .windows(2)
            .all(|w| w[1].seminorm_power > w[0].seminorm_power);
    let report = ScalingReportDto {
        mode: "scaling",
        status: if all_ok { Status::Ok } else { Status::Failed },
        p: spec.scaling.p,
        seed: spec.seed,
        note: SEMINORM_NOTE,
        levels: dtos.clone(),
        seminorm_ratios: ratios,
        strictly_increasing,
    };
    Evaluation {
        status: if all_ok {
            ExitStatus::Success
        } else {
            ExitStatus::SolverFailure
        },
        report: to_json(&report),
        theta: None,
        trend: Some(dtos),
    }
}

pub fn write_trend_csv(levels: &[LevelDto], path: impl AsRef<Path>) -> Result<(), OutputError> {
    let path = path.as_ref();
    let csv_err = |source| OutputError::Csv {
        path: path.display().to_string(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record([
        "n",
        "theoretical_factor",
        "seminorm_power",
        "identity_error",
        "membership_residual",
        "membership_bound",
    ])
    .map_err(csv_err)?;
    for l in levels {
        w.serialize((
            l.n,
            l.theoretical_factor,
            l.seminorm_power,
            l.identity_error,
            l.membership_residual,
            l.membership_bound,
        ))
        .map_err(csv_err)?;
    }
    w.flush().map_err(|source| OutputError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Solves and writes the report and optional CSV named in `spec.outputs`.
///
/// The report is written even when the solver fails.
pub fn run(spec: &ProblemSpec) -> RunOutcome {
    let eval = match evaluate(spec) {
        Ok(e) => e,
        Err(e) => {
            return RunOutcome {
                status: ExitStatus::InputError,
                report: None,
                message: Some(e.to_string()),
            }
        }
    };
    let mut message = None;
    let mut status = eval.status;
    let mut fail_output = |e: OutputError| {
        message = Some(e.to_string());
        status = ExitStatus::InputError;
    };
    if let Some(path) = &spec.outputs.report {
        if let Err(source) = std::fs::write(path, &eval.report) {
            fail_output(OutputError::Io {
                path: path.clone(),
                source,
            });
        }
    }
    if let Some(path) = &spec.outputs.csv {
        let written = match (&eval.theta, &eval.trend) {
            (Some(theta), _) => {
                export_samples(theta, spec.outputs.grid.unwrap_or(DEFAULT_GRID), path)
            }
            (None, Some(trend)) => write_trend_csv(trend, path),
            (None, None) => Ok(()),
        };
        if let Err(e) = written {
            fail_output(e);
        }
    }
    RunOutcome {
        status,
        report: Some(eval.report),
        message,
    }
}
