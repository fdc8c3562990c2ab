//! Single manufactured-solution runs.

use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::grid::StructuredGrid;
use crate::harness::config::CaseConfig;
use crate::metrics::{pressure_error, velocity_errors, ErrorReport, StepErrors};
use crate::mms::ManufacturedCase;
use crate::operators::OperatorSet;
use crate::scheme::{StepDiagnostics, Stepper};

/// A run stops once `‖ũ‖_∞` exceeds this value or turns non-finite.
pub const DIVERGENCE_LIMIT: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub errors: StepErrors,
    pub diag: StepDiagnostics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub case: CaseConfig,
    pub report: ErrorReport,
    pub records: Vec<StepRecord>,
    /// `‖ũ⁰‖_∞`
    pub initial_max_velocity: f64,
    /// Whether the run was cut short by [`DIVERGENCE_LIMIT`].
    pub diverged: bool,
}

/// Runs one case, calling `observer` after every step.
pub fn simulate(case: &CaseConfig, mut observer: impl FnMut(&StepRecord)) -> Result<RunOutput> {
    let grid = StructuredGrid::<f64>::new(case.cells_per_axis(), case.dim)?;
    let ops = OperatorSet::assemble(&grid, case.nu)?;
    let mms = ManufacturedCase::for_dim(case.dim, case.nu);
    let mut stepper = Stepper::new(&ops, &mms, case.scheme_options())?;
    let mut state = stepper.initialize(case.k);
    let initial_max_velocity = state.u_tilde.max_norm();
    let mut records = Vec::with_capacity(case.n_steps);
    let mut diverged = false;
    for _ in 0..case.n_steps {
        let diag = stepper.advance(&mut state)?;
        let vmax = state.u_tilde.max_norm();
        if !vmax.is_finite() || vmax > DIVERGENCE_LIMIT || !state.p.iter().all(|v| v.is_finite()) {
            diverged = true;
            break;
        }
        let (l2_pred, h1_pred) = velocity_errors(&grid, &mms, &state.u_tilde, state.t)?;
        let (l2_end, _) = velocity_errors(&grid, &mms, &state.u, state.t)?;
        let l2_pres = pressure_error(&grid, &mms, &state.p, state.t)?;
        let rec = StepRecord {
            errors: StepErrors {
                step: state.step,
                t: state.t,
                l2_pred,
                h1_pred,
                l2_end,
                l2_pres,
            },
            diag,
        };
        observer(&rec);
        records.push(rec);
    }
    let report = ErrorReport {
        scheme: case.scheme,
        dim: case.dim,
        s: case.s,
        l: case.l,
        nu: case.nu,
        t_end: case.t_end,
        k: case.k,
        h: case.h,
        steps: records.iter().map(|r| r.errors).collect(),
    };
    Ok(RunOutput {
        case: case.clone(),
        report,
        records,
        initial_max_velocity,
        diverged,
    })
}

pub(crate) fn sci(v: f64) -> String {
    format!("{v:.10e}")
}

pub const STEPS_HEADER: [&str; 11] = [
    "step",
    "t",
    "err_l2_pred",
    "err_h1_pred",
    "err_l2_end",
    "err_l2_pres",
    "theta_visc",
    "theta_conv",
    "cfl_adv",
    "mom_iters",
    "poisson_iters",
];

pub const SUMMARY_HEADER: [&str; 17] = [
    "scheme",
    "dim",
    "s",
    "l",
    "mode",
    "nu",
    "t_end",
    "k",
    "h",
    "steps",
    "completed_steps",
    "diverged",
    "err_l2l2_pred",
    "err_l2h1_pred",
    "err_linfl2_pred",
    "err_l2l2_end",
    "err_l2l2_pres",
];

pub(crate) fn csv_err(e: csv::Error) -> crate::error::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io.into(),
        other => std::io::Error::new(std::io::ErrorKind::Other, format!("{other:?}")).into(),
    }
}

pub fn write_steps(path: &Path, records: &[StepRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(STEPS_HEADER).map_err(csv_err)?;
    for r in records {
        let e = &r.errors;
        let d = &r.diag;
        let mom = d.momentum_iterations() + d.correction.map_or(0, |c| c.iterations);
        w.write_record([
            e.step.to_string(),
            sci(e.t),
            sci(e.l2_pred),
            sci(e.h1_pred),
            sci(e.l2_end),
            sci(e.l2_pres),
            sci(d.theta_visc),
            sci(d.theta_conv),
            sci(d.cfl_adv),
            mom.to_string(),
            d.pressure.iterations.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary(path: &Path, out: &RunOutput) -> Result<()> {
    let c = &out.case;
    let r = &out.report;
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(SUMMARY_HEADER).map_err(csv_err)?;
    w.write_record([
        c.scheme.to_string(),
        c.dim.to_string(),
        c.s.to_string(),
        c.l.to_string(),
        c.mode.to_string(),
        sci(c.nu),
        sci(c.t_end),
        sci(c.k),
        sci(c.h),
        c.n_steps.to_string(),
        out.records.len().to_string(),
        out.diverged.to_string(),
        sci(r.l2l2_pred()),
        sci(r.l2h1_pred()),
        sci(r.linfl2_pred()),
        sci(r.l2l2_end()),
        sci(r.l2l2_pres()),
    ])
    .map_err(csv_err)?;
    w.flush()?;
    Ok(())
}

/// Runs a case and writes `steps_<tag>.csv` and `summary_<tag>.csv` into `dir`.
pub fn run_case(
    case: &CaseConfig,
    dir: &Path,
    observer: impl FnMut(&StepRecord),
) -> Result<(RunOutput, [PathBuf; 2])> {
    std::fs::create_dir_all(dir)?;
    let out = simulate(case, observer)?;
    let tag = case.tag();
    let steps = dir.join(format!("steps_{tag}.csv"));
    let summary = dir.join(format!("summary_{tag}.csv"));
    write_steps(&steps, &out.records)?;
    write_summary(&summary, &out)?;
    Ok((out, [steps, summary]))
}

/// logfmt line for one step.
pub fn logfmt(case: &CaseConfig, r: &StepRecord) -> String {
    format!(
        "scheme={} step={} t={:.6e} err_l2_pred={:.4e} err_h1_pred={:.4e} err_l2_pres={:.4e} umax={:.4e} theta_visc={:.4e} theta_conv={:.4e} cfl_adv={:.4e} mom_iters={} poisson_iters={}",
        case.scheme,
        r.errors.step,
        r.errors.t,
        r.errors.l2_pred,
        r.errors.h1_pred,
        r.errors.l2_pres,
        r.diag.max_velocity,
        r.diag.theta_visc,
        r.diag.theta_conv,
        r.diag.cfl_adv,
        r.diag.momentum_iterations(),
        r.diag.pressure.iterations
    )
}
