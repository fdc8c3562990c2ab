//! Level sweeps, rate tables and gnuplot files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::harness::config::{Mode, RunConfig};
use crate::harness::run::{csv_err, run_case, sci, RunOutput, StepRecord};
use crate::metrics::convergence_rate;
use crate::scheme::SchemeKind;

/// One row of the rate table.
#[derive(Debug, Clone, PartialEq)]
pub struct RateRow {
    pub scheme: SchemeKind,
    pub s: usize,
    pub l: usize,
    pub err_l2l2: f64,
    pub err_l2h1: f64,
    pub err_pres: f64,
    /// Against the previous level of the same series, if there is one.
    pub rate_l2l2: Option<f64>,
    pub rate_l2h1: Option<f64>,
}

/// Level that is refined in a sweep and the one held fixed.
fn varied_level(mode: Mode, s: usize, l: usize) -> (usize, usize) {
    match mode {
        Mode::Temporal => (l, s),
        Mode::Spatial => (s, l),
    }
}

/// Builds the rate table from completed runs; rows are grouped by scheme
/// and fixed level and ordered by the refined level.
pub fn rate_table(mode: Mode, runs: &[RunOutput]) -> Vec<RateRow> {
    let mut series: BTreeMap<(usize, usize), Vec<&RunOutput>> = BTreeMap::new();
    let order = |k: SchemeKind| SchemeKind::ALL.iter().position(|&x| x == k).unwrap_or(0);
    for r in runs {
        let (_, fixed) = varied_level(mode, r.case.s, r.case.l);
        series.entry((order(r.case.scheme), fixed)).or_default().push(r);
    }
    let mut rows = Vec::new();
    for list in series.values_mut() {
        list.sort_by_key(|r| varied_level(mode, r.case.s, r.case.l).0);
        let mut prev: Option<(usize, f64, f64)> = None;
        for r in list.iter() {
            let lev = varied_level(mode, r.case.s, r.case.l).0;
            let e = r.report.l2l2_pred();
            let g = r.report.l2h1_pred();
            let (rate_l2l2, rate_l2h1) = match prev {
                Some((pl, pe, pg)) if pl + 1 == lev => (convergence_rate(pe, e).ok(), convergence_rate(pg, g).ok()),
                _ => (None, None),
            };
            rows.push(RateRow {
                scheme: r.case.scheme,
                s: r.case.s,
                l: r.case.l,
                err_l2l2: e,
                err_l2h1: g,
                err_pres: r.report.l2l2_pres(),
                rate_l2l2,
                rate_l2h1,
            });
            prev = Some((lev, e, g));
        }
    }
    rows
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

pub fn write_rates(path: &Path, rows: &[RateRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["scheme", "s", "l", "err_l2l2", "err_l2h1", "err_pres", "rate_l2l2", "rate_l2h1"])
        .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.scheme.to_string(),
            r.s.to_string(),
            r.l.to_string(),
            sci(r.err_l2l2),
            sci(r.err_l2h1),
            sci(r.err_pres),
            opt(r.rate_l2l2),
            opt(r.rate_l2h1),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes one `.dat` file per series and a gnuplot script plotting the
/// three error norms against the refined step size on log-log axes.
pub fn write_plots(dir: &Path, mode: Mode, runs: &[RunOutput]) -> Result<Vec<PathBuf>> {
    let rows = rate_table(mode, runs);
    let mut files: BTreeMap<String, String> = BTreeMap::new();
    for r in &rows {
        let (fixed_name, fixed) = match mode {
            Mode::Temporal => ("s", r.s),
            Mode::Spatial => ("l", r.l),
        };
        let name = format!("{}_{}_{}{}.dat", mode, r.scheme, fixed_name, fixed);
        let run = runs
            .iter()
            .find(|o| o.case.scheme == r.scheme && o.case.s == r.s && o.case.l == r.l)
            .expect("row comes from a run");
        let x = match mode {
            Mode::Temporal => run.case.k,
            Mode::Spatial => run.case.h,
        };
        let body = files
            .entry(name)
            .or_insert_with(|| "# step err_l2l2 err_l2h1 err_pres\n".to_string());
        let _ = writeln!(body, "{} {} {} {}", sci(x), sci(r.err_l2l2), sci(r.err_l2h1), sci(r.err_pres));
    }
    let mut written = Vec::new();
    let xlabel = match mode {
        Mode::Temporal => "k",
        Mode::Spatial => "h",
    };
    let mut script = format!(
        "set terminal pngcairo size 1200,400\nset output 'errors_{mode}.png'\nset logscale xy\nset key bottom right\nset xlabel '{xlabel}'\nset multiplot layout 1,3\n"
    );
    for (col, title) in [(2, "L2(0,T;L2) predictor"), (3, "L2(0,T;H1) predictor"), (4, "L2(0,T;L2) pressure")] {
        let _ = writeln!(script, "set title '{title}'");
        let plots: Vec<String> = files
            .keys()
            .map(|f| format!("'{f}' using 1:{col} with linespoints title '{}'", f.trim_end_matches(".dat")))
            .collect();
        let _ = writeln!(script, "plot {}", plots.join(", \\\n     "));
    }
    script.push_str("unset multiplot\n");
    for (name, body) in &files {
        let p = dir.join(name);
        std::fs::write(&p, body)?;
        written.push(p);
    }
    let p = dir.join(format!("plot_{mode}.gp"));
    std::fs::write(&p, script)?;
    written.push(p);
    Ok(written)
}

/// Runs every configured case, then writes the rate table and plot files.
pub fn run_sweep(
    cfg: &RunConfig,
    mut observer: impl FnMut(&RunOutput),
    mut step_observer: impl FnMut(&crate::harness::config::CaseConfig, &StepRecord),
) -> Result<(Vec<RateRow>, PathBuf)> {
    let cases = cfg.cases()?;
    if cases.is_empty() {
        return Err(Error::EmptyInput);
    }
    std::fs::create_dir_all(&cfg.out)?;
    let mut runs = Vec::with_capacity(cases.len());
    for case in &cases {
        let (out, _) = run_case(case, &cfg.out, |r| step_observer(case, r))?;
        observer(&out);
        runs.push(out);
    }
    let rows = rate_table(cfg.mode, &runs);
    let path = cfg.out.join(format!("rates_{}.csv", cfg.mode));
    write_rates(&path, &rows)?;
    write_plots(&cfg.out, cfg.mode, &runs)?;
    Ok((rows, path))
}
