//! `key = value` run configuration.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::krylov::SolverConfig;
use crate::scheme::{PreconditionerChoice, SchemeKind, SchemeOptions};

/// Refinement study type.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// `k = 2^{-l-7}`, `T = 1`
    Temporal,
    /// `k = 0.1 · 2^{-l-7}`, `T = 0.1`
    Spatial,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Temporal => "temporal",
            Mode::Spatial => "spatial",
        }
    }

    pub fn time_step(self, l: usize) -> f64 {
        let base = 2f64.powi(-(l as i32) - 7);
        match self {
            Mode::Temporal => base,
            Mode::Spatial => 0.1 * base,
        }
    }

    pub fn default_end_time(self) -> f64 {
        match self {
            Mode::Temporal => 1.0,
            Mode::Spatial => 0.1,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "temporal" => Ok(Mode::Temporal),
            "spatial" => Ok(Mode::Spatial),
            other => Err(Error::config("mode", format!("unknown mode `{other}`"))),
        }
    }
}

/// Largest spatial level run without `allow_large` in 3D (128³ cells).
pub const MAX_DEFAULT_LEVEL: usize = 3;

/// Parsed configuration; the level and scheme lists span a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub schemes: Vec<SchemeKind>,
    pub dim: usize,
    pub nu: f64,
    pub mode: Mode,
    pub s: Vec<usize>,
    pub l: Vec<usize>,
    /// Overrides the mode's end time.
    pub t_end: Option<f64>,
    pub c_inv: f64,
    pub solver: SolverConfig,
    pub preconditioner: PreconditionerChoice,
    pub out: PathBuf,
    pub allow_large: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schemes: vec![SchemeKind::ExplicitStar],
            dim: 3,
            nu: 1e-3,
            mode: Mode::Temporal,
            s: vec![1],
            l: vec![0],
            t_end: None,
            c_inv: 1.0,
            solver: SolverConfig::default(),
            preconditioner: PreconditionerChoice::Structured,
            out: PathBuf::from("."),
            allow_large: false,
        }
    }
}

/// Fully resolved parameters of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseConfig {
    pub scheme: SchemeKind,
    pub dim: usize,
    pub nu: f64,
    pub mode: Mode,
    pub s: usize,
    pub l: usize,
    pub k: f64,
    pub h: f64,
    pub t_end: f64,
    pub n_steps: usize,
    pub c_inv: f64,
    pub solver: SolverConfig,
    pub preconditioner: PreconditionerChoice,
}

impl CaseConfig {
    /// Cells per axis, `1/h`.
    pub fn cells_per_axis(&self) -> usize {
        1 << (self.s + 4)
    }

    pub fn tag(&self) -> String {
        format!("{}_d{}_s{}_l{}_{}", self.scheme, self.dim, self.s, self.l, self.mode)
    }

    pub fn scheme_options(&self) -> SchemeOptions {
        SchemeOptions {
            kind: self.scheme,
            momentum_solver: self.solver,
            pressure_solver: self.solver,
            mass_solver: self.solver,
            c_inv: self.c_inv,
            preconditioner: self.preconditioner,
        }
    }
}

fn parse_value<V: FromStr>(key: &str, value: &str) -> Result<V> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::config(key, format!("cannot parse `{}`", value.trim())))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(Error::config(key, format!("expected a boolean, got `{other}`"))),
    }
}

/// Comma-separated levels; `a..b` denotes the inclusive range.
fn parse_levels(key: &str, value: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((a, b)) = item.split_once("..") {
            let a: usize = parse_value(key, a)?;
            let b: usize = parse_value(key, b)?;
            if b < a {
                return Err(Error::config(key, format!("empty range `{item}`")));
            }
            out.extend(a..=b);
        } else {
            out.push(parse_value(key, item)?);
        }
    }
    if out.is_empty() {
        return Err(Error::config(key, "empty level list"));
    }
    Ok(out)
}

fn parse_positive(key: &str, value: &str) -> Result<f64> {
    let v: f64 = parse_value(key, value)?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::config(key, format!("must be positive, got {v}")));
    }
    Ok(v)
}

impl RunConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "scheme" | "schemes" => {
                let list: Result<Vec<SchemeKind>> = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse().map_err(|_| Error::config(key, format!("unknown scheme `{s}`"))))
                    .collect();
                let list = list?;
                if list.is_empty() {
                    return Err(Error::config(key, "empty scheme list"));
                }
                self.schemes = list;
            }
            "dim" => {
                let d: usize = parse_value(key, value)?;
                if d != 2 && d != 3 {
                    return Err(Error::config(key, format!("expected 2 or 3, got {d}")));
                }
                self.dim = d;
            }
            "nu" => self.nu = parse_positive(key, value)?,
            "mode" => self.mode = value.parse().map_err(|_| Error::config(key, format!("unknown mode `{}`", value.trim())))?,
            "s" => self.s = parse_levels(key, value)?,
            "l" => self.l = parse_levels(key, value)?,
            "T" | "t_end" => self.t_end = Some(parse_positive(key, value)?),
            "cinv" | "c_inv" => self.c_inv = parse_positive(key, value)?,
            "rel_tol" => self.solver.rel_tol = parse_positive(key, value)?,
            "abs_tol" => self.solver.abs_tol = parse_positive(key, value)?,
            "max_iter" => {
                let m: usize = parse_value(key, value)?;
                if m == 0 {
                    return Err(Error::config(key, "must be at least 1"));
                }
                self.solver.max_iter = m;
            }
            "preconditioner" => {
                self.preconditioner = match value.trim() {
                    "jacobi" => PreconditionerChoice::Jacobi,
                    "structured" => PreconditionerChoice::Structured,
                    other => return Err(Error::config(key, format!("unknown preconditioner `{other}`"))),
                }
            }
            "out" => self.out = PathBuf::from(value.trim()),
            "allow_large" => self.allow_large = parse_bool(key, value)?,
            other => return Err(Error::config(other, "unknown key")),
        }
        Ok(())
    }

    /// Resolves one `(scheme, s, l)` combination and validates it.
    pub fn case(&self, scheme: SchemeKind, s: usize, l: usize) -> Result<CaseConfig> {
        if self.dim == 3 && s > MAX_DEFAULT_LEVEL && !self.allow_large {
            return Err(Error::config(
                "s",
                format!("s = {s} exceeds {MAX_DEFAULT_LEVEL} in 3D; pass allow_large to run it"),
            ));
        }
        if s > 12 {
            return Err(Error::config("s", format!("s = {s} is out of range")));
        }
        let k = self.mode.time_step(l);
        let t_end = self.t_end.unwrap_or(self.mode.default_end_time());
        let steps = t_end / k;
        let n_steps = steps.round();
        if (steps - n_steps).abs() > 1e-9 * steps.max(1.0) || n_steps < 1.0 {
            return Err(Error::config("T", format!("T = {t_end} is not a positive multiple of k = {k}")));
        }
        Ok(CaseConfig {
            scheme,
            dim: self.dim,
            nu: self.nu,
            mode: self.mode,
            s,
            l,
            k,
            h: 2f64.powi(-(s as i32) - 4),
            t_end,
            n_steps: n_steps as usize,
            c_inv: self.c_inv,
            solver: self.solver,
            preconditioner: self.preconditioner,
        })
    }

    /// Every combination of the configured lists, schemes outermost.
    pub fn cases(&self) -> Result<Vec<CaseConfig>> {
        let mut out = Vec::new();
        for &scheme in &self.schemes {
            for &s in &self.s {
                for &l in &self.l {
                    out.push(self.case(scheme, s, l)?);
                }
            }
        }
        Ok(out)
    }

    /// The single case of a non-sweep run.
    pub fn single_case(&self) -> Result<CaseConfig> {
        for (key, len) in [("scheme", self.schemes.len()), ("s", self.s.len()), ("l", self.l.len())] {
            if len != 1 {
                return Err(Error::config(key, "a single run takes exactly one value"));
            }
        }
        self.case(self.schemes[0], self.s[0], self.l[0])
    }
}

/// Parses configuration text, then applies `overrides` in order.
pub fn parse_config<'a>(text: &str, overrides: impl IntoIterator<Item = (&'a str, String)>) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::config(format!("line {}", lineno + 1), format!("expected `key = value`, got `{line}`")))?;
        cfg.set(key.trim(), value)?;
    }
    for (key, value) in overrides {
        cfg.set(key, &value)?;
    }
    Ok(cfg)
}
