//! Parameter sweeps: one cell per axis value, log-log slope over the rows,
//! CSV written to a temporary file and renamed into place.

use crate::config::Params;
use crate::error::{invalid, HarnessError, Result};
use crate::problems::{build_problem, cell_seed, Axis, Cell};
pub use deeponet_core::rates::{fit_slope, SlopeFit};
use rayon::prelude::*;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const CSV_HEADER: &str = "axis,value,error_linf,error_l2,runtime_ms,aux1,aux2";

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub problem: String,
    pub axis: Axis,
    pub values: Vec<f64>,
    pub params: Params,
    pub seed: u64,
    pub out: Option<PathBuf>,
    /// worker threads for the cell pool; `None` uses the global pool
    pub threads: Option<usize>,
    /// record wall-clock time per cell (otherwise 0, keeping the CSV reproducible)
    pub timing: bool,
}

impl SweepSpec {
    pub fn new(problem: &str, axis: Axis, values: Vec<f64>) -> Self {
        SweepSpec {
            problem: problem.to_string(),
            axis,
            values,
            params: Params::new(),
            seed: 0,
            out: None,
            threads: None,
            timing: false,
        }
    }

    pub fn with_params(mut self, params: Params) -> Self {
        self.params = params;
        self
    }

    pub fn with_out(mut self, out: impl Into<PathBuf>) -> Self {
        self.out = Some(out.into());
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.len() < 3 {
            return Err(invalid(format!(
                "a sweep needs at least 3 values, got {}",
                self.values.len()
            )));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("sweep values must be finite"));
        }
        if let Some(w) = self.values.windows(2).find(|w| w[1] <= w[0]) {
            return Err(invalid(format!(
                "sweep values must increase strictly ({} then {})",
                w[0], w[1]
            )));
        }
        if self.threads == Some(0) {
            return Err(invalid("threads must be at least 1"));
        }
        Ok(())
    }
}

/// Parse `16,32,64` or `a:b:factor` (geometric, inclusive).
pub fn parse_values(s: &str) -> Result<Vec<f64>> {
    let num = |t: &str| -> Result<f64> {
        t.trim()
            .parse::<f64>()
            .map_err(|_| HarnessError::Usage(format!("`{t}` is not a number")))
    };
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let (a, b, f) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(a > 0.0 && f > 1.0 && b >= a) {
            return Err(HarnessError::Usage(format!(
                "range `{s}` needs 0 < start <= end and factor > 1"
            )));
        }
        let mut v = vec![a];
        while let Some(&last) = v.last() {
            let next = last * f;
            if next > b * (1.0 + 1e-12) {
                break;
            }
            v.push(next);
        }
        return Ok(v);
    }
    s.split(',').map(num).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Row {
    pub value: f64,
    pub cell: Cell,
    pub runtime_ms: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub problem: String,
    pub axis: Axis,
    pub rows: Vec<Row>,
    /// slope of ln(error_linf) against ln(value); `None` unless every error is positive
    pub fit: Option<SlopeFit>,
    pub fit_l2: Option<SlopeFit>,
    /// error_linf against the measured network size in aux1, when the problem reports one
    pub size_fit: Option<SlopeFit>,
}

/// Shortest decimal that parses back to the same binary64.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v:?}")
    }
}

fn fmt_value(axis: Axis, v: f64) -> String {
    if axis.is_integer() && v.fract() == 0.0 && v.abs() < 9e15 {
        format!("{}", v as i64)
    } else {
        fmt_f64(v)
    }
}

impl ConvergenceReport {
    pub fn from_rows(problem: &str, axis: Axis, rows: Vec<Row>, size_axis: bool) -> Self {
        let fit_of = |pick: &dyn Fn(&Row) -> (f64, f64)| -> Option<SlopeFit> {
            let pts: Vec<(f64, f64)> = rows.iter().map(pick).collect();
            if pts.iter().all(|p| p.1 > 0.0) {
                fit_slope(&pts).ok()
            } else {
                None
            }
        };
        let fit = fit_of(&|r| (r.value, r.cell.error_linf));
        let fit_l2 = fit_of(&|r| (r.value, r.cell.error_l2));
        let size_fit = if size_axis {
            fit_of(&|r| (r.cell.aux1, r.cell.error_linf))
        } else {
            None
        };
        ConvergenceReport {
            problem: problem.to_string(),
            axis,
            rows,
            fit,
            fit_l2,
            size_fit,
        }
    }

    pub fn slope(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                self.axis.name(),
                fmt_value(self.axis, r.value),
                fmt_f64(r.cell.error_linf),
                fmt_f64(r.cell.error_l2),
                r.runtime_ms,
                fmt_f64(r.cell.aux1),
                fmt_f64(r.cell.aux2)
            );
        }
        s
    }

    pub fn summary(&self) -> String {
        let show = |f: Option<SlopeFit>| match f {
            Some(f) => format!("{:.4} (R^2 {:.4})", f.slope, f.r_squared),
            None => "undefined".into(),
        };
        let mut s = format!(
            "{} {}-sweep: slope linf {}, l2 {}",
            self.problem,
            self.axis.name(),
            show(self.fit),
            show(self.fit_l2)
        );
        if self.size_fit.is_some() {
            s.push_str(&format!(", vs measured size {}", show(self.size_fit)));
        }
        s
    }
}

/// Write `contents` next to `path` under a temporary name, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let io = |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| invalid(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = std::fs::remove_file(&tmp);
        return Err(io(e));
    }
    Ok(())
}

pub fn run_sweep(spec: &SweepSpec) -> Result<ConvergenceReport> {
    spec.validate()?;
    let mut problem = build_problem(&spec.problem, &spec.params)?;
    if !problem.axes().contains(&spec.axis) {
        return Err(HarnessError::Usage(format!(
            "{} has no sweep axis {} (axes: {})",
            spec.problem,
            spec.axis.name(),
            problem.axes().iter().map(|a| a.name()).collect::<Vec<_>>().join(", ")
        )));
    }
    for &v in &spec.values {
        problem
            .check(spec.axis, v)
            .map_err(|e| e.in_cell(format!("{}={}", spec.axis.name(), fmt_value(spec.axis, v))))?;
    }
    problem.prepare(spec.axis, &spec.values, spec.seed)?;
    let problem = &*problem;
    let run = || -> Vec<Result<Row>> {
        spec.values
            .par_iter()
            .map(|&v| {
                let start = Instant::now();
                let where_ = || format!("{} cell {}={}", spec.problem, spec.axis.name(), fmt_value(spec.axis, v));
                let cell = problem
                    .cell(spec.axis, v, cell_seed(spec.seed, v))
                    .map_err(|e| e.in_cell(where_()))?;
                if !(cell.error_linf.is_finite() && cell.error_l2.is_finite()) {
                    return Err(HarnessError::Numerical(format!(
                        "non-finite error ({}, {})",
                        cell.error_linf, cell.error_l2
                    ))
                    .in_cell(where_()));
                }
                let runtime_ms = if spec.timing {
                    start.elapsed().as_millis() as u64
                } else {
                    0
                };
                Ok(Row {
                    value: v,
                    cell,
                    runtime_ms,
                })
            })
            .collect()
    };
    let results = match spec.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| HarnessError::Usage(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    };
    let rows = results.into_iter().collect::<Result<Vec<_>>>()?;
    let report = ConvergenceReport::from_rows(&spec.problem, spec.axis, rows, problem.aux1_is_size(spec.axis));
    if let Some(out) = &spec.out {
        write_atomic(out, &report.to_csv())?;
    }
    Ok(report)
}
