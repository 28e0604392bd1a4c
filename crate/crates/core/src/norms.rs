//! Error norms on dense lattices and the second-order modulus of smoothness.

use crate::error::{param, Error, Result};
use crate::quadrature::GaussLegendre;
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    Linf,
    L2,
}

/// Interval [a, b] with the breakpoints of the grids under comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorDomain {
    breakpoints: Vec<f64>,
}

/// Lattice refinement factor relative to the finest cell.
pub const LATTICE_REFINEMENT: usize = 10;

impl ErrorDomain {
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::with_breakpoints(vec![a, b])
    }

    /// Sorted breakpoints x_0 < ... < x_n; the domain is [x_0, x_n].
    pub fn with_breakpoints(mut breakpoints: Vec<f64>) -> Result<Self> {
        breakpoints.sort_by(f64::total_cmp);
        breakpoints.dedup();
        if breakpoints.len() < 2 || breakpoints.iter().any(|x| !x.is_finite()) {
            return Err(Error::Input("error domain needs two finite breakpoints".into()));
        }
        Ok(ErrorDomain { breakpoints })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn start(&self) -> f64 {
        self.breakpoints[0]
    }

    pub fn end(&self) -> f64 {
        self.breakpoints[self.breakpoints.len() - 1]
    }

    /// Uniform points at spacing (finest cell)/10, plus every breakpoint and midpoint.
    pub fn lattice(&self) -> Vec<f64> {
        let (a, b) = (self.start(), self.end());
        let hmin = self
            .breakpoints
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        let n = (((b - a) / hmin).round() as usize).max(1) * LATTICE_REFINEMENT;
        let mut pts: Vec<f64> = (0..=n).map(|k| a + (b - a) * k as f64 / n as f64).collect();
        pts.extend_from_slice(&self.breakpoints);
        pts.extend(self.breakpoints.windows(2).map(|w| 0.5 * (w[0] + w[1])));
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    fn cells(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.breakpoints.windows(2).map(|w| (w[0], w[1]))
    }
}

fn checked(v: Result<f64>, x: f64, which: &str) -> Result<f64> {
    let v = v?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Evaluation {
            at: format!("x = {x}"),
            detail: format!("{which} returned {v}"),
        })
    }
}

/// ||f_ref - f_approx|| on the domain. L-infinity on the dense lattice, L2 by
/// 16-point Gauss-Legendre on each cell split in two.
pub fn error_norm<F, G>(f_ref: F, f_approx: G, domain: &ErrorDomain, norm: Norm) -> Result<f64>
where
    F: Fn(f64) -> Result<f64> + Sync,
    G: Fn(f64) -> Result<f64> + Sync,
{
    let diff = |x: f64| -> Result<f64> {
        let r = checked(f_ref(x), x, "reference")?;
        let a = checked(f_approx(x), x, "approximation")?;
        Ok(r - a)
    };
    match norm {
        Norm::Linf => {
            let vals: Vec<Result<f64>> = domain.lattice().into_par_iter().map(&diff).collect();
            let mut worst = 0.0f64;
            for v in vals {
                worst = worst.max(v?.abs());
            }
            Ok(worst)
        }
        Norm::L2 => {
            let gl = GaussLegendre::new(16);
            let cells: Vec<(f64, f64)> = domain.cells().collect();
            let parts: Vec<Result<f64>> = cells
                .par_iter()
                .map(|&(lo, hi)| {
                    let mid = 0.5 * (lo + hi);
                    let mut s = 0.0;
                    for (a, b) in [(lo, mid), (mid, hi)] {
                        for (x, w) in gl.mapped(a, b) {
                            let d = diff(x)?;
                            s += w * d * d;
                        }
                    }
                    Ok(s)
                })
                .collect();
            let mut total = 0.0;
            for p in parts {
                total += p?;
            }
            Ok(total.sqrt())
        }
    }
}

/// Number of shifts h in (0, t] scanned by [`modulus_omega2`].
pub const OMEGA2_SHIFTS: usize = 64;

/// Sampled lower estimate of sup_{|h|<=t} ||f(.+h) + f(.-h) - 2f||_q over [a, b].
/// With `periodic` the sample lattice excludes b and L2 uses the rectangle rule;
/// otherwise it includes b and uses the trapezoid rule.
pub fn modulus_omega2<F: Fn(f64) -> f64 + Sync>(
    f: F,
    t: f64,
    norm: Norm,
    (a, b): (f64, f64),
    periodic: bool,
    sample_count: usize,
) -> Result<f64> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(param("t", t, "must be non-negative"));
    }
    if sample_count < 2 || !(b > a) {
        return Err(Error::Input("need at least two samples on a non-empty interval".into()));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let n = sample_count;
    let dx = if periodic {
        (b - a) / n as f64
    } else {
        (b - a) / (n - 1) as f64
    };
    let xs: Vec<f64> = (0..n).map(|k| a + dx * k as f64).collect();
    let fx: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let per_shift: Vec<f64> = (1..=OMEGA2_SHIFTS)
        .into_par_iter()
        .map(|i| {
            let h = t * i as f64 / OMEGA2_SHIFTS as f64;
            let d = xs.iter().zip(&fx).map(|(&x, &v)| f(x + h) + f(x - h) - 2.0 * v);
            match norm {
                Norm::Linf => d.fold(0.0f64, |m, v| m.max(v.abs())),
                Norm::L2 => {
                    let mut s = 0.0;
                    for (k, v) in d.enumerate() {
                        let w = if !periodic && (k == 0 || k == n - 1) { 0.5 } else { 1.0 };
                        s += w * v * v;
                    }
                    (s * dx).sqrt()
                }
            }
        })
        .collect();
    let best = per_shift.into_iter().fold(0.0, f64::max);
    if best.is_finite() {
        Ok(best)
    } else {
        Err(Error::Evaluation {
            at: format!("t = {t}"),
            detail: "non-finite second difference".into(),
        })
    }
}
