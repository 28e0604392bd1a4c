//! Periodized heat kernel and its cell integrals in closed form.

use crate::error::{param, Error, Result};
use crate::grid::Grid1D;
use crate::quadrature::{gauss_first_moment, gauss_mass};
use std::f64::consts::PI;

/// Smallest number of period shifts on each side.
pub const MIN_SHIFTS: i64 = 3;
/// Gaussian factor below which a shifted copy is dropped.
pub const TAIL_CUTOFF: f64 = 1e-16;

fn check(t: f64, kappa: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(param("t", t, "must be positive"));
    }
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(param("kappa", kappa, "must be positive"));
    }
    Ok(())
}

/// Shift count L* for x - y reduced to one period: every copy with |l| > L* sits at
/// distance >= period * (|l| - 1), where the Gaussian factor is below 1e-16.
pub fn shift_count(t: f64, kappa: f64, period: f64) -> i64 {
    let reach = (4.0 * kappa * t * (1.0 / TAIL_CUTOFF).ln()).sqrt();
    MIN_SHIFTS.max(1 + (reach / period).ceil() as i64)
}

/// K(x, y, t) = (4 pi kappa t)^{-1/2} exp(-(x-y)^2 / (4 kappa t)).
pub fn heat_kernel(x: f64, y: f64, t: f64, kappa: f64) -> f64 {
    let d = x - y;
    (-d * d / (4.0 * kappa * t)).exp() / (4.0 * PI * kappa * t).sqrt()
}

/// d/dx of [`heat_kernel`].
pub fn heat_kernel_dx(x: f64, y: f64, t: f64, kappa: f64) -> f64 {
    -(x - y) / (2.0 * kappa * t) * heat_kernel(x, y, t, kappa)
}

/// Sum over |l| <= shifts of K (derivative = 0) or dK/dx (derivative = 1) at (x, y + 2 pi l).
pub fn heat_kernel_periodized_with(x: f64, y: f64, t: f64, kappa: f64, derivative: u8, shifts: i64) -> Result<f64> {
    check(t, kappa)?;
    let p = 2.0 * PI;
    // reduce x - y to [-pi, pi) so the shift window is centred
    let d = (x - y + PI).rem_euclid(p) - PI;
    let mut s = 0.0;
    for l in -shifts..=shifts {
        let yy = x - d + p * l as f64;
        s += match derivative {
            0 => heat_kernel(x, yy, t, kappa),
            1 => heat_kernel_dx(x, yy, t, kappa),
            _ => return Err(Error::Input(format!("derivative order {derivative} not in {{0, 1}}"))),
        };
    }
    Ok(s)
}

pub fn heat_kernel_periodized(x: f64, y: f64, t: f64, kappa: f64, derivative: u8) -> Result<f64> {
    let l = shift_count(t, kappa, 2.0 * PI);
    heat_kernel_periodized_with(x, y, t, kappa, derivative, l)
}

/// Kernel weights of the rational operator at (x, t).
#[derive(Debug, Clone, PartialEq)]
pub struct KernelCoefficients {
    /// -2 kappa * integral of dK/dx against the periodic hat at node j.
    pub c1: Vec<f64>,
    /// Integral of the periodized kernel over cell [x_j, x_{j+1}].
    pub c2: Vec<f64>,
    pub x: f64,
    pub t: f64,
}

fn periodic_grid(grid: &Grid1D) -> Result<()> {
    if !grid.periodic() {
        return Err(Error::Input("kernel coefficients need a periodic grid".into()));
    }
    if (grid.period() - 2.0 * PI).abs() > 1e-12 {
        return Err(Error::Input(format!(
            "kernel coefficients need period 2pi, got {}",
            grid.period()
        )));
    }
    Ok(())
}

/// Periodized kernel mass of every cell, summed over all shifts in closed form.
pub fn cell_masses(grid: &Grid1D, x: f64, t: f64, kappa: f64) -> Result<Vec<f64>> {
    check(t, kappa)?;
    periodic_grid(grid)?;
    let x = grid.reduce(x)?;
    let s = (4.0 * kappa * t).sqrt();
    let p = grid.period();
    let l = shift_count(t, kappa, p);
    Ok((0..grid.cells())
        .map(|j| {
            let (a, b) = (grid.node(j), grid.node(j + 1));
            (-l..=l)
                .map(|k| {
                    let off = p * k as f64 - x;
                    gauss_mass((a + off) / s, (b + off) / s)
                })
                .sum()
        })
        .collect())
}

/// Integral of the periodized kernel against the hat L_j at every node j.
pub fn hat_masses(grid: &Grid1D, x: f64, t: f64, kappa: f64) -> Result<Vec<f64>> {
    check(t, kappa)?;
    periodic_grid(grid)?;
    let x = grid.reduce(x)?;
    let s = (4.0 * kappa * t).sqrt();
    let p = grid.period();
    let l = shift_count(t, kappa, p);
    let m = grid.cells();
    // rising[j]: weight (y - a)/w on cell j; falling[j]: weight (b - y)/w on cell j
    let mut rising = vec![0.0; m];
    let mut falling = vec![0.0; m];
    for j in 0..m {
        let (a, b) = (grid.node(j), grid.node(j + 1));
        let w = b - a;
        let (mut r, mut f) = (0.0, 0.0);
        for k in -l..=l {
            let c = x - p * k as f64;
            // y = c + s z on this copy
            let (za, zb) = ((a - c) / s, (b - c) / s);
            let m0 = gauss_mass(za, zb);
            let m1 = gauss_first_moment(za, zb);
            r += ((c - a) * m0 + s * m1) / w;
            f += ((b - c) * m0 - s * m1) / w;
        }
        rising[j] = r;
        falling[j] = f;
    }
    Ok((0..m).map(|j| rising[(j + m - 1) % m] + falling[j]).collect())
}

/// c1 and c2 at (x, t). Integrating dK/dx against a hat by parts leaves only
/// cell masses: c1_j = -2 kappa (c2_{j-1}/w_{j-1} - c2_j/w_j).
pub fn kernel_coefficients(grid: &Grid1D, x: f64, t: f64, kappa: f64) -> Result<KernelCoefficients> {
    let c2 = cell_masses(grid, x, t, kappa)?;
    let m = c2.len();
    let c1 = (0..m)
        .map(|j| {
            let jm = (j + m - 1) % m;
            -2.0 * kappa * (c2[jm] / grid.width(jm) - c2[j] / grid.width(j))
        })
        .collect();
    Ok(KernelCoefficients { c1, c2, x, t })
}
