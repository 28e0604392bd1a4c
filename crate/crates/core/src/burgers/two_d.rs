//! Periodic 2D Burgers through the potential phi0 = exp(-Phi / (2 kappa)),
//! with grad Phi = (u0, v0).

use super::kernel::{self, hat_masses, kernel_coefficients};
use super::{check_kappa, check_periodic_2pi, POSITIVITY_FLOOR};
use crate::error::{param, Error, Result};
use crate::grid::{Grid1D, Grid2D};
use crate::quadrature::GaussLegendre;

/// Tolerance of the lattice check d_y u0 = d_x v0 = w0.
pub const CONSISTENCY_TOLERANCE: f64 = 1e-8;

/// Generating data of a curl-free periodic field: w0 (bilinear, nodal),
/// u~0 along x and v~0 along y (linear, nodal). Then
/// u0 = u~0(x) + int_{-pi}^y w0(x, s) ds and v0 = v~0(y) + int_{-pi}^x w0(r, y) dr.
#[derive(Debug, Clone)]
pub struct Burgers2DData {
    kappa: f64,
    grid: Grid2D,
    w0: Vec<f64>,
    u_tilde: Vec<f64>,
    v_tilde: Vec<f64>,
    /// phi0 at nodes, x-major
    phi_nodes: Vec<f64>,
    /// int_{-pi}^{y_j} w0(x_i, s) ds
    col_int: Vec<f64>,
    /// int_{-pi}^{x_i} w0(r, y_j) dr
    row_int: Vec<f64>,
    ut_int: Vec<f64>,
    vt_int: Vec<f64>,
}

fn cumulative_trapezoid(vals: impl Fn(usize) -> f64, g: &Grid1D) -> Vec<f64> {
    let mut out = vec![0.0; g.cells() + 1];
    for j in 0..g.cells() {
        out[j + 1] = out[j] + 0.5 * (vals(j) + vals(j + 1)) * g.width(j);
    }
    out
}

impl Burgers2DData {
    pub fn from_generators(
        kappa: f64,
        grid: Grid2D,
        w0: Vec<f64>,
        u_tilde: Vec<f64>,
        v_tilde: Vec<f64>,
    ) -> Result<Self> {
        check_kappa(kappa)?;
        check_periodic_2pi(grid.x())?;
        check_periodic_2pi(grid.y())?;
        let nx = grid.x().value_count();
        let ny = grid.y().value_count();
        if w0.len() != nx * ny || u_tilde.len() != nx || v_tilde.len() != ny {
            return Err(Error::Input("generator sizes do not match the grid".into()));
        }
        if w0.iter().chain(&u_tilde).chain(&v_tilde).any(|v| !v.is_finite()) {
            return Err(Error::Input("non-finite generator value".into()));
        }
        let (gx, gy) = (grid.x().clone(), grid.y().clone());
        let w = |i: usize, j: usize| w0[grid.index(i % nx, j % ny)];
        let ut_int = cumulative_trapezoid(|i| u_tilde[i % nx], &gx);
        let vt_int = cumulative_trapezoid(|j| v_tilde[j % ny], &gy);
        let scale = w0
            .iter()
            .chain(&u_tilde)
            .chain(&v_tilde)
            .fold(1.0f64, |m, v| m.max(v.abs()));
        let tol = 1e-10 * scale * 2.0 * std::f64::consts::PI;
        if ut_int[nx].abs() > tol || vt_int[ny].abs() > tol {
            return Err(Error::Input(
                "u~0 and v~0 must have zero mean (use the Galilean shift)".into(),
            ));
        }
        let mut col_int = vec![0.0; (nx + 1) * (ny + 1)];
        let mut row_int = vec![0.0; (nx + 1) * (ny + 1)];
        for i in 0..=nx {
            let c = cumulative_trapezoid(|j| w(i, j), &gy);
            if c[ny].abs() > tol {
                return Err(Error::Input(format!(
                    "w0 has nonzero mean {:e} along x = {}; phi0 would not be periodic",
                    c[ny],
                    gx.node(i)
                )));
            }
            for j in 0..=ny {
                col_int[i * (ny + 1) + j] = c[j];
            }
        }
        for j in 0..=ny {
            let r = cumulative_trapezoid(|i| w(i, j), &gx);
            if r[nx].abs() > tol {
                return Err(Error::Input(format!(
                    "w0 has nonzero mean {:e} along y = {}; phi0 would not be periodic",
                    r[nx],
                    gy.node(j)
                )));
            }
            for i in 0..=nx {
                row_int[i * (ny + 1) + j] = r[i];
            }
        }
        let mut data = Burgers2DData {
            kappa,
            grid,
            w0,
            u_tilde,
            v_tilde,
            phi_nodes: Vec::new(),
            col_int,
            row_int,
            ut_int,
            vt_int,
        };
        let mut phi = Vec::with_capacity(nx * ny);
        for i in 0..nx {
            for j in 0..ny {
                phi.push(data.phi0(gx.node(i), gy.node(j)));
            }
        }
        data.phi_nodes = phi;
        Ok(data)
    }

    /// Build from callables u0, v0, w0: the consistency d_y u0 = d_x v0 = w0 is checked
    /// on the lattice by central differences, then the generators are sampled.
    pub fn from_fields<U, V, W>(kappa: f64, grid: Grid2D, u0: U, v0: V, w0: W) -> Result<Self>
    where
        U: Fn(f64, f64) -> f64,
        V: Fn(f64, f64) -> f64,
        W: Fn(f64, f64) -> f64,
    {
        let nx = grid.x().value_count();
        let ny = grid.y().value_count();
        let d = 1e-5;
        let mut worst = (0.0f64, 0.0, 0.0);
        let mut w_nodes = Vec::with_capacity(nx * ny);
        for i in 0..nx {
            for j in 0..ny {
                let (x, y) = (grid.x().node(i), grid.y().node(j));
                let uy = (u0(x, y + d) - u0(x, y - d)) / (2.0 * d);
                let vx = (v0(x + d, y) - v0(x - d, y)) / (2.0 * d);
                let w = w0(x, y);
                let r = (uy - w).abs().max((vx - w).abs());
                if !r.is_finite() || r > worst.0 {
                    worst = (if r.is_finite() { r } else { f64::INFINITY }, x, y);
                }
                w_nodes.push(w);
            }
        }
        if worst.0 > CONSISTENCY_TOLERANCE {
            return Err(Error::Input(format!(
                "inconsistent data: |d_y u0 - w0|, |d_x v0 - w0| reach {:e} at ({}, {})",
                worst.0, worst.1, worst.2
            )));
        }
        let y0 = grid.y().start();
        let x0 = grid.x().start();
        let ut = (0..nx).map(|i| u0(grid.x().node(i), y0)).collect();
        let vt = (0..ny).map(|j| v0(x0, grid.y().node(j))).collect();
        Self::from_generators(kappa, grid, w_nodes, ut, vt)
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    fn w(&self, i: usize, j: usize) -> f64 {
        let nx = self.grid.x().value_count();
        let ny = self.grid.y().value_count();
        self.w0[self.grid.index(i % nx, j % ny)]
    }

    /// Phi(x, y) = int u~0 + int v~0 + int int w0, exact for the piecewise data.
    /// (x, y) must lie in [-pi, pi]^2.
    pub fn potential(&self, x: f64, y: f64) -> f64 {
        let gx = self.grid.x();
        let gy = self.grid.y();
        let nx = gx.value_count();
        let ny = gy.value_count();
        let ny1 = ny + 1;
        let i = gx.locate(x);
        let j = gy.locate(y);
        let (hx, hy) = (gx.width(i), gy.width(j));
        let s = (x - gx.node(i)) / hx;
        let r = (y - gy.node(j)) / hy;
        // 1D parts
        let (a, b) = (self.u_tilde[i % nx], self.u_tilde[(i + 1) % nx]);
        let ut = self.ut_int[i] + hx * (a * s + 0.5 * (b - a) * s * s);
        let (a, b) = (self.v_tilde[j % ny], self.v_tilde[(j + 1) % ny]);
        let vt = self.vt_int[j] + hy * (a * r + 0.5 * (b - a) * r * r);
        // double integral of w0 over [-pi, x] x [-pi, y]
        let corner = self.double_node(i, j);
        // strip [x_i, x] x [-pi, y_j]: column integrals are linear in x
        let c0 = self.col_int[i * ny1 + j];
        let c1 = self.col_int[(i + 1) * ny1 + j];
        let strip_x = hx * (c0 * s + 0.5 * (c1 - c0) * s * s);
        // strip [-pi, x_i] x [y_j, y]
        let r0 = self.row_int[i * ny1 + j];
        let r1 = self.row_int[i * ny1 + j + 1];
        let strip_y = hy * (r0 * r + 0.5 * (r1 - r0) * r * r);
        // partial cell, bilinear w0
        let (p0, p1) = (s - 0.5 * s * s, 0.5 * s * s);
        let (q0, q1) = (r - 0.5 * r * r, 0.5 * r * r);
        let cell = hx
            * hy
            * (self.w(i, j) * p0 * q0
                + self.w(i + 1, j) * p1 * q0
                + self.w(i, j + 1) * p0 * q1
                + self.w(i + 1, j + 1) * p1 * q1);
        ut + vt + corner + strip_x + strip_y + cell
    }

    fn double_node(&self, i: usize, j: usize) -> f64 {
        // int_{-pi}^{x_i} of the column integrals up to y_j (trapezoid is exact: linear in x)
        let gx = self.grid.x();
        let ny1 = self.grid.y().value_count() + 1;
        (0..i)
            .map(|k| 0.5 * (self.col_int[k * ny1 + j] + self.col_int[(k + 1) * ny1 + j]) * gx.width(k))
            .sum()
    }

    pub fn phi0(&self, x: f64, y: f64) -> f64 {
        (-self.potential(x, y) / (2.0 * self.kappa)).exp()
    }

    /// u0(x, y) and v0(x, y) of the generated field.
    pub fn velocity(&self, x: f64, y: f64) -> (f64, f64) {
        let gx = self.grid.x();
        let gy = self.grid.y();
        let (nx, ny) = (gx.value_count(), gy.value_count());
        let ny1 = ny + 1;
        let i = gx.locate(x);
        let j = gy.locate(y);
        let s = (x - gx.node(i)) / gx.width(i);
        let r = (y - gy.node(j)) / gy.width(j);
        let ut = (1.0 - s) * self.u_tilde[i % nx] + s * self.u_tilde[(i + 1) % nx];
        let vt = (1.0 - r) * self.v_tilde[j % ny] + r * self.v_tilde[(j + 1) % ny];
        let lin = |a: f64, b: f64, t: f64| (1.0 - t) * a + t * b;
        let col = lin(self.col_int[i * ny1 + j], self.col_int[(i + 1) * ny1 + j], s)
            + gy.width(j)
                * (lin(self.w(i, j), self.w(i + 1, j), s) * (r - 0.5 * r * r)
                    + lin(self.w(i, j + 1), self.w(i + 1, j + 1), s) * 0.5 * r * r);
        let row = lin(self.row_int[i * ny1 + j], self.row_int[i * ny1 + j + 1], r)
            + gx.width(i)
                * (lin(self.w(i, j), self.w(i, j + 1), r) * (s - 0.5 * s * s)
                    + lin(self.w(i + 1, j), self.w(i + 1, j + 1), r) * 0.5 * s * s);
        (ut + col, vt + row)
    }

    pub fn sup_norm(&self) -> f64 {
        let gx = self.grid.x();
        let gy = self.grid.y();
        let mut m = 0.0f64;
        for i in 0..gx.value_count() {
            for j in 0..gy.value_count() {
                let (u, v) = self.velocity(gx.node(i), gy.node(j));
                m = m.max(u.abs()).max(v.abs());
            }
        }
        m
    }
}

/// Rational variant: I^0 phi0 (bottom-left corner) below, bilinear I^1 phi0 above.
pub fn burgers_2d_rational(data: &Burgers2DData, x: f64, y: f64, t: f64) -> Result<(f64, f64)> {
    let k = data.kappa;
    let gx = data.grid.x();
    let gy = data.grid.y();
    let cx = kernel_coefficients(gx, x, t, k)?;
    let cy = kernel_coefficients(gy, y, t, k)?;
    let hx = hat_masses(gx, x, t, k)?;
    let hy = hat_masses(gy, y, t, k)?;
    let ny = gy.value_count();
    let (mut nu, mut nv, mut den) = (0.0, 0.0, 0.0);
    for i in 0..gx.value_count() {
        for j in 0..ny {
            let p = data.phi_nodes[i * ny + j];
            den += p * cx.c2[i] * cy.c2[j];
            nu += p * cx.c1[i] * hy[j];
            nv += p * hx[i] * cy.c1[j];
        }
    }
    if !(den > POSITIVITY_FLOOR) {
        return Err(Error::Internal(format!("2D rational denominator {den:e} not positive")));
    }
    Ok((nu / den, nv / den))
}

/// Reference solution by tensor Gauss-Legendre quadrature of phi0 against the
/// periodized 2D kernel. Holds phi0 on the quadrature lattice so repeated
/// evaluations cost one kernel sweep each.
#[derive(Debug, Clone)]
pub struct Burgers2DExact {
    kappa: f64,
    xs: Vec<(f64, f64)>,
    ys: Vec<(f64, f64)>,
    phi: Vec<f64>,
}

impl Burgers2DExact {
    /// 16-point rule on every cell split `refine` times per axis.
    pub fn new(data: &Burgers2DData, refine: usize) -> Result<Self> {
        if refine == 0 {
            return Err(param("refine", 0.0, "must be at least 1"));
        }
        let gl = GaussLegendre::new(16);
        let pts = |g: &Grid1D| -> Vec<(f64, f64)> {
            let mut out = Vec::new();
            for c in 0..g.cells() {
                let h = g.width(c) / refine as f64;
                for p in 0..refine {
                    let lo = g.node(c) + h * p as f64;
                    out.extend(gl.mapped(lo, lo + h));
                }
            }
            out
        };
        let xs = pts(data.grid.x());
        let ys = pts(data.grid.y());
        let mut phi = Vec::with_capacity(xs.len() * ys.len());
        for &(x, _) in &xs {
            for &(y, _) in &ys {
                phi.push(data.phi0(x, y));
            }
        }
        Ok(Burgers2DExact {
            kappa: data.kappa,
            xs,
            ys,
            phi,
        })
    }

    pub fn eval(&self, x: f64, y: f64, t: f64) -> Result<(f64, f64)> {
        let k = self.kappa;
        let l = kernel::shift_count(t, k, 2.0 * std::f64::consts::PI);
        let weights = |pts: &[(f64, f64)], at: f64| -> Result<(Vec<f64>, Vec<f64>)> {
            let mut kk = Vec::with_capacity(pts.len());
            let mut dk = Vec::with_capacity(pts.len());
            for &(s, w) in pts {
                kk.push(w * kernel::heat_kernel_periodized_with(at, s, t, k, 0, l)?);
                dk.push(w * kernel::heat_kernel_periodized_with(at, s, t, k, 1, l)?);
            }
            Ok((kk, dk))
        };
        let (kx, dkx) = weights(&self.xs, x)?;
        let (ky, dky) = weights(&self.ys, y)?;
        let ny = self.ys.len();
        let (mut nu, mut nv, mut den) = (0.0, 0.0, 0.0);
        for i in 0..self.xs.len() {
            let row = &self.phi[i * ny..(i + 1) * ny];
            let (mut a, mut b) = (0.0, 0.0);
            for j in 0..ny {
                a += row[j] * ky[j];
                b += row[j] * dky[j];
            }
            den += kx[i] * a;
            nu += dkx[i] * a;
            nv += kx[i] * b;
        }
        if !(den > POSITIVITY_FLOOR) {
            return Err(Error::Internal(format!(
                "2D Cole-Hopf denominator {den:e} not positive"
            )));
        }
        Ok((-2.0 * k * nu / den, -2.0 * k * nv / den))
    }
}

/// Both variants at one point: ((u, v) exact, (u, v) rational).
pub fn burgers_2d_operators(
    data: &Burgers2DData,
    x: f64,
    y: f64,
    t: f64,
    refine: usize,
) -> Result<((f64, f64), (f64, f64))> {
    let exact = Burgers2DExact::new(data, refine)?.eval(x, y, t)?;
    let rational = burgers_2d_rational(data, x, y, t)?;
    Ok((exact, rational))
}
