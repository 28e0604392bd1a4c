//! Five-point finite differences for -Lap u + a1 u_x + a2 u_y + a3 u = f on a
//! square, written as S plus rank-one corrections.

use crate::error::{Error, Result};
use crate::grid::Grid2D;
use crate::interp::PiecewiseFunction2D;
use nalgebra::DMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    Dirichlet,
    /// du/dn = 0
    Neumann,
    /// du/dn + beta u = 0
    Robin(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateKind {
    /// alpha = h a1, v = row of the x-difference
    AdvectionX,
    /// alpha = h a2, v = row of the y-difference
    AdvectionY,
    /// alpha = h^2 a3, v = e_k
    Reaction,
    /// alpha = -1, v = e_p: removes the pin added to a pure Neumann S
    Unpin,
}

/// T <- (T^-1 + alpha e_k v^T)^-1.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOneUpdate {
    pub kind: UpdateKind,
    pub alpha: f64,
    pub k: usize,
    /// sparse v: (column, value)
    pub v: Vec<(usize, f64)>,
}

/// Unknown nodes of the scheme, x-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FdLayout {
    pub n: usize,
    pub h: f64,
    pub first: usize,
    pub boundary: Boundary,
    x0: f64,
    y0: f64,
}

impl FdLayout {
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        ix * self.n + iy
    }

    /// Coordinates of unknown k.
    pub fn point(&self, k: usize) -> (f64, f64) {
        let (ix, iy) = (k / self.n, k % self.n);
        (
            self.x0 + self.h * (ix + self.first) as f64,
            self.y0 + self.h * (iy + self.first) as f64,
        )
    }

    /// Grid node (ix, iy) of unknown k.
    pub fn grid_node(&self, k: usize) -> (usize, usize) {
        (k / self.n + self.first, k % self.n + self.first)
    }
}

#[derive(Debug, Clone)]
pub struct FdSystem {
    pub layout: FdLayout,
    /// h^2 (-Lap_h) with boundary rows folded in (plus the pin for pure Neumann)
    pub s: DMatrix<f64>,
    pub f: Vec<f64>,
    pub updates: Vec<RankOneUpdate>,
    /// pure Neumann without reaction: solution defined up to a constant, report the mean-zero one
    pub mean_zero: bool,
    pub pinned: Option<usize>,
}

/// Nodal coefficients a1, a2, a3 on the full grid (absent means zero).
#[derive(Debug, Clone, Default)]
pub struct Coefficients {
    pub a1: Option<PiecewiseFunction2D>,
    pub a2: Option<PiecewiseFunction2D>,
    pub a3: Option<PiecewiseFunction2D>,
}

fn check_uniform(grid: &Grid2D) -> Result<f64> {
    let gx = grid.x();
    let gy = grid.y();
    if gx.periodic() || gy.periodic() {
        return Err(Error::Input("finite-difference grid must not be periodic".into()));
    }
    if gx.cells() != gy.cells() {
        return Err(Error::Input("finite-difference grid must be square".into()));
    }
    let h = gx.width(0);
    let tol = 1e-9 * h;
    let uniform = |g: &crate::grid::Grid1D| (0..g.cells()).all(|j| (g.width(j) - h).abs() <= tol);
    if !uniform(gx) || !uniform(gy) {
        return Err(Error::Input(
            "finite-difference grid must be uniform with equal spacing".into(),
        ));
    }
    if gx.cells() < 2 {
        return Err(Error::Input("need at least two cells per axis".into()));
    }
    Ok(h)
}

/// Row of the h-scaled central difference along one axis at (ix, iy), after ghost
/// elimination. `along_x` selects the outer (x) index.
fn difference_row(l: &FdLayout, ix: usize, iy: usize, along_x: bool) -> Vec<(usize, f64)> {
    let n = l.n;
    let (i, other) = if along_x { (ix, iy) } else { (iy, ix) };
    let idx = |a: usize| if along_x { l.index(a, other) } else { l.index(other, a) };
    let mut row = Vec::new();
    match l.boundary {
        Boundary::Dirichlet => {
            if i + 1 < n {
                row.push((idx(i + 1), 0.5));
            }
            if i > 0 {
                row.push((idx(i - 1), -0.5));
            }
        }
        Boundary::Neumann | Boundary::Robin(_) => {
            let beta = if let Boundary::Robin(b) = l.boundary { b } else { 0.0 };
            // ghost: u_{-1} = u_1 - 2 h beta u_0 at the low side, u_{n} = u_{n-2} - 2 h beta u_{n-1}
            if i == 0 {
                if beta != 0.0 {
                    row.push((idx(0), l.h * beta));
                }
            } else if i == n - 1 {
                if beta != 0.0 {
                    row.push((idx(n - 1), -l.h * beta));
                }
            } else {
                row.push((idx(i + 1), 0.5));
                row.push((idx(i - 1), -0.5));
            }
        }
    }
    row
}

fn coefficient_at(c: &Option<PiecewiseFunction2D>, l: &FdLayout, k: usize) -> f64 {
    match c {
        None => 0.0,
        Some(p) => {
            let (ix, iy) = l.grid_node(k);
            p.node_value(ix, iy)
        }
    }
}

pub fn layout(grid: &Grid2D, boundary: Boundary) -> Result<FdLayout> {
    let h = check_uniform(grid)?;
    let cells = grid.x().cells();
    let (n, first) = match boundary {
        Boundary::Dirichlet => (cells - 1, 1),
        _ => (cells + 1, 0),
    };
    if let Boundary::Robin(b) = boundary {
        if !(b >= 0.0) || !b.is_finite() {
            return Err(Error::Input(format!("Robin coefficient must be non-negative, got {b}")));
        }
    }
    Ok(FdLayout {
        n,
        h,
        first,
        boundary,
        x0: grid.x().start(),
        y0: grid.y().start(),
    })
}

/// Build S, F and the ordered update list: all a1 updates, then a2, then a3.
pub fn assemble<F: Fn(f64, f64) -> f64>(
    grid: &Grid2D,
    coeffs: &Coefficients,
    f: F,
    boundary: Boundary,
) -> Result<FdSystem> {
    let l = layout(grid, boundary)?;
    for c in [&coeffs.a1, &coeffs.a2, &coeffs.a3].into_iter().flatten() {
        if c.grid() != grid {
            return Err(Error::Input("coefficient grid differs from the system grid".into()));
        }
    }
    let m = l.len();
    let n = l.n;
    let h = l.h;
    let beta = match boundary {
        Boundary::Robin(b) => b,
        _ => 0.0,
    };
    let mut s = DMatrix::<f64>::zeros(m, m);
    for ix in 0..n {
        for iy in 0..n {
            let k = l.index(ix, iy);
            s[(k, k)] += 4.0;
            for (i, along_x) in [(ix, true), (iy, false)] {
                let at = |a: usize| if along_x { l.index(a, iy) } else { l.index(ix, a) };
                match boundary {
                    Boundary::Dirichlet => {
                        if i > 0 {
                            s[(k, at(i - 1))] -= 1.0;
                        }
                        if i + 1 < n {
                            s[(k, at(i + 1))] -= 1.0;
                        }
                    }
                    _ => {
                        if i == 0 {
                            s[(k, at(1))] -= 2.0;
                            s[(k, k)] += 2.0 * h * beta;
                        } else if i == n - 1 {
                            s[(k, at(n - 2))] -= 2.0;
                            s[(k, k)] += 2.0 * h * beta;
                        } else {
                            s[(k, at(i - 1))] -= 1.0;
                            s[(k, at(i + 1))] -= 1.0;
                        }
                    }
                }
            }
        }
    }
    let mut fv = Vec::with_capacity(m);
    for k in 0..m {
        let (x, y) = l.point(k);
        let v = f(x, y);
        if !v.is_finite() {
            return Err(Error::Input(format!("non-finite source at ({x}, {y})")));
        }
        fv.push(h * h * v);
    }
    let mut updates = Vec::new();
    let mut max_adv = 0.0f64;
    for (kind, c, along_x) in [
        (UpdateKind::AdvectionX, &coeffs.a1, true),
        (UpdateKind::AdvectionY, &coeffs.a2, false),
    ] {
        for k in 0..m {
            let a = coefficient_at(c, &l, k);
            max_adv = max_adv.max(a.abs());
            if a != 0.0 {
                let (ix, iy) = (k / n, k % n);
                let v = difference_row(&l, ix, iy, along_x);
                if !v.is_empty() {
                    updates.push(RankOneUpdate {
                        kind,
                        alpha: h * a,
                        k,
                        v,
                    });
                }
            }
        }
    }
    if h * max_adv > 1.0 {
        return Err(Error::Input(format!(
            "central differences need h max|a1, a2| <= 1, got {}",
            h * max_adv
        )));
    }
    let mut any_reaction = false;
    for k in 0..m {
        let a = coefficient_at(&coeffs.a3, &l, k);
        if a < 0.0 || !a.is_finite() {
            let (x, y) = l.point(k);
            return Err(Error::Input(format!("a3 must be non-negative, got {a} at ({x}, {y})")));
        }
        if a != 0.0 {
            any_reaction = true;
            updates.push(RankOneUpdate {
                kind: UpdateKind::Reaction,
                alpha: h * h * a,
                k,
                v: vec![(k, 1.0)],
            });
        }
    }
    let mut pinned = None;
    let mut mean_zero = false;
    if boundary == Boundary::Neumann {
        // S has the constants in its kernel; S + e_p e_p^T is invertible
        let p = 0;
        s[(p, p)] += 1.0;
        pinned = Some(p);
        if any_reaction {
            updates.push(RankOneUpdate {
                kind: UpdateKind::Unpin,
                alpha: -1.0,
                k: p,
                v: vec![(p, 1.0)],
            });
        } else {
            mean_zero = true;
        }
    }
    Ok(FdSystem {
        layout: l,
        s,
        f: fv,
        updates,
        mean_zero,
        pinned,
    })
}

impl FdSystem {
    /// S + sum alpha e_k v^T, the matrix the cascade inverts.
    pub fn full_matrix(&self) -> DMatrix<f64> {
        let mut a = self.s.clone();
        for u in &self.updates {
            for &(j, v) in &u.v {
                a[(u.k, j)] += u.alpha * v;
            }
        }
        a
    }

    /// Reference solve of the full system by dense LU.
    pub fn dense_solve(&self) -> Result<Vec<f64>> {
        let a = self.full_matrix();
        let b = nalgebra::DVector::from_column_slice(&self.f);
        let x = a.lu().solve(&b).ok_or(Error::SingularUpdate { step: 0, value: 0.0 })?;
        let mut u: Vec<f64> = x.iter().copied().collect();
        if self.mean_zero {
            remove_mean(&mut u);
        }
        Ok(u)
    }

    /// Banded elimination without pivoting (bandwidth n); for large manufactured
    /// solution runs where the dense cascade is out of reach.
    pub fn banded_solve(&self) -> Result<Vec<f64>> {
        let a = self.full_matrix();
        let m = a.nrows();
        let bw = self.layout.n;
        let mut band = vec![0.0; m * (2 * bw + 1)];
        let at = |i: usize, j: usize| i * (2 * bw + 1) + (j + bw - i);
        for i in 0..m {
            for j in i.saturating_sub(bw)..(i + bw + 1).min(m) {
                band[at(i, j)] = a[(i, j)];
            }
        }
        let mut b = self.f.clone();
        for c in 0..m {
            let piv = band[at(c, c)];
            if piv.abs() < 1e-14 {
                return Err(Error::SingularUpdate { step: c, value: piv });
            }
            for r in c + 1..(c + bw + 1).min(m) {
                let w = band[at(r, c)] / piv;
                if w == 0.0 {
                    continue;
                }
                for j in c..(c + bw + 1).min(m) {
                    band[at(r, j)] -= w * band[at(c, j)];
                }
                b[r] -= w * b[c];
            }
        }
        let mut u = vec![0.0; m];
        for i in (0..m).rev() {
            let mut s = b[i];
            for j in i + 1..(i + bw + 1).min(m) {
                s -= band[at(i, j)] * u[j];
            }
            u[i] = s / band[at(i, i)];
        }
        if self.mean_zero {
            remove_mean(&mut u);
        }
        Ok(u)
    }
}

pub(crate) fn remove_mean(u: &mut [f64]) {
    let mean = u.iter().sum::<f64>() / u.len() as f64;
    for x in u {
        *x -= mean;
    }
}
