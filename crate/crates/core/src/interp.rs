//! Piecewise constant / linear interpolants on 1D and 2D grids.

use crate::error::{Error, Result};
use crate::grid::{Grid1D, Grid2D};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    /// Constant on [x_j, x_{j+1}) taken from the left (bottom-left) node.
    Constant,
    /// Nodal (bi)linear interpolation.
    Linear,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseFunction {
    grid: Grid1D,
    values: Vec<f64>,
    order: Order,
}

impl PiecewiseFunction {
    pub fn new(grid: Grid1D, values: Vec<f64>, order: Order) -> Result<Self> {
        if values.len() != grid.value_count() {
            return Err(Error::Input(format!(
                "expected {} nodal values, got {}",
                grid.value_count(),
                values.len()
            )));
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!("non-finite nodal value at index {j}")));
        }
        Ok(PiecewiseFunction { grid, values, order })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn order(&self) -> Order {
        self.order
    }

    /// Value at node j, wrapping x_m onto x_0 for periodic grids.
    pub fn node_value(&self, j: usize) -> f64 {
        self.values[j % self.values.len()]
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let x = self.grid.reduce(x)?;
        let j = self.grid.locate(x);
        let x0 = self.grid.node(j);
        let x1 = self.grid.node(j + 1);
        Ok(match self.order {
            Order::Constant => {
                if x >= x1 {
                    self.node_value(j + 1)
                } else {
                    self.node_value(j)
                }
            }
            Order::Linear => {
                let s = (x - x0) / (x1 - x0);
                let (a, b) = (self.node_value(j), self.node_value(j + 1));
                (1.0 - s) * a + s * b
            }
        })
    }

    /// Integral over [x_0, x_j] at every node j = 0..=m.
    pub fn node_integrals(&self) -> Vec<f64> {
        let mut acc = Vec::with_capacity(self.grid.cells() + 1);
        acc.push(0.0);
        let mut s = 0.0;
        for j in 0..self.grid.cells() {
            let h = self.grid.width(j);
            s += match self.order {
                Order::Constant => self.node_value(j) * h,
                Order::Linear => 0.5 * (self.node_value(j) + self.node_value(j + 1)) * h,
            };
            acc.push(s);
        }
        acc
    }

    /// Integral of the interpolant over [x_0, x] for x in the span (no reduction).
    pub fn integral_to(&self, node_integrals: &[f64], x: f64) -> f64 {
        let j = self.grid.locate(x);
        let x0 = self.grid.node(j);
        let d = x - x0;
        let a = self.node_value(j);
        match self.order {
            Order::Constant => node_integrals[j] + a * d,
            Order::Linear => {
                let slope = (self.node_value(j + 1) - a) / self.grid.width(j);
                node_integrals[j] + a * d + 0.5 * slope * d * d
            }
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest |slope| between neighbouring nodes.
    pub fn slope_bound(&self) -> f64 {
        (0..self.grid.cells())
            .map(|j| ((self.node_value(j + 1) - self.node_value(j)) / self.grid.width(j)).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseFunction2D {
    grid: Grid2D,
    values: Vec<f64>,
    order: Order,
}

impl PiecewiseFunction2D {
    pub fn new(grid: Grid2D, values: Vec<f64>, order: Order) -> Result<Self> {
        if values.len() != grid.value_count() {
            return Err(Error::Input(format!(
                "expected {} nodal values, got {}",
                grid.value_count(),
                values.len()
            )));
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!("non-finite nodal value at index {j}")));
        }
        Ok(PiecewiseFunction2D { grid, values, order })
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn node_value(&self, ix: usize, iy: usize) -> f64 {
        let nx = self.grid.x().value_count();
        let ny = self.grid.y().value_count();
        self.values[self.grid.index(ix % nx, iy % ny)]
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        let gx = self.grid.x();
        let gy = self.grid.y();
        let x = gx.reduce(x)?;
        let y = gy.reduce(y)?;
        let i = gx.locate(x);
        let j = gy.locate(y);
        Ok(match self.order {
            Order::Constant => {
                let ii = if x >= gx.node(i + 1) { i + 1 } else { i };
                let jj = if y >= gy.node(j + 1) { j + 1 } else { j };
                self.node_value(ii, jj)
            }
            Order::Linear => {
                let s = (x - gx.node(i)) / gx.width(i);
                let r = (y - gy.node(j)) / gy.width(j);
                let f00 = self.node_value(i, j);
                let f10 = self.node_value(i + 1, j);
                let f01 = self.node_value(i, j + 1);
                let f11 = self.node_value(i + 1, j + 1);
                (1.0 - s) * ((1.0 - r) * f00 + r * f01) + s * ((1.0 - r) * f10 + r * f11)
            }
        })
    }
}

/// Nodal samples u_m = (u(x_j)) in grid order.
pub fn sample_input<F: Fn(f64) -> f64>(f: F, grid: &Grid1D, order: Order) -> Result<PiecewiseFunction> {
    let values: Vec<f64> = grid.nodes()[..grid.value_count()].iter().map(|&x| f(x)).collect();
    if let Some(j) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::Input(format!("non-finite sample at x = {}", grid.node(j))));
    }
    PiecewiseFunction::new(grid.clone(), values, order)
}

pub fn sample_input_2d<F: Fn(f64, f64) -> f64>(f: F, grid: &Grid2D, order: Order) -> Result<PiecewiseFunction2D> {
    let nx = grid.x().value_count();
    let ny = grid.y().value_count();
    let mut values = Vec::with_capacity(nx * ny);
    for ix in 0..nx {
        for iy in 0..ny {
            let (x, y) = (grid.x().node(ix), grid.y().node(iy));
            let v = f(x, y);
            if !v.is_finite() {
                return Err(Error::Input(format!("non-finite sample at ({x}, {y})")));
            }
            values.push(v);
        }
    }
    PiecewiseFunction2D::new(grid.clone(), values, order)
}
