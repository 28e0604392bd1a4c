//! One- and two-dimensional tensor grids.

use crate::error::{param, Error, Result};

/// Largest admissible ratio between the longest and shortest cell.
pub const MAX_MESH_RATIO: f64 = 100.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    nodes: Vec<f64>,
    periodic: bool,
}

impl Grid1D {
    /// Nodes x_0 < ... < x_m. For a periodic grid x_m is identified with x_0 and
    /// the period is x_m - x_0.
    pub fn from_nodes(nodes: Vec<f64>, periodic: bool) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::Input("a grid needs at least two nodes".into()));
        }
        if nodes.iter().any(|x| !x.is_finite()) {
            return Err(Error::Input("grid nodes must be finite".into()));
        }
        let mut hmin = f64::INFINITY;
        let mut hmax = 0.0f64;
        for w in nodes.windows(2) {
            let h = w[1] - w[0];
            if h <= 0.0 {
                return Err(Error::Input(format!(
                    "grid nodes not strictly increasing at {} -> {}",
                    w[0], w[1]
                )));
            }
            hmin = hmin.min(h);
            hmax = hmax.max(h);
        }
        if hmax / hmin > MAX_MESH_RATIO {
            return Err(param("mesh ratio", hmax / hmin, "must not exceed 100"));
        }
        Ok(Grid1D { nodes, periodic })
    }

    pub fn uniform(a: f64, b: f64, cells: usize, periodic: bool) -> Result<Self> {
        if cells == 0 {
            return Err(Error::Input("a grid needs at least one cell".into()));
        }
        if !(b > a) {
            return Err(Error::Input(format!("empty interval [{a}, {b}]")));
        }
        let h = (b - a) / cells as f64;
        let mut nodes: Vec<f64> = (0..=cells).map(|j| a + h * j as f64).collect();
        nodes[cells] = b;
        Self::from_nodes(nodes, periodic)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn node(&self, j: usize) -> f64 {
        self.nodes[j]
    }

    pub fn periodic(&self) -> bool {
        self.periodic
    }

    pub fn cells(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn start(&self) -> f64 {
        self.nodes[0]
    }

    pub fn end(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn period(&self) -> f64 {
        self.end() - self.start()
    }

    /// Number of independent nodal values (x_m is dropped when periodic).
    pub fn value_count(&self) -> usize {
        if self.periodic {
            self.cells()
        } else {
            self.nodes.len()
        }
    }

    /// Width of cell j, i.e. x_{j+1} - x_j (zero-based cells).
    pub fn width(&self, j: usize) -> f64 {
        self.nodes[j + 1] - self.nodes[j]
    }

    pub fn h_max(&self) -> f64 {
        (0..self.cells()).map(|j| self.width(j)).fold(0.0, f64::max)
    }

    pub fn h_min(&self) -> f64 {
        (0..self.cells()).map(|j| self.width(j)).fold(f64::INFINITY, f64::min)
    }

    /// Map x into the span. Periodic grids reduce modulo the period onto [x_0, x_m).
    pub fn reduce(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::Domain {
                point: x,
                lo: self.start(),
                hi: self.end(),
            });
        }
        if self.periodic {
            let p = self.period();
            let r = self.start() + (x - self.start()).rem_euclid(p);
            // rem_euclid can round up to exactly p
            Ok(if r >= self.end() { self.start() } else { r })
        } else if x < self.start() || x > self.end() {
            Err(Error::Domain {
                point: x,
                lo: self.start(),
                hi: self.end(),
            })
        } else {
            Ok(x)
        }
    }

    /// Cell index j with x_j <= x < x_{j+1}; x = x_m maps to the last cell.
    pub fn locate(&self, x: f64) -> usize {
        let n = self.nodes.len();
        let j = self.nodes.partition_point(|&v| v <= x);
        j.saturating_sub(1).min(n - 2)
    }

    /// Same nodes moved by delta.
    pub fn shifted(&self, delta: f64) -> Result<Self> {
        Self::from_nodes(self.nodes.iter().map(|x| x + delta).collect(), self.periodic)
    }
}

/// Tensor grid with x-major node order: index = ix * ny + iy.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2D {
    x: Grid1D,
    y: Grid1D,
}

impl Grid2D {
    pub fn new(x: Grid1D, y: Grid1D) -> Result<Self> {
        if x.value_count() != y.value_count() {
            return Err(Error::Input(format!(
                "both axes must carry the same node count ({} vs {})",
                x.value_count(),
                y.value_count()
            )));
        }
        Ok(Grid2D { x, y })
    }

    pub fn x(&self) -> &Grid1D {
        &self.x
    }

    pub fn y(&self) -> &Grid1D {
        &self.y
    }

    pub fn value_count(&self) -> usize {
        self.x.value_count() * self.y.value_count()
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        ix * self.y.value_count() + iy
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unordered_and_wild_ratio() {
        assert!(Grid1D::from_nodes(vec![0.0, 0.5, 0.4], false).is_err());
        assert!(Grid1D::from_nodes(vec![0.0, 1e-3, 1.0], false).is_err());
        assert!(Grid1D::from_nodes(vec![0.0, 0.2, 1.0], false).is_ok());
    }

    #[test]
    fn periodic_reduction_is_half_open() {
        let g = Grid1D::uniform(-1.0, 1.0, 4, true).unwrap();
        assert_eq!(g.reduce(1.0).unwrap(), -1.0);
        assert!((g.reduce(2.5).unwrap() - 0.5).abs() < 1e-15);
        assert!((g.reduce(-1.5).unwrap() - 0.5).abs() < 1e-15);
        let h = Grid1D::uniform(0.0, 1.0, 4, false).unwrap();
        assert!(h.reduce(1.5).is_err());
    }

    #[test]
    fn locate_picks_left_node() {
        let g = Grid1D::uniform(0.0, 1.0, 4, false).unwrap();
        assert_eq!(g.locate(0.0), 0);
        assert_eq!(g.locate(0.25), 1);
        assert_eq!(g.locate(0.3), 1);
        assert_eq!(g.locate(1.0), 3);
    }
}
