//! Exact piecewise-linear networks: nodal hats, interpolants and linear functionals.

use super::{Layer, ReluNetwork};
use crate::error::{Error, Result};
use crate::grid::{Grid1D, Grid2D};

/// out = bias + sum_l c_l ReLU(x - knot_l), one hidden layer.
fn ramp_sum(knots: &[f64], coeffs: &[f64], bias: f64) -> ReluNetwork {
    let n = knots.len();
    let t: Vec<_> = (0..n).map(|l| (l, 0, 1.0)).collect();
    let b: Vec<f64> = knots.iter().map(|k| -k).collect();
    let hidden = Layer::from_triplets(n, 1, &t, b).unwrap();
    let t: Vec<_> = coeffs.iter().enumerate().map(|(l, &c)| (0, l, c)).collect();
    let out = Layer::from_triplets(1, n, &t, vec![bias]).unwrap();
    ReluNetwork::new(vec![hidden, out]).unwrap()
}

/// Nodal basis function L_i as a depth-1 network on the grid span.
/// Interior nodes use three ramps, end nodes the truncated two-ramp form; on a
/// periodic grid node 0 carries both end pieces.
pub fn hat_trunk(grid: &Grid1D, i: usize) -> Result<ReluNetwork> {
    let m = grid.cells();
    if i >= grid.value_count() {
        return Err(Error::Input(format!(
            "node {i} out of range for {} values",
            grid.value_count()
        )));
    }
    let x = grid.nodes();
    if m == 1 && !grid.periodic() {
        let h = grid.width(0);
        return Ok(if i == 0 {
            ramp_sum(&x[..1], &[-1.0 / h], 1.0)
        } else {
            ramp_sum(&x[..2], &[1.0 / h, -1.0 / h], 0.0)
        });
    }
    Ok(if i == 0 {
        let h0 = grid.width(0);
        if grid.periodic() {
            let hl = grid.width(m - 1);
            ramp_sum(&[x[0], x[1], x[m - 1]], &[-1.0 / h0, 1.0 / h0, 1.0 / hl], 1.0)
        } else {
            ramp_sum(&x[..2], &[-1.0 / h0, 1.0 / h0], 1.0)
        }
    } else if i == m {
        let h = grid.width(m - 1);
        ramp_sum(&x[m - 1..], &[1.0 / h, -1.0 / h], 0.0)
    } else {
        let (hl, hr) = (grid.width(i - 1), grid.width(i));
        ramp_sum(&x[i - 1..i + 2], &[1.0 / hl, -(1.0 / hl + 1.0 / hr), 1.0 / hr], 0.0)
    })
}

/// Piecewise-linear interpolant of nodal values (x_0..x_m, or x_0..x_{m-1} on a
/// periodic grid with wrap-around) as a width-m depth-1 network.
pub fn interpolant_net(grid: &Grid1D, values: &[f64]) -> Result<ReluNetwork> {
    if values.len() != grid.value_count() {
        return Err(Error::Input(format!(
            "{} values for {} nodes",
            values.len(),
            grid.value_count()
        )));
    }
    let m = grid.cells();
    let v = |j: usize| {
        if j == m && grid.periodic() {
            values[0]
        } else {
            values[j]
        }
    };
    let slopes: Vec<f64> = (0..m).map(|j| (v(j + 1) - v(j)) / grid.width(j)).collect();
    let mut coeffs = vec![slopes[0]];
    coeffs.extend(slopes.windows(2).map(|w| w[1] - w[0]));
    Ok(ramp_sum(&grid.nodes()[..m], &coeffs, v(0)))
}

/// Nodal interpolant of cos(k x) for k >= 0 and sin(|k| x) for k < 0.
pub fn fourier_trunk(grid: &Grid1D, k: i64) -> Result<ReluNetwork> {
    let vals: Vec<f64> = (0..grid.value_count())
        .map(|j| {
            let x = grid.node(j);
            if k >= 0 {
                (k as f64 * x).cos()
            } else {
                (-k as f64 * x).sin()
            }
        })
        .collect();
    interpolant_net(grid, &vals)
}

/// ReLU(c.u) - ReLU(-c.u): exact for any linear functional.
pub fn linear_branch_net(coefficients: &[f64]) -> Result<ReluNetwork> {
    if coefficients.iter().any(|c| !c.is_finite()) {
        return Err(Error::Input("branch coefficients must be finite".into()));
    }
    let n = coefficients.len();
    let mut t = Vec::with_capacity(2 * n);
    for (l, &c) in coefficients.iter().enumerate() {
        t.push((0, l, c));
        t.push((1, l, -c));
    }
    let hidden = Layer::from_triplets(2, n, &t, vec![0.0; 2])?;
    let out = Layer::from_triplets(1, 2, &[(0, 0, 1.0), (0, 1, -1.0)], vec![0.0])?;
    ReluNetwork::new(vec![hidden, out])
}

fn min_pair() -> ReluNetwork {
    // min(a, b) = a - ReLU(a - b), with a carried as ReLU(a) - ReLU(-a)
    let hidden = Layer::from_triplets(
        3,
        2,
        &[(0, 0, 1.0), (1, 0, -1.0), (2, 0, 1.0), (2, 1, -1.0)],
        vec![0.0; 3],
    )
    .unwrap();
    let out = Layer::from_triplets(1, 3, &[(0, 0, 1.0), (0, 1, -1.0), (0, 2, -1.0)], vec![0.0]).unwrap();
    ReluNetwork::new(vec![hidden, out]).unwrap()
}

/// Minimum of n inputs through a balanced tree of depth ceil(log2 n).
pub(crate) fn min_tree(n: usize) -> ReluNetwork {
    let mut net = ReluNetwork::identity(n, 0);
    let mut width = n;
    while width > 1 {
        let mut parts = vec![min_pair(); width / 2];
        if width % 2 == 1 {
            parts.push(ReluNetwork::identity(1, 1));
        }
        net = net.then(&ReluNetwork::parallel(&parts)).unwrap();
        width = width.div_ceil(2);
    }
    net
}

/// Affine function equal to 1 at p and 0 at q, r.
fn barycentric(p: (f64, f64), q: (f64, f64), r: (f64, f64)) -> (f64, f64, f64) {
    let det = (q.0 - p.0) * (r.1 - p.1) - (r.0 - p.0) * (q.1 - p.1);
    // gradient of lambda_p is perpendicular to qr
    let gx = (q.1 - r.1) / det;
    let gy = (r.0 - q.0) / det;
    (1.0 - gx * p.0 - gy * p.1, gx, gy)
}

fn p1_hat_unrolled(grid: &Grid2D, i: usize, j: usize) -> ReluNetwork {
    let (gx, gy) = (grid.x(), grid.y());
    let (mx, my) = (gx.cells(), gy.cells());
    let pt = |a: usize, b: usize| (gx.node(a), gy.node(b));
    let p = pt(i, j);
    // cells split along the (a, b) -> (a+1, b+1) diagonal
    let mut planes = Vec::new();
    if i < mx && j < my {
        planes.push(barycentric(p, pt(i + 1, j), pt(i + 1, j + 1)));
        planes.push(barycentric(p, pt(i, j + 1), pt(i + 1, j + 1)));
    }
    if i > 0 && j < my {
        planes.push(barycentric(p, pt(i - 1, j), pt(i, j + 1)));
    }
    if i > 0 && j > 0 {
        planes.push(barycentric(p, pt(i - 1, j - 1), pt(i, j - 1)));
        planes.push(barycentric(p, pt(i - 1, j - 1), pt(i - 1, j)));
    }
    if i < mx && j > 0 {
        planes.push(barycentric(p, pt(i, j - 1), pt(i + 1, j)));
    }
    let n = planes.len();
    let mut t = Vec::with_capacity(2 * n);
    let mut b = Vec::with_capacity(n);
    for (l, &(c, ax, ay)) in planes.iter().enumerate() {
        t.push((l, 0, ax));
        t.push((l, 1, ay));
        b.push(c);
    }
    let affine = ReluNetwork::affine(n, 2, &t, b).unwrap();
    let relu = ReluNetwork::new(vec![Layer::identity(1), Layer::identity(1)]).unwrap();
    affine.then(&min_tree(n)).unwrap().then(&relu).unwrap()
}

/// Courant (P1) hat of node (ix, iy) on the diagonal triangulation of the grid:
/// ReLU of the minimum of the adjacent triangle planes. Periodic axes wrap.
pub fn p1_trunk_2d(grid: &Grid2D, ix: usize, iy: usize) -> Result<ReluNetwork> {
    let (gx, gy) = (grid.x(), grid.y());
    if ix >= gx.value_count() || iy >= gy.value_count() {
        return Err(Error::Input(format!("node ({ix}, {iy}) out of range")));
    }
    let copies = |i: usize, g: &Grid1D| {
        if g.periodic() && i == 0 {
            vec![0, g.cells()]
        } else {
            vec![i]
        }
    };
    let mut hats = Vec::new();
    for &i in &copies(ix, gx) {
        for &j in &copies(iy, gy) {
            hats.push(p1_hat_unrolled(grid, i, j));
        }
    }
    if hats.len() == 1 {
        return Ok(hats.pop().unwrap());
    }
    let k = hats.len();
    let fan: Vec<_> = (0..k).flat_map(|c| [(2 * c, 0, 1.0), (2 * c + 1, 1, 1.0)]).collect();
    let fan = ReluNetwork::affine(2 * k, 2, &fan, vec![0.0; 2 * k])?;
    let sum: Vec<_> = (0..k).map(|c| (0, c, 1.0)).collect();
    let sum = ReluNetwork::affine(1, k, &sum, vec![0.0])?;
    fan.then(&ReluNetwork::parallel(&hats))?.then(&sum)
}
