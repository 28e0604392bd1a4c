//! Spectral alternative for periodic 1D outputs on [-pi, pi): nodal values
//! G(I u)(y_i) are expanded in the real Fourier basis, damped by the
//! Bochner-Riesz weights (1 - k^2/R^2)^gamma, and recombined with Fourier trunks.
//!
//! b_k(u) = w_k / ||e_k||^2 sum_i G(I u)(y_i) c_i^k,  c_i^k = int e_k phi_i,
//! with c_i^k by 32-point Gauss-Legendre on each cell.

use super::{Branches, DeepONetModel, TrunkDomain};
use crate::error::{Error, Result};
use crate::fourier::{bochner_riesz, FourierExpansion};
use crate::grid::Grid1D;
use crate::quadrature::GaussLegendre;
use crate::relu::fourier_trunk;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::Arc;

fn basis(k: i64, y: f64) -> f64 {
    match k {
        0 => 1.0,
        k if k > 0 => (k as f64 * y).cos(),
        k => (-k as f64 * y).sin(),
    }
}

fn check_grid(g: &Grid1D, what: &str) -> Result<()> {
    if !g.periodic() || (g.start() + PI).abs() > 1e-12 || (g.period() - 2.0 * PI).abs() > 1e-12 {
        return Err(Error::Input(format!("{what} must be periodic over [-pi, pi)")));
    }
    Ok(())
}

/// Modes 0, 1, -1, 2, -2, ... up to floor(R) (k < 0 stands for sin |k| y) and
/// the matrix taking nodal values to their damped coefficients.
pub fn projection_matrix(nodes: &Grid1D, radius: f64, gamma: f64) -> Result<(Vec<i64>, Vec<Vec<f64>>)> {
    check_grid(nodes, "node grid")?;
    let kmax = radius.floor() as i64;
    let ones = FourierExpansion::from_modes(
        1,
        radius,
        (-kmax..=kmax).map(|k| ([k, 0], Complex64::new(1.0, 0.0))).collect(),
    )?;
    let damped = bochner_riesz(&ones, radius, gamma)?;
    let mut modes = vec![0];
    for k in 1..=kmax {
        modes.extend([k, -k]);
    }
    let n = nodes.value_count();
    let m = nodes.cells();
    let gl = GaussLegendre::new(32);
    let rows = modes
        .iter()
        .map(|&k| {
            let mut row = vec![0.0; n];
            for j in 0..m {
                let (a, b) = (nodes.node(j), nodes.node(j + 1));
                let h = b - a;
                for (y, w) in gl.mapped(a, b) {
                    let e = basis(k, y) * w;
                    row[j] += e * (b - y) / h;
                    row[(j + 1) % n] += e * (y - a) / h;
                }
            }
            let norm2 = if k == 0 { 2.0 * PI } else { PI };
            let wk = damped.coefficient([k.abs(), 0]).re;
            row.iter_mut().for_each(|c| *c *= wk / norm2);
            row
        })
        .collect();
    Ok((modes, rows))
}

/// `nodal` yields G(I u) at the nodes of `nodes`; the trunks are nodal
/// interpolants of the Fourier basis on `trunk_grid`.
pub fn assemble_bochner_riesz_deeponet(
    nodal: Branches,
    nodes: &Grid1D,
    radius: f64,
    gamma: f64,
    trunk_grid: &Grid1D,
    m: usize,
) -> Result<DeepONetModel> {
    check_grid(trunk_grid, "trunk grid")?;
    if nodal.len() != nodes.value_count() {
        return Err(Error::Input(format!(
            "{} nodal branches for {} nodes",
            nodal.len(),
            nodes.value_count()
        )));
    }
    let (modes, rows) = projection_matrix(nodes, radius, gamma)?;
    let apply = |rows: &[Vec<f64>], v: &[f64]| -> Vec<f64> {
        rows.iter().map(|r| r.iter().zip(v).map(|(c, x)| c * x).sum()).collect()
    };
    let branches = match nodal {
        Branches::Values(v) => Branches::Values(apply(&rows, &v)),
        other => {
            let p = rows.len();
            let params = format!("R={radius:?} gamma={gamma:?} of [{}]", other.descriptor());
            Branches::Operator {
                id: "bochner-riesz".into(),
                params,
                p,
                eval: Arc::new(move |u: &[f64]| Ok(apply(&rows, &other.evaluate(u)?))),
            }
        }
    };
    let trunks = modes
        .iter()
        .map(|&k| fourier_trunk(trunk_grid, k))
        .collect::<Result<Vec<_>>>()?;
    DeepONetModel::new(
        branches,
        trunks,
        "fourier",
        TrunkDomain::Interval(trunk_grid.clone()),
        m,
    )
}
