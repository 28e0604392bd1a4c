//! Ready-made models for the 1D operators: branches are the constructive
//! operators evaluated at the output nodes, trunks are exact hats.

use super::{Branches, DeepONetModel, TrunkDomain};
use crate::advdiff::{AdvDiffProblem1D, DiscreteSolver, Source};
use crate::burgers::{
    galilean_shift, kernel_coefficients, rational_operator_1d, BurgersProblem1D, ColeHopfState, KernelCoefficients,
    MEAN_TOLERANCE,
};
use crate::cascade::FdSystem;
use crate::error::{param, Error, Result};
use crate::grid::{Grid1D, Grid2D};
use crate::interp::{Order, PiecewiseFunction};
use crate::relu::{linear_branch_net, BlessedCascadeNet};
use std::f64::consts::PI;
use std::sync::Arc;

/// Branches u_m -> G_m(u_m)(y_k, t) for the rational Burgers operator with
/// u_m nodal on the m-cell periodic grid over [-pi, pi). Kernel coefficients are
/// tabulated once; inputs with nonzero mean go through the Galilean shift.
pub fn burgers_branches(kappa: f64, t: f64, m: usize, nodes: &[f64]) -> Result<Branches> {
    let grid = Grid1D::uniform(-PI, PI, m, true)?;
    let table: Vec<KernelCoefficients> = nodes
        .iter()
        .map(|&y| kernel_coefficients(&grid, y, t, kappa))
        .collect::<Result<_>>()?;
    let nodes = nodes.to_vec();
    let p = nodes.len();
    let eval = move |u: &[f64]| -> Result<Vec<f64>> {
        let u0 = PiecewiseFunction::new(grid.clone(), u.to_vec(), Order::Linear)?;
        let (u0, mean) = galilean_shift(&u0)?;
        let state = ColeHopfState::new(&BurgersProblem1D::new(kappa, u0)?);
        if mean.abs() <= MEAN_TOLERANCE {
            table.iter().map(|c| rational_operator_1d(&state, c)).collect()
        } else {
            nodes
                .iter()
                .map(|&y| {
                    Ok(rational_operator_1d(&state, &kernel_coefficients(&grid, y - mean * t, t, kappa)?)? + mean)
                })
                .collect()
        }
    };
    Ok(Branches::Operator {
        id: "burgers1d".into(),
        params: format!("kappa={kappa:?} t={t:?} m={m}"),
        p,
        eval: Arc::new(eval),
    })
}

/// Burgers model at time t: p output nodes on [-pi, pi) with periodic hats.
pub fn burgers_model(kappa: f64, t: f64, m: usize, p: usize) -> Result<DeepONetModel> {
    let out = Grid1D::uniform(-PI, PI, p, true)?;
    let b = burgers_branches(kappa, t, m, &out.nodes()[..p])?;
    DeepONetModel::interpolating(b, TrunkDomain::Interval(out), m)
}

/// Branches a_m -> discrete solution at the nodes, for -u'' + a u' = f on (0, L)
/// with a given per cell on the m-cell grid.
pub fn advdiff_branches(length: f64, f: Source, m: usize, nodes: &[f64]) -> Result<Branches> {
    let grid = Grid1D::uniform(0.0, length, m, false)?;
    let nodes = nodes.to_vec();
    let p = nodes.len();
    let eval = move |a: &[f64]| -> Result<Vec<f64>> {
        let solver = DiscreteSolver::new(&AdvDiffProblem1D::from_cells(grid.clone(), a, f.clone())?);
        nodes.iter().map(|&y| solver.eval(y)).collect()
    };
    Ok(Branches::Operator {
        id: "advdiff1d".into(),
        params: format!("L={length:?} m={m}"),
        p,
        eval: Arc::new(eval),
    })
}

/// Coefficient operator model on [0, L] with p output cells (p + 1 hats).
pub fn advdiff_model(length: f64, f: Source, m: usize, p: usize) -> Result<DeepONetModel> {
    let out = Grid1D::uniform(0.0, length, p, false)?;
    let b = advdiff_branches(length, f, m, out.nodes())?;
    DeepONetModel::interpolating(b, TrunkDomain::Interval(out), m)
}

/// For fixed a the discrete solution is linear in the left-endpoint source
/// values f_m, so every branch is an exact linear network. Row k holds the
/// weights of f_m in the discrete solution at node k.
pub fn advdiff_source_weights(a: &AdvDiffProblem1D, nodes: &[f64]) -> Result<Vec<Vec<f64>>> {
    let grid = a.grid().clone();
    let m = grid.cells();
    let mut rows = vec![vec![0.0; m]; nodes.len()];
    for j in 0..m {
        let mut e = vec![0.0; m + 1];
        e[j] = 1.0;
        let pf = PiecewiseFunction::new(grid.clone(), e, Order::Constant)?;
        let f: Source = Arc::new(move |x| pf.eval(x).unwrap_or(0.0));
        let solver = DiscreteSolver::new(&a.with_source(f));
        for (k, &y) in nodes.iter().enumerate() {
            rows[k][j] = solver.eval(y)?;
        }
    }
    Ok(rows)
}

/// Source-to-solution model with linear branch networks for fixed a (cells).
pub fn advdiff_source_model(length: f64, a_cells: &[f64], p: usize) -> Result<DeepONetModel> {
    let m = a_cells.len();
    if m == 0 {
        return Err(param("m", 0.0, "needs at least one cell"));
    }
    let grid = Grid1D::uniform(0.0, length, m, false)?;
    let zero: Source = Arc::new(|_| 0.0);
    let a = AdvDiffProblem1D::from_cells(grid, a_cells, zero)?;
    let out = Grid1D::uniform(0.0, length, p, false)?;
    let rows = advdiff_source_weights(&a, out.nodes())?;
    let nets = rows.iter().map(|r| linear_branch_net(r)).collect::<Result<Vec<_>>>()?;
    DeepONetModel::interpolating(Branches::Nets(nets), TrunkDomain::Interval(out), m)
}

/// 2D model with the blessed cascade network as branch: coefficients in, FD
/// solution at the grid nodes out (Dirichlet boundary nodes are 0), P1 trunks.
pub fn blessed_model(grid: &Grid2D, system: &FdSystem, net: BlessedCascadeNet) -> Result<DeepONetModel> {
    let layout = system.layout.clone();
    let n_nodes = grid.x().value_count() * grid.y().value_count();
    if layout.len() != net.unknowns() {
        return Err(Error::Input(format!(
            "network has {} unknowns, system {}",
            net.unknowns(),
            layout.len()
        )));
    }
    let index: Vec<usize> = (0..layout.len())
        .map(|k| {
            let (ix, iy) = layout.grid_node(k);
            grid.index(ix, iy)
        })
        .collect();
    if index.iter().any(|&i| i >= n_nodes) {
        return Err(Error::Input("system layout does not fit the grid".into()));
    }
    let m = net.input_dim();
    let eps = net.epsilon_stage();
    let eval = move |a: &[f64]| -> Result<Vec<f64>> {
        let u = net.eval(a)?.u;
        let mut full = vec![0.0; n_nodes];
        for (k, &i) in index.iter().enumerate() {
            full[i] = u[k];
        }
        Ok(full)
    };
    let b = Branches::Operator {
        id: "blessed-cascade".into(),
        params: format!("unknowns={} eps={eps:?}", layout.len()),
        p: n_nodes,
        eval: Arc::new(eval),
    };
    DeepONetModel::interpolating(b, TrunkDomain::Rectangle(grid.clone()), m)
}

/// Left-endpoint samples f(x_j), j < m, as consumed by the discrete operator.
pub fn left_endpoint_samples(f: impl Fn(f64) -> f64, length: f64, m: usize) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(Error::Input("need at least one cell".into()));
    }
    Ok((0..m).map(|j| f(length * j as f64 / m as f64)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::advdiff::exact_solution;
    use crate::burgers::rational_operator;
    use crate::deeponet::{evaluate_model, operator_error, InputFamily};
    use crate::norms::ErrorDomain;

    #[test]
    fn burgers_branches_match_the_operator() {
        let fam = InputFamily::burgers();
        let u = &fam.at_resolution(32).unwrap()[2];
        let model = burgers_model(0.5, 0.25, 32, 8).unwrap();
        let b = model.branch_values(u).unwrap();
        let g = Grid1D::uniform(-PI, PI, 32, true).unwrap();
        let prob = BurgersProblem1D::new(0.5, PiecewiseFunction::new(g, u.clone(), Order::Linear).unwrap()).unwrap();
        for (k, &y) in model.domain_nodes().iter().enumerate() {
            assert_eq!(b[k], rational_operator(&prob, y, 0.25).unwrap());
            assert_eq!(evaluate_model(&model, u, &[y]).unwrap(), b[k]);
        }
        // a shifted input (nonzero mean) still evaluates
        let shifted: Vec<f64> = u.iter().map(|v| v + 0.2).collect();
        assert!(model.branch_values(&shifted).unwrap().iter().all(|v| v.is_finite()));
        assert!(model.branch_values(&u[..16]).is_err());
    }

    #[test]
    fn advdiff_family_error() {
        let fam = InputFamily::advdiff();
        let f: Source = Arc::new(|x| 1.0 + x);
        let (m, p) = (128, 128);
        let model = advdiff_model(1.0, f.clone(), m, p).unwrap();
        let inputs = fam.at_resolution(m).unwrap();
        let coarse = fam.native_grid().unwrap();
        let exact: Vec<_> = fam
            .inputs
            .iter()
            .map(|i| AdvDiffProblem1D::from_cells(coarse.clone(), &i.values, f.clone()).unwrap())
            .collect();
        let dom = ErrorDomain::with_breakpoints(Grid1D::uniform(0.0, 1.0, p, false).unwrap().nodes().to_vec()).unwrap();
        let e = operator_error(&model, |i, y| exact_solution(&exact[i], y), &inputs, &dom).unwrap();
        assert!(e.linf <= 0.05, "{e:?}");
        assert!(e.linf > 0.0);
    }

    #[test]
    fn blessed_model_matches_the_cascade_at_nodes() {
        use crate::cascade::{assemble, cascade_solve, Boundary, Coefficients};
        use crate::interp::sample_input_2d;
        use crate::relu::{blessed_cascade_net, coefficient_vector};
        let g1 = Grid1D::uniform(0.0, 1.0, 4, false).unwrap();
        let g = Grid2D::new(g1.clone(), g1).unwrap();
        let a3 = sample_input_2d(|x, y| 0.5 + x * y, &g, Order::Linear).unwrap();
        let sys = assemble(
            &g,
            &Coefficients {
                a3: Some(a3),
                ..Default::default()
            },
            |_, _| 1.0,
            Boundary::Dirichlet,
        )
        .unwrap();
        let model = blessed_model(&g, &sys, blessed_cascade_net(&sys, 1e-6).unwrap()).unwrap();
        let coeffs = coefficient_vector(&sys).unwrap();
        let exact = cascade_solve(&sys).unwrap().u;
        for (k, u) in exact.iter().enumerate() {
            let (x, y) = sys.layout.point(k);
            assert!((evaluate_model(&model, &coeffs, &[x, y]).unwrap() - u).abs() <= 1e-5);
        }
        assert!(evaluate_model(&model, &coeffs, &[0.0, 0.3]).unwrap().abs() <= 1e-15);
    }

    #[test]
    fn linear_branches_are_exact() {
        let a = [0.5, -1.0, 2.0, 0.0, 1.0, 1.5, -0.5, 0.25];
        let model = advdiff_source_model(1.0, &a, 8).unwrap();
        let grid = Grid1D::uniform(0.0, 1.0, 8, false).unwrap();
        for f in [|x: f64| 1.0 + x, |x: f64| (4.0 * x).cos(), |x: f64| x * x - 3.0] {
            let fm = left_endpoint_samples(f, 1.0, 8).unwrap();
            let b = model.branch_values(&fm).unwrap();
            let solver = DiscreteSolver::new(&AdvDiffProblem1D::from_cells(grid.clone(), &a, Arc::new(f)).unwrap());
            for (k, &y) in model.domain_nodes().iter().enumerate() {
                let d = solver.eval(y).unwrap();
                assert!((b[k] - d).abs() <= 1e-12 * (1.0 + d.abs()), "{k}: {} vs {d}", b[k]);
            }
        }
    }
}
