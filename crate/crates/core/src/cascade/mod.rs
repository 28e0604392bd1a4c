//! Sherman-Morrison cascade: T_0 = S^-1 and T_k = (T_{k-1}^-1 + alpha_k e_k v_k^T)^-1,
//! one rank-one update per nodal coefficient value.

pub mod assemble;

pub use assemble::{assemble, layout, Boundary, Coefficients, FdLayout, FdSystem, RankOneUpdate, UpdateKind};

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use rayon::prelude::*;
use std::io::Write;

/// Smallest admissible |1 + alpha v^T T e_k|.
pub const DENOMINATOR_FLOOR: f64 = 1e-10;

/// R(x1..x5) = x2 - x1 x4 x5 / (1 + x1 x3).
pub fn rational_r(x1: f64, x2: f64, x3: f64, x4: f64, x5: f64) -> Result<f64> {
    let d = 1.0 + x1 * x3;
    if !(d.abs() >= DENOMINATOR_FLOOR) {
        return Err(Error::SingularUpdate { step: 0, value: d });
    }
    Ok(x2 - x1 * x4 * x5 / d)
}

/// The same function over a common denominator.
pub fn rational_r_combined(x1: f64, x2: f64, x3: f64, x4: f64, x5: f64) -> Result<f64> {
    let d = 1.0 + x1 * x3;
    if !(d.abs() >= DENOMINATOR_FLOOR) {
        return Err(Error::SingularUpdate { step: 0, value: d });
    }
    Ok((x2 + x1 * x2 * x3 - x1 * x4 * x5) / d)
}

#[derive(Debug, Clone)]
pub struct CascadeState {
    pub t: DMatrix<f64>,
    pub k: usize,
    pub condition_log: Vec<f64>,
    /// max |T_k| entry after every step (index 0 is T_0)
    pub max_entry_log: Vec<f64>,
}

fn max_abs(t: &DMatrix<f64>) -> f64 {
    t.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

impl CascadeState {
    pub fn new(t0: DMatrix<f64>) -> Self {
        let m0 = max_abs(&t0);
        CascadeState {
            t: t0,
            k: 0,
            condition_log: Vec::new(),
            max_entry_log: vec![m0],
        }
    }

    /// T_0 = S^-1 by dense LU.
    pub fn from_system(system: &FdSystem) -> Result<Self> {
        let t0 = system
            .s
            .clone()
            .lu()
            .try_inverse()
            .ok_or_else(|| Error::Internal("stiffness matrix is singular".into()))?;
        Ok(Self::new(t0))
    }
}

/// One step: T <- T - alpha/(1 + alpha v^T T e_k) (T e_k)(v^T T).
pub fn sherman_morrison_step(mut state: CascadeState, update: &RankOneUpdate) -> Result<CascadeState> {
    let m = state.t.nrows();
    let step = state.k + 1;
    if update.alpha == 0.0 {
        state.k = step;
        state.condition_log.push(1.0);
        let last = *state.max_entry_log.last().unwrap_or(&0.0);
        state.max_entry_log.push(last);
        return Ok(state);
    }
    let col: Vec<f64> = state.t.column(update.k).iter().copied().collect();
    let mut row = vec![0.0; m];
    for &(i, w) in &update.v {
        for (j, r) in row.iter_mut().enumerate() {
            *r += w * state.t[(i, j)];
        }
    }
    let vtu: f64 = update.v.iter().map(|&(i, w)| w * col[i]).sum();
    let d = 1.0 + update.alpha * vtu;
    if !(d.abs() >= DENOMINATOR_FLOOR) || !d.is_finite() {
        return Err(Error::SingularUpdate { step, value: d });
    }
    let c = update.alpha / d;
    // column-major storage: each chunk is one column j
    let maxes: Vec<f64> = state
        .t
        .as_mut_slice()
        .par_chunks_mut(m)
        .enumerate()
        .map(|(j, colj)| {
            let s = c * row[j];
            let mut mx = 0.0f64;
            for (i, x) in colj.iter_mut().enumerate() {
                *x -= s * col[i];
                mx = mx.max(x.abs());
            }
            mx
        })
        .collect();
    let mx = maxes.into_iter().fold(0.0f64, f64::max);
    if !mx.is_finite() {
        return Err(Error::SingularUpdate { step, value: d });
    }
    state.k = step;
    state.condition_log.push(d);
    state.max_entry_log.push(mx);
    Ok(state)
}

#[derive(Debug, Clone)]
pub struct CascadeResult {
    pub u: Vec<f64>,
    pub state: CascadeState,
}

impl CascadeResult {
    pub fn condition_log(&self) -> &[f64] {
        &self.state.condition_log
    }
}

fn finish(system: &FdSystem, state: CascadeState) -> CascadeResult {
    let f = nalgebra::DVector::from_column_slice(&system.f);
    let mut u: Vec<f64> = (&state.t * f).iter().copied().collect();
    if system.mean_zero {
        assemble::remove_mean(&mut u);
    }
    CascadeResult { u, state }
}

/// U_N = T_last F after every update in list order.
pub fn cascade_solve(system: &FdSystem) -> Result<CascadeResult> {
    let order: Vec<usize> = (0..system.updates.len()).collect();
    cascade_solve_ordered(system, &order)
}

/// As [`cascade_solve`] with the updates applied in the given order.
pub fn cascade_solve_ordered(system: &FdSystem, order: &[usize]) -> Result<CascadeResult> {
    let mut seen = vec![false; system.updates.len()];
    for &i in order {
        if i >= seen.len() || seen[i] {
            return Err(Error::Input("update order must be a permutation".into()));
        }
        seen[i] = true;
    }
    if order.len() != seen.len() {
        return Err(Error::Input("update order must be a permutation".into()));
    }
    let mut state = CascadeState::from_system(system)?;
    for &i in order {
        state = sherman_morrison_step(state, &system.updates[i])?;
    }
    Ok(finish(system, state))
}

/// Plain-text "i j value" triplets, one nonzero per line, shortest round-trip floats.
pub fn dump_triplets<W: Write>(matrix: &DMatrix<f64>, mut out: W) -> std::io::Result<()> {
    for i in 0..matrix.nrows() {
        for j in 0..matrix.ncols() {
            let v = matrix[(i, j)];
            if v != 0.0 {
                writeln!(out, "{i} {j} {v:?}")?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Grid1D, Grid2D};
    use crate::interp::{sample_input_2d, Order, PiecewiseFunction2D};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn unit_grid(cells: usize) -> Grid2D {
        let g = Grid1D::uniform(0.0, 1.0, cells, false).unwrap();
        Grid2D::new(g.clone(), g).unwrap()
    }

    fn field<F: Fn(f64, f64) -> f64>(g: &Grid2D, f: F) -> PiecewiseFunction2D {
        sample_input_2d(f, g, Order::Linear).unwrap()
    }

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn rational_r_examples() {
        assert_eq!(rational_r(0.0, 0.7, 3.0, 2.0, 5.0).unwrap(), 0.7);
        assert_eq!(rational_r(1.0, 1.0, 1.0, 1.0, 1.0).unwrap(), 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let x: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
            let x1 = 0.1 * x[0];
            let a = rational_r(x1, x[1], x[2], x[3], x[4]).unwrap();
            let b = rational_r_combined(x1, x[1], x[2], x[3], x[4]).unwrap();
            assert!((a - b).abs() <= 1e-14);
        }
        assert!(matches!(
            rational_r(1.0, 0.0, -1.0, 0.0, 0.0),
            Err(Error::SingularUpdate { .. })
        ));
    }

    #[test]
    fn identity_step_examples() {
        let s = CascadeState::new(DMatrix::identity(3, 3));
        let up = RankOneUpdate {
            kind: UpdateKind::Reaction,
            alpha: 1.0,
            k: 0,
            v: vec![(0, 1.0)],
        };
        let s = sherman_morrison_step(s, &up).unwrap();
        assert_eq!(
            s.t,
            DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.5, 1.0, 1.0]))
        );
        let zero = RankOneUpdate { alpha: 0.0, ..up };
        let t = s.t.clone();
        assert_eq!(sherman_morrison_step(s, &zero).unwrap().t, t);
    }

    #[test]
    fn poisson_has_no_updates() {
        let g = unit_grid(8);
        let sys = assemble(&g, &Coefficients::default(), |_, _| 1.0, Boundary::Dirichlet).unwrap();
        assert!(sys.updates.is_empty());
        let r = cascade_solve(&sys).unwrap();
        assert!(max_diff(&r.u, &sys.dense_solve().unwrap()) <= 1e-10);
    }

    #[test]
    fn step_entries_match_rational_r() {
        let g = unit_grid(6);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a3 = field(&g, |x, y| 1.0 + x * y);
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
        let s0 = CascadeState::from_system(&sys).unwrap();
        let t = s0.t.clone();
        let up = &sys.updates[7];
        let s1 = sherman_morrison_step(s0, up).unwrap();
        let m = t.nrows();
        let k = up.k;
        for _ in 0..100 {
            let i = rng.random_range(0..m);
            let j = rng.random_range(0..m);
            let r = rational_r(up.alpha, t[(i, j)], t[(k, k)], t[(i, k)], t[(k, j)]).unwrap();
            assert!((s1.t[(i, j)] - r).abs() <= 1e-13);
        }
    }

    #[test]
    fn reaction_cascade_matches_dense() {
        let g = unit_grid(11);
        let a3 = field(&g, |_, _| 1.0);
        let sys = assemble(
            &g,
            &Coefficients {
                a3: Some(a3),
                ..Default::default()
            },
            |x, y| x + y,
            Boundary::Dirichlet,
        )
        .unwrap();
        let r = cascade_solve(&sys).unwrap();
        assert!(max_diff(&r.u, &sys.dense_solve().unwrap()) <= 1e-9);
        let s_inv_max = r.state.max_entry_log[0];
        assert!(r.state.max_entry_log.iter().all(|&x| x <= 2.0 * s_inv_max));
        assert!(r.condition_log().iter().all(|d| (d - 1.0).abs() < 0.5));
    }

    #[test]
    fn random_reaction_inverse_matches_lu() {
        let g = unit_grid(13);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let vals: Vec<f64> = (0..g.value_count()).map(|_| rng.random_range(0.0..1.0)).collect();
        let a3 = PiecewiseFunction2D::new(g.clone(), vals, Order::Linear).unwrap();
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
        assert_eq!(sys.layout.len(), 144);
        let r = cascade_solve(&sys).unwrap();
        let inv = sys.full_matrix().lu().try_inverse().unwrap();
        assert!((&r.state.t - inv).amax() <= 1e-9);
        // reversed order reaches the same inverse
        let rev: Vec<usize> = (0..sys.updates.len()).rev().collect();
        let r2 = cascade_solve_ordered(&sys, &rev).unwrap();
        assert!((&r.state.t - &r2.state.t).amax() <= 1e-10);
    }

    #[test]
    fn advection_cascade_matches_dense() {
        let g = unit_grid(10);
        let a1 = field(&g, |_, _| 1.0);
        let a2 = field(&g, |x, _| 0.5 - x);
        let sys = assemble(
            &g,
            &Coefficients {
                a1: Some(a1),
                a2: Some(a2),
                a3: None,
            },
            |x, y| (x * y).exp(),
            Boundary::Dirichlet,
        )
        .unwrap();
        let kinds: Vec<UpdateKind> = sys.updates.iter().map(|u| u.kind).collect();
        let first_y = kinds.iter().position(|&k| k == UpdateKind::AdvectionY).unwrap();
        assert!(kinds[..first_y].iter().all(|&k| k == UpdateKind::AdvectionX));
        let r = cascade_solve(&sys).unwrap();
        assert!(max_diff(&r.u, &sys.dense_solve().unwrap()) <= 1e-8);
    }

    #[test]
    fn validation() {
        let g = unit_grid(6);
        let neg = field(&g, |x, _| x - 0.5);
        let e = assemble(
            &g,
            &Coefficients {
                a3: Some(neg),
                ..Default::default()
            },
            |_, _| 1.0,
            Boundary::Dirichlet,
        );
        assert!(e.unwrap_err().to_string().contains("a3"));
        let fast = field(&g, |_, _| 100.0);
        assert!(assemble(
            &g,
            &Coefficients {
                a1: Some(fast),
                ..Default::default()
            },
            |_, _| 1.0,
            Boundary::Dirichlet
        )
        .is_err());
        let gx = Grid1D::uniform(0.0, 1.0, 6, false).unwrap();
        let gy = Grid1D::uniform(0.0, 2.0, 6, false).unwrap();
        let rect = Grid2D::new(gx, gy).unwrap();
        assert!(assemble(&rect, &Coefficients::default(), |_, _| 1.0, Boundary::Dirichlet).is_err());
    }

    type Field2 = fn(f64, f64) -> f64;

    fn manufactured_error(cells: usize, boundary: Boundary) -> f64 {
        let g = unit_grid(cells);
        let (u, f): (Field2, Field2) = match boundary {
            Boundary::Dirichlet => (
                |x, y| (PI * x).sin() * (PI * y).sin(),
                |x, y| 2.0 * PI * PI * (PI * x).sin() * (PI * y).sin(),
            ),
            _ => (
                |x, y| (PI * x).cos() * (PI * y).cos(),
                |x, y| 2.0 * PI * PI * (PI * x).cos() * (PI * y).cos(),
            ),
        };
        let sys = assemble(&g, &Coefficients::default(), f, boundary).unwrap();
        let uh = sys.banded_solve().unwrap();
        let mut exact: Vec<f64> = (0..sys.layout.len())
            .map(|k| {
                let (x, y) = sys.layout.point(k);
                u(x, y)
            })
            .collect();
        if sys.mean_zero {
            assemble::remove_mean(&mut exact);
        }
        max_diff(&uh, &exact)
    }

    #[test]
    fn manufactured_rates() {
        for b in [Boundary::Dirichlet, Boundary::Neumann] {
            let e: Vec<f64> = [8, 16, 32].iter().map(|&c| manufactured_error(c, b)).collect();
            for w in e.windows(2) {
                let ratio = w[0] / w[1];
                assert!((3.4..4.6).contains(&ratio), "{b:?} {e:?}");
            }
        }
    }

    #[test]
    fn neumann_pin_and_unpin() {
        let g = unit_grid(6);
        let sys = assemble(&g, &Coefficients::default(), |x, _| (PI * x).cos(), Boundary::Neumann).unwrap();
        assert!(sys.mean_zero && sys.updates.is_empty());
        let r = cascade_solve(&sys).unwrap();
        assert!(max_diff(&r.u, &sys.dense_solve().unwrap()) <= 1e-10);
        let a3 = field(&g, |x, y| 1.0 + x * y);
        let sys = assemble(
            &g,
            &Coefficients {
                a3: Some(a3),
                ..Default::default()
            },
            |x, _| (PI * x).cos() + 1.0,
            Boundary::Neumann,
        )
        .unwrap();
        assert_eq!(sys.updates.last().unwrap().kind, UpdateKind::Unpin);
        let r = cascade_solve(&sys).unwrap();
        // pin and unpin cancel, so this is the operator without the pin
        let full = sys.full_matrix();
        for k in 0..full.nrows() {
            let reaction: f64 = sys
                .updates
                .iter()
                .filter(|u| u.kind == UpdateKind::Reaction && u.k == k)
                .map(|u| u.alpha)
                .sum();
            assert!((full.row(k).sum() - reaction).abs() < 1e-12);
        }
        let u = sys.dense_solve().unwrap();
        assert!(max_diff(&r.u, &u) <= 1e-9);
        let resid = &full * nalgebra::DVector::from_vec(r.u.clone()) - nalgebra::DVector::from_vec(sys.f.clone());
        assert!(resid.amax() < 1e-10);
    }

    #[test]
    fn robin_cascade_matches_dense() {
        let g = unit_grid(7);
        let a3 = field(&g, |x, _| x);
        let a1 = field(&g, |_, y| y);
        let sys = assemble(
            &g,
            &Coefficients {
                a1: Some(a1),
                a2: None,
                a3: Some(a3),
            },
            |x, y| 1.0 + x - y,
            Boundary::Robin(2.0),
        )
        .unwrap();
        let r = cascade_solve(&sys).unwrap();
        assert!(max_diff(&r.u, &sys.dense_solve().unwrap()) <= 1e-9);
    }

    #[test]
    fn triplet_dump() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, -0.5, 2.0]);
        let mut buf = Vec::new();
        dump_triplets(&m, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "0 0 1.0\n1 0 -0.5\n1 1 2.0\n");
    }
}
