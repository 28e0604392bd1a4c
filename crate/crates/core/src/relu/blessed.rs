//! The cascade as a deep network: one stage per rank-one update, each stage
//! applying the compiled rational map entrywise to five wired entries of T.

use super::gadgets::{compile_rational_r_in, Gadget, RationalBox};
use super::Scratch;
use crate::cascade::{cascade_solve, FdSystem, RankOneUpdate, UpdateKind};
use crate::error::{param, Error, Result};
use rayon::prelude::*;

/// Slack on the input box when checking stage inputs.
const BOX_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
struct Stage {
    k: usize,
    v: Vec<(usize, f64)>,
    /// alpha = scale * input[slot]
    scale: f64,
    slot: usize,
}

/// Analytic width, depth and size of the fully unrolled network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Capacity {
    pub width: usize,
    pub depth: usize,
    pub size: usize,
}

#[derive(Debug, Clone)]
pub struct BlessedCascadeNet {
    m: usize,
    /// S^-1, row-major
    t0: Vec<f64>,
    stages: Vec<Stage>,
    f: Vec<f64>,
    n_r: Gadget,
    rbox: RationalBox,
    epsilon_stage: f64,
}

fn scale_of(u: &RankOneUpdate, h: f64) -> Result<f64> {
    match u.kind {
        UpdateKind::Reaction => Ok(h * h),
        UpdateKind::AdvectionX | UpdateKind::AdvectionY => Ok(h),
        UpdateKind::Unpin => Err(Error::Input(
            "pinned Neumann systems have a fixed unit update outside the network's input box".into(),
        )),
    }
}

/// Coefficient values a_k behind the updates (alpha_k / scale_k), i.e. the
/// network input that reproduces the system.
pub fn coefficient_vector(system: &FdSystem) -> Result<Vec<f64>> {
    let h = system.layout.h;
    system.updates.iter().map(|u| Ok(u.alpha / scale_of(u, h)?)).collect()
}

/// Input box the rational map must cover for `system`: |alpha| over all
/// updates and |T| entries over the exact cascade, with 25% headroom for stage
/// errors. Runs the exact cascade, so denominators are validated too.
pub fn system_box(system: &FdSystem) -> Result<RationalBox> {
    let h = system.layout.h;
    let exact = cascade_solve(system)?;
    let mut a_max = 0.0f64;
    for u in &system.updates {
        scale_of(u, h)?;
        a_max = a_max.max(u.alpha.abs());
    }
    let t_max = exact.state.max_entry_log.iter().fold(0.0f64, |m, &x| m.max(x));
    let v_max = system
        .updates
        .iter()
        .map(|u| u.v.iter().map(|(_, w)| w.abs()).sum::<f64>())
        .fold(1.0f64, f64::max);
    let rbox = RationalBox {
        x1: (a_max * 1.25).max(f64::MIN_POSITIVE.sqrt()),
        t: 1.25 * t_max * v_max,
    };
    if rbox.x1 * rbox.t > 0.5 {
        return Err(param(
            "max |alpha| * max |T|",
            rbox.x1 * rbox.t,
            "must stay below 1/2 for the reciprocal gadget (refine the mesh)",
        ));
    }
    Ok(rbox)
}

/// Smallest box containing both.
pub fn union_box(a: RationalBox, b: RationalBox) -> RationalBox {
    RationalBox {
        x1: a.x1.max(b.x1),
        t: a.t.max(b.t),
    }
}

/// Builds the stage network for `system` with a rational map compiled to
/// `epsilon_stage` on the system's own box.
pub fn blessed_cascade_net(system: &FdSystem, epsilon_stage: f64) -> Result<BlessedCascadeNet> {
    let rbox = system_box(system)?;
    let n_r = compile_rational_r_in(epsilon_stage, rbox)?;
    blessed_cascade_net_with(system, n_r, epsilon_stage)
}

/// As [`blessed_cascade_net`] with a shared, precompiled rational map (for
/// sweeps where every system must see the same stage accuracy).
pub fn blessed_cascade_net_with(system: &FdSystem, n_r: Gadget, epsilon_stage: f64) -> Result<BlessedCascadeNet> {
    let need = system_box(system)?;
    if n_r.domain.len() != 5 {
        return Err(Error::Input("rational map must take five inputs".into()));
    }
    let rbox = RationalBox {
        x1: n_r.domain[0].1,
        t: n_r.domain[1].1,
    };
    if need.x1 > rbox.x1 || need.t > rbox.t {
        return Err(param(
            "rational map box",
            rbox.x1.min(rbox.t),
            "does not cover the system's stage inputs",
        ));
    }
    let h = system.layout.h;
    let stages = system
        .updates
        .iter()
        .enumerate()
        .map(|(slot, u)| {
            Ok(Stage {
                k: u.k,
                v: u.v.clone(),
                scale: scale_of(u, h)?,
                slot,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BlessedCascadeNet {
        m: system.layout.len(),
        t0: t0_row_major(system)?,
        stages,
        f: system.f.clone(),
        n_r,
        rbox,
        epsilon_stage,
    })
}

fn t0_row_major(system: &FdSystem) -> Result<Vec<f64>> {
    let t = crate::cascade::CascadeState::from_system(system)?.t;
    let m = t.nrows();
    Ok((0..m * m).map(|q| t[(q / m, q % m)]).collect())
}

#[derive(Debug, Clone)]
pub struct BlessedOutput {
    pub u: Vec<f64>,
    /// final T, row-major
    pub t: Vec<f64>,
}

impl BlessedCascadeNet {
    pub fn unknowns(&self) -> usize {
        self.m
    }

    pub fn stage_count(&self) -> usize {
        self.stages.len()
    }

    pub fn input_dim(&self) -> usize {
        self.stages.len()
    }

    pub fn rational_net(&self) -> &Gadget {
        &self.n_r
    }

    pub fn input_box(&self) -> RationalBox {
        self.rbox
    }

    pub fn epsilon_stage(&self) -> f64 {
        self.epsilon_stage
    }

    /// Every output entry of a stage reads exactly five wired values:
    /// alpha, T_ij, v^T T e_k, T_ik and (v^T T)_j.
    pub fn inputs_per_entry(&self) -> usize {
        5
    }

    /// Nonzeros of the wiring W_{k,ij} (one row per wired value).
    pub fn wiring_nonzeros(&self, stage: usize) -> usize {
        3 + 2 * self.stages[stage].v.len()
    }

    /// Counts for the unrolled network: m^2 copies of the rational map per
    /// stage, identity channels (two units) for coefficients still to be used,
    /// and a final linear layer T F.
    pub fn capacity(&self) -> Capacity {
        let r = &self.n_r.net;
        let m2 = self.m * self.m;
        let n = self.stages.len();
        let first_nnz = r.layers()[0].nnz();
        let mut width = 0;
        let mut size = 0;
        for (s, st) in self.stages.iter().enumerate() {
            let remaining = n - s - 1;
            width = width.max(m2 * r.width() + 2 * remaining);
            // the wiring multiplies first-layer columns by the v entries
            let wired_first = first_nnz * (1 + 2 * st.v.len()) / 3;
            size += m2 * (r.size() - first_nnz + wired_first) + 4 * remaining * r.depth().max(1);
        }
        size += m2;
        Capacity {
            width,
            depth: n * r.depth(),
            size,
        }
    }

    /// g(a): runs all stages on the coefficient vector and returns T_N F.
    pub fn eval(&self, coefficients: &[f64]) -> Result<BlessedOutput> {
        if coefficients.len() != self.stages.len() {
            return Err(Error::Input(format!(
                "expected {} coefficients, got {}",
                self.stages.len(),
                coefficients.len()
            )));
        }
        let m = self.m;
        let mut t = self.t0.clone();
        let mut next = vec![0.0; m * m];
        let (a_lim, t_lim) = (self.rbox.x1 * (1.0 + BOX_SLACK), self.rbox.t * (1.0 + BOX_SLACK));
        for (s, st) in self.stages.iter().enumerate() {
            let alpha = st.scale * coefficients[st.slot];
            if !(alpha.abs() <= a_lim) {
                return Err(Error::Evaluation {
                    at: format!("stage {}", s + 1),
                    detail: format!("alpha = {alpha} outside the input box |alpha| <= {}", self.rbox.x1),
                });
            }
            // (v^T T)_j for all j
            let mut vt = vec![0.0; m];
            for &(l, w) in &st.v {
                for (j, x) in vt.iter_mut().enumerate() {
                    *x += w * t[l * m + j];
                }
            }
            let x3 = vt[st.k];
            let k = st.k;
            let told = &t;
            next.par_chunks_mut(m)
                .enumerate()
                .try_for_each_init(Scratch::default, |scratch, (i, row)| {
                    let tik = told[i * m + k];
                    for (j, out) in row.iter_mut().enumerate() {
                        let x = [alpha, told[i * m + j], x3, tik, vt[j]];
                        if x[1..].iter().any(|v| !(v.abs() <= t_lim)) {
                            return Err(Error::Evaluation {
                                at: format!("stage {}, entry ({i}, {j})", s + 1),
                                detail: format!("wired inputs {x:?} leave the box |x| <= {}", self.rbox.t),
                            });
                        }
                        *out = self.n_r.net.evaluate_with(&x, scratch).map_err(|e| Error::Evaluation {
                            at: format!("stage {}, entry ({i}, {j})", s + 1),
                            detail: e.to_string(),
                        })?[0];
                    }
                    Ok(())
                })?;
            std::mem::swap(&mut t, &mut next);
        }
        let u = (0..m).map(|i| (0..m).map(|j| t[i * m + j] * self.f[j]).sum()).collect();
        Ok(BlessedOutput { u, t })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::{assemble, Boundary, Coefficients};
    use crate::grid::{Grid1D, Grid2D};
    use crate::interp::{sample_input_2d, Order, PiecewiseFunction2D};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn reaction_system(interior: usize, seed: u64) -> FdSystem {
        let g = Grid1D::uniform(0.0, 1.0, interior + 1, false).unwrap();
        let g = Grid2D::new(g.clone(), g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vals: Vec<f64> = (0..g.value_count()).map(|_| rng.random_range(0.05..1.0)).collect();
        let a3 = PiecewiseFunction2D::new(g.clone(), vals, Order::Linear).unwrap();
        assemble(
            &g,
            &Coefficients {
                a3: Some(a3),
                ..Default::default()
            },
            |x, y| 1.0 + x * y,
            Boundary::Dirichlet,
        )
        .unwrap()
    }

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn zero_input_is_near_identity() {
        let sys = reaction_system(4, 1);
        let net = blessed_cascade_net(&sys, 1e-6).unwrap();
        assert_eq!(net.stage_count(), 16);
        let out = net.eval(&vec![0.0; net.input_dim()]).unwrap();
        let poisson = nalgebra::DVector::from_column_slice(&sys.f);
        let direct = sys.s.clone().lu().solve(&poisson).unwrap();
        let fnorm = sys.f.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let m = net.unknowns() as f64;
        assert!(max_diff(&out.u, direct.as_slice()) <= m * 1e-6 * fnorm);
    }

    #[test]
    fn reproduces_the_cascade() {
        let sys = reaction_system(4, 2);
        let net = blessed_cascade_net(&sys, 1e-6).unwrap();
        let out = net.eval(&coefficient_vector(&sys).unwrap()).unwrap();
        let exact = cascade_solve(&sys).unwrap();
        let m = net.unknowns();
        let t_exact: Vec<f64> = (0..m * m).map(|q| exact.state.t[(q / m, q % m)]).collect();
        assert!(max_diff(&out.t, &t_exact) <= m as f64 * 1e-6);
        assert!(max_diff(&out.u, &exact.u) <= m as f64 * 1e-6);
    }

    #[test]
    fn advection_stages_wire_difference_rows() {
        let g = Grid1D::uniform(0.0, 1.0, 5, false).unwrap();
        let g = Grid2D::new(g.clone(), g).unwrap();
        let a1 = sample_input_2d(|_, y| 1.0 - y, &g, Order::Linear).unwrap();
        let sys = assemble(
            &g,
            &Coefficients {
                a1: Some(a1),
                ..Default::default()
            },
            |_, _| 1.0,
            Boundary::Dirichlet,
        )
        .unwrap();
        let net = blessed_cascade_net(&sys, 1e-5).unwrap();
        assert!((0..net.stage_count()).any(|s| net.wiring_nonzeros(s) > 5));
        let out = net.eval(&coefficient_vector(&sys).unwrap()).unwrap();
        let exact = cascade_solve(&sys).unwrap();
        assert!(max_diff(&out.u, &exact.u) <= net.unknowns() as f64 * 1e-5);
    }

    #[test]
    fn range_violation_names_the_stage() {
        let sys = reaction_system(3, 3);
        let net = blessed_cascade_net(&sys, 1e-4).unwrap();
        let mut a = coefficient_vector(&sys).unwrap();
        a[4] = 1e6;
        let e = net.eval(&a).unwrap_err().to_string();
        assert!(e.contains("stage 5"), "{e}");
        assert!(net.eval(&a[1..]).is_err());
    }

    #[test]
    fn capacity_counts() {
        let sys = reaction_system(4, 4);
        let net = blessed_cascade_net(&sys, 1e-6).unwrap();
        let c = net.capacity();
        let r = &net.rational_net().net;
        assert_eq!(c.depth, 16 * r.depth());
        assert_eq!(c.width, 256 * r.width() + 30);
        assert!(c.size > 16 * 256 * r.size() / 2);
        assert_eq!(net.inputs_per_entry(), 5);
        assert_eq!(net.wiring_nonzeros(0), 5);
    }
}
