//! Steady advection-diffusion -u'' + a u' = f on (0, L), u(0) = u(L) = 0, with
//! a piecewise constant.
//!
//! With A(x) = exp(-int_0^x a), A+(g) = int_0^x A g and A-(g) = int_0^x g / A,
//! u = -A-(A+(f))(x) + A-(1)(x) / A-(1)(L) * A-(A+(f))(L).

pub mod poly;

pub use poly::{rational_form_stats, PolyStats, RationalFormStats};

use crate::error::{param, Error, Result};
use crate::grid::Grid1D;
use crate::interp::{Order, PiecewiseFunction};
use crate::quadrature::GaussLegendre;
use std::fmt;
use std::sync::Arc;

/// Largest admissible M0 * L.
pub const MAX_M0_L: f64 = 10.0;

pub type Source = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct AdvDiffProblem1D {
    a: PiecewiseFunction,
    f: Source,
    m0: f64,
}

impl fmt::Debug for AdvDiffProblem1D {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        fm.debug_struct("AdvDiffProblem1D")
            .field("a", &self.a)
            .field("m0", &self.m0)
            .finish_non_exhaustive()
    }
}

/// E(a, d) = (exp(a d) - 1) / a, continuous at a = 0.
fn expm1_ratio(a: f64, d: f64) -> f64 {
    if a == 0.0 {
        d
    } else {
        (a * d).exp_m1() / a
    }
}

impl AdvDiffProblem1D {
    /// `a` is order 0 on a non-periodic grid over [0, L]; cell j uses values[j].
    pub fn new(a: PiecewiseFunction, f: Source) -> Result<Self> {
        let m0 = a.sup_norm();
        Self::with_bound(a, f, m0)
    }

    pub fn with_bound(a: PiecewiseFunction, f: Source, m0: f64) -> Result<Self> {
        let g = a.grid();
        if g.periodic() {
            return Err(Error::Input("advection-diffusion needs a non-periodic grid".into()));
        }
        if g.start() != 0.0 {
            return Err(Error::Input(format!("domain must start at 0, got {}", g.start())));
        }
        if a.order() != Order::Constant {
            return Err(Error::Input("a must be piecewise constant".into()));
        }
        if !(m0 >= 0.0) || !m0.is_finite() {
            return Err(param("M0", m0, "must be non-negative"));
        }
        if a.sup_norm() > m0 * (1.0 + 1e-12) {
            return Err(param("M0", m0, "below the sup norm of a"));
        }
        if m0 * g.end() > MAX_M0_L {
            return Err(param("M0 L", m0 * g.end(), "must be at most 10"));
        }
        Ok(AdvDiffProblem1D { a, f, m0 })
    }

    /// Convenience: a from per-cell values (the node value at L repeats the last cell).
    pub fn from_cells(grid: Grid1D, cells: &[f64], f: Source) -> Result<Self> {
        if cells.len() != grid.cells() {
            return Err(Error::Input(format!(
                "expected {} cell values, got {}",
                grid.cells(),
                cells.len()
            )));
        }
        let mut v = cells.to_vec();
        v.push(*cells.last().unwrap_or(&0.0));
        Self::new(PiecewiseFunction::new(grid, v, Order::Constant)?, f)
    }

    pub fn grid(&self) -> &Grid1D {
        self.a.grid()
    }

    pub fn a(&self) -> &PiecewiseFunction {
        &self.a
    }

    pub fn cell_rate(&self, j: usize) -> f64 {
        self.a.values()[j]
    }

    pub fn source(&self) -> &Source {
        &self.f
    }

    pub fn length(&self) -> f64 {
        self.grid().end()
    }

    pub fn m0(&self) -> f64 {
        self.m0
    }

    /// Same coefficient, different source.
    pub fn with_source(&self, f: Source) -> Self {
        AdvDiffProblem1D {
            a: self.a.clone(),
            f,
            m0: self.m0,
        }
    }

    fn check_point(&self, x: f64) -> Result<()> {
        if !(x >= 0.0 && x <= self.length()) {
            return Err(Error::Domain {
                point: x,
                lo: 0.0,
                hi: self.length(),
            });
        }
        Ok(())
    }
}

/// A and 1/A at the nodes. 1/A(x_j) is the running product of v_i = exp(a_i h_i).
#[derive(Debug, Clone, PartialEq)]
pub struct IntegratingFactor {
    pub a_nodes: Vec<f64>,
    pub a_inv_nodes: Vec<f64>,
    pub v: Vec<f64>,
}

impl IntegratingFactor {
    pub fn new(problem: &AdvDiffProblem1D) -> Self {
        let g = problem.grid();
        let v: Vec<f64> = (0..g.cells())
            .map(|i| (problem.cell_rate(i) * g.width(i)).exp())
            .collect();
        let mut a_inv_nodes = Vec::with_capacity(v.len() + 1);
        let mut acc = 1.0;
        a_inv_nodes.push(acc);
        for &vi in &v {
            acc *= vi;
            a_inv_nodes.push(acc);
        }
        let a_nodes = a_inv_nodes.iter().map(|x| 1.0 / x).collect();
        IntegratingFactor {
            a_nodes,
            a_inv_nodes,
            v,
        }
    }
}

/// Exact solution with per-cell prefix sums so each evaluation only integrates
/// the partial cell. Inner integrals in A use exact exponentials; f enters
/// through 32-point Gauss-Legendre.
#[derive(Clone)]
pub struct ExactSolver {
    problem: AdvDiffProblem1D,
    factor: IntegratingFactor,
    gl: GaussLegendre,
    /// A-(1) at nodes
    s: Vec<f64>,
    /// A+(f) at nodes
    p: Vec<f64>,
    /// A-(A+(f)) at nodes
    q: Vec<f64>,
}

impl ExactSolver {
    pub fn new(problem: &AdvDiffProblem1D) -> Self {
        let factor = IntegratingFactor::new(problem);
        let g = problem.grid();
        let m = g.cells();
        let mut solver = ExactSolver {
            problem: problem.clone(),
            factor,
            gl: GaussLegendre::new(32),
            s: vec![0.0; m + 1],
            p: vec![0.0; m + 1],
            q: vec![0.0; m + 1],
        };
        for j in 0..m {
            let x1 = g.node(j + 1);
            let (s, p, q) = solver.advance(j, x1);
            solver.s[j + 1] = s;
            solver.p[j + 1] = p;
            solver.q[j + 1] = q;
        }
        solver
    }

    /// (A-(1), A+(f), A-(A+(f))) at x inside cell j, from the values at x_j.
    fn advance(&self, j: usize, x: f64) -> (f64, f64, f64) {
        let g = self.problem.grid();
        let xj = g.node(j);
        let aj = self.problem.cell_rate(j);
        let d = x - xj;
        let ainv = self.factor.a_inv_nodes[j];
        let s = self.s[j] + ainv * expm1_ratio(aj, d);
        if d == 0.0 {
            return (s, self.p[j], self.q[j]);
        }
        let f = &self.problem.f;
        // A+(f) increment: A_j int e^{-a_j (z - x_j)} f(z) dz
        // A-(A+ f) increment: P_j (S(x) - S_j) + int f(z) E(a_j, x - z) dz
        let (mut dp, mut dq) = (0.0, 0.0);
        for (z, w) in self.gl.mapped(xj, x) {
            let fz = f(z);
            dp += w * (-aj * (z - xj)).exp() * fz;
            dq += w * fz * expm1_ratio(aj, x - z);
        }
        let p = self.p[j] + self.factor.a_nodes[j] * dp;
        let q = self.q[j] + self.p[j] * (s - self.s[j]) + dq;
        (s, p, q)
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        self.problem.check_point(x)?;
        let m = self.s.len() - 1;
        let (s_l, q_l) = (self.s[m], self.q[m]);
        let j = self.problem.grid().locate(x);
        let (s, _, q) = self.advance(j, x);
        Ok(-q + s / s_l * q_l)
    }
}

pub fn exact_solution(problem: &AdvDiffProblem1D, x: f64) -> Result<f64> {
    ExactSolver::new(problem).eval(x)
}

/// The discrete operator: A+ and A- act on the left-endpoint piecewise constant
/// interpolants I0(A g) and I0(g / A); node sums are precomputed.
#[derive(Debug, Clone)]
pub struct DiscreteSolver {
    grid: Grid1D,
    a_inv: Vec<f64>,
    /// A-N(1) at nodes
    s: Vec<f64>,
    /// A+N(f) at nodes
    p: Vec<f64>,
    /// A-N(A+N(f)) at nodes
    q: Vec<f64>,
}

impl DiscreteSolver {
    pub fn new(problem: &AdvDiffProblem1D) -> Self {
        let factor = IntegratingFactor::new(problem);
        let g = problem.grid().clone();
        let m = g.cells();
        let f = &problem.f;
        let mut s = vec![0.0; m + 1];
        let mut p = vec![0.0; m + 1];
        let mut q = vec![0.0; m + 1];
        for k in 0..m {
            let h = g.width(k);
            s[k + 1] = s[k] + h * factor.a_inv_nodes[k];
            p[k + 1] = p[k] + h * factor.a_nodes[k] * f(g.node(k));
            q[k + 1] = q[k] + h * factor.a_inv_nodes[k] * p[k];
        }
        DiscreteSolver {
            grid: g,
            a_inv: factor.a_inv_nodes,
            s,
            p,
            q,
        }
    }

    /// A-N(1)(x) / A-N(1)(L).
    pub fn weight(&self, x: f64) -> f64 {
        let j = self.grid.locate(x);
        let s = self.s[j] + (x - self.grid.node(j)) * self.a_inv[j];
        s / self.s[self.s.len() - 1]
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let (lo, hi) = (self.grid.start(), self.grid.end());
        if !(x >= lo && x <= hi) {
            return Err(Error::Domain { point: x, lo, hi });
        }
        let m = self.s.len() - 1;
        let j = self.grid.locate(x);
        let d = x - self.grid.node(j);
        let s = self.s[j] + d * self.a_inv[j];
        let q = self.q[j] + d * self.a_inv[j] * self.p[j];
        Ok(-q + s / self.s[m] * self.q[m])
    }
}

pub fn discrete_operator(problem: &AdvDiffProblem1D, x: f64) -> Result<f64> {
    DiscreteSolver::new(problem).eval(x)
}

/// -(k u')' = f with k > 0 sampled at the nodes, rewritten as -u'' + b u' = f / k
/// with b = -k'/k taken per cell as -(ln k_{j+1} - ln k_j) / h_j and k linear
/// between nodes in f / k.
pub fn divergence_form(grid: Grid1D, k_nodes: &[f64], f: Source) -> Result<AdvDiffProblem1D> {
    if k_nodes.len() != grid.cells() + 1 {
        return Err(Error::Input(format!(
            "expected {} nodal values of k, got {}",
            grid.cells() + 1,
            k_nodes.len()
        )));
    }
    if let Some(j) = k_nodes.iter().position(|&k| !(k > 0.0) || !k.is_finite()) {
        return Err(Error::Input(format!(
            "k must be positive, got {} at node {j}",
            k_nodes[j]
        )));
    }
    let b: Vec<f64> = (0..grid.cells())
        .map(|j| -(k_nodes[j + 1].ln() - k_nodes[j].ln()) / grid.width(j))
        .collect();
    let k = PiecewiseFunction::new(grid.clone(), k_nodes.to_vec(), Order::Linear)?;
    let ft: Source = Arc::new(move |x| f(x) / k.eval(x).unwrap_or(f64::NAN));
    AdvDiffProblem1D::from_cells(grid, &b, ft)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;

    fn constant(c: f64) -> Source {
        Arc::new(move |_| c)
    }

    fn problem(cells: &[f64], l: f64, f: Source) -> AdvDiffProblem1D {
        let g = Grid1D::uniform(0.0, l, cells.len(), false).unwrap();
        AdvDiffProblem1D::from_cells(g, cells, f).unwrap()
    }

    /// RK4 shooting for u' = p, p' = a p - f on cell-aligned steps.
    fn shooting(p: &AdvDiffProblem1D, x: f64, steps_per_cell: usize) -> f64 {
        let g = p.grid();
        let f = p.source();
        let integrate = |u0: f64, p0: f64, forced: bool, upto: f64| -> f64 {
            let (mut u, mut q) = (u0, p0);
            for j in 0..g.cells() {
                let (lo, hi) = (g.node(j), g.node(j + 1).min(upto));
                if lo >= upto {
                    break;
                }
                let a = p.cell_rate(j);
                let n = steps_per_cell;
                let h = (hi - lo) / n as f64;
                let rhs = |z: f64, q: f64| -> (f64, f64) {
                    let src = if forced { f(z) } else { 0.0 };
                    (q, a * q - src)
                };
                for k in 0..n {
                    let z = lo + h * k as f64;
                    let k1 = rhs(z, q);
                    let k2 = rhs(z + h / 2.0, q + h / 2.0 * k1.1);
                    let k3 = rhs(z + h / 2.0, q + h / 2.0 * k2.1);
                    let k4 = rhs(z + h, q + h * k3.1);
                    u += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
                    q += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
                }
            }
            u
        };
        let l = p.length();
        let up = integrate(0.0, 0.0, true, l);
        let uh = integrate(0.0, 1.0, false, l);
        let c = -up / uh;
        integrate(0.0, 0.0, true, x) + c * integrate(0.0, 1.0, false, x)
    }

    /// Central differences on a uniform grid, Thomas algorithm.
    fn fd_solve(p: &AdvDiffProblem1D, n: usize, x: f64) -> f64 {
        let l = p.length();
        let h = l / n as f64;
        let f = p.source();
        let m = n - 1;
        let (mut lo, mut di, mut up, mut rhs) = (vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]);
        for i in 0..m {
            let xi = h * (i + 1) as f64;
            let a = p.a().eval(xi).unwrap();
            lo[i] = -1.0 / (h * h) - a / (2.0 * h);
            di[i] = 2.0 / (h * h);
            up[i] = -1.0 / (h * h) + a / (2.0 * h);
            rhs[i] = f(xi);
        }
        for i in 1..m {
            let w = lo[i] / di[i - 1];
            di[i] -= w * up[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        let mut u = vec![0.0; m];
        u[m - 1] = rhs[m - 1] / di[m - 1];
        for i in (0..m - 1).rev() {
            u[i] = (rhs[i] - up[i] * u[i + 1]) / di[i];
        }
        let k = (x / h).round() as usize;
        if k == 0 || k == n {
            0.0
        } else {
            u[k - 1]
        }
    }

    #[test]
    fn poisson_closed_form() {
        let p = problem(&[0.0; 16], 1.0, constant(1.0));
        assert!((exact_solution(&p, 0.5).unwrap() - 0.125).abs() < 1e-12);
        // left-endpoint sums are exact at the nodes when a = 0, f = 1
        let d = DiscreteSolver::new(&p);
        for j in 0..=16 {
            let x = j as f64 / 16.0;
            assert!((d.eval(x).unwrap() - x * (1.0 - x) / 2.0).abs() < 1e-14);
        }
        assert!((d.eval(0.5 + 1.0 / 32.0).unwrap() - 0.125).abs() <= 1.0 / 16.0);
    }

    #[test]
    fn zero_source_and_boundaries() {
        let p = problem(&[0.3, -0.7, 1.1, 0.0], 2.0, constant(0.0));
        assert_eq!(exact_solution(&p, 0.9).unwrap(), 0.0);
        let p = problem(&[0.3, -0.7, 1.1, 0.0], 2.0, Arc::new(|x: f64| x.cos()));
        let e = ExactSolver::new(&p);
        let d = DiscreteSolver::new(&p);
        for x in [0.0, 2.0] {
            assert!(e.eval(x).unwrap().abs() < 1e-12);
            assert!(d.eval(x).unwrap().abs() < 1e-12);
        }
        assert!(e.eval(2.1).is_err());
        assert!(d.eval(-0.1).is_err());
    }

    #[test]
    fn constant_drift_against_shooting() {
        let p = problem(&[1.0; 8], 1.0, constant(1.0));
        let want = shooting(&p, 0.5, 400);
        assert!((exact_solution(&p, 0.5).unwrap() - want).abs() < 1e-8);
        // and the textbook closed form
        let e = std::f64::consts::E;
        let closed = 0.5 - (0.5f64.exp() - 1.0) / (e - 1.0);
        assert!((want - closed).abs() < 1e-10);
    }

    #[test]
    fn piecewise_drift_against_shooting() {
        let cells = [0.8, -1.3, 0.2, 1.9, -0.4, 0.0, 1.2, -2.0];
        let p = problem(&cells, 2.0, Arc::new(|x: f64| 1.0 + x * x - (3.0 * x).sin()));
        let e = ExactSolver::new(&p);
        for x in [0.1, 0.55, 1.0, 1.37, 1.9] {
            let want = shooting(&p, x, 400);
            assert!((e.eval(x).unwrap() - want).abs() < 1e-8, "{x}");
        }
    }

    #[test]
    fn random_drift_vs_fine_fd() {
        // a fixed pseudo-random cell pattern with |a| <= 1
        let m = 128;
        let cells: Vec<f64> = (0..m).map(|j| ((j * 7919 % 257) as f64 / 128.0) - 1.0).collect();
        let p = problem(&cells, 1.0, constant(1.0));
        let exact = exact_solution(&p, 0.3).unwrap();
        let disc = discrete_operator(&p, 0.3).unwrap();
        assert!((exact - disc).abs() <= 0.05);
        let fd = fd_solve(&p, 10 * m, 0.3);
        assert!((fd - exact).abs() <= 1e-3, "{fd} {exact}");
    }

    #[test]
    fn weights_monotone_in_unit_interval() {
        let p = problem(&[0.5, -1.0, 2.0, -3.0, 1.0], 1.5, constant(1.0));
        let d = DiscreteSolver::new(&p);
        let mut prev = -1.0;
        for k in 0..=300 {
            let w = d.weight(1.5 * k as f64 / 300.0);
            assert!((0.0..=1.0 + 1e-15).contains(&w));
            assert!(w >= prev);
            prev = w;
        }
    }

    #[test]
    fn linear_in_source_and_nonnegative() {
        let cells = [0.4, -0.9, 1.5, 0.1];
        let p1 = problem(&cells, 1.0, Arc::new(|x: f64| x.exp()));
        let p2 = p1.with_source(Arc::new(|x: f64| 2.0 - x));
        let p12 = p1.with_source(Arc::new(|x: f64| x.exp() + 2.0 - x));
        for x in [0.2, 0.6, 0.93] {
            let a = exact_solution(&p1, x).unwrap() + exact_solution(&p2, x).unwrap();
            assert!((a - exact_solution(&p12, x).unwrap()).abs() < 1e-12);
            let b = discrete_operator(&p1, x).unwrap() + discrete_operator(&p2, x).unwrap();
            assert!((b - discrete_operator(&p12, x).unwrap()).abs() < 1e-12);
            assert!(exact_solution(&p1, x).unwrap() >= -1e-10);
            assert!(discrete_operator(&p1, x).unwrap() >= -1e-10);
        }
    }

    #[test]
    fn integrating_factor_bounds() {
        let p = problem(&[0.5, -1.0, 2.0, -3.0, 1.0], 1.5, constant(1.0));
        let fac = IntegratingFactor::new(&p);
        let b = (p.m0() * p.length()).exp();
        for (a, ai) in fac.a_nodes.iter().zip(&fac.a_inv_nodes) {
            assert!((a * ai - 1.0).abs() < 1e-12);
            assert!(*a <= b && *ai <= b && *a >= 1.0 / b);
        }
    }

    #[test]
    fn validation() {
        let g = Grid1D::uniform(0.0, 1.0, 4, false).unwrap();
        assert!(AdvDiffProblem1D::from_cells(g.clone(), &[20.0, 0.0, 0.0, 0.0], constant(1.0)).is_err());
        let lin = PiecewiseFunction::new(g, vec![0.0; 5], Order::Linear).unwrap();
        assert!(AdvDiffProblem1D::new(lin, constant(1.0)).is_err());
    }

    #[test]
    fn divergence_form_converges() {
        // -((1 + x) u')' = 1 on (0, 1): u = ln(1 + x) / ln 2 - x
        let exact = |x: f64| (1.0 + x).ln() / 2f64.ln() - x;
        let mut errs = Vec::new();
        for m in [16, 32, 64, 128] {
            let g = Grid1D::uniform(0.0, 1.0, m, false).unwrap();
            let k: Vec<f64> = g.nodes().iter().map(|x| 1.0 + x).collect();
            let p = divergence_form(g, &k, constant(1.0)).unwrap();
            let s = ExactSolver::new(&p);
            let e = (1..10).map(|i| (s.eval(i as f64 / 10.0).unwrap() - exact(i as f64 / 10.0)).abs());
            errs.push(e.fold(0.0f64, f64::max));
        }
        for w in errs.windows(2) {
            assert!(w[1] < w[0] * 0.6, "{errs:?}");
        }
        assert!(errs[3] < 1e-3);
    }
}
