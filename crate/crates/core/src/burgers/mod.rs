//! Viscous Burgers equation: Cole-Hopf solution operators and their
//! finite-dimensional rational counterparts.

pub mod forced;
pub mod kernel;
pub mod spectral;
pub mod two_d;

pub use kernel::{heat_kernel_periodized, kernel_coefficients, KernelCoefficients};

use crate::error::{param, Error, Result};
use crate::grid::Grid1D;
use crate::interp::{Order, PiecewiseFunction};
use crate::quadrature::GaussLegendre;
use std::f64::consts::PI;

/// Smallest admissible viscosity.
pub const MIN_KAPPA: f64 = 1e-3;
/// Tolerance on the period mean of u0.
pub const MEAN_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct BurgersProblem1D {
    kappa: f64,
    u0: PiecewiseFunction,
    m0: f64,
    m1: f64,
}

pub(crate) fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa >= MIN_KAPPA) || !kappa.is_finite() {
        return Err(param("kappa", kappa, "must be at least 1e-3"));
    }
    Ok(())
}

pub(crate) fn check_periodic_2pi(grid: &Grid1D) -> Result<()> {
    if !grid.periodic() || (grid.start() + PI).abs() > 1e-12 || (grid.period() - 2.0 * PI).abs() > 1e-12 {
        return Err(Error::Input(
            "Burgers data must live on a periodic grid over [-pi, pi)".into(),
        ));
    }
    Ok(())
}

/// Mean of a periodic piecewise function over one period.
pub fn period_mean(u: &PiecewiseFunction) -> f64 {
    let ints = u.node_integrals();
    ints[ints.len() - 1] / u.grid().period()
}

impl BurgersProblem1D {
    /// u0 must be piecewise linear, periodic on [-pi, pi) and of zero mean.
    pub fn new(kappa: f64, u0: PiecewiseFunction) -> Result<Self> {
        check_kappa(kappa)?;
        check_periodic_2pi(u0.grid())?;
        if u0.order() != Order::Linear {
            return Err(Error::Input("u0 must be piecewise linear".into()));
        }
        let mean = period_mean(&u0);
        if mean.abs() > MEAN_TOLERANCE {
            return Err(Error::Input(format!(
                "u0 has period mean {mean:e}; subtract it with galilean_shift and restore the \
                 solution as v(x - mean t, t) + mean"
            )));
        }
        let m0 = u0.sup_norm();
        let m1 = u0.slope_bound();
        if PI * m0 / kappa > 600.0 {
            return Err(param(
                "M0/kappa",
                m0 / kappa,
                "exp(pi M0/kappa) must stay representable",
            ));
        }
        Ok(BurgersProblem1D { kappa, u0, m0, m1 })
    }

    /// As [`new`](Self::new) with caller-supplied bounds, which must dominate the data.
    pub fn with_bounds(kappa: f64, u0: PiecewiseFunction, m0: f64, m1: f64) -> Result<Self> {
        let mut p = Self::new(kappa, u0)?;
        if p.m0 > m0 * (1.0 + 1e-12) {
            return Err(param("M0", m0, "below the sup norm of u0"));
        }
        if p.m1 > m1 * (1.0 + 1e-12) {
            return Err(param("M1", m1, "below the slope bound of u0"));
        }
        p.m0 = m0;
        p.m1 = m1;
        Ok(p)
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn u0(&self) -> &PiecewiseFunction {
        &self.u0
    }

    pub fn grid(&self) -> &Grid1D {
        self.u0.grid()
    }

    pub fn m0(&self) -> f64 {
        self.m0
    }

    pub fn m1(&self) -> f64 {
        self.m1
    }

    /// Constant of the O(h) bound for the rational operator: 2 (M0^2/kappa + M1).
    pub fn rate_constant(&self) -> f64 {
        2.0 * (self.m0 * self.m0 / self.kappa + self.m1)
    }
}

/// Split u0 into its zero-mean part and the mean. The solution for u0 is
/// v(x - mean t, t) + mean with v the solution for the zero-mean part.
pub fn galilean_shift(u0: &PiecewiseFunction) -> Result<(PiecewiseFunction, f64)> {
    let mean = period_mean(u0);
    let values = u0.values().iter().map(|v| v - mean).collect();
    Ok((PiecewiseFunction::new(u0.grid().clone(), values, u0.order())?, mean))
}

/// Undo [`galilean_shift`]: evaluate the zero-mean solver at the moving frame.
pub fn galilean_restore<F>(mean: f64, x: f64, t: f64, solve_zero_mean: F) -> Result<f64>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    Ok(solve_zero_mean(x - mean * t, t)? + mean)
}

/// Nodal values of v0 = exp(-(1/2 kappa) int u0) as cumulative products.
#[derive(Debug, Clone, PartialEq)]
pub struct ColeHopfState {
    /// V_0 = 1, V_j = exp(-(u_j + u_{j-1}) h_j / (4 kappa)).
    pub factors: Vec<f64>,
    /// v_j = prod_{i <= j} V_i for j = 0..m-1.
    pub v0_nodes: Vec<f64>,
}

impl ColeHopfState {
    pub fn new(problem: &BurgersProblem1D) -> Self {
        let u = problem.u0();
        let g = problem.grid();
        let k = problem.kappa();
        Self::from_factors(
            (1..g.cells()).map(|j| (-(u.node_value(j) + u.node_value(j - 1)) * g.width(j - 1) / (4.0 * k)).exp()),
        )
    }

    /// First-order factors l_j = 1 - (u_j + u_{j-1}) h_j / (4 kappa) in place of V_j.
    pub fn linearized(problem: &BurgersProblem1D) -> Result<Self> {
        let u = problem.u0();
        let g = problem.grid();
        let k = problem.kappa();
        let factors: Vec<f64> = (1..g.cells())
            .map(|j| 1.0 - (u.node_value(j) + u.node_value(j - 1)) * g.width(j - 1) / (4.0 * k))
            .collect();
        if let Some(j) = factors.iter().position(|&l| l <= 0.0) {
            return Err(Error::Input(format!(
                "linearized factor at node {} is not positive; refine the grid",
                j + 1
            )));
        }
        Ok(Self::from_factors(factors.into_iter()))
    }

    fn from_factors(rest: impl Iterator<Item = f64>) -> Self {
        let mut factors = vec![1.0];
        factors.extend(rest);
        let mut v0_nodes = Vec::with_capacity(factors.len());
        let mut acc = 1.0;
        for &f in &factors {
            acc *= f;
            v0_nodes.push(acc);
        }
        ColeHopfState { factors, v0_nodes }
    }
}

/// Denominators below this are treated as a broken invariant.
pub const POSITIVITY_FLOOR: f64 = 1e-300;

/// G_m(u_{0,m}; x, t) = sum v_j c1_j / sum v_j c2_j.
pub fn rational_operator_1d(state: &ColeHopfState, coeffs: &KernelCoefficients) -> Result<f64> {
    if state.v0_nodes.len() != coeffs.c1.len() {
        return Err(Error::Input(format!(
            "state has {} nodes, coefficients {}",
            state.v0_nodes.len(),
            coeffs.c1.len()
        )));
    }
    let num: f64 = state.v0_nodes.iter().zip(&coeffs.c1).map(|(v, c)| v * c).sum();
    let den: f64 = state.v0_nodes.iter().zip(&coeffs.c2).map(|(v, c)| v * c).sum();
    if !(den > POSITIVITY_FLOOR) {
        return Err(Error::Internal(format!(
            "rational operator denominator {den:e} not positive at x = {}",
            coeffs.x
        )));
    }
    Ok(num / den)
}

/// Convenience wrapper: state and coefficients from the problem itself.
pub fn rational_operator(problem: &BurgersProblem1D, x: f64, t: f64) -> Result<f64> {
    let state = ColeHopfState::new(problem);
    let coeffs = kernel_coefficients(problem.grid(), x, t, problem.kappa())?;
    rational_operator_1d(&state, &coeffs)
}

/// v0 evaluated exactly from the piecewise-linear u0 (not interpolated).
#[derive(Debug, Clone)]
pub struct ExactV0<'a> {
    u0: &'a PiecewiseFunction,
    ints: Vec<f64>,
    kappa: f64,
}

impl<'a> ExactV0<'a> {
    pub fn new(problem: &'a BurgersProblem1D) -> Self {
        ExactV0 {
            u0: problem.u0(),
            ints: problem.u0().node_integrals(),
            kappa: problem.kappa(),
        }
    }

    /// Integral of u0 from -pi to y, periodically extended (u0 has zero mean).
    pub fn potential(&self, y: f64) -> f64 {
        let g = self.u0.grid();
        let r = g.start() + (y - g.start()).rem_euclid(g.period());
        let r = if r >= g.end() { g.start() } else { r };
        self.u0.integral_to(&self.ints, r)
    }

    pub fn eval(&self, y: f64) -> f64 {
        (-self.potential(y) / (2.0 * self.kappa)).exp()
    }
}

/// Reference G(u0)(x, t): Gauss-Legendre quadrature of the exact v0 against the
/// periodized kernel and its x-derivative. Each cell is split `quad_refine` times,
/// and further so no piece is wider than the kernel scale sqrt(4 kappa t).
pub fn cole_hopf_exact(problem: &BurgersProblem1D, x: f64, t: f64, quad_refine: usize) -> Result<f64> {
    if quad_refine == 0 {
        return Err(param("quad_refine", 0.0, "must be at least 1"));
    }
    let kappa = problem.kappa();
    let g = problem.grid();
    let x = g.reduce(x)?;
    let v0 = ExactV0::new(problem);
    let shifts = kernel::shift_count(t, kappa, g.period());
    let scale = (4.0 * kappa * t).sqrt();
    let gl = GaussLegendre::new(16);
    let (mut num, mut den) = (0.0, 0.0);
    for j in 0..g.cells() {
        let (a, b) = (g.node(j), g.node(j + 1));
        let pieces = quad_refine * ((b - a) / scale).ceil().max(1.0) as usize;
        let h = (b - a) / pieces as f64;
        for p in 0..pieces {
            let lo = a + h * p as f64;
            for (y, w) in gl.mapped(lo, lo + h) {
                let v = v0.eval(y);
                num += w * kernel::heat_kernel_periodized_with(x, y, t, kappa, 1, shifts)? * v;
                den += w * kernel::heat_kernel_periodized_with(x, y, t, kappa, 0, shifts)? * v;
            }
        }
    }
    if !(den > POSITIVITY_FLOOR) {
        return Err(Error::Internal(format!("Cole-Hopf denominator {den:e} not positive")));
    }
    Ok(-2.0 * kappa * num / den)
}
