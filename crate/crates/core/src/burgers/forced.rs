//! Forced periodic Burgers u_t + u u_x = kappa u_xx + f by Feynman-Kac path sums.
//!
//! With X_s = x + sqrt(2 kappa) B_s, P0 = int u0 and Pf(., tau) = int f(., tau),
//! u(x, t) = E[W Q] / E[W] where
//! W = exp(-(P0(X_t) + int_0^t Pf(X_s, t - s) ds) / (2 kappa)) and
//! Q = u0(X_t) + int_0^t f(X_s, t - s) ds.

use super::{check_kappa, check_periodic_2pi, period_mean, MEAN_TOLERANCE};
use crate::error::{param, Error, Result};
use crate::interp::{Order, PiecewiseFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

/// Forcing that is linear between x-nodes and constant on time slabs
/// [k dt, (k+1) dt); the last slab extends to infinity.
#[derive(Debug, Clone)]
pub struct Forcing {
    slab: f64,
    slices: Vec<PiecewiseFunction>,
    integrals: Vec<Vec<f64>>,
}

impl Forcing {
    /// Each slice must be periodic on [-pi, pi), linear and of zero mean, so the
    /// potential Pf stays periodic.
    pub fn new(slab: f64, slices: Vec<PiecewiseFunction>) -> Result<Self> {
        if !(slab > 0.0) || !slab.is_finite() {
            return Err(param("slab", slab, "must be positive"));
        }
        if slices.is_empty() {
            return Err(Error::Input("forcing needs at least one time slab".into()));
        }
        for (k, s) in slices.iter().enumerate() {
            check_periodic_2pi(s.grid())?;
            if s.order() != Order::Linear {
                return Err(Error::Input("forcing slices must be piecewise linear".into()));
            }
            let mean = period_mean(s);
            if mean.abs() > MEAN_TOLERANCE * (1.0 + s.sup_norm()) {
                return Err(Error::Input(format!("forcing slab {k} has period mean {mean:e}")));
            }
        }
        let integrals = slices.iter().map(|s| s.node_integrals()).collect();
        Ok(Forcing {
            slab,
            slices,
            integrals,
        })
    }

    /// Single slab sampled from a time-independent callable.
    pub fn stationary<F: Fn(f64) -> f64>(grid: &crate::grid::Grid1D, f: F) -> Result<Self> {
        let s = crate::interp::sample_input(f, grid, Order::Linear)?;
        Self::new(1.0, vec![s])
    }

    fn slice(&self, tau: f64) -> usize {
        ((tau / self.slab).floor().max(0.0) as usize).min(self.slices.len() - 1)
    }

    /// (f, Pf) at a point already reduced into [-pi, pi).
    fn eval(&self, x: f64, tau: f64) -> Result<(f64, f64)> {
        let k = self.slice(tau);
        let s = &self.slices[k];
        Ok((s.eval(x)?, s.integral_to(&self.integrals[k], x)))
    }
}

/// How the path-wise numerator factor Q is formed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Estimator {
    /// Q = u0(X_t) + int f.
    Direct,
    /// Q = 2 kappa [(exp(z h_x) - 1)/h_x + (exp(z_f h_t) - 1)/h_t] with
    /// z = u0(X_t)/(2 kappa), z_f = int f / (2 kappa); tends to Direct as h -> 0.
    ExpQuotient { h_x: f64 },
}

#[derive(Debug, Clone)]
pub struct ForcedBurgersConfig {
    pub kappa: f64,
    pub u0: PiecewiseFunction,
    pub forcing: Option<Forcing>,
    pub path_count: usize,
    pub h_t: f64,
    pub seed: u64,
    pub estimator: Estimator,
}

impl ForcedBurgersConfig {
    pub fn new(kappa: f64, u0: PiecewiseFunction, path_count: usize, h_t: f64, seed: u64) -> Self {
        ForcedBurgersConfig {
            kappa,
            u0,
            forcing: None,
            path_count,
            h_t,
            seed,
            estimator: Estimator::Direct,
        }
    }

    pub fn with_forcing(mut self, forcing: Forcing) -> Self {
        self.forcing = Some(forcing);
        self
    }

    fn validate(&self) -> Result<()> {
        check_kappa(self.kappa)?;
        check_periodic_2pi(self.u0.grid())?;
        if self.u0.order() != Order::Linear {
            return Err(Error::Input("u0 must be piecewise linear".into()));
        }
        let mean = period_mean(&self.u0);
        if mean.abs() > MEAN_TOLERANCE {
            return Err(Error::Input(format!(
                "u0 has period mean {mean:e}; apply galilean_shift first"
            )));
        }
        if self.path_count < 2 {
            return Err(param("path_count", self.path_count as f64, "must be at least 2"));
        }
        if !(self.h_t > 0.0) || !self.h_t.is_finite() {
            return Err(param("h_t", self.h_t, "must be positive"));
        }
        if let Estimator::ExpQuotient { h_x } = self.estimator {
            if !(h_x > 0.0) {
                return Err(param("h_x", h_x, "must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
}

/// Sum in a fixed binary tree so the result does not depend on scheduling.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        2 => v[0] + v[1],
        n => pairwise_sum(&v[..n / 2]) + pairwise_sum(&v[n / 2..]),
    }
}

fn reduce(x: f64) -> f64 {
    use std::f64::consts::PI;
    let r = (x + PI).rem_euclid(2.0 * PI) - PI;
    if r >= PI {
        -PI
    } else {
        r
    }
}

/// One path: (log W, Q). The path index selects an independent ChaCha stream.
fn sample_path(cfg: &ForcedBurgersConfig, ints: &[f64], path: u64, x: f64, t: f64) -> Result<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(path);
    let k2 = 2.0 * cfg.kappa;
    let steps = ((t / cfg.h_t).ceil() as usize).max(1);
    let mut pos = x;
    let mut s = 0.0;
    let (mut f_int, mut pf_int) = (0.0, 0.0);
    for k in 0..steps {
        let ds = if k + 1 == steps { t - s } else { cfg.h_t };
        if let Some(fr) = &cfg.forcing {
            // left endpoint, reversed time
            let (fv, pv) = fr.eval(reduce(pos), t - s)?;
            f_int += ds * fv;
            pf_int += ds * pv;
        }
        let z: f64 = rng.sample(StandardNormal);
        pos += (k2 * ds).sqrt() * z;
        s += ds;
    }
    let end = reduce(pos);
    let u_end = cfg.u0.eval(end)?;
    let p0 = cfg.u0.integral_to(ints, end);
    let log_w = -(p0 + pf_int) / k2;
    let q = match cfg.estimator {
        Estimator::Direct => u_end + f_int,
        Estimator::ExpQuotient { h_x } => {
            let h_t = cfg.h_t;
            k2 * ((u_end / k2 * h_x).exp_m1() / h_x + (f_int / k2 * h_t).exp_m1() / h_t)
        }
    };
    Ok((log_w, q))
}

/// Ratio estimate of u(x*, t*) with its delta-method standard error.
pub fn forced_burgers_mc(cfg: &ForcedBurgersConfig, x_star: f64, t_star: f64) -> Result<McEstimate> {
    cfg.validate()?;
    if !(t_star > 0.0) || !t_star.is_finite() {
        return Err(param("t_star", t_star, "must be positive"));
    }
    let x = cfg.u0.grid().reduce(x_star)?;
    let ints = cfg.u0.node_integrals();
    let paths: Vec<Result<(f64, f64)>> = (0..cfg.path_count as u64)
        .into_par_iter()
        .map(|l| sample_path(cfg, &ints, l, x, t_star))
        .collect();
    let paths: Vec<(f64, f64)> = paths.into_iter().collect::<Result<_>>()?;
    let shift = paths.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = paths.iter().map(|p| (p.0 - shift).exp()).collect();
    let wq: Vec<f64> = w.iter().zip(&paths).map(|(w, p)| w * p.1).collect();
    let den = pairwise_sum(&w);
    if !(den > 0.0) || !den.is_finite() {
        return Err(Error::Internal(format!("path weight sum {den:e} not positive")));
    }
    let value = pairwise_sum(&wq) / den;
    let n = cfg.path_count as f64;
    let resid: Vec<f64> = w
        .iter()
        .zip(&paths)
        .map(|(w, p)| {
            let r = w * (p.1 - value);
            r * r
        })
        .collect();
    let mean_w = den / n;
    let std_error = (pairwise_sum(&resid) / (n * (n - 1.0))).sqrt() / mean_w;
    Ok(McEstimate { value, std_error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::burgers::{cole_hopf_exact, BurgersProblem1D};
    use crate::grid::Grid1D;
    use crate::interp::sample_input;
    use std::f64::consts::PI;

    fn sin_u0(m: usize) -> PiecewiseFunction {
        let g = Grid1D::uniform(-PI, PI, m, true).unwrap();
        sample_input(f64::sin, &g, Order::Linear).unwrap()
    }

    #[test]
    fn pairwise_sum_matches_naive() {
        let v: Vec<f64> = (0..1001).map(|k| k as f64).collect();
        assert_eq!(pairwise_sum(&v), 500500.0);
    }

    #[test]
    fn zero_data_is_zero() {
        let g = Grid1D::uniform(-PI, PI, 16, true).unwrap();
        let u0 = sample_input(|_| 0.0, &g, Order::Linear).unwrap();
        let r = forced_burgers_mc(&ForcedBurgersConfig::new(0.5, u0, 100, 0.05, 7), 0.3, 0.25).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.std_error, 0.0);
    }

    #[test]
    fn rejects_bad_config() {
        assert!(forced_burgers_mc(&ForcedBurgersConfig::new(0.5, sin_u0(16), 1, 0.05, 7), 0.0, 0.25).is_err());
        assert!(forced_burgers_mc(&ForcedBurgersConfig::new(0.5, sin_u0(16), 10, 0.0, 7), 0.0, 0.25).is_err());
    }

    #[test]
    fn reproducible_for_a_seed() {
        let c = ForcedBurgersConfig::new(0.5, sin_u0(32), 2000, 0.05, 11);
        let a = forced_burgers_mc(&c, 0.5, 0.25).unwrap();
        let b = forced_burgers_mc(&c, 0.5, 0.25).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unforced_agrees_with_cole_hopf() {
        let u0 = sin_u0(64);
        let p = BurgersProblem1D::new(0.5, u0.clone()).unwrap();
        let exact = cole_hopf_exact(&p, 0.5, 0.25, 2).unwrap();
        let r = forced_burgers_mc(&ForcedBurgersConfig::new(0.5, u0, 20_000, 0.25, 3), 0.5, 0.25).unwrap();
        assert!(
            (r.value - exact).abs() <= 4.0 * r.std_error,
            "{} {exact} {}",
            r.value,
            r.std_error
        );
    }

    #[test]
    fn quotient_form_close_to_direct() {
        let mut c = ForcedBurgersConfig::new(0.5, sin_u0(32), 5000, 0.01, 5);
        let g = c.u0.grid().clone();
        c = c.with_forcing(Forcing::stationary(&g, |x| 0.5 * x.sin()).unwrap());
        let d = forced_burgers_mc(&c, 0.5, 0.25).unwrap();
        c.estimator = Estimator::ExpQuotient { h_x: 1e-3 };
        let q = forced_burgers_mc(&c, 0.5, 0.25).unwrap();
        assert!((d.value - q.value).abs() < 2e-3, "{} {}", d.value, q.value);
    }

    #[test]
    fn stationary_forcing_balances_diffusion() {
        // u = a sin x with f = a kappa sin x + a^2 sin x cos x is steady
        let (a, kappa) = (0.4, 0.5);
        let g = Grid1D::uniform(-PI, PI, 256, true).unwrap();
        let u0 = sample_input(|x| a * x.sin(), &g, Order::Linear).unwrap();
        let f = Forcing::stationary(&g, |x| a * kappa * x.sin() + a * a * x.sin() * x.cos()).unwrap();
        let c = ForcedBurgersConfig::new(kappa, u0, 40_000, 0.005, 9).with_forcing(f);
        let r = forced_burgers_mc(&c, 1.0, 0.2).unwrap();
        let want = a * 1f64.sin();
        assert!(
            (r.value - want).abs() <= 4.0 * r.std_error + 0.01,
            "{} {want} {}",
            r.value,
            r.std_error
        );
    }
}
