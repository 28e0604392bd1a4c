//! Independent reference for periodic Burgers: the heat equation for v solved
//! exactly in Fourier space, then u = -2 kappa v_x / v.

use super::{BurgersProblem1D, ExactV0};
use crate::error::{param, Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

#[derive(Debug, Clone)]
pub struct SpectralColeHopf {
    kappa: f64,
    /// (k, v_hat_k) for |k| < modes / 2
    coeffs: Vec<(f64, Complex64)>,
}

impl SpectralColeHopf {
    /// Samples the exact v0 at `modes` equispaced points and transforms by a direct DFT.
    pub fn new(problem: &BurgersProblem1D, modes: usize) -> Result<Self> {
        if modes < 8 {
            return Err(param("modes", modes as f64, "must be at least 8"));
        }
        let v0 = ExactV0::new(problem);
        let n = modes;
        let xs: Vec<f64> = (0..n).map(|j| -PI + 2.0 * PI * j as f64 / n as f64).collect();
        let vals: Vec<f64> = xs.iter().map(|&x| v0.eval(x)).collect();
        // twiddle table e^{-2 pi i q / n}
        let tw: Vec<Complex64> = (0..n)
            .map(|q| Complex64::from_polar(1.0, -2.0 * PI * q as f64 / n as f64))
            .collect();
        let half = (n / 2) as i64;
        let mut coeffs = Vec::with_capacity(n);
        for k in (1 - half)..half {
            let kk = k.rem_euclid(n as i64) as usize;
            let mut c = Complex64::new(0.0, 0.0);
            for (j, &v) in vals.iter().enumerate() {
                c += v * tw[(kk * j) % n];
            }
            // samples start at -pi: shift the phase reference to x = 0
            let c = c / n as f64 * Complex64::from_polar(1.0, k as f64 * PI);
            coeffs.push((k as f64, c));
        }
        Ok(SpectralColeHopf {
            kappa: problem.kappa(),
            coeffs,
        })
    }

    pub fn eval(&self, x: f64, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(param("t", t, "must be positive"));
        }
        let (mut v, mut vx) = (0.0, 0.0);
        for &(k, c) in &self.coeffs {
            let decay = (-self.kappa * k * k * t).exp();
            if decay < 1e-300 {
                continue;
            }
            let e = c * Complex64::from_polar(decay, k * x);
            v += e.re;
            vx += (e * Complex64::new(0.0, k)).re;
        }
        if !(v > 0.0) {
            return Err(Error::Internal(format!("spectral v = {v:e} not positive")));
        }
        Ok(-2.0 * self.kappa * vx / v)
    }
}
