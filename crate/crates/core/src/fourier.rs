//! Truncated Fourier series on [-pi, pi)^d and Bochner-Riesz means.

use crate::error::{param, Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct FourierExpansion {
    dim: usize,
    radius: f64,
    gamma: f64,
    /// (k, coefficient) with |k| <= radius, lexicographic in k. For d = 1 the second index is 0.
    modes: Vec<([i64; 2], Complex64)>,
}

fn lattice(dim: usize, radius: f64) -> Vec<[i64; 2]> {
    let kmax = radius.floor() as i64;
    let r2 = radius * radius;
    let mut out = Vec::new();
    for k1 in -kmax..=kmax {
        if dim == 1 {
            out.push([k1, 0]);
            continue;
        }
        for k2 in -kmax..=kmax {
            if ((k1 * k1 + k2 * k2) as f64) <= r2 {
                out.push([k1, k2]);
            }
        }
    }
    out
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 1 || dim == 2 {
        Ok(())
    } else {
        Err(Error::Input(format!("dimension {dim} not supported (1 or 2)")))
    }
}

impl FourierExpansion {
    /// Explicit coefficients; modes outside |k| <= radius are rejected.
    pub fn from_modes(dim: usize, radius: f64, modes: Vec<([i64; 2], Complex64)>) -> Result<Self> {
        check_dim(dim)?;
        if !(radius > 0.0) {
            return Err(param("R", radius, "must be positive"));
        }
        let mut full: Vec<([i64; 2], Complex64)> = lattice(dim, radius)
            .into_iter()
            .map(|k| (k, Complex64::new(0.0, 0.0)))
            .collect();
        for (k, c) in modes {
            match full.binary_search_by(|(q, _)| q.cmp(&k)) {
                Ok(i) => full[i].1 += c,
                Err(_) => return Err(Error::Input(format!("mode {k:?} outside radius {radius}"))),
            }
        }
        Ok(FourierExpansion {
            dim,
            radius,
            gamma: 0.0,
            modes: full,
        })
    }

    /// Coefficients of a 2pi-periodic callable by a plain DFT on an equispaced lattice.
    /// `samples` defaults to 4*ceil(R) per axis and is never allowed below it.
    pub fn from_callable_1d<F: Fn(f64) -> f64>(f: F, radius: f64, samples: Option<usize>) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(param("R", radius, "must be positive"));
        }
        let n = sample_count(radius, samples);
        let xs: Vec<f64> = (0..n).map(|j| -PI + 2.0 * PI * j as f64 / n as f64).collect();
        let vals: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        if let Some(j) = vals.iter().position(|v| !v.is_finite()) {
            return Err(Error::Evaluation {
                at: format!("x = {}", xs[j]),
                detail: "non-finite sample".into(),
            });
        }
        let modes = lattice(1, radius)
            .into_iter()
            .map(|k| {
                let c: Complex64 = xs
                    .iter()
                    .zip(&vals)
                    .map(|(&x, &v)| v * Complex64::from_polar(1.0, -(k[0] as f64) * x))
                    .sum();
                (k, c / n as f64)
            })
            .collect();
        Ok(FourierExpansion {
            dim: 1,
            radius,
            gamma: 0.0,
            modes,
        })
    }

    /// Separable 2D variant of [`from_callable_1d`](Self::from_callable_1d).
    pub fn from_callable_2d<F: Fn(f64, f64) -> f64>(f: F, radius: f64, samples: Option<usize>) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(param("R", radius, "must be positive"));
        }
        let n = sample_count(radius, samples);
        let kmax = radius.floor() as i64;
        let xs: Vec<f64> = (0..n).map(|j| -PI + 2.0 * PI * j as f64 / n as f64).collect();
        // partial[ix][k2] = (1/n) sum_iy f(x_ix, y_iy) e^{-i k2 y}
        let mut partial = vec![vec![Complex64::new(0.0, 0.0); (2 * kmax + 1) as usize]; n];
        for (ix, &x) in xs.iter().enumerate() {
            let row: Vec<f64> = xs.iter().map(|&y| f(x, y)).collect();
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::Evaluation {
                    at: format!("({x}, {})", xs[j]),
                    detail: "non-finite sample".into(),
                });
            }
            for k2 in -kmax..=kmax {
                let c: Complex64 = xs
                    .iter()
                    .zip(&row)
                    .map(|(&y, &v)| v * Complex64::from_polar(1.0, -(k2 as f64) * y))
                    .sum();
                partial[ix][(k2 + kmax) as usize] = c / n as f64;
            }
        }
        let modes = lattice(2, radius)
            .into_iter()
            .map(|k| {
                let c: Complex64 = xs
                    .iter()
                    .enumerate()
                    .map(|(ix, &x)| {
                        partial[ix][(k[1] + kmax) as usize] * Complex64::from_polar(1.0, -(k[0] as f64) * x)
                    })
                    .sum();
                (k, c / n as f64)
            })
            .collect();
        Ok(FourierExpansion {
            dim: 2,
            radius,
            gamma: 0.0,
            modes,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn modes(&self) -> &[([i64; 2], Complex64)] {
        &self.modes
    }

    pub fn coefficient(&self, k: [i64; 2]) -> Complex64 {
        match self.modes.binary_search_by(|(q, _)| q.cmp(&k)) {
            Ok(i) => self.modes[i].1,
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> Complex64 {
        self.modes
            .iter()
            .map(|(k, c)| c * Complex64::from_polar(1.0, k[0] as f64 * x + k[1] as f64 * y))
            .sum()
    }

    pub fn eval_real(&self, x: f64) -> f64 {
        self.eval(x, 0.0).re
    }

    /// Largest |c_k - conj(c_{-k})|; zero for a real function.
    pub fn conjugate_asymmetry(&self) -> f64 {
        self.modes
            .iter()
            .map(|(k, c)| (c - self.coefficient([-k[0], -k[1]]).conj()).norm())
            .fold(0.0, f64::max)
    }
}

fn sample_count(radius: f64, samples: Option<usize>) -> usize {
    let min = 4 * radius.ceil() as usize;
    samples.unwrap_or(min).max(min).max(1)
}

/// Bochner-Riesz mean: c_k (1 - |k|^2/R^2)^gamma for |k| <= R, zero beyond.
pub fn bochner_riesz(f: &FourierExpansion, radius: f64, gamma: f64) -> Result<FourierExpansion> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(param("R", radius, "must be positive"));
    }
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(param("gamma", gamma, "must be non-negative"));
    }
    let r2 = radius * radius;
    let modes = lattice(f.dim, radius)
        .into_iter()
        .map(|k| {
            let k2 = (k[0] * k[0] + k[1] * k[1]) as f64;
            let w = (1.0 - k2 / r2).powf(gamma);
            (k, f.coefficient(k) * w)
        })
        .collect();
    Ok(FourierExpansion {
        dim: f.dim,
        radius,
        gamma,
        modes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_mode() -> FourierExpansion {
        FourierExpansion::from_modes(1, 5.0, vec![([3, 0], Complex64::new(1.0, 0.0))]).unwrap()
    }

    #[test]
    fn damping_of_a_single_mode() {
        let f = single_mode();
        let g0 = bochner_riesz(&f, 5.0, 0.0).unwrap();
        assert_eq!(g0.coefficient([3, 0]), Complex64::new(1.0, 0.0));
        let g1 = bochner_riesz(&f, 5.0, 1.0).unwrap();
        assert!((g1.coefficient([3, 0]).re - 0.64).abs() < 1e-15);
        assert_eq!(g1.modes().len(), 11);
        assert!(bochner_riesz(&f, 0.0, 1.0).is_err());
    }

    #[test]
    fn idempotent_projection_at_gamma_zero() {
        let f = FourierExpansion::from_callable_1d(|x| x.sin().abs(), 12.0, None).unwrap();
        let once = bochner_riesz(&f, 7.5, 0.0).unwrap();
        let twice = bochner_riesz(&once, 7.5, 0.0).unwrap();
        for ((_, a), (_, b)) in once.modes().iter().zip(twice.modes()) {
            assert!((a - b).norm() <= 1e-14);
        }
    }

    #[test]
    fn sampled_coefficients_of_trig_polynomial() {
        let f = FourierExpansion::from_callable_1d(|x| 1.0 + 2.0 * (2.0 * x).cos(), 3.0, None).unwrap();
        assert!((f.coefficient([0, 0]).re - 1.0).abs() < 1e-14);
        assert!((f.coefficient([2, 0]).re - 1.0).abs() < 1e-14);
        assert!((f.coefficient([-2, 0]).re - 1.0).abs() < 1e-14);
        assert!(f.coefficient([1, 0]).norm() < 1e-14);
        assert!(f.conjugate_asymmetry() < 1e-14);
        assert!((f.eval_real(0.3) - (1.0 + 2.0 * 0.6f64.cos())).abs() < 1e-13);
    }

    #[test]
    fn two_dimensional_lattice_and_sampling() {
        let f = FourierExpansion::from_callable_2d(|x, y| (x + 2.0 * y).cos(), 3.0, None).unwrap();
        assert_eq!(f.modes().len(), 29);
        assert!((f.coefficient([1, 2]).re - 0.5).abs() < 1e-14);
        assert!((f.eval(0.2, -0.4).re - (0.2f64 - 0.8).cos()).abs() < 1e-13);
        let g = bochner_riesz(&f, 3.0, 1.0).unwrap();
        assert!((g.coefficient([1, 2]).re - 0.5 * (1.0 - 5.0 / 9.0)).abs() < 1e-14);
    }
}
