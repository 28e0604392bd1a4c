//! Symbolic shape of the discrete operator as a rational function of
//! v_i = exp(a_i h_i), used for network-size bookkeeping.

use super::AdvDiffProblem1D;
use crate::error::{Error, Result};
use std::collections::BTreeMap;

/// Sparse polynomial: exponent vector -> coefficient.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Polynomial {
    vars: usize,
    terms: BTreeMap<Vec<i16>, f64>,
}

impl Polynomial {
    pub fn zero(vars: usize) -> Self {
        Polynomial {
            vars,
            terms: BTreeMap::new(),
        }
    }

    /// c * prod_{lo <= l < hi} v_l
    pub fn monomial_range(vars: usize, c: f64, lo: usize, hi: usize) -> Self {
        let mut e = vec![0i16; vars];
        for x in &mut e[lo..hi] {
            *x = 1;
        }
        let mut p = Self::zero(vars);
        if c != 0.0 {
            p.terms.insert(e, c);
        }
        p
    }

    pub fn add_scaled(&mut self, other: &Polynomial, s: f64) {
        for (e, c) in &other.terms {
            *self.terms.entry(e.clone()).or_insert(0.0) += s * c;
        }
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = Self::zero(self.vars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<i16> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                *out.terms.entry(e).or_insert(0.0) += c1 * c2;
            }
        }
        out
    }

    /// Drop coefficients that cancelled to rounding level.
    pub fn prune(&mut self, scale: f64) {
        let tol = 1e-12 * scale;
        self.terms.retain(|_, c| c.abs() > tol);
    }

    pub fn max_coefficient(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn eval(&self, v: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c * e.iter().zip(v).map(|(&k, &x)| x.powi(k as i32)).product::<f64>())
            .sum()
    }

    pub fn stats(&self) -> PolyStats {
        let degree = self
            .terms
            .keys()
            .map(|e| e.iter().map(|&k| k as i64).sum::<i64>())
            .max()
            .unwrap_or(0);
        let variables = (0..self.vars).filter(|&l| self.terms.keys().any(|e| e[l] != 0)).count();
        PolyStats {
            degree,
            variables,
            terms: self.terms.len(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PolyStats {
    pub degree: i64,
    pub variables: usize,
    pub terms: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RationalFormStats {
    pub numerator: PolyStats,
    pub denominator: PolyStats,
    pub numerator_poly: Polynomial,
    pub denominator_poly: Polynomial,
}

/// A-N(1)(x_J) = sum_{k<J} h_k prod_{l<k} v_l.
fn weight_poly(p: &AdvDiffProblem1D, j: usize, f: &[f64]) -> (Polynomial, Polynomial) {
    let g = p.grid();
    let m = g.cells();
    let mut s = Polynomial::zero(m);
    let mut q = Polynomial::zero(m);
    for k in 0..j {
        let hk = g.width(k);
        s.add_scaled(&Polynomial::monomial_range(m, hk, 0, k), 1.0);
        // A-N(A+N f)(x_J) = sum_{i<k<J} h_k h_i f_i prod_{i<=l<k} v_l
        for i in 0..k {
            q.add_scaled(&Polynomial::monomial_range(m, hk * g.width(i) * f[i], i, k), 1.0);
        }
    }
    (s, q)
}

/// Numerator A-N(1)(x_J) Q(x_m) - A-N(1)(x_m) Q(x_J) and denominator A-N(1)(x_m)
/// of the discrete operator at node J, in the variables v_0..v_{m-1}.
pub fn rational_form_stats(problem: &AdvDiffProblem1D, node: usize) -> Result<RationalFormStats> {
    let g = problem.grid();
    let m = g.cells();
    if node > m {
        return Err(Error::Input(format!("node index {node} exceeds m = {m}")));
    }
    let f: Vec<f64> = (0..m).map(|k| (problem.source())(g.node(k))).collect();
    let (s_j, q_j) = weight_poly(problem, node, &f);
    let (s_m, q_m) = weight_poly(problem, m, &f);
    let mut num = s_j.mul(&q_m);
    let right = s_m.mul(&q_j);
    let scale = num.max_coefficient().max(right.max_coefficient());
    num.add_scaled(&right, -1.0);
    num.prune(scale);
    Ok(RationalFormStats {
        numerator: num.stats(),
        denominator: s_m.stats(),
        numerator_poly: num,
        denominator_poly: s_m,
    })
}
