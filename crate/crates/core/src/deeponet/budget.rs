//! A priori error budget for a branch x trunk approximation built from m input
//! samples and p terms: interpolation C h^alpha, output smoothness C w2(p^(-1/d)),
//! branch-network C p sqrt(m) (N L)^(-2 alpha / m) and trunk-network
//! C p exp(-|theta|^(1/(1+d))). For planning and plots only.

use crate::error::{param, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetParams {
    /// input samples
    pub m: f64,
    /// branch x trunk terms
    pub p: f64,
    /// output dimension
    pub d: f64,
    /// Hoelder exponent of the operator, in (0, 1]
    pub alpha: f64,
    /// input mesh size; `None` means m^(-1/d)
    pub h: Option<f64>,
    /// w2 of the output at scale p^(-1/d), supplied by the caller
    pub omega2: f64,
    /// branch width N and depth L
    pub width: f64,
    pub depth: f64,
    /// trunk size |theta|
    pub trunk_size: f64,
    pub c: f64,
}

impl BudgetParams {
    pub fn new(m: f64, p: f64, d: f64, alpha: f64) -> Self {
        BudgetParams {
            m,
            p,
            d,
            alpha,
            h: None,
            omega2: 0.0,
            width: f64::INFINITY,
            depth: f64::INFINITY,
            trunk_size: f64::INFINITY,
            c: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetTerms {
    pub interpolation: f64,
    pub smoothness: f64,
    pub branch: f64,
    pub trunk: f64,
}

impl BudgetTerms {
    pub fn total(&self) -> f64 {
        self.interpolation + self.smoothness + self.branch + self.trunk
    }

    pub fn max_term(&self) -> f64 {
        self.interpolation.max(self.smoothness).max(self.branch).max(self.trunk)
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && !v.is_nan() {
        Ok(())
    } else {
        Err(param(name, v, "must be positive"))
    }
}

pub fn error_budget_terms(b: &BudgetParams) -> Result<BudgetTerms> {
    if !(b.alpha > 0.0 && b.alpha <= 1.0) {
        return Err(param("alpha", b.alpha, "must lie in (0, 1]"));
    }
    for (n, v) in [
        ("m", b.m),
        ("p", b.p),
        ("d", b.d),
        ("N", b.width),
        ("L", b.depth),
        ("|theta|", b.trunk_size),
        ("C", b.c),
    ] {
        positive(n, v)?;
    }
    if let Some(h) = b.h {
        positive("h", h)?;
    }
    if !(b.omega2 >= 0.0) {
        return Err(param("omega2", b.omega2, "must be non-negative"));
    }
    let h = b.h.unwrap_or_else(|| b.m.powf(-1.0 / b.d));
    let nl = b.width * b.depth;
    Ok(BudgetTerms {
        interpolation: b.c * h.powf(b.alpha),
        smoothness: b.c * b.omega2,
        branch: b.c * b.p * b.m.sqrt() * nl.powf(-2.0 * b.alpha / b.m),
        trunk: b.c * b.p * (-b.trunk_size.powf(1.0 / (1.0 + b.d))).exp(),
    })
}

pub fn error_budget(b: &BudgetParams) -> Result<f64> {
    Ok(error_budget_terms(b)?.total())
}

/// Parameter choice for target accuracy eps: m = eps^(-d/alpha), p = eps^(-d/2),
/// N L = eps^(-d/eps) and |theta| = ((d + 2)/2 ln(1/eps))^(d+1). `omega2` at scale
/// p^(-1/d) comes from the caller, who knows the output smoothness.
pub fn parameters_for_accuracy(eps: f64, d: f64, alpha: f64, omega2: impl Fn(f64) -> f64) -> Result<BudgetParams> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(param("epsilon", eps, "must lie in (0, 1)"));
    }
    let m = eps.powf(-d / alpha);
    let p = eps.powf(-d / 2.0);
    let nl = eps.powf(-d / eps);
    Ok(BudgetParams {
        m,
        p,
        d,
        alpha,
        h: Some(m.powf(-1.0 / d)),
        omega2: omega2(p.powf(-1.0 / d)),
        width: nl,
        depth: 1.0,
        trunk_size: ((d + 2.0) / 2.0 * (1.0 / eps).ln()).powf(d + 1.0),
        c: 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn network_terms_vanish_in_the_limit() {
        let mut b = BudgetParams::new(1.0, 4.0, 1.0, 1.0);
        b.h = Some(0.1);
        b.omega2 = 0.03;
        let t = error_budget_terms(&b).unwrap();
        assert_eq!((t.branch, t.trunk), (0.0, 0.0));
        assert!((error_budget(&b).unwrap() - 0.13).abs() < 1e-15);
    }

    #[test]
    fn trunk_term_decreases_with_size() {
        let mut b = BudgetParams::new(16.0, 8.0, 1.0, 0.5);
        let mut prev = f64::INFINITY;
        for s in [1.0, 2.0, 4.0, 8.0, 16.0, 32.0] {
            b.trunk_size = s;
            let t = error_budget_terms(&b).unwrap().trunk;
            assert!(t < prev);
            prev = t;
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        for alpha in [0.0, 1.5, -1.0, f64::NAN] {
            assert!(error_budget(&BudgetParams::new(4.0, 4.0, 1.0, alpha)).is_err());
        }
        assert!(error_budget(&BudgetParams::new(0.0, 4.0, 1.0, 1.0)).is_err());
        let mut b = BudgetParams::new(4.0, 4.0, 1.0, 1.0);
        b.omega2 = -1.0;
        assert!(error_budget(&b).is_err());
    }

    #[test]
    fn accuracy_choice_meets_each_term() {
        // w2(t) <= t^2 for an output with |f''| <= 1
        let eps = 0.1;
        let b = parameters_for_accuracy(eps, 1.0, 1.0, |t| t * t).unwrap();
        let t = error_budget_terms(&b).unwrap();
        for v in [t.interpolation, t.smoothness, t.branch, t.trunk] {
            assert!(v <= eps * (1.0 + 1e-12), "{t:?}");
        }
    }
}
