//! Constructive approximation gadgets: x^2 by sawtooth composition, xy through
//! squares, 1/(1+z) by unrolled Newton steps, and the five-input rational map of
//! one Sherman-Morrison entry update built from them.

use super::{Layer, ReluNetwork};
use crate::error::{param, Error, Result};

/// Newton steps used by the reciprocal.
pub const NEWTON_STEPS: usize = 5;

/// A network together with the input box on which its error bound holds.
#[derive(Debug, Clone, PartialEq)]
pub struct Gadget {
    pub net: ReluNetwork,
    /// [lo, hi] per input
    pub domain: Vec<(f64, f64)>,
    /// a priori max error on the domain
    pub error_bound: f64,
    /// sawtooth depth of the inner square gadgets
    pub k: usize,
}

impl Gadget {
    pub fn check(&self, input: &[f64]) -> Result<()> {
        if input.len() != self.domain.len() {
            return Err(Error::Input(format!(
                "gadget expects {} inputs, got {}",
                self.domain.len(),
                input.len()
            )));
        }
        for (l, (&x, &(lo, hi))) in input.iter().zip(&self.domain).enumerate() {
            if !(x >= lo && x <= hi) {
                return Err(Error::Input(format!("input {l} = {x} outside [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    pub fn eval(&self, input: &[f64]) -> Result<f64> {
        self.check(input)?;
        self.net.eval_scalar(input)
    }
}

/// Piecewise-linear interpolant of x^2 at the dyadic points j 2^-k of [0, 1]:
/// f_k(x) = x - sum_{s=1..k} g_s(x) / 4^s with g_s the s-fold tooth map.
/// Width 3, depth k, max error 2^(-2k-2).
pub fn square_gadget(k: usize) -> Result<ReluNetwork> {
    if k == 0 {
        return Err(param("k", 0.0, "must be at least 1"));
    }
    // hidden units per layer: ReLU(y), ReLU(y - 1/2), ReLU(acc)
    let first = Layer::from_triplets(3, 1, &[(0, 0, 1.0), (1, 0, 1.0), (2, 0, 1.0)], vec![0.0, -0.5, 0.0])?;
    let mut layers = vec![first];
    for s in 1..=k {
        // g_s = 2 a - 4 b, acc_s = c - g_s / 4^s
        let q = 0.25f64.powi(s as i32);
        if s < k {
            let t = [
                (0, 0, 2.0),
                (0, 1, -4.0),
                (1, 0, 2.0),
                (1, 1, -4.0),
                (2, 2, 1.0),
                (2, 0, -2.0 * q),
                (2, 1, 4.0 * q),
            ];
            layers.push(Layer::from_triplets(3, 3, &t, vec![0.0, -0.5, 0.0])?);
        } else {
            let t = [(0, 2, 1.0), (0, 0, -2.0 * q), (0, 1, 4.0 * q)];
            layers.push(Layer::from_triplets(1, 3, &t, vec![0.0])?);
        }
    }
    ReluNetwork::new(layers)
}

pub fn square_error_bound(k: usize) -> f64 {
    0.25f64.powi(k as i32 + 1)
}

/// xy = f(|x+y|/2) - f(|x-y|/2) on [-1, 1]^2, depth k + 1. Both square errors
/// have the same sign, so they partly cancel and the error stays unbiased.
pub fn product_net(k: usize) -> Result<ReluNetwork> {
    let sq = square_gadget(k)?;
    // hidden: ReLU(+-(x+y)/2), ReLU(+-(x-y)/2)
    let t = [
        (0, 0, 0.5),
        (0, 1, 0.5),
        (1, 0, -0.5),
        (1, 1, -0.5),
        (2, 0, 0.5),
        (2, 1, -0.5),
        (3, 0, -0.5),
        (3, 1, 0.5),
    ];
    let abs = ReluNetwork::new(vec![
        Layer::from_triplets(4, 2, &t, vec![0.0; 4])?,
        Layer::from_triplets(
            2,
            4,
            &[(0, 0, 1.0), (0, 1, 1.0), (1, 2, 1.0), (1, 3, 1.0)],
            vec![0.0; 2],
        )?,
    ])?;
    let combine = ReluNetwork::affine(1, 2, &[(0, 0, 1.0), (0, 1, -1.0)], vec![0.0])?;
    abs.then(&ReluNetwork::parallel(&[sq.clone(), sq]))?.then(&combine)
}

pub fn product_error_bound(k: usize) -> f64 {
    2.0 * square_error_bound(k)
}

pub fn product_gadget(k: usize) -> Result<Gadget> {
    Ok(Gadget {
        net: product_net(k)?,
        domain: vec![(-1.0, 1.0); 2],
        error_bound: product_error_bound(k),
        k,
    })
}

/// sum_l c_l s_l + c over the current state.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AffineForm {
    pub terms: Vec<(usize, f64)>,
    pub c: f64,
}

impl AffineForm {
    pub fn var(i: usize) -> Self {
        AffineForm {
            terms: vec![(i, 1.0)],
            c: 0.0,
        }
    }

    pub fn new(terms: Vec<(usize, f64)>, c: f64) -> Self {
        AffineForm { terms, c }
    }

    pub fn scaled(&self, s: f64) -> Self {
        AffineForm {
            terms: self.terms.iter().map(|&(i, w)| (i, w * s)).collect(),
            c: self.c * s,
        }
    }
}

/// scale * x * y with x, y expected in [-1, 1].
#[derive(Debug, Clone)]
pub struct Pair {
    pub x: AffineForm,
    pub y: AffineForm,
    pub scale: f64,
}

/// Builds a network as a sequence of stages over a state vector. Each stage
/// passes some affine forms of the state through unchanged and appends scaled
/// products of pairs of affine forms; all stages have depth k + 1.
#[derive(Debug, Clone)]
pub struct StageBuilder {
    net: ReluNetwork,
    k: usize,
    product: ReluNetwork,
}

impl StageBuilder {
    pub fn new(inputs: usize, k: usize) -> Result<Self> {
        Ok(StageBuilder {
            net: ReluNetwork::identity(inputs, 0),
            k,
            product: product_net(k)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.net.output_dim()
    }

    /// New state: `carry` values, then one entry per pair.
    pub fn stage(&mut self, carry: &[AffineForm], pairs: &[Pair]) -> Result<()> {
        let dim = self.dim();
        let rows = carry.len() + 2 * pairs.len();
        let mut t = Vec::new();
        let mut b = Vec::with_capacity(rows);
        let forms = carry.iter().chain(pairs.iter().flat_map(|p| [&p.x, &p.y]));
        for (r, f) in forms.enumerate() {
            for &(i, w) in &f.terms {
                if i >= dim {
                    return Err(Error::Internal(format!("state index {i} >= {dim}")));
                }
                t.push((r, i, w));
            }
            b.push(f.c);
        }
        let select = ReluNetwork::affine(rows, dim, &t, b)?;
        let mut parts = vec![ReluNetwork::identity(carry.len(), self.k + 1)];
        parts.extend(std::iter::repeat_n(self.product.clone(), pairs.len()));
        let out = carry.len() + pairs.len();
        let t: Vec<_> = (0..out)
            .map(|r| {
                (
                    r,
                    r,
                    if r < carry.len() {
                        1.0
                    } else {
                        pairs[r - carry.len()].scale
                    },
                )
            })
            .collect();
        let scale = ReluNetwork::affine(out, out, &t, vec![0.0; out])?;
        self.net = self
            .net
            .then(&select)?
            .then(&ReluNetwork::parallel(&parts))?
            .then(&scale)?;
        Ok(())
    }

    pub fn finish(self, outputs: &[AffineForm]) -> Result<ReluNetwork> {
        let dim = self.dim();
        let mut t = Vec::new();
        for (r, f) in outputs.iter().enumerate() {
            for &(i, w) in &f.terms {
                t.push((r, i, w));
            }
        }
        let b = outputs.iter().map(|f| f.c).collect();
        self.net.then(&ReluNetwork::affine(outputs.len(), dim, &t, b)?)
    }
}

/// Appends Newton steps 2..=n for t ~ 1/(1+z), starting from t_1 = 1 - z.
/// `keep` are carried along; returns the forms of (keep..., t) in the final state.
/// Extra pairs are multiplied in the first stage and land after t's helper.
fn newton_stages(
    b: &mut StageBuilder,
    z: AffineForm,
    keep: Vec<AffineForm>,
    first_extra: Vec<Pair>,
    n: usize,
) -> Result<(Vec<AffineForm>, AffineForm)> {
    let mut t = AffineForm::new(z.terms.iter().map(|&(i, w)| (i, -w)).collect(), 1.0 - z.c);
    let mut z = z;
    let mut keep = keep;
    let mut extra = first_extra;
    for _ in 2..=n {
        // stage A: state = [keep..., z, t, extras..., q] with q = (1+z) t
        let mut carry = keep.clone();
        carry.push(z.clone());
        carry.push(t.clone());
        let zp1 = AffineForm::new(z.terms.clone(), z.c + 1.0).scaled(0.5);
        let mut pairs = std::mem::take(&mut extra);
        let n_extra = pairs.len();
        pairs.push(Pair {
            x: zp1,
            y: t.scaled(0.5),
            scale: 4.0,
        });
        b.stage(&carry, &pairs)?;
        let nk = keep.len();
        let q = AffineForm::var(nk + 2 + n_extra);
        let t_a = AffineForm::var(nk + 1);
        // stage B: state = [keep..., extras..., z, t (2 - q)]
        let mut carry: Vec<AffineForm> = (0..nk).map(AffineForm::var).collect();
        carry.extend((0..n_extra).map(|e| AffineForm::var(nk + 2 + e)));
        carry.push(AffineForm::var(nk));
        let two_minus_q = AffineForm::new(vec![(q.terms[0].0, -0.5)], 1.0);
        b.stage(
            &carry,
            &[Pair {
                x: t_a.scaled(0.5),
                y: two_minus_q,
                scale: 4.0,
            }],
        )?;
        keep = (0..nk + n_extra).map(AffineForm::var).collect();
        z = AffineForm::var(nk + n_extra);
        t = AffineForm::var(nk + n_extra + 1);
    }
    keep.push(z);
    Ok((keep, t))
}

fn reciprocal_bound(k: usize, n: usize, z_max: f64) -> f64 {
    let newton = z_max.powi(1 << n.min(20)) / (1.0 - z_max);
    // per step: the error of q = (1+z) t (scale 4) amplified by t <= 2, plus that of t (2 - q)
    let step = 12.0 * product_error_bound(k);
    newton + if n >= 2 { 2.0 * step } else { 0.0 }
}

/// 1/(1+z) for |z| <= z_max <= 1/2 by n Newton steps from t = 1.
pub fn reciprocal_gadget_with(k: usize, n: usize, z_max: f64) -> Result<Gadget> {
    if !(z_max > 0.0 && z_max <= 0.5) {
        return Err(param("z_max", z_max, "must lie in (0, 1/2]"));
    }
    if n == 0 {
        return Err(param("n", 0.0, "needs at least one Newton step"));
    }
    let mut b = StageBuilder::new(1, k)?;
    let (_, t) = newton_stages(&mut b, AffineForm::var(0), vec![], vec![], n)?;
    Ok(Gadget {
        net: b.finish(&[t])?,
        domain: vec![(-z_max, z_max)],
        error_bound: reciprocal_bound(k, n, z_max),
        k,
    })
}

pub fn reciprocal_gadget(k: usize, z_max: f64) -> Result<Gadget> {
    reciprocal_gadget_with(k, NEWTON_STEPS, z_max)
}

/// Input box for the rational map: |x1| <= x1, |x2..x5| <= t, with x1 t <= 1/2
/// so the reciprocal argument stays in its range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RationalBox {
    pub x1: f64,
    pub t: f64,
}

impl Default for RationalBox {
    fn default() -> Self {
        RationalBox { x1: 0.25, t: 1.0 }
    }
}

impl RationalBox {
    pub fn validate(&self) -> Result<()> {
        if !(self.x1 > 0.0 && self.x1.is_finite()) {
            return Err(param("x1 bound", self.x1, "must be positive and finite"));
        }
        if !(self.t > 0.0 && self.t.is_finite()) {
            return Err(param("entry bound", self.t, "must be positive and finite"));
        }
        if self.x1 * self.t > 0.5 {
            return Err(param("x1 bound * entry bound", self.x1 * self.t, "must not exceed 1/2"));
        }
        Ok(())
    }

    pub fn domain(&self) -> Vec<(f64, f64)> {
        let mut d = vec![(-self.x1, self.x1)];
        d.extend([(-self.t, self.t); 4]);
        d
    }
}

fn pow2_ceil(x: f64) -> f64 {
    2f64.powi(x.log2().ceil() as i32)
}

/// A priori error of the compiled map at sawtooth depth k.
pub fn rational_error_bound(k: usize, n: usize, b: &RationalBox) -> f64 {
    let e = product_error_bound(k);
    let (a, t) = (b.x1, b.t);
    let (sa, st) = (pow2_ceil(a), pow2_ceil(t));
    let dp = e * sa * st;
    let dq = e * st * st;
    let dw = e * 2.0 * sa * st * st + a * dq;
    let z_max = (a * t + dp).min(0.5);
    let dr = 4.0 * dp + reciprocal_bound(k, n, z_max);
    let w = a * t * t + dw;
    let r = 1.0 / (1.0 - z_max) + dr;
    e * 4.0 * sa * st * st + r * dw + w * dr
}

/// Network for x2 - x1 x4 x5 / (1 + x1 x3) on the box, with max error <= epsilon.
/// Four products and one reciprocal; the sawtooth depth is the smallest k whose
/// a priori bound meets epsilon.
pub fn compile_rational_r_in(epsilon: f64, rbox: RationalBox) -> Result<Gadget> {
    if !(epsilon > 1e-8 && epsilon < 1e-1) {
        return Err(param("epsilon", epsilon, "must lie in (1e-8, 1e-1)"));
    }
    rbox.validate()?;
    let n = NEWTON_STEPS;
    let k = (1..=30)
        .find(|&k| rational_error_bound(k, n, &rbox) <= epsilon)
        .ok_or_else(|| Error::Internal("no sawtooth depth meets the requested accuracy".into()))?;
    let (sa, st) = (pow2_ceil(rbox.x1), pow2_ceil(rbox.t));
    let v = AffineForm::var;
    let mut b = StageBuilder::new(5, k)?;
    // [x1, x2, p = x1 x3, q = x4 x5]
    b.stage(
        &[v(0), v(1)],
        &[
            Pair {
                x: v(0).scaled(1.0 / sa),
                y: v(2).scaled(1.0 / st),
                scale: sa * st,
            },
            Pair {
                x: v(3).scaled(1.0 / st),
                y: v(4).scaled(1.0 / st),
                scale: st * st,
            },
        ],
    )?;
    // w = x1 q rides along the first Newton stage
    let w_pair = Pair {
        x: v(0).scaled(1.0 / sa),
        y: v(3).scaled(0.5 / (st * st)),
        scale: 2.0 * sa * st * st,
    };
    let (kept, r) = newton_stages(&mut b, v(2), vec![v(1)], vec![w_pair], n)?;
    // kept = [x2, w, p]
    let ws = 2.0 * sa * st * st;
    b.stage(
        &[kept[0].clone()],
        &[Pair {
            x: kept[1].scaled(1.0 / ws),
            y: r.scaled(0.5),
            scale: 2.0 * ws,
        }],
    )?;
    let out = AffineForm::new(vec![(0, 1.0), (1, -1.0)], 0.0);
    Ok(Gadget {
        net: b.finish(&[out])?,
        domain: rbox.domain(),
        error_bound: rational_error_bound(k, n, &rbox),
        k,
    })
}

pub fn compile_rational_r(epsilon: f64) -> Result<Gadget> {
    compile_rational_r_in(epsilon, RationalBox::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::rational_r;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lattice_error(net: &ReluNetwork, f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
        (0..=n)
            .map(|s| {
                let x = lo + (hi - lo) * s as f64 / n as f64;
                (net.eval_scalar(&[x]).unwrap() - f(x)).abs()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn square_examples() {
        let s1 = square_gadget(1).unwrap();
        assert_eq!(s1.eval_scalar(&[0.5]).unwrap(), 0.25);
        for k in [1, 3, 8] {
            let s = square_gadget(k).unwrap();
            assert_eq!(s.eval_scalar(&[0.0]).unwrap(), 0.0);
            assert_eq!(s.eval_scalar(&[1.0]).unwrap(), 1.0);
            assert_eq!((s.width(), s.depth()), (3, k));
        }
        assert!(square_gadget(0).is_err());
    }

    #[test]
    fn square_error_is_sharp() {
        let mut prev: Option<f64> = None;
        for k in [2, 4, 6, 8] {
            let err = lattice_error(&square_gadget(k).unwrap(), |x| x * x, 0.0, 1.0, 1 << 14);
            assert!(err <= square_error_bound(k) * (1.0 + 1e-12));
            assert!(err >= 0.99 * square_error_bound(k));
            if let Some(p) = prev {
                assert!((p / err - 16.0).abs() < 0.1);
            }
            prev = Some(err);
        }
    }

    #[test]
    fn product_examples() {
        let g = product_gadget(8).unwrap();
        assert!((g.eval(&[0.5, 0.5]).unwrap() - 0.25).abs() <= g.error_bound);
        assert!(g.eval(&[1.5, 0.0]).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..2000 {
            let (x, y) = (rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0));
            assert!((g.eval(&[x, y]).unwrap() - x * y).abs() <= g.error_bound * (1.0 + 1e-9));
        }
    }

    #[test]
    fn reciprocal_examples() {
        let g = reciprocal_gadget(10, 0.5).unwrap();
        assert!((g.eval(&[0.0]).unwrap() - 1.0).abs() <= 1e-10);
        let g = reciprocal_gadget(12, 0.45).unwrap();
        let mut worst = 0.0f64;
        for s in 0..=1000 {
            let z = -0.45 + 0.9 * s as f64 / 1000.0;
            worst = worst.max((g.eval(&[z]).unwrap() - 1.0 / (1.0 + z)).abs());
        }
        assert!(worst <= 1e-6, "{worst}");
        assert!(worst <= g.error_bound);
        assert!(g.eval(&[0.46]).is_err());
        assert!(reciprocal_gadget(4, 0.6).is_err());
        // pure Newton error at n = 2: z^4 / (1 + z)
        let g = reciprocal_gadget_with(20, 2, 0.5).unwrap();
        let z: f64 = 0.5;
        assert!((g.eval(&[z]).unwrap() - (1.0 - z.powi(4)) / (1.0 + z)).abs() < 1e-9);
    }

    fn sample(rng: &mut ChaCha8Rng, b: &RationalBox) -> [f64; 5] {
        [
            rng.random_range(-b.x1..=b.x1),
            rng.random_range(-b.t..=b.t),
            rng.random_range(-b.t..=b.t),
            rng.random_range(-b.t..=b.t),
            rng.random_range(-b.t..=b.t),
        ]
    }

    #[test]
    fn compiled_rational_meets_epsilon() {
        let b = RationalBox::default();
        let g = compile_rational_r(1e-4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20_000 {
            let x = sample(&mut rng, &b);
            let exact = rational_r(x[0], x[1], x[2], x[3], x[4]).unwrap();
            assert!((g.eval(&x).unwrap() - exact).abs() <= 1e-4);
        }
        let x0 = [0.0, 0.3, -0.7, 0.9, 0.2];
        assert!((g.eval(&x0).unwrap() - 0.3).abs() <= 1e-4);
        assert!(compile_rational_r(0.5).is_err());
        assert!(compile_rational_r_in(1e-3, RationalBox { x1: 1.0, t: 1.0 }).is_err());
    }

    #[test]
    fn compiled_size_grows_slowly() {
        let s: Vec<usize> = [1e-2, 1e-4, 1e-6]
            .iter()
            .map(|&e| compile_rational_r(e).unwrap().net.size())
            .collect();
        assert!(s[0] < s[1] && s[1] < s[2]);
        assert!(s[1] <= 8 * s[0] && s[2] <= 8 * s[1]);
    }

    #[test]
    fn stage_builder_products() {
        let mut b = StageBuilder::new(3, 10).unwrap();
        let v = AffineForm::var;
        b.stage(
            &[v(2)],
            &[Pair {
                x: v(0),
                y: v(1),
                scale: 1.0,
            }],
        )
        .unwrap();
        let net = b.finish(&[v(0), v(1)]).unwrap();
        let out = net.evaluate(&[0.5, -0.5, 7.0]).unwrap();
        assert_eq!(out[0], 7.0);
        assert!((out[1] + 0.25).abs() < 1e-6);
    }
}
