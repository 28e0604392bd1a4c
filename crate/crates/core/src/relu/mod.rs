//! Sparse feedforward ReLU networks: ReLU on every hidden layer, identity on
//! the output layer.

pub mod blessed;
pub mod gadgets;
pub mod trunks;

pub use blessed::{
    blessed_cascade_net, blessed_cascade_net_with, coefficient_vector, system_box, union_box, BlessedCascadeNet,
    BlessedOutput, Capacity,
};
pub use gadgets::{
    compile_rational_r, compile_rational_r_in, product_gadget, reciprocal_gadget, square_gadget, AffineForm, Gadget,
    Pair, RationalBox, StageBuilder,
};
pub use trunks::{fourier_trunk, hat_trunk, interpolant_net, linear_branch_net, p1_trunk_2d};

use crate::error::{Error, Result};
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// One affine map in compressed-row form.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<f64>,
    bias: Vec<f64>,
}

impl Layer {
    /// Duplicate (i, j) entries are summed, exact zeros dropped.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)], bias: Vec<f64>) -> Result<Self> {
        if bias.len() != rows {
            return Err(Error::Input(format!("bias length {} != rows {rows}", bias.len())));
        }
        let mut acc: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); rows];
        for &(i, j, w) in triplets {
            if i >= rows || j >= cols {
                return Err(Error::Input(format!("entry ({i}, {j}) outside {rows}x{cols}")));
            }
            if !w.is_finite() {
                return Err(Error::Input(format!("nonfinite weight at ({i}, {j})")));
            }
            *acc[i].entry(j).or_insert(0.0) += w;
        }
        Ok(Self::from_rows(cols, acc, bias))
    }

    fn from_rows(cols: usize, rows_map: Vec<BTreeMap<usize, f64>>, bias: Vec<f64>) -> Self {
        let mut row_ptr = Vec::with_capacity(rows_map.len() + 1);
        let mut col_idx = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for r in &rows_map {
            for (&j, &w) in r {
                if w != 0.0 {
                    col_idx.push(j);
                    vals.push(w);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Layer {
            rows: rows_map.len(),
            cols,
            row_ptr,
            col_idx,
            vals,
            bias,
        }
    }

    pub fn identity(dim: usize) -> Self {
        let t: Vec<(usize, usize, f64)> = (0..dim).map(|i| (i, i, 1.0)).collect();
        Self::from_triplets(dim, dim, &t, vec![0.0; dim]).unwrap()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()]
            .iter()
            .copied()
            .zip(self.vals[r].iter().copied())
    }

    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        (0..self.rows)
            .flat_map(|i| self.row(i).map(move |(j, w)| (i, j, w)))
            .collect()
    }

    fn apply(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for i in 0..self.rows {
            let mut s = self.bias[i];
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.col_idx[k]];
            }
            out.push(s);
        }
    }

    /// self applied after `inner`.
    fn after(&self, inner: &Layer) -> Layer {
        let mut rows_map = Vec::with_capacity(self.rows);
        let mut bias = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            let mut acc = BTreeMap::new();
            let mut b = self.bias[i];
            for (c, w) in self.row(i) {
                for (c2, w2) in inner.row(c) {
                    *acc.entry(c2).or_insert(0.0) += w * w2;
                }
                b += w * inner.bias[c];
            }
            rows_map.push(acc);
            bias.push(b);
        }
        Layer::from_rows(inner.cols, rows_map, bias)
    }
}

/// Layers L_1..L_{D+1}; ReLU after L_1..L_D.
#[derive(Debug, Clone, PartialEq)]
pub struct ReluNetwork {
    layers: Vec<Layer>,
}

/// Reusable buffers for repeated evaluation.
#[derive(Debug, Default, Clone)]
pub struct Scratch {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl ReluNetwork {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Input("network needs at least one layer".into()));
        }
        for (l, w) in layers.windows(2).enumerate() {
            if w[1].cols != w[0].rows {
                return Err(Error::Input(format!(
                    "layer {} expects {} inputs but layer {l} produces {}",
                    l + 1,
                    w[1].cols,
                    w[0].rows
                )));
            }
        }
        Ok(ReluNetwork { layers })
    }

    /// Depth-0 network x -> W x + b.
    pub fn affine(rows: usize, cols: usize, triplets: &[(usize, usize, f64)], bias: Vec<f64>) -> Result<Self> {
        Self::new(vec![Layer::from_triplets(rows, cols, triplets, bias)?])
    }

    /// Identity on `dim` values through `depth` hidden layers via x = ReLU(x) - ReLU(-x).
    pub fn identity(dim: usize, depth: usize) -> Self {
        if depth == 0 {
            return ReluNetwork {
                layers: vec![Layer::identity(dim)],
            };
        }
        let mut t = Vec::with_capacity(2 * dim);
        for i in 0..dim {
            t.push((2 * i, i, 1.0));
            t.push((2 * i + 1, i, -1.0));
        }
        let mut layers = vec![Layer::from_triplets(2 * dim, dim, &t, vec![0.0; 2 * dim]).unwrap()];
        for _ in 1..depth {
            layers.push(Layer::identity(2 * dim));
        }
        let t: Vec<(usize, usize, f64)> = t.into_iter().map(|(r, c, w)| (c, r, w)).collect();
        layers.push(Layer::from_triplets(dim, 2 * dim, &t, vec![0.0; dim]).unwrap());
        ReluNetwork { layers }
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].cols
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].rows
    }

    /// Number of hidden (ReLU) layers.
    pub fn depth(&self) -> usize {
        self.layers.len() - 1
    }

    /// Widest hidden layer.
    pub fn width(&self) -> usize {
        self.layers[..self.depth()].iter().map(|l| l.rows).max().unwrap_or(0)
    }

    /// Nonzero weights plus nonzero biases.
    pub fn size(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.nnz() + l.bias.iter().filter(|b| **b != 0.0).count())
            .sum()
    }

    pub fn evaluate(&self, input: &[f64]) -> Result<Vec<f64>> {
        let mut s = Scratch::default();
        self.evaluate_with(input, &mut s)?;
        Ok(s.a)
    }

    /// Single-output convenience.
    pub fn eval_scalar(&self, input: &[f64]) -> Result<f64> {
        let mut s = Scratch::default();
        Ok(self.evaluate_with(input, &mut s)?[0])
    }

    /// Result lives in the scratch buffer.
    pub fn evaluate_with<'s>(&self, input: &[f64], s: &'s mut Scratch) -> Result<&'s [f64]> {
        if input.len() != self.input_dim() {
            return Err(Error::Input(format!(
                "network expects {} inputs, got {}",
                self.input_dim(),
                input.len()
            )));
        }
        s.a.clear();
        s.a.extend_from_slice(input);
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            layer.apply(&s.a, &mut s.b);
            if l < last {
                for v in &mut s.b {
                    *v = v.max(0.0);
                }
            }
            if let Some(i) = s.b.iter().position(|v| !v.is_finite()) {
                return Err(Error::Evaluation {
                    at: format!("layer {l}, unit {i}"),
                    detail: "nonfinite intermediate".into(),
                });
            }
            std::mem::swap(&mut s.a, &mut s.b);
        }
        Ok(&s.a)
    }

    /// `next` applied to the output of `self`; the two affine maps at the seam are merged.
    pub fn then(&self, next: &ReluNetwork) -> Result<ReluNetwork> {
        if next.input_dim() != self.output_dim() {
            return Err(Error::Input(format!(
                "cannot feed {} outputs into {} inputs",
                self.output_dim(),
                next.input_dim()
            )));
        }
        let mut layers = self.layers[..self.layers.len() - 1].to_vec();
        layers.push(next.layers[0].after(&self.layers[self.layers.len() - 1]));
        layers.extend_from_slice(&next.layers[1..]);
        Ok(ReluNetwork { layers })
    }

    /// Pads with identity layers up to `depth`.
    pub fn with_depth(&self, depth: usize) -> ReluNetwork {
        if depth <= self.depth() {
            return self.clone();
        }
        self.then(&Self::identity(self.output_dim(), depth - self.depth()))
            .unwrap()
    }

    /// Side-by-side: inputs and outputs are concatenated in order.
    pub fn parallel(nets: &[ReluNetwork]) -> ReluNetwork {
        let depth = nets.iter().map(|n| n.depth()).max().unwrap_or(0);
        let padded: Vec<ReluNetwork> = nets.iter().map(|n| n.with_depth(depth)).collect();
        let mut layers = Vec::with_capacity(depth + 1);
        for l in 0..=depth {
            let mut t = Vec::new();
            let mut bias = Vec::new();
            let (mut r0, mut c0) = (0, 0);
            for n in &padded {
                let layer = &n.layers[l];
                t.extend(layer.triplets().into_iter().map(|(i, j, w)| (i + r0, j + c0, w)));
                bias.extend_from_slice(&layer.bias);
                r0 += layer.rows;
                c0 += layer.cols;
            }
            layers.push(Layer::from_triplets(r0, c0, &t, bias).unwrap());
        }
        ReluNetwork { layers }
    }

    /// Text form: `relu-net v1 <layers>`, then per layer `layer <rows> <cols> <nnz>`,
    /// nnz lines `i j w` and a line `b v_0 ... v_{rows-1}`.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        writeln!(s, "relu-net v1 {}", self.layers.len()).unwrap();
        for l in &self.layers {
            writeln!(s, "layer {} {} {}", l.rows, l.cols, l.nnz()).unwrap();
            for (i, j, w) in l.triplets() {
                writeln!(s, "{i} {j} {w:?}").unwrap();
            }
            s.push('b');
            for b in &l.bias {
                write!(s, " {b:?}").unwrap();
            }
            s.push('\n');
        }
        s
    }

    pub fn deserialize(text: &str) -> Result<Self> {
        let bad = |line: usize, what: &str| Error::Input(format!("relu-net line {}: {what}", line + 1));
        let mut lines = text.lines().enumerate();
        let (n0, header) = lines.next().ok_or_else(|| bad(0, "empty input"))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 3 || h[0] != "relu-net" || h[1] != "v1" {
            return Err(bad(n0, "expected `relu-net v1 <layers>`"));
        }
        let count: usize = h[2].parse().map_err(|_| bad(n0, "bad layer count"))?;
        let mut layers = Vec::with_capacity(count);
        for _ in 0..count {
            let (ln, line) = lines.next().ok_or_else(|| bad(0, "truncated"))?;
            let p: Vec<&str> = line.split_whitespace().collect();
            if p.len() != 4 || p[0] != "layer" {
                return Err(bad(ln, "expected `layer <rows> <cols> <nnz>`"));
            }
            let num = |s: &str| s.parse::<usize>().map_err(|_| bad(ln, "bad integer"));
            let (rows, cols, nnz) = (num(p[1])?, num(p[2])?, num(p[3])?);
            let mut t = Vec::with_capacity(nnz);
            for _ in 0..nnz {
                let (en, e) = lines.next().ok_or_else(|| bad(ln, "truncated entries"))?;
                let q: Vec<&str> = e.split_whitespace().collect();
                if q.len() != 3 {
                    return Err(bad(en, "expected `i j w`"));
                }
                let i = q[0].parse().map_err(|_| bad(en, "bad row"))?;
                let j = q[1].parse().map_err(|_| bad(en, "bad column"))?;
                let w = q[2].parse().map_err(|_| bad(en, "bad weight"))?;
                t.push((i, j, w));
            }
            let (bn, bl) = lines.next().ok_or_else(|| bad(ln, "missing bias line"))?;
            let mut it = bl.split_whitespace();
            if it.next() != Some("b") {
                return Err(bad(bn, "expected bias line"));
            }
            let bias: Vec<f64> = it
                .map(|v| v.parse::<f64>().map_err(|_| bad(bn, "bad bias")))
                .collect::<Result<_>>()?;
            layers.push(Layer::from_triplets(rows, cols, &t, bias)?);
        }
        Self::new(layers)
    }
}
