//! Branch x trunk sums G_N(u)(y) = sum_k b_k(u_m) tau_k(y) assembled from the
//! constructive pieces, their evaluation, and operator-level error measurement.

pub mod bochner;
pub mod budget;
pub mod family;
pub mod problems;

pub use bochner::{assemble_bochner_riesz_deeponet, projection_matrix};
pub use budget::{error_budget, error_budget_terms, parameters_for_accuracy, BudgetParams, BudgetTerms};
pub use family::{InputFamily, Layout};

use crate::error::{Error, Result};
use crate::grid::{Grid1D, Grid2D};
use crate::norms::ErrorDomain;
use crate::quadrature::GaussLegendre;
use crate::relu::{hat_trunk, p1_trunk_2d, ReluNetwork, Scratch};
use rayon::prelude::*;
use std::fmt::{self, Write as _};
use std::path::Path;
use std::sync::Arc;

/// All p branch outputs for one sampled input.
pub type OperatorFn = Arc<dyn Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync>;

#[derive(Clone)]
pub enum Branches {
    /// Fixed coefficients; the input is ignored.
    Values(Vec<f64>),
    /// One network R^m -> R per term.
    Nets(Vec<ReluNetwork>),
    /// A constructive operator evaluated at the output nodes, e.g. the rational
    /// Burgers operator or a blessed cascade net.
    Operator {
        id: String,
        params: String,
        p: usize,
        eval: OperatorFn,
    },
}

impl fmt::Debug for Branches {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.descriptor())
    }
}

impl Branches {
    pub fn len(&self) -> usize {
        match self {
            Branches::Values(v) => v.len(),
            Branches::Nets(n) => n.len(),
            Branches::Operator { p, .. } => *p,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn descriptor(&self) -> String {
        match self {
            Branches::Values(v) => format!("values {}", v.len()),
            Branches::Nets(n) => format!("nets {}", n.len()),
            Branches::Operator { id, params, .. } => format!("operator {id} {params}").trim_end().to_string(),
        }
    }

    pub fn evaluate(&self, input: &[f64]) -> Result<Vec<f64>> {
        let out = match self {
            Branches::Values(v) => v.clone(),
            Branches::Nets(nets) => {
                let mut s = Scratch::default();
                nets.iter()
                    .map(|n| Ok(n.evaluate_with(input, &mut s)?[0]))
                    .collect::<Result<Vec<f64>>>()?
            }
            Branches::Operator { eval, .. } => eval(input)?,
        };
        if out.len() != self.len() {
            return Err(Error::Internal(format!(
                "branch produced {} values, expected {}",
                out.len(),
                self.len()
            )));
        }
        if let Some(k) = out.iter().position(|v| !v.is_finite()) {
            return Err(Error::Evaluation {
                at: format!("branch {k}"),
                detail: format!("value {}", out[k]),
            });
        }
        Ok(out)
    }
}

/// Output domain K2 of the trunks.
#[derive(Debug, Clone, PartialEq)]
pub enum TrunkDomain {
    Interval(Grid1D),
    Rectangle(Grid2D),
}

impl TrunkDomain {
    pub fn dim(&self) -> usize {
        match self {
            TrunkDomain::Interval(_) => 1,
            TrunkDomain::Rectangle(_) => 2,
        }
    }

    /// Reduce periodic coordinates; reject points outside a bounded axis.
    pub fn reduce(&self, y: &[f64]) -> Result<[f64; 2]> {
        if y.len() != self.dim() {
            return Err(Error::Input(format!(
                "point has {} coordinates, domain {}",
                y.len(),
                self.dim()
            )));
        }
        Ok(match self {
            TrunkDomain::Interval(g) => [g.reduce(y[0])?, 0.0],
            TrunkDomain::Rectangle(g) => [g.x().reduce(y[0])?, g.y().reduce(y[1])?],
        })
    }

    fn describe(&self) -> String {
        let axis = |g: &Grid1D| {
            let nodes: Vec<String> = g.nodes().iter().map(|x| format!("{x:?}")).collect();
            format!(
                "{} {}",
                if g.periodic() { "periodic" } else { "bounded" },
                nodes.join(" ")
            )
        };
        match self {
            TrunkDomain::Interval(g) => format!("interval {}", axis(g)),
            TrunkDomain::Rectangle(g) => format!("rectangle\nx {}\ny {}", axis(g.x()), axis(g.y())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelCapacity {
    pub trunk_size: usize,
    pub trunk_width: usize,
    pub trunk_depth: usize,
    /// total size of branch networks when the branches are networks
    pub branch_size: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct DeepONetModel {
    branches: Branches,
    trunks: Vec<ReluNetwork>,
    trunk_kind: String,
    domain: TrunkDomain,
    m: usize,
}

impl DeepONetModel {
    pub fn new(
        branches: Branches,
        trunks: Vec<ReluNetwork>,
        trunk_kind: &str,
        domain: TrunkDomain,
        m: usize,
    ) -> Result<Self> {
        if branches.len() != trunks.len() {
            return Err(Error::Input(format!(
                "{} branches for {} trunks",
                branches.len(),
                trunks.len()
            )));
        }
        if trunks.is_empty() {
            return Err(Error::Input("a model needs at least one term".into()));
        }
        for (k, t) in trunks.iter().enumerate() {
            if t.input_dim() != domain.dim() || t.output_dim() != 1 {
                return Err(Error::Input(format!(
                    "trunk {k} maps R^{} -> R^{}, domain needs R^{} -> R",
                    t.input_dim(),
                    t.output_dim(),
                    domain.dim()
                )));
            }
        }
        if let Branches::Nets(nets) = &branches {
            if let Some(k) = nets.iter().position(|n| n.input_dim() != m || n.output_dim() != 1) {
                return Err(Error::Input(format!("branch net {k} does not map R^{m} -> R")));
            }
        }
        Ok(DeepONetModel {
            branches,
            trunks,
            trunk_kind: trunk_kind.to_string(),
            domain,
            m,
        })
    }

    /// Nodal trunks on every node of the domain grid: hats in 1D, Courant P1 hats
    /// in 2D (node order of [`Grid2D::index`]).
    pub fn interpolating(branches: Branches, domain: TrunkDomain, m: usize) -> Result<Self> {
        let (trunks, kind) = match &domain {
            TrunkDomain::Interval(g) => (
                (0..g.value_count())
                    .map(|i| hat_trunk(g, i))
                    .collect::<Result<Vec<_>>>()?,
                "hat",
            ),
            TrunkDomain::Rectangle(g) => {
                let (nx, ny) = (g.x().value_count(), g.y().value_count());
                let mut t = vec![None; nx * ny];
                for ix in 0..nx {
                    for iy in 0..ny {
                        t[g.index(ix, iy)] = Some(p1_trunk_2d(g, ix, iy)?);
                    }
                }
                (t.into_iter().map(|n| n.expect("every node visited")).collect(), "p1")
            }
        };
        Self::new(branches, trunks, kind, domain, m)
    }

    pub fn p(&self) -> usize {
        self.trunks.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn branches(&self) -> &Branches {
        &self.branches
    }

    pub fn trunks(&self) -> &[ReluNetwork] {
        &self.trunks
    }

    pub fn domain(&self) -> &TrunkDomain {
        &self.domain
    }

    /// Output nodes of an interval domain (one per hat trunk); empty in 2D.
    pub fn domain_nodes(&self) -> Vec<f64> {
        match &self.domain {
            TrunkDomain::Interval(g) => g.nodes()[..g.value_count()].to_vec(),
            TrunkDomain::Rectangle(_) => Vec::new(),
        }
    }

    pub fn branch_values(&self, input: &[f64]) -> Result<Vec<f64>> {
        if !matches!(self.branches, Branches::Values(_)) && input.len() != self.m {
            return Err(Error::Input(format!(
                "expected {} input samples, got {}",
                self.m,
                input.len()
            )));
        }
        self.branches.evaluate(input)
    }

    fn trunk_values_reduced(&self, y: &[f64], s: &mut Scratch) -> Result<Vec<f64>> {
        self.trunks.iter().map(|t| Ok(t.evaluate_with(y, s)?[0])).collect()
    }

    pub fn trunk_values(&self, y: &[f64]) -> Result<Vec<f64>> {
        let r = self.domain.reduce(y)?;
        self.trunk_values_reduced(&r[..self.domain.dim()], &mut Scratch::default())
    }

    /// sum_k b_k tau_k(y), summed in term order.
    pub fn combine(&self, branch_values: &[f64], y: &[f64]) -> Result<f64> {
        if branch_values.len() != self.p() {
            return Err(Error::Input(format!(
                "{} branch values for {} terms",
                branch_values.len(),
                self.p()
            )));
        }
        let t = self.trunk_values(y)?;
        Ok(dot(branch_values, &t))
    }

    pub fn capacity(&self) -> ModelCapacity {
        ModelCapacity {
            trunk_size: self.trunks.iter().map(|t| t.size()).sum(),
            trunk_width: self.trunks.iter().map(|t| t.width()).max().unwrap_or(0),
            trunk_depth: self.trunks.iter().map(|t| t.depth()).max().unwrap_or(0),
            branch_size: match &self.branches {
                Branches::Nets(n) => Some(n.iter().map(|b| b.size()).sum()),
                _ => None,
            },
        }
    }

    fn trunk_file(k: usize) -> String {
        format!("trunks/trunk_{k:05}.relu")
    }

    fn branch_file(k: usize) -> String {
        format!("branches/branch_{k:05}.relu")
    }

    /// Plain-text manifest; networks are referenced by relative file name.
    pub fn manifest(&self) -> String {
        let mut s = String::from("deeponet-model v1\n");
        let _ = writeln!(s, "p {}", self.p());
        let _ = writeln!(s, "m {}", self.m);
        let _ = writeln!(s, "domain {}", self.domain.describe());
        let _ = writeln!(s, "branch {}", self.branches.descriptor());
        match &self.branches {
            Branches::Values(v) => {
                let vals: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
                let _ = writeln!(s, "values {}", vals.join(" "));
            }
            Branches::Nets(n) => {
                for k in 0..n.len() {
                    let _ = writeln!(s, "branch-net {k} {}", Self::branch_file(k));
                }
            }
            Branches::Operator { .. } => {}
        }
        let cap = self.capacity();
        let _ = writeln!(
            s,
            "capacity trunk_size={} trunk_width={} trunk_depth={}{}",
            cap.trunk_size,
            cap.trunk_width,
            cap.trunk_depth,
            cap.branch_size.map(|b| format!(" branch_size={b}")).unwrap_or_default()
        );
        for k in 0..self.p() {
            let _ = writeln!(s, "trunk {k} {} {}", self.trunk_kind, Self::trunk_file(k));
        }
        s
    }

    /// Manifest plus every network file under `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        let io = |e: std::io::Error| Error::Input(format!("writing model to {}: {e}", dir.display()));
        std::fs::create_dir_all(dir.join("trunks")).map_err(io)?;
        for (k, t) in self.trunks.iter().enumerate() {
            std::fs::write(dir.join(Self::trunk_file(k)), t.serialize()).map_err(io)?;
        }
        if let Branches::Nets(nets) = &self.branches {
            std::fs::create_dir_all(dir.join("branches")).map_err(io)?;
            for (k, n) in nets.iter().enumerate() {
                std::fs::write(dir.join(Self::branch_file(k)), n.serialize()).map_err(io)?;
            }
        }
        std::fs::write(dir.join("manifest.txt"), self.manifest()).map_err(io)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc + x * y)
}

/// Model with fixed branch values at the grid nodes and exact nodal trunks: the
/// piecewise-linear interpolant of the values.
pub fn assemble_interpolation_deeponet(values: &[f64], domain: TrunkDomain) -> Result<DeepONetModel> {
    let nodes = match &domain {
        TrunkDomain::Interval(g) => g.value_count(),
        TrunkDomain::Rectangle(g) => g.value_count(),
    };
    if values.len() != nodes {
        return Err(Error::Input(format!(
            "{} branch values for {nodes} output nodes",
            values.len()
        )));
    }
    DeepONetModel::interpolating(Branches::Values(values.to_vec()), domain, 0)
}

pub fn evaluate_model(model: &DeepONetModel, input: &[f64], y: &[f64]) -> Result<f64> {
    let b = model.branch_values(input)?;
    model.combine(&b, y)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputError {
    pub linf: f64,
    pub l2: f64,
}

/// Sup over the family of the per-input errors.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorError {
    pub linf: f64,
    pub l2: f64,
    pub per_input: Vec<InputError>,
}

/// ||G(u) - G_N(u)|| for each input of a fixed family on a 1D output domain.
/// L-infinity on the domain lattice, L2 by 16-point Gauss-Legendre on each half
/// cell (the rules of [`crate::norms::error_norm`]). Trunk values are computed
/// once per point and shared across inputs. `reference(i, y)` is G(u_i)(y).
pub fn operator_error<R>(
    model: &DeepONetModel,
    reference: R,
    inputs: &[Vec<f64>],
    domain: &ErrorDomain,
) -> Result<OperatorError>
where
    R: Fn(usize, f64) -> Result<f64> + Sync,
{
    if model.domain.dim() != 1 {
        return Err(Error::Input("operator_error needs a 1D output domain".into()));
    }
    if inputs.is_empty() {
        return Err(Error::Input("empty input family".into()));
    }
    let branches: Vec<Vec<f64>> = inputs
        .par_iter()
        .map(|u| model.branch_values(u))
        .collect::<Vec<Result<_>>>()
        .into_iter()
        .collect::<Result<_>>()?;
    let lattice: Vec<(f64, f64)> = domain.lattice().into_iter().map(|x| (x, f64::NAN)).collect();
    let gl = GaussLegendre::new(16);
    let bp = domain.breakpoints();
    let mut rule = Vec::new();
    for w in bp.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        for (a, b) in [(w[0], mid), (mid, w[1])] {
            rule.extend(gl.mapped(a, b));
        }
    }
    let diffs = |pts: &[(f64, f64)]| -> Result<Vec<Vec<f64>>> {
        pts.par_iter()
            .map_init(Scratch::default, |s, &(y, _)| {
                let r = model.domain.reduce(&[y])?;
                let t = model.trunk_values_reduced(&r[..1], s)?;
                branches
                    .iter()
                    .enumerate()
                    .map(|(i, b)| {
                        let exact = reference(i, y)?;
                        let approx = dot(b, &t);
                        if !exact.is_finite() || !approx.is_finite() {
                            return Err(Error::Evaluation {
                                at: format!("input {i}, y = {y}"),
                                detail: format!("reference {exact}, model {approx}"),
                            });
                        }
                        Ok(exact - approx)
                    })
                    .collect()
            })
            .collect::<Vec<Result<Vec<f64>>>>()
            .into_iter()
            .collect()
    };
    let lat = diffs(&lattice)?;
    let quad = diffs(&rule)?;
    let per_input: Vec<InputError> = (0..inputs.len())
        .map(|i| InputError {
            linf: lat.iter().map(|d| d[i].abs()).fold(0.0, f64::max),
            l2: quad
                .iter()
                .zip(&rule)
                .map(|(d, &(_, w))| w * d[i] * d[i])
                .sum::<f64>()
                .sqrt(),
        })
        .collect();
    Ok(OperatorError {
        linf: per_input.iter().map(|e| e.linf).fold(0.0, f64::max),
        l2: per_input.iter().map(|e| e.l2).fold(0.0, f64::max),
        per_input,
    })
}
