//! Versioned input families stored as explicit values under `fixtures/`.
//!
//! Text format: `#` comments, a `family <name> <version>` line, one layout line,
//! then pairs of lines `input <label> [description]` / whitespace-separated values.
//! Layouts:
//! - `nodal periodic|bounded <a> <b> <n>`: nodal values on a uniform grid;
//!   coarser inputs take every (n/m)-th node.
//! - `pieces <a> <b> <n>`: n piecewise-constant values on equal pieces; an m-cell
//!   input repeats each piece m/n times.

use crate::error::{Error, Result};
use crate::grid::Grid1D;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Layout {
    Nodal { periodic: bool, a: f64, b: f64, n: usize },
    Pieces { a: f64, b: f64, n: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixtureInput {
    pub label: String,
    pub description: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InputFamily {
    pub name: String,
    pub version: u32,
    pub layout: Layout,
    pub inputs: Vec<FixtureInput>,
}

const BURGERS_V1: &str = include_str!("../../fixtures/burgers_family_v1.txt");
const ADVDIFF_V1: &str = include_str!("../../fixtures/advdiff_family_v1.txt");

fn bad(line: usize, what: &str) -> Error {
    Error::Input(format!("fixture line {line}: {what}"))
}

fn num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    tok.and_then(|t| t.parse().ok()).ok_or_else(|| bad(line, what))
}

impl InputFamily {
    /// Five zero-mean initial conditions on [-pi, pi), 2048 nodes.
    pub fn burgers() -> Self {
        Self::parse(BURGERS_V1).expect("bundled fixture parses")
    }

    /// Five piecewise-constant advection coefficients on [0, 1], 8 pieces.
    pub fn advdiff() -> Self {
        Self::parse(ADVDIFF_V1).expect("bundled fixture parses")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (ln, head) = lines.next().ok_or_else(|| Error::Input("empty fixture".into()))?;
        let mut tok = head.split_whitespace();
        if tok.next() != Some("family") {
            return Err(bad(ln, "expected `family <name> <version>`"));
        }
        let name = tok.next().ok_or_else(|| bad(ln, "missing family name"))?.to_string();
        let version = num(tok.next(), ln, "bad version")?;
        let (ln, lay) = lines.next().ok_or_else(|| bad(ln, "missing layout line"))?;
        let mut tok = lay.split_whitespace();
        let layout = match tok.next() {
            Some("nodal") => {
                let periodic = match tok.next() {
                    Some("periodic") => true,
                    Some("bounded") => false,
                    _ => return Err(bad(ln, "expected periodic or bounded")),
                };
                Layout::Nodal {
                    periodic,
                    a: num(tok.next(), ln, "bad start")?,
                    b: num(tok.next(), ln, "bad end")?,
                    n: num(tok.next(), ln, "bad node count")?,
                }
            }
            Some("pieces") => Layout::Pieces {
                a: num(tok.next(), ln, "bad start")?,
                b: num(tok.next(), ln, "bad end")?,
                n: num(tok.next(), ln, "bad piece count")?,
            },
            _ => return Err(bad(ln, "unknown layout")),
        };
        let expected = match layout {
            Layout::Nodal { periodic, n, .. } => n + usize::from(!periodic),
            Layout::Pieces { n, .. } => n,
        };
        let mut inputs = Vec::new();
        while let Some((ln, l)) = lines.next() {
            let rest = l
                .strip_prefix("input ")
                .ok_or_else(|| bad(ln, "expected `input <label>`"))?;
            let (label, description) = rest.split_once(' ').unwrap_or((rest, ""));
            let (vl, vals) = lines.next().ok_or_else(|| bad(ln, "missing values line"))?;
            let values = vals
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|_| bad(vl, "bad number")))
                .collect::<Result<Vec<f64>>>()?;
            if values.len() != expected || values.iter().any(|v| !v.is_finite()) {
                return Err(bad(
                    vl,
                    &format!("expected {expected} finite values, got {}", values.len()),
                ));
            }
            inputs.push(FixtureInput {
                label: label.to_string(),
                description: description.trim().to_string(),
                values,
            });
        }
        if inputs.is_empty() {
            return Err(Error::Input("fixture has no inputs".into()));
        }
        Ok(InputFamily {
            name,
            version,
            layout,
            inputs,
        })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    /// The stored resolution as a grid (nodes for nodal layouts, pieces otherwise).
    pub fn native_grid(&self) -> Result<Grid1D> {
        match self.layout {
            Layout::Nodal { periodic, a, b, n } => Grid1D::uniform(a, b, n, periodic),
            Layout::Pieces { a, b, n } => Grid1D::uniform(a, b, n, false),
        }
    }

    /// Uniform grid with m cells over the family's interval.
    pub fn grid(&self, m: usize) -> Result<Grid1D> {
        match self.layout {
            Layout::Nodal { periodic, a, b, .. } => Grid1D::uniform(a, b, m, periodic),
            Layout::Pieces { a, b, .. } => Grid1D::uniform(a, b, m, false),
        }
    }

    /// Every input at resolution m (nodal values or per-cell values).
    pub fn at_resolution(&self, m: usize) -> Result<Vec<Vec<f64>>> {
        let stored = match self.layout {
            Layout::Nodal { n, .. } | Layout::Pieces { n, .. } => n,
        };
        let ok = match self.layout {
            Layout::Nodal { .. } => m > 0 && stored % m == 0,
            Layout::Pieces { .. } => m > 0 && m.is_multiple_of(stored),
        };
        if !ok {
            return Err(Error::Input(format!(
                "resolution {m} is not compatible with the stored {stored} of family {}",
                self.name
            )));
        }
        Ok(self
            .inputs
            .iter()
            .map(|inp| match self.layout {
                Layout::Nodal { .. } => {
                    let step = stored / m;
                    inp.values.iter().step_by(step).copied().collect()
                }
                Layout::Pieces { .. } => {
                    let rep = m / stored;
                    inp.values.iter().flat_map(|&v| std::iter::repeat_n(v, rep)).collect()
                }
            })
            .collect())
    }
}
