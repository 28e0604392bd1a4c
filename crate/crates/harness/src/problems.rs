//! Problem runners. Each problem is built once from its parameters, then
//! answers single runs (`run`) and sweep cells (`cell`).

use crate::config::Params;
use crate::error::{invalid, HarnessError, Result};
use deeponet_core::advdiff::{exact_solution, AdvDiffProblem1D, DiscreteSolver, Source};
use deeponet_core::burgers::forced::{forced_burgers_mc, ForcedBurgersConfig, Forcing};
use deeponet_core::burgers::spectral::SpectralColeHopf;
use deeponet_core::burgers::two_d::{burgers_2d_rational, Burgers2DData, Burgers2DExact};
use deeponet_core::burgers::{rational_operator, BurgersProblem1D};
use deeponet_core::cascade::{assemble, cascade_solve, Boundary, Coefficients, FdSystem};
use deeponet_core::deeponet::problems::{advdiff_model, burgers_model};
use deeponet_core::deeponet::{evaluate_model, operator_error, InputFamily};
use deeponet_core::fourier::{bochner_riesz, FourierExpansion};
use deeponet_core::grid::{Grid1D, Grid2D};
use deeponet_core::interp::{sample_input_2d, Order, PiecewiseFunction, PiecewiseFunction2D};
use deeponet_core::norms::{error_norm, modulus_omega2, ErrorDomain, Norm};
use deeponet_core::relu::{
    blessed_cascade_net_with, coefficient_vector, compile_rational_r, compile_rational_r_in, square_gadget, system_box,
    union_box, Gadget, RationalBox,
};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

pub const PROBLEM_IDS: [&str; 8] = [
    "burgers1d",
    "burgers2d",
    "burgers-forced",
    "advdiff1d",
    "reacdiff2d",
    "advdiff2d",
    "bochner-riesz",
    "relu-audit",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    M,
    P,
    ThetaSize,
    NPaths,
    R,
}

impl Axis {
    pub fn parse(s: &str) -> Result<Axis> {
        match s.to_lowercase().replace('-', "_").as_str() {
            "m" => Ok(Axis::M),
            "p" => Ok(Axis::P),
            "theta_size" => Ok(Axis::ThetaSize),
            "n_paths" => Ok(Axis::NPaths),
            "r" => Ok(Axis::R),
            _ => Err(HarnessError::Usage(format!(
                "unknown axis `{s}` (m | p | theta_size | N_paths | R)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::M => "m",
            Axis::P => "p",
            Axis::ThetaSize => "theta_size",
            Axis::NPaths => "N_paths",
            Axis::R => "R",
        }
    }

    pub fn is_integer(self) -> bool {
        !matches!(self, Axis::R)
    }
}

/// One sweep measurement. Column meaning of aux1/aux2 is per problem (see README).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub error_linf: f64,
    pub error_l2: f64,
    pub aux1: f64,
    pub aux2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub problem: &'static str,
    pub values: Vec<(&'static str, f64)>,
    pub field: Option<Field>,
}

impl Summary {
    pub fn get(&self, key: &str) -> Option<f64> {
        self.values.iter().find(|(k, _)| *k == key).map(|v| v.1)
    }

    pub fn line(&self) -> String {
        let mut s = self.problem.to_string();
        for (k, v) in &self.values {
            if v.fract() == 0.0 && v.abs() < 1e15 {
                s.push_str(&format!(" {k}={}", *v as i64));
            } else {
                s.push_str(&format!(" {k}={}", crate::sweep::fmt_f64(*v)));
            }
        }
        s
    }
}

pub trait Problem: Send + Sync {
    fn id(&self) -> &'static str;

    fn axes(&self) -> &'static [Axis];

    /// Precondition check for one axis value, before any cell runs.
    fn check(&self, axis: Axis, value: f64) -> Result<()>;

    /// Called once with the full value list; problems that share state across
    /// cells (one compiled network for a whole sweep) build it here.
    fn prepare(&mut self, _axis: Axis, _values: &[f64], _seed: u64) -> Result<()> {
        Ok(())
    }

    fn cell(&self, axis: Axis, value: f64, seed: u64) -> Result<Cell>;

    fn run(&self, seed: u64) -> Result<Summary>;

    /// aux1 is a measured network size, so the report adds an error-vs-size fit.
    fn aux1_is_size(&self, _axis: Axis) -> bool {
        false
    }
}

pub fn build_problem(id: &str, params: &Params) -> Result<Box<dyn Problem>> {
    Ok(match id {
        "burgers1d" => Box::new(Burgers1D::new(params)?),
        "burgers2d" => Box::new(Burgers2D::new(params)?),
        "burgers-forced" => Box::new(BurgersForced::new(params)?),
        "advdiff1d" => Box::new(AdvDiff1D::new(params)?),
        "reacdiff2d" => Box::new(Fd2D::new(params, false)?),
        "advdiff2d" => Box::new(Fd2D::new(params, true)?),
        "bochner-riesz" => Box::new(BochnerRiesz::new(params)?),
        "relu-audit" => Box::new(ReluAudit::new(params)?),
        _ => {
            return Err(HarnessError::Usage(format!(
                "unknown problem `{id}` (one of {})",
                PROBLEM_IDS.join(", ")
            )))
        }
    })
}

pub fn run_problem(id: &str, params: &Params, seed: u64) -> Result<Summary> {
    build_problem(id, params)?.run(seed)
}

/// Seed substream owned by one sweep cell, keyed by its axis value.
pub fn cell_seed(seed: u64, value: f64) -> u64 {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(value.to_bits());
    r.next_u64()
}

fn unsupported(problem: &str, axis: Axis) -> HarnessError {
    HarnessError::Usage(format!("{problem} has no sweep axis {}", axis.name()))
}

fn int_value(axis: Axis, value: f64, min: usize) -> Result<usize> {
    if value.fract() != 0.0 || value < min as f64 || value > 1e12 {
        return Err(invalid(format!(
            "{} = {value} must be an integer >= {min}",
            axis.name()
        )));
    }
    Ok(value as usize)
}

fn square_side(m: usize) -> Result<usize> {
    let n = (m as f64).sqrt().round() as usize;
    if n * n != m {
        return Err(invalid(format!("m = {m} must be a perfect square (n x n)")));
    }
    Ok(n)
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(invalid(format!("{name} = {v} must be positive")))
    }
}

fn fixture_index(fam: &InputFamily, label: &str) -> Result<usize> {
    fam.inputs.iter().position(|i| i.label == label).ok_or_else(|| {
        let labels: Vec<&str> = fam.inputs.iter().map(|i| i.label.as_str()).collect();
        invalid(format!("unknown input `{label}` (one of {})", labels.join(", ")))
    })
}

fn uniform_domain(a: f64, b: f64, cells: usize) -> Result<ErrorDomain> {
    Ok(ErrorDomain::with_breakpoints(
        Grid1D::uniform(a, b, cells, false)?.nodes().to_vec(),
    )?)
}

// ---------------------------------------------------------------------------

struct Burgers1D {
    kappa: f64,
    t: f64,
    x: f64,
    m: usize,
    p: usize,
    input: usize,
    deeponet: bool,
    family: InputFamily,
    refs: Vec<SpectralColeHopf>,
}

impl Burgers1D {
    const KNOWN: &'static [&'static str] = &["kappa", "t", "x", "m", "p", "input", "model", "modes"];

    fn new(params: &Params) -> Result<Self> {
        params.check_known("burgers1d", Self::KNOWN)?;
        let family = InputFamily::burgers();
        let native = family.native_grid()?;
        let kappa = positive("kappa", params.f64("kappa", 0.5)?)?;
        let model = params.string("model", "operator");
        let deeponet = match model.as_str() {
            "operator" => false,
            "deeponet" => true,
            _ => return Err(invalid(format!("model = `{model}` (operator | deeponet)"))),
        };
        let modes = params.usize("modes", 1024)?;
        let refs = family
            .inputs
            .iter()
            .map(|i| {
                let u0 = PiecewiseFunction::new(native.clone(), i.values.clone(), Order::Linear)?;
                Ok(SpectralColeHopf::new(&BurgersProblem1D::new(kappa, u0)?, modes)?)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Burgers1D {
            kappa,
            t: positive("t", params.f64("t", 0.25)?)?,
            x: params.f64("x", 0.5)?,
            m: params.usize("m", 64)?,
            p: params.usize("p", 512)?,
            input: fixture_index(&family, &params.string("input", "sin"))?,
            deeponet,
            family,
            refs,
        })
    }

    fn operator_problem(&self, m: usize) -> Result<BurgersProblem1D> {
        let u = self.family.at_resolution(m)?.swap_remove(self.input);
        Ok(BurgersProblem1D::new(
            self.kappa,
            PiecewiseFunction::new(self.family.grid(m)?, u, Order::Linear)?,
        )?)
    }

    fn operator_cell(&self, m: usize) -> Result<Cell> {
        let prob = self.operator_problem(m)?;
        let r = &self.refs[self.input];
        let at_x = rational_operator(&prob, self.x, self.t)?;
        let exact = r.eval(self.x, self.t)?;
        let dom = ErrorDomain::with_breakpoints(self.family.grid(m)?.nodes().to_vec())?;
        let l2 = error_norm(
            |y| r.eval(y, self.t),
            |y| rational_operator(&prob, y, self.t),
            &dom,
            Norm::L2,
        )?;
        Ok(Cell {
            error_linf: (at_x - exact).abs(),
            error_l2: l2,
            aux1: at_x,
            aux2: exact,
        })
    }

    fn deeponet_cell(&self, m: usize, p: usize) -> Result<Cell> {
        let model = burgers_model(self.kappa, self.t, m, p)?;
        let dom = ErrorDomain::with_breakpoints(Grid1D::uniform(-PI, PI, p, true)?.nodes().to_vec())?;
        let inputs = self.family.at_resolution(m)?;
        let e = operator_error(&model, |i, y| self.refs[i].eval(y, self.t), &inputs, &dom)?;
        Ok(Cell {
            error_linf: e.linf,
            error_l2: e.l2,
            aux1: model.capacity().trunk_size as f64,
            aux2: if m == self.m { p as f64 } else { m as f64 },
        })
    }
}

impl Problem for Burgers1D {
    fn id(&self) -> &'static str {
        "burgers1d"
    }

    fn axes(&self) -> &'static [Axis] {
        &[Axis::M, Axis::P]
    }

    fn check(&self, axis: Axis, value: f64) -> Result<()> {
        let v = int_value(axis, value, 2)?;
        match axis {
            Axis::M => self.family.at_resolution(v).map(|_| ()).map_err(Into::into),
            Axis::P => Ok(()),
            _ => Err(unsupported(self.id(), axis)),
        }
    }

    fn cell(&self, axis: Axis, value: f64, _seed: u64) -> Result<Cell> {
        let v = int_value(axis, value, 2)?;
        match axis {
            Axis::M if self.deeponet => self.deeponet_cell(v, self.p),
            Axis::M => self.operator_cell(v),
            Axis::P => self.deeponet_cell(self.m, v),
            _ => Err(unsupported(self.id(), axis)),
        }
    }

    fn aux1_is_size(&self, axis: Axis) -> bool {
        axis == Axis::P
    }

    fn run(&self, _seed: u64) -> Result<Summary> {
        let exact = self.refs[self.input].eval(self.x, self.t)?;
        let mut values = vec![("x", self.x), ("t", self.t), ("m", self.m as f64)];
        let mut field = None;
        if self.deeponet {
            let model = burgers_model(self.kappa, self.t, self.m, self.p)?;
            let u = self.family.at_resolution(self.m)?.swap_remove(self.input);
            let v = evaluate_model(&model, &u, &[self.x])?;
            let c = self.deeponet_cell(self.m, self.p)?;
            values.extend([
                ("p", self.p as f64),
                ("deeponet", v),
                ("reference", exact),
                ("error", (v - exact).abs()),
                ("family_linf", c.error_linf),
                ("family_l2", c.error_l2),
            ]);
        } else {
            let prob = self.operator_problem(self.m)?;
            let v = rational_operator(&prob, self.x, self.t)?;
            values.extend([("operator", v), ("reference", exact), ("error", (v - exact).abs())]);
            let rows = (0..=256)
                .map(|i| {
                    let y = -PI + 2.0 * PI * i as f64 / 256.0;
                    Ok(vec![
                        y,
                        rational_operator(&prob, y, self.t)?,
                        self.refs[self.input].eval(y, self.t)?,
                    ])
                })
                .collect::<Result<Vec<_>>>()?;
            field = Some(Field {
                header: vec!["x", "operator", "reference"],
                rows,
            });
        }
        Ok(Summary {
            problem: "burgers1d",
            values,
            field,
        })
    }
}

// ---------------------------------------------------------------------------

/// Swirl data: w0 = A sin x sin y, u~0 = 0.5 sin x, v~0 = 0.3 cos y on an n x n periodic grid.
pub fn swirl_data(kappa: f64, amplitude: f64, n: usize) -> Result<Burgers2DData> {
    let g = Grid1D::uniform(-PI, PI, n, true)?;
    let xs: Vec<f64> = g.nodes()[..n].to_vec();
    let w = xs
        .iter()
        .flat_map(|&x| xs.iter().map(move |&y| amplitude * x.sin() * y.sin()))
        .collect();
    let ut = xs.iter().map(|x| 0.5 * x.sin()).collect();
    let vt = xs.iter().map(|y| 0.3 * y.cos()).collect();
    Ok(Burgers2DData::from_generators(
        kappa,
        Grid2D::new(g.clone(), g)?,
        w,
        ut,
        vt,
    )?)
}

struct Burgers2D {
    kappa: f64,
    t: f64,
    amplitude: f64,
    m: usize,
    ref_m: usize,
    x: f64,
    y: f64,
    reference: OnceLock<std::result::Result<Burgers2DExact, String>>,
}

impl Burgers2D {
    const KNOWN: &'static [&'static str] = &["kappa", "t", "m", "ref_m", "x", "y", "amplitude"];

    fn new(params: &Params) -> Result<Self> {
        params.check_known("burgers2d", Self::KNOWN)?;
        let b = Burgers2D {
            kappa: positive("kappa", params.f64("kappa", 0.5)?)?,
            t: positive("t", params.f64("t", 0.25)?)?,
            amplitude: params.f64("amplitude", 0.4)?,
            m: params.usize("m", 256)?,
            ref_m: params.usize("ref_m", 128 * 128)?,
            x: params.f64("x", 0.5)?,
            y: params.f64("y", -0.3)?,
            reference: OnceLock::new(),
        };
        square_side(b.m)?;
        square_side(b.ref_m)?;
        Ok(b)
    }

    fn reference(&self) -> Result<&Burgers2DExact> {
        self.reference
            .get_or_init(|| {
                let n = square_side(self.ref_m).map_err(|e| e.to_string())?;
                let d = swirl_data(self.kappa, self.amplitude, n).map_err(|e| e.to_string())?;
                Burgers2DExact::new(&d, 1).map_err(|e| e.to_string())
            })
            .as_ref()
            .map_err(|e| HarnessError::Numerical(format!("2D reference: {e}")))
    }

    fn points() -> Vec<(f64, f64)> {
        (0..4)
            .flat_map(|i| (0..4).map(move |j| (-PI + (i as f64 + 0.37) * PI / 2.0, -PI + (j as f64 + 0.61) * PI / 2.0)))
            .collect()
    }
}

impl Problem for Burgers2D {
    fn id(&self) -> &'static str {
        "burgers2d"
    }

    fn axes(&self) -> &'static [Axis] {
        &[Axis::M]
    }

    fn check(&self, axis: Axis, value: f64) -> Result<()> {
        if axis != Axis::M {
            return Err(unsupported(self.id(), axis));
        }
        let n = square_side(int_value(axis, value, 16)?)?;
        if n >= square_side(self.ref_m)? {
            return Err(invalid(format!(
                "m = {value} must be below the reference resolution {}",
                self.ref_m
            )));
        }
        Ok(())
    }

    fn cell(&self, axis: Axis, value: f64, _seed: u64) -> Result<Cell> {
        self.check(axis, value)?;
        let d = swirl_data(self.kappa, self.amplitude, square_side(value as usize)?)?;
        let r = self.reference()?;
        let (mut eu, mut ev, mut ss) = (0.0f64, 0.0f64, 0.0);
        let pts = Self::points();
        for &(x, y) in &pts {
            let (u, v) = burgers_2d_rational(&d, x, y, self.t)?;
            let (ur, vr) = r.eval(x, y, self.t)?;
            eu = eu.max((u - ur).abs());
            ev = ev.max((v - vr).abs());
            ss += (u - ur).powi(2) + (v - vr).powi(2);
        }
        Ok(Cell {
            error_linf: eu.max(ev),
            error_l2: (ss / pts.len() as f64).sqrt(),
            aux1: eu,
            aux2: ev,
        })
    }

    fn run(&self, _seed: u64) -> Result<Summary> {
        let d = swirl_data(self.kappa, self.amplitude, square_side(self.m)?)?;
        let (u, v) = burgers_2d_rational(&d, self.x, self.y, self.t)?;
        let (ur, vr) = self.reference()?.eval(self.x, self.y, self.t)?;
        Ok(Summary {
            problem: "burgers2d",
            values: vec![
                ("x", self.x),
                ("y", self.y),
                ("t", self.t),
                ("m", self.m as f64),
                ("u", u),
                ("v", v),
                ("u_ref", ur),
                ("v_ref", vr),
                ("error", (u - ur).abs().max((v - vr).abs())),
            ],
            field: None,
        })
    }
}

// ---------------------------------------------------------------------------

struct BurgersForced {
    kappa: f64,
    t: f64,
    x: f64,
    h_t: f64,
    force: f64,
    n_paths: usize,
    u0: PiecewiseFunction,
    forcing: Option<Forcing>,
    reference: Option<f64>,
}

impl BurgersForced {
    const KNOWN: &'static [&'static str] = &[
        "kappa",
        "t",
        "x",
        "m",
        "input",
        "amplitude",
        "force",
        "h_t",
        "n_paths",
        "modes",
    ];

    fn new(params: &Params) -> Result<Self> {
        params.check_known("burgers-forced", Self::KNOWN)?;
        let kappa = positive("kappa", params.f64("kappa", 0.5)?)?;
        let t = positive("t", params.f64("t", 0.25)?)?;
        let x = params.f64("x", 0.5)?;
        let m = params.usize("m", 64)?;
        let fam = InputFamily::burgers();
        let idx = fixture_index(&fam, &params.string("input", "sin"))?;
        let amp = params.f64("amplitude", 0.5)?;
        let u: Vec<f64> = fam.at_resolution(m)?[idx].iter().map(|v| amp * v).collect();
        let grid = fam.grid(m)?;
        let u0 = PiecewiseFunction::new(grid.clone(), u, Order::Linear)?;
        let force = params.f64("force", 0.2)?;
        let (forcing, reference) = if force == 0.0 {
            let p = BurgersProblem1D::new(kappa, u0.clone())?;
            (
                None,
                Some(SpectralColeHopf::new(&p, params.usize("modes", 1024)?)?.eval(x, t)?),
            )
        } else {
            (
                Some(Forcing::stationary(&grid, move |y| force * (2.0 * y).cos())?),
                None,
            )
        };
        Ok(BurgersForced {
            kappa,
            t,
            x,
            h_t: positive("h_t", params.f64("h_t", 0.01)?)?,
            force,
            n_paths: params.usize("n_paths", 10_000)?,
            u0,
            forcing,
            reference,
        })
    }

    fn estimate(&self, n: usize, seed: u64) -> Result<(f64, f64)> {
        let mut cfg = ForcedBurgersConfig::new(self.kappa, self.u0.clone(), n, self.h_t, seed);
        if let Some(f) = &self.forcing {
            cfg = cfg.with_forcing(f.clone());
        }
        let e = forced_burgers_mc(&cfg, self.x, self.t)?;
        Ok((e.value, e.std_error))
    }
}

impl Problem for BurgersForced {
    fn id(&self) -> &'static str {
        "burgers-forced"
    }

    fn axes(&self) -> &'static [Axis] {
        &[Axis::NPaths]
    }

    fn check(&self, axis: Axis, value: f64) -> Result<()> {
        if axis != Axis::NPaths {
            return Err(unsupported(self.id(), axis));
        }
        int_value(axis, value, 2).map(|_| ())
    }

    fn cell(&self, axis: Axis, value: f64, seed: u64) -> Result<Cell> {
        self.check(axis, value)?;
        let (v, se) = self.estimate(value as usize, seed)?;
        Ok(Cell {
            error_linf: se,
            error_l2: se,
            aux1: v,
            aux2: self.reference.map_or(f64::NAN, |r| (v - r).abs() / se),
        })
    }

    fn run(&self, seed: u64) -> Result<Summary> {
        let (v, se) = self.estimate(self.n_paths, seed)?;
        let mut values = vec![
            ("x", self.x),
            ("t", self.t),
            ("force", self.force),
            ("n_paths", self.n_paths as f64),
            ("estimate", v),
            ("std_error", se),
        ];
        if let Some(r) = self.reference {
            values.extend([("reference", r), ("z", (v - r).abs() / se)]);
        }
        Ok(Summary {
            problem: "burgers-forced",
            values,
            field: None,
        })
    }
}

// ---------------------------------------------------------------------------

enum Coefficient {
    Const(f64),
    Fixture(usize),
}

struct AdvDiff1D {
    length: f64,
    m: usize,
    p: usize,
    x: f64,
    a: Coefficient,
    source: Source,
    deeponet: bool,
    family: InputFamily,
}

impl AdvDiff1D {
    const KNOWN: &'static [&'static str] = &["l", "length", "m", "p", "x", "a_const", "f_const", "input", "model"];

    fn new(params: &Params) -> Result<Self> {
        params.check_known("advdiff1d", Self::KNOWN)?;
        let family = InputFamily::advdiff();
        let length = positive("L", params.opt_f64("l")?.map_or_else(|| params.f64("length", 1.0), Ok)?)?;
        let a = match params.opt_f64("a_const")? {
            Some(c) => Coefficient::Const(c),
            None => Coefficient::Fixture(fixture_index(&family, &params.string("input", "ramp"))?),
        };
        let source: Source = match params.opt_f64("f_const")? {
            Some(c) => Arc::new(move |_| c),
            None => Arc::new(|x| 1.0 + x),
        };
        let model = params.string("model", "operator");
        let deeponet = match model.as_str() {
            "operator" => false,
            "deeponet" => true,
            _ => return Err(invalid(format!("model = `{model}` (operator | deeponet)"))),
        };
        Ok(AdvDiff1D {
            length,
            m: params.usize("m", 64)?,
            p: params.usize("p", 128)?,
            x: params.f64("x", 0.5)?,
            a,
            source,
            deeponet,
            family,
        })
    }

    fn cells(&self, m: usize) -> Result<Vec<f64>> {
        match self.a {
            Coefficient::Const(c) => Ok(vec![c; m]),
            Coefficient::Fixture(i) => Ok(self.family.at_resolution(m)?.swap_remove(i)),
        }
    }

    fn exact_problem(&self, input: usize) -> Result<AdvDiffProblem1D> {
        let n = self.family.native_grid()?.cells();
        let g = Grid1D::uniform(0.0, self.length, n, false)?;
        Ok(AdvDiffProblem1D::from_cells(
            g,
            &self.family.inputs[input].values,
            self.source.clone(),
        )?)
    }

    fn exact(&self) -> Result<AdvDiffProblem1D> {
        match self.a {
            Coefficient::Const(c) => Ok(AdvDiffProblem1D::from_cells(
                Grid1D::uniform(0.0, self.length, 1, false)?,
                &[c],
                self.source.clone(),
            )?),
            Coefficient::Fixture(i) => self.exact_problem(i),
        }
    }

    fn discrete(&self, m: usize) -> Result<DiscreteSolver> {
        let g = Grid1D::uniform(0.0, self.length, m, false)?;
        Ok(DiscreteSolver::new(&AdvDiffProblem1D::from_cells(
            g,
            &self.cells(m)?,
            self.source.clone(),
        )?))
    }

    fn operator_cell(&self, m: usize) -> Result<Cell> {
        let exact = self.exact()?;
        let solver = self.discrete(m)?;
        let dom = uniform_domain(0.0, self.length, m)?;
        let ex = |y| exact_solution(&exact, y);
        let ap = |y| solver.eval(y);
        Ok(Cell {
            error_linf: error_norm(ex, ap, &dom, Norm::Linf)?,
            error_l2: error_norm(ex, ap, &dom, Norm::L2)?,
            aux1: solver.eval(self.x)?,
            aux2: exact_solution(&exact, self.x)?,
        })
    }

    fn deeponet_cell(&self, m: usize, p: usize) -> Result<Cell> {
        let model = advdiff_model(self.length, self.source.clone(), m, p)?;
        let exact = (0..self.family.len())
            .map(|i| self.exact_problem(i))
            .collect::<Result<Vec<_>>>()?;
        let dom = uniform_domain(0.0, self.length, p)?;
        let e = operator_error(
            &model,
            |i, y| exact_solution(&exact[i], y),
            &self.family.at_resolution(m)?,
            &dom,
        )?;
        Ok(Cell {
            error_linf: e.linf,
            error_l2: e.l2,
            aux1: model.capacity().trunk_size as f64,
            aux2: if m == self.m { p as f64 } else { m as f64 },
        })
    }
}

impl Problem for AdvDiff1D {
    fn id(&self) -> &'static str {
        "advdiff1d"
    }

    fn axes(&self) -> &'static [Axis] {
        &[Axis::M, Axis::P]
    }

    fn check(&self, axis: Axis, value: f64) -> Result<()> {
        let v = int_value(axis, value, 1)?;
        match axis {
            Axis::M => self.cells(v).map(|_| ()),
            Axis::P => Ok(()),
            _ => Err(unsupported(self.id(), axis)),
        }
    }

    fn cell(&self, axis: Axis, value: f64, _seed: u64) -> Result<Cell> {
        let v = int_value(axis, value, 1)?;
        match axis {
            Axis::M if self.deeponet => self.deeponet_cell(v, self.p),
            Axis::M => self.operator_cell(v),
            Axis::P => self.deeponet_cell(self.m, v),
            _ => Err(unsupported(self.id(), axis)),
        }
    }

    fn aux1_is_size(&self, axis: Axis) -> bool {
        axis == Axis::P
    }

    fn run(&self, _seed: u64) -> Result<Summary> {
        let exact = self.exact()?;
        let solver = self.discrete(self.m)?;
        let ex = exact_solution(&exact, self.x)?;
        let d = solver.eval(self.x)?;
        let mut values = vec![
            ("x", self.x),
            ("m", self.m as f64),
            ("exact", ex),
            ("discrete", d),
            ("error", (d - ex).abs()),
        ];
        if self.deeponet {
            let c = self.deeponet_cell(self.m, self.p)?;
            values.extend([
                ("p", self.p as f64),
                ("family_linf", c.error_linf),
                ("family_l2", c.error_l2),
            ]);
        }
        let rows = (0..=200)
            .map(|i| {
                let y = self.length * i as f64 / 200.0;
                Ok(vec![y, solver.eval(y)?, exact_solution(&exact, y)?])
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Summary {
            problem: "advdiff1d",
            values,
            field: Some(Field {
                header: vec!["x", "discrete", "exact"],
                rows,
            }),
        })
    }
}

// ---------------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq)]
enum Solver {
    Cascade,
    Banded,
    Dense,
}

/// Reaction-diffusion (a1 = a2 = 0) or advection-diffusion on the unit square.
/// Without `f_const` the source is manufactured from u = sin(pi x) sin(pi y).
struct Fd2D {
    advection: bool,
    grid: usize,
    a1: f64,
    a2: f64,
    a3: Option<f64>,
    f_const: Option<f64>,
    boundary: Boundary,
    oracle: Option<Solver>,
    solver: Solver,
}

fn exact_mms(x: f64, y: f64) -> f64 {
    (PI * x).sin() * (PI * y).sin()
}

impl Fd2D {
    const KNOWN_REAC: &'static [&'static str] = &["grid", "a3_const", "f_const", "boundary", "oracle", "solver"];
    const KNOWN_ADV: &'static [&'static str] = &[
        "grid", "a1_const", "a2_const", "a3_const", "f_const", "boundary", "oracle", "solver",
    ];

    fn new(params: &Params, advection: bool) -> Result<Self> {
        let id = if advection { "advdiff2d" } else { "reacdiff2d" };
        params.check_known(id, if advection { Self::KNOWN_ADV } else { Self::KNOWN_REAC })?;
        let solver_of = |s: &str| match s {
            "cascade" => Ok(Some(Solver::Cascade)),
            "banded" => Ok(Some(Solver::Banded)),
            "dense" => Ok(Some(Solver::Dense)),
            "none" => Ok(None),
            _ => Err(invalid(format!("solver `{s}` (cascade | banded | dense | none)"))),
        };
        let boundary = match params.string("boundary", "dirichlet").as_str() {
            "dirichlet" => Boundary::Dirichlet,
            "neumann" => Boundary::Neumann,
            b => match b.strip_prefix("robin:").and_then(|v| v.parse::<f64>().ok()) {
                Some(beta) => Boundary::Robin(beta),
                None => return Err(invalid(format!("boundary `{b}` (dirichlet | neumann | robin:<beta>)"))),
            },
        };
        let a3 = params.opt_f64("a3_const")?;
        if a3.is_some_and(|a| a < 0.0) {
            return Err(invalid("a3_const must be non-negative"));
        }
        let f = Fd2D {
            advection,
            grid: params.usize("grid", 16)?,
            a1: if advection { params.f64("a1_const", 1.0)? } else { 0.0 },
            a2: if advection { params.f64("a2_const", 0.5)? } else { 0.0 },
            a3: if advection { Some(a3.unwrap_or(0.0)) } else { a3 },
            f_const: params.opt_f64("f_const")?,
            boundary,
            oracle: solver_of(&params.string("oracle", "dense"))?,
            solver: solver_of(&params.string("solver", "cascade"))?
                .ok_or_else(|| invalid("solver must not be `none`"))?,
        };
        if f.f_const.is_none() && boundary != Boundary::Dirichlet {
            return Err(invalid(
                "the manufactured source needs a Dirichlet boundary; set f_const",
            ));
        }
        if f.grid < 2 {
            return Err(invalid("grid must be at least 2 cells"));
        }
        Ok(f)
    }

    fn a3_at(&self, x: f64, y: f64) -> f64 {
        self.a3.unwrap_or(1.0 + x * y)
    }

    fn system(&self, cells: usize) -> Result<FdSystem> {
        let g1 = Grid1D::uniform(0.0, 1.0, cells, false)?;
        let g = Grid2D::new(g1.clone(), g1)?;
        let field = |c: f64| -> Result<Option<PiecewiseFunction2D>> {
            if c == 0.0 {
                Ok(None)
            } else {
                Ok(Some(sample_input_2d(|_, _| c, &g, Order::Linear)?))
            }
        };
        let a3 = match self.a3 {
            Some(c) => field(c)?,
            None => Some(sample_input_2d(|x, y| 1.0 + x * y, &g, Order::Linear)?),
        };
        let coeffs = Coefficients {
            a1: field(self.a1)?,
            a2: field(self.a2)?,
            a3,
        };
        let (a1, a2) = (self.a1, self.a2);
        let rhs = |x: f64, y: f64| match self.f_const {
            Some(c) => c,
            None => {
                let (sx, cx, sy, cy) = ((PI * x).sin(), (PI * x).cos(), (PI * y).sin(), (PI * y).cos());
                (2.0 * PI * PI + self.a3_at(x, y)) * sx * sy + PI * (a1 * cx * sy + a2 * sx * cy)
            }
        };
        Ok(assemble(&g, &coeffs, rhs, self.boundary)?)
    }

    fn solve(sys: &FdSystem, s: Solver) -> Result<Vec<f64>> {
        Ok(match s {
            Solver::Cascade => cascade_solve(sys)?.u,
            Solver::Banded => sys.banded_solve()?,
            Solver::Dense => sys.dense_solve()?,
        })
    }

    fn gap(a: &[f64], b: &[f64]) -> f64 {
        let d = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        d / b.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE)
    }

    fn mms_error(sys: &FdSystem, u: &[f64]) -> (f64, f64) {
        let h = sys.layout.h;
        let (mut linf, mut ss) = (0.0f64, 0.0);
        for (k, v) in u.iter().enumerate() {
            let (x, y) = sys.layout.point(k);
            let e = (v - exact_mms(x, y)).abs();
            linf = linf.max(e);
            ss += e * e;
        }
        (linf, h * ss.sqrt())
    }
}

impl Problem for Fd2D {
    fn id(&self) -> &'static str {
        if self.advection {
            "advdiff2d"
        } else {
            "reacdiff2d"
        }
    }

    fn axes(&self) -> &'static [Axis] {
        &[Axis::M]
    }

    fn check(&self, axis: Axis, value: f64) -> Result<()> {
        if axis != Axis::M {
            return Err(unsupported(self.id(), axis));
        }
        let n = square_side(int_value(axis, value, 4)?)?;
        if self.f_const.is_some() {
            return Err(invalid("an m-sweep measures the manufactured solution; drop f_const"));
        }
        if self.a1.abs().max(self.a2.abs()) / n as f64 > 1.0 {
            return Err(invalid(format!("h max|a| > 1 at m = {value}")));
        }
        Ok(())
    }

    fn cell(&self, axis: Axis, value: f64, _seed: u64) -> Result<Cell> {
        self.check(axis, value)?;
        let sys = self.system(square_side(value as usize)?)?;
        let u = Self::solve(&sys, self.solver)?;
        let (linf, l2) = Self::mms_error(&sys, &u);
        let aux2 = match self.oracle {
            Some(o) if o != self.solver => Self::gap(&u, &Self::solve(&sys, o)?),
            _ => f64::NAN,
        };
        Ok(Cell {
            error_linf: linf,
            error_l2: l2,
            aux1: sys.layout.h,
            aux2,
        })
    }

    fn run(&self, _seed: u64) -> Result<Summary> {
        let sys = self.system(self.grid)?;
        let mut values = vec![
            ("grid", self.grid as f64),
            ("unknowns", sys.layout.len() as f64),
            ("updates", sys.updates.len() as f64),
        ];
        let u = if self.solver == Solver::Cascade {
            let r = cascade_solve(&sys)?;
            let dev = r.condition_log().iter().fold(0.0f64, |m, d| m.max((d - 1.0).abs()));
            values.push(("max_denominator_deviation", dev));
            r.u
        } else {
            Self::solve(&sys, self.solver)?
        };
        values.push(("max_abs_u", u.iter().fold(0.0f64, |m, v| m.max(v.abs()))));
        if let Some(o) = self.oracle.filter(|o| *o != self.solver) {
            values.push(("oracle_gap", Self::gap(&u, &Self::solve(&sys, o)?)));
        }
        if self.f_const.is_none() {
            let (linf, l2) = Self::mms_error(&sys, &u);
            values.extend([("error_linf", linf), ("error_l2", l2)]);
        }
        let rows = (0..sys.layout.len())
            .map(|k| {
                let (x, y) = sys.layout.point(k);
                vec![x, y, u[k]]
            })
            .collect();
        Ok(Summary {
            problem: self.id(),
            values,
            field: Some(Field {
                header: vec!["x", "y", "u"],
                rows,
            }),
        })
    }
}

// ---------------------------------------------------------------------------

pub fn bochner_target(name: &str) -> Result<fn(f64) -> f64> {
    match name {
        "abs-sin" => Ok(|x: f64| x.sin().abs()),
        "triangle" => Ok(|x: f64| PI / 2.0 - x.abs()),
        "smooth" => Ok(|x: f64| (x.sin()).exp()),
        _ => Err(invalid(format!("f = `{name}` (abs-sin | triangle | smooth)"))),
    }
}

struct BochnerRiesz {
    f: fn(f64) -> f64,
    gamma: f64,
    r: f64,
    samples: usize,
}

impl BochnerRiesz {
    const KNOWN: &'static [&'static str] = &["f", "gamma", "r", "samples"];

    fn new(params: &Params) -> Result<Self> {
        params.check_known("bochner-riesz", Self::KNOWN)?;
        let gamma = params.f64("gamma", 1.0)?;
        if gamma < 0.0 {
            return Err(invalid("gamma must be non-negative"));
        }
        Ok(BochnerRiesz {
            f: bochner_target(&params.string("f", "abs-sin"))?,
            gamma,
            r: params.f64("r", 16.0)?,
            samples: params.usize("samples", 4096)?,
        })
    }

    /// (L-inf on a lattice, L2, w2(1/R) in L2)
    fn measure(&self, r: f64) -> Result<(f64, f64, f64, FourierExpansion)> {
        let f = self.f;
        let fe = FourierExpansion::from_callable_1d(f, r, Some(self.samples))?;
        let br = bochner_riesz(&fe, r, self.gamma)?;
        let dom = uniform_domain(-PI, PI, 64)?;
        let ex = |x: f64| Ok(f(x));
        let ap = |x: f64| Ok(br.eval_real(x));
        let linf = error_norm(ex, ap, &dom, Norm::Linf)?;
        let l2 = error_norm(ex, ap, &dom, Norm::L2)?;
        let w = modulus_omega2(f, 1.0 / r, Norm::L2, (-PI, PI), true, self.samples)?;
        Ok((linf, l2, w, br))
    }
}

impl Problem for BochnerRiesz {
    fn id(&self) -> &'static str {
        "bochner-riesz"
    }

    fn axes(&self) -> &'static [Axis] {
        &[Axis::R]
    }

    fn check(&self, axis: Axis, value: f64) -> Result<()> {
        if axis != Axis::R {
            return Err(unsupported(self.id(), axis));
        }
        if !(1.0..=1e4).contains(&value) {
            return Err(invalid(format!("R = {value} must lie in [1, 1e4]")));
        }
        Ok(())
    }

    fn cell(&self, axis: Axis, value: f64, _seed: u64) -> Result<Cell> {
        self.check(axis, value)?;
        let (linf, l2, w, _) = self.measure(value)?;
        Ok(Cell {
            error_linf: linf,
            error_l2: l2,
            aux1: w,
            aux2: l2 / w,
        })
    }

    fn run(&self, _seed: u64) -> Result<Summary> {
        self.check(Axis::R, self.r)?;
        let (linf, l2, w, br) = self.measure(self.r)?;
        let rows = (0..=256)
            .map(|i| {
                let x = -PI + 2.0 * PI * i as f64 / 256.0;
                vec![x, br.eval_real(x), (self.f)(x)]
            })
            .collect();
        Ok(Summary {
            problem: "bochner-riesz",
            values: vec![
                ("r", self.r),
                ("gamma", self.gamma),
                ("error_linf", linf),
                ("error_l2", l2),
                ("omega2", w),
                ("ratio", l2 / w),
            ],
            field: Some(Field {
                header: vec!["x", "mean", "f"],
                rows,
            }),
        })
    }
}

// ---------------------------------------------------------------------------

/// Random reaction-diffusion system on the unit square: `interior` unknowns per
/// side, a3 nodal uniform in [0.05, 2), f = 1 + x y, Dirichlet.
pub fn random_reaction_system(interior: usize, rng: &mut ChaCha8Rng) -> Result<FdSystem> {
    let g = Grid1D::uniform(0.0, 1.0, interior + 1, false)?;
    let g = Grid2D::new(g.clone(), g)?;
    let vals: Vec<f64> = (0..g.value_count()).map(|_| rng.random_range(0.05..2.0)).collect();
    let a3 = PiecewiseFunction2D::new(g.clone(), vals, Order::Linear)?;
    Ok(assemble(
        &g,
        &Coefficients {
            a3: Some(a3),
            ..Default::default()
        },
        |x, y| 1.0 + x * y,
        Boundary::Dirichlet,
    )?)
}

/// Uniform samples from the rational-map input box.
pub fn box_samples(b: RationalBox, n: usize, rng: &mut ChaCha8Rng) -> Vec<[f64; 5]> {
    (0..n)
        .map(|_| {
            [
                rng.random_range(-b.x1..=b.x1),
                rng.random_range(-b.t..=b.t),
                rng.random_range(-b.t..=b.t),
                rng.random_range(-b.t..=b.t),
                rng.random_range(-b.t..=b.t),
            ]
        })
        .collect()
}

pub fn rational_map_error(g: &Gadget, samples: &[[f64; 5]]) -> Result<f64> {
    let mut worst = 0.0f64;
    for x in samples {
        let exact = deeponet_core::cascade::rational_r(x[0], x[1], x[2], x[3], x[4])?;
        worst = worst.max((g.eval(x)? - exact).abs());
    }
    Ok(worst)
}

pub fn square_gadget_error(k: usize, lattice: usize) -> Result<f64> {
    let net = square_gadget(k)?;
    let mut worst = 0.0f64;
    for i in 0..=lattice {
        let x = i as f64 / lattice as f64;
        worst = worst.max((net.eval_scalar(&[x])? - x * x).abs());
    }
    Ok(worst)
}

/// Random systems for one m of an m-sweep.
type SystemsAt = (usize, Vec<FdSystem>);

struct ReluAudit {
    eps: f64,
    k: usize,
    interior: usize,
    systems: usize,
    samples: usize,
    shared: Option<(Gadget, Vec<SystemsAt>)>,
    ladder: Vec<(f64, Gadget)>,
}

impl ReluAudit {
    const KNOWN: &'static [&'static str] = &["eps", "k", "interior", "systems", "samples"];

    fn new(params: &Params) -> Result<Self> {
        params.check_known("relu-audit", Self::KNOWN)?;
        Ok(ReluAudit {
            eps: params.f64("eps", 1e-6)?,
            k: params.usize("k", 8)?,
            interior: params.usize("interior", 4)?,
            systems: params.usize("systems", 3)?.max(1),
            samples: params.usize("samples", 10_000)?,
            shared: None,
            ladder: Vec::new(),
        })
    }

    fn systems_for(&self, interior: usize, seed: u64) -> Result<Vec<FdSystem>> {
        (0..self.systems)
            .map(|s| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(s as u64);
                random_reaction_system(interior, &mut rng)
            })
            .collect()
    }
}

impl Problem for ReluAudit {
    fn id(&self) -> &'static str {
        "relu-audit"
    }

    fn axes(&self) -> &'static [Axis] {
        &[Axis::M, Axis::ThetaSize]
    }

    fn check(&self, axis: Axis, value: f64) -> Result<()> {
        match axis {
            Axis::M => {
                let n = square_side(int_value(axis, value, 4)?)?;
                if n > 12 {
                    return Err(invalid(format!(
                        "m = {value}: blessed audit is limited to 12 x 12 unknowns"
                    )));
                }
                Ok(())
            }
            Axis::ThetaSize => int_value(axis, value, 1).map(|_| ()),
            _ => Err(unsupported(self.id(), axis)),
        }
    }

    /// One N_R on the union of all input boxes of the sweep, so every m sees
    /// the same stage accuracy.
    fn prepare(&mut self, axis: Axis, values: &[f64], seed: u64) -> Result<()> {
        match axis {
            Axis::M => {
                let mut rbox: Option<RationalBox> = None;
                let mut all = Vec::new();
                for &v in values {
                    let m = int_value(axis, v, 4)?;
                    let sys = self.systems_for(square_side(m)?, seed)?;
                    for s in &sys {
                        let b = system_box(s)?;
                        rbox = Some(rbox.map_or(b, |r| union_box(r, b)));
                    }
                    all.push((m, sys));
                }
                let rbox = rbox.ok_or_else(|| invalid("empty sweep"))?;
                self.shared = Some((compile_rational_r_in(self.eps, rbox)?, all));
            }
            Axis::ThetaSize => {
                self.ladder = (2..=7)
                    .map(|d| {
                        let eps = 10f64.powi(-d);
                        Ok((eps, compile_rational_r(eps)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
            }
            _ => {}
        }
        Ok(())
    }

    fn cell(&self, axis: Axis, value: f64, seed: u64) -> Result<Cell> {
        self.check(axis, value)?;
        match axis {
            Axis::M => {
                let m = value as usize;
                let (n_r, all) = self
                    .shared
                    .as_ref()
                    .ok_or_else(|| HarnessError::Usage("relu-audit m-sweep needs prepare".into()))?;
                let systems = &all
                    .iter()
                    .find(|(mm, _)| *mm == m)
                    .ok_or_else(|| invalid(format!("m = {m} was not prepared")))?
                    .1;
                let (mut linf, mut l2) = (0.0f64, 0.0f64);
                let mut cap = None;
                for sys in systems {
                    let net = blessed_cascade_net_with(sys, n_r.clone(), self.eps)?;
                    let out = net.eval(&coefficient_vector(sys)?)?;
                    let exact = cascade_solve(sys)?.u;
                    let d: Vec<f64> = out.u.iter().zip(&exact).map(|(a, b)| (a - b).abs()).collect();
                    linf = linf.max(d.iter().fold(0.0f64, |a, &b| a.max(b)));
                    l2 = l2.max((d.iter().map(|x| x * x).sum::<f64>() / d.len() as f64).sqrt());
                    cap = Some(net.capacity());
                }
                let cap = cap.ok_or_else(|| invalid("no systems"))?;
                let mf = m as f64;
                Ok(Cell {
                    error_linf: linf,
                    error_l2: l2,
                    aux1: cap.width as f64 / (mf * mf * mf.ln()),
                    aux2: cap.depth as f64 / (mf * mf.ln()),
                })
            }
            Axis::ThetaSize => {
                let (eps, g) = self
                    .ladder
                    .iter()
                    .rev()
                    .find(|(_, g)| g.net.size() as f64 <= value)
                    .ok_or_else(|| invalid(format!("no compiled rational map fits in size {value}")))?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let e = rational_map_error(g, &box_samples(RationalBox::default(), self.samples, &mut rng))?;
                Ok(Cell {
                    error_linf: e,
                    error_l2: e,
                    aux1: g.net.size() as f64,
                    aux2: *eps,
                })
            }
            _ => Err(unsupported(self.id(), axis)),
        }
    }

    fn aux1_is_size(&self, axis: Axis) -> bool {
        axis == Axis::ThetaSize
    }

    fn run(&self, seed: u64) -> Result<Summary> {
        let sq = square_gadget_error(self.k, 1 << 14)?;
        let g = compile_rational_r(self.eps)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = rational_map_error(&g, &box_samples(RationalBox::default(), self.samples, &mut rng))?;
        let sys = self.systems_for(self.interior, seed)?.swap_remove(0);
        let net = blessed_cascade_net_with(&sys, compile_rational_r_in(self.eps, system_box(&sys)?)?, self.eps)?;
        let cap = net.capacity();
        let gap = {
            let out = net.eval(&coefficient_vector(&sys)?)?;
            let exact = cascade_solve(&sys)?.u;
            out.u.iter().zip(&exact).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
        };
        Ok(Summary {
            problem: "relu-audit",
            values: vec![
                ("k", self.k as f64),
                ("square_error", sq),
                ("square_bound", 0.25f64.powi(self.k as i32 + 1)),
                ("eps", self.eps),
                ("rational_error", e),
                ("rational_size", g.net.size() as f64),
                ("rational_depth", g.net.depth() as f64),
                ("blessed_unknowns", net.unknowns() as f64),
                ("blessed_width", cap.width as f64),
                ("blessed_depth", cap.depth as f64),
                ("blessed_size", cap.size as f64),
                ("blessed_error", gap),
            ],
            field: None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(s: &str) -> Params {
        let mut p = Params::new();
        p.apply_args(&s.split_whitespace().map(String::from).collect::<Vec<_>>())
            .unwrap();
        p
    }

    #[test]
    fn advdiff_sanity_value() {
        let s = run_problem("advdiff1d", &params("--a-const 0 --f-const 1 --L 1 --m 64 --x 0.5"), 0).unwrap();
        assert!((s.get("exact").unwrap() - 0.125).abs() <= 1e-12);
        assert!((s.get("discrete").unwrap() - 0.125).abs() <= 0.02);
    }

    #[test]
    fn reaction_diffusion_dense_gap() {
        let s = run_problem("reacdiff2d", &params("--grid 10 --a3-const 1 --oracle dense"), 0).unwrap();
        assert!(s.get("oracle_gap").unwrap() <= 1e-9, "{}", s.line());
    }

    #[test]
    fn burgers_against_spectral() {
        let s = run_problem("burgers1d", &params("--kappa 0.5 --m 64 --t 0.25 --x 0.5"), 0).unwrap();
        assert!(s.get("error").unwrap() <= 1e-2, "{}", s.line());
    }

    #[test]
    fn errors_and_axes() {
        assert_eq!(run_problem("nope", &Params::new(), 0).unwrap_err().exit_code(), 2);
        assert_eq!(
            run_problem("advdiff1d", &params("--bogus 1"), 0)
                .unwrap_err()
                .exit_code(),
            2
        );
        assert_eq!(
            run_problem("advdiff1d", &params("--L -1"), 0).unwrap_err().exit_code(),
            3
        );
        let p = build_problem("burgers2d", &Params::new()).unwrap();
        assert!(p.check(Axis::M, 64.0).is_ok());
        assert!(p.check(Axis::M, 65.0).is_err());
        assert_eq!(p.check(Axis::P, 64.0).unwrap_err().exit_code(), 2);
        for a in ["m", "p", "theta_size", "N_paths", "R"] {
            assert_eq!(Axis::parse(a).unwrap().name(), a);
        }
        assert!(Axis::parse("q").is_err());
    }

    #[test]
    fn cell_seeds_depend_on_value_only() {
        assert_eq!(cell_seed(3, 16.0), cell_seed(3, 16.0));
        assert_ne!(cell_seed(3, 16.0), cell_seed(3, 32.0));
        assert_ne!(cell_seed(3, 16.0), cell_seed(4, 16.0));
    }
}
