//! Acceptance criteria 1-11 against the library API. Prints one PASS/FAIL line
//! per criterion and exits nonzero on any failure outside `EXPECTED_FAIL`.
//! Criterion 12 (byte-identical CSVs) lives with the sweep harness.

use deeponet_core::advdiff::{exact_solution, AdvDiffProblem1D, DiscreteSolver, Source};
use deeponet_core::burgers::forced::{forced_burgers_mc, ForcedBurgersConfig, Forcing};
use deeponet_core::burgers::spectral::SpectralColeHopf;
use deeponet_core::burgers::two_d::{burgers_2d_rational, Burgers2DData, Burgers2DExact};
use deeponet_core::burgers::{rational_operator, BurgersProblem1D};
use deeponet_core::cascade::rational_r;
use deeponet_core::cascade::{assemble, cascade_solve, cascade_solve_ordered, Boundary, Coefficients, FdSystem};
use deeponet_core::deeponet::problems::{advdiff_source_model, burgers_model, left_endpoint_samples};
use deeponet_core::deeponet::{operator_error, InputFamily};
use deeponet_core::fourier::{bochner_riesz, FourierExpansion};
use deeponet_core::grid::{Grid1D, Grid2D};
use deeponet_core::interp::{sample_input, sample_input_2d, Order, PiecewiseFunction, PiecewiseFunction2D};
use deeponet_core::norms::{error_norm, modulus_omega2, ErrorDomain, Norm};
use deeponet_core::rates::fit_slope;
use deeponet_core::relu::{
    blessed_cascade_net_with, coefficient_vector, compile_rational_r, compile_rational_r_in, hat_trunk,
    linear_branch_net, square_gadget, system_box, union_box, RationalBox,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

/// Criteria that cannot hold as stated; see the decisions ledger.
const EXPECTED_FAIL: &[&str] = &["2a"];

struct Suite {
    failed: Vec<String>,
}

impl Suite {
    fn record(&mut self, id: &str, name: &str, pass: bool, measured: String) {
        println!("{} [{id}] {name}: {measured}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failed.push(id.to_string());
        }
    }
}

fn sup(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, f64::max)
}

fn burgers_problem(grid: &Grid1D, values: Vec<f64>) -> BurgersProblem1D {
    BurgersProblem1D::new(
        0.5,
        PiecewiseFunction::new(grid.clone(), values, Order::Linear).unwrap(),
    )
    .unwrap()
}

fn c1(s: &mut Suite) {
    let fine = Grid1D::uniform(-PI, PI, 4096, true).unwrap();
    let pf = BurgersProblem1D::new(0.5, sample_input(f64::sin, &fine, Order::Linear).unwrap()).unwrap();
    let reference = SpectralColeHopf::new(&pf, 1024).unwrap().eval(0.5, 0.25).unwrap();
    let pts: Vec<(f64, f64)> = [16, 32, 64, 128, 256]
        .iter()
        .map(|&m| {
            let g = Grid1D::uniform(-PI, PI, m, true).unwrap();
            let p = BurgersProblem1D::new(0.5, sample_input(f64::sin, &g, Order::Linear).unwrap()).unwrap();
            (
                2.0 * PI / m as f64,
                (rational_operator(&p, 0.5, 0.25).unwrap() - reference).abs(),
            )
        })
        .collect();
    let f = fit_slope(&pts).unwrap();
    s.record(
        "1",
        "Burgers 1D rate vs h",
        (f.slope - 1.0).abs() <= 0.15 && f.r_squared >= 0.97,
        format!(
            "slope {:.4}, R^2 {:.4} (target 1.0 +- 0.15, R^2 >= 0.97)",
            f.slope, f.r_squared
        ),
    );
}

fn c2(s: &mut Suite) {
    let fam = InputFamily::burgers();
    let g = fam.native_grid().unwrap();
    let refs: Vec<SpectralColeHopf> = fam
        .inputs
        .iter()
        .map(|i| SpectralColeHopf::new(&burgers_problem(&g, i.values.clone()), 1024).unwrap())
        .collect();
    let err = |m: usize, p: usize| {
        let model = burgers_model(0.5, 0.25, m, p).unwrap();
        let out = Grid1D::uniform(-PI, PI, p, true).unwrap();
        let dom = ErrorDomain::with_breakpoints(out.nodes().to_vec()).unwrap();
        operator_error(
            &model,
            |i, y| refs[i].eval(y, 0.25),
            &fam.at_resolution(m).unwrap(),
            &dom,
        )
        .unwrap()
        .linf
    };
    let axis = [16, 32, 64, 128, 256];
    let vp: Vec<(f64, f64)> = axis.iter().map(|&p| (p as f64, err(512, p))).collect();
    let vm: Vec<(f64, f64)> = axis.iter().map(|&m| (m as f64, err(m, 512))).collect();
    let fp = fit_slope(&vp).unwrap();
    let fm = fit_slope(&vm).unwrap();
    s.record(
        "2a",
        "Burgers DeepONet error vs p at m = 512",
        (fp.slope + 1.0).abs() <= 0.2,
        format!(
            "slope {:.4}, R^2 {:.4}, errors {:?} (target -1.0 +- 0.2)",
            fp.slope,
            fp.r_squared,
            vp.iter().map(|p| p.1).collect::<Vec<_>>()
        ),
    );
    s.record(
        "2b",
        "Burgers DeepONet error vs m at p = 512",
        (fm.slope + 1.0).abs() <= 0.2,
        format!("slope {:.4}, R^2 {:.4} (target -1.0 +- 0.2)", fm.slope, fm.r_squared),
    );
}

fn burgers2d(n: usize) -> Burgers2DData {
    let g = Grid1D::uniform(-PI, PI, n, true).unwrap();
    let xs: Vec<f64> = g.nodes()[..n].to_vec();
    let w = xs
        .iter()
        .flat_map(|&x| xs.iter().map(move |&y| 0.4 * x.sin() * y.sin()))
        .collect();
    let ut = xs.iter().map(|x| 0.5 * x.sin()).collect();
    let vt = xs.iter().map(|y| 0.3 * y.cos()).collect();
    Burgers2DData::from_generators(0.5, Grid2D::new(g.clone(), g).unwrap(), w, ut, vt).unwrap()
}

fn c3(s: &mut Suite) {
    let ex = Burgers2DExact::new(&burgers2d(128), 1).unwrap();
    let pts: Vec<(f64, f64)> = (0..4)
        .flat_map(|i| (0..4).map(move |j| (-PI + (i as f64 + 0.37) * PI / 2.0, -PI + (j as f64 + 0.61) * PI / 2.0)))
        .collect();
    let refs: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| ex.eval(x, y, 0.25).unwrap()).collect();
    let vals: Vec<(f64, f64)> = [8, 16, 32]
        .iter()
        .map(|&n| {
            let d = burgers2d(n);
            let e = sup(pts.iter().zip(&refs).map(|(&(x, y), &(u, v))| {
                let (ur, vr) = burgers_2d_rational(&d, x, y, 0.25).unwrap();
                (u - ur).abs().max((v - vr).abs())
            }));
            (2.0 * PI / n as f64, e)
        })
        .collect();
    let f = fit_slope(&vals).unwrap();
    s.record(
        "3",
        "Burgers 2D rate vs h",
        (f.slope - 1.0).abs() <= 0.25,
        format!("slope {:.4}, R^2 {:.4} (target 1.0 +- 0.25)", f.slope, f.r_squared),
    );
}

fn c4(s: &mut Suite) {
    let pattern = [-2.0, -1.5, -1.0, -0.5, 0.5, 1.0, 1.5, 2.0];
    let f: Source = Arc::new(|x| 1.0 + x);
    let exact =
        AdvDiffProblem1D::from_cells(Grid1D::uniform(0.0, 1.0, 8, false).unwrap(), &pattern, f.clone()).unwrap();
    let pts: Vec<(f64, f64)> = [16, 32, 64, 128, 256]
        .iter()
        .map(|&m| {
            let g = Grid1D::uniform(0.0, 1.0, m, false).unwrap();
            let cells: Vec<f64> = (0..m).map(|j| pattern[j * 8 / m]).collect();
            let solver = DiscreteSolver::new(&AdvDiffProblem1D::from_cells(g.clone(), &cells, f.clone()).unwrap());
            let dom = ErrorDomain::with_breakpoints(g.nodes().to_vec()).unwrap();
            let e = error_norm(|x| exact_solution(&exact, x), |x| solver.eval(x), &dom, Norm::Linf).unwrap();
            (1.0 / m as f64, e)
        })
        .collect();
    let fit = fit_slope(&pts).unwrap();
    s.record(
        "4a",
        "advection-diffusion 1D rate vs h",
        (fit.slope - 1.0).abs() <= 0.15,
        format!("slope {:.4}, R^2 {:.4} (target 1.0 +- 0.15)", fit.slope, fit.r_squared),
    );
    let g = Grid1D::uniform(0.0, 1.0, 64, false).unwrap();
    let p = AdvDiffProblem1D::from_cells(g, &[0.0; 64], Arc::new(|_| 1.0)).unwrap();
    let u = exact_solution(&p, 0.5).unwrap();
    s.record(
        "4b",
        "a = 0, f = 1 gives u(0.5) = 1/8",
        (u - 0.125).abs() <= 1e-12,
        format!("u(0.5) = {u:?}"),
    );
}

fn reaction_system(interior: usize, rng: &mut ChaCha8Rng) -> FdSystem {
    let g = Grid1D::uniform(0.0, 1.0, interior + 1, false).unwrap();
    let g = Grid2D::new(g.clone(), g).unwrap();
    let vals: Vec<f64> = (0..g.value_count()).map(|_| rng.random_range(0.05..2.0)).collect();
    let a3 = PiecewiseFunction2D::new(g.clone(), vals, Order::Linear).unwrap();
    assemble(
        &g,
        &Coefficients {
            a3: Some(a3),
            ..Default::default()
        },
        |x, y| 1.0 + x * y,
        Boundary::Dirichlet,
    )
    .unwrap()
}

fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    sup(a.iter().zip(b).map(|(x, y)| (x - y).abs())) / sup(b.iter().map(|x| x.abs()))
}

fn c5(s: &mut Suite) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut worst, mut worst_perm) = (0.0f64, 0.0f64);
    for case in 0..20 {
        let interior = 2 + case * 18 / 19;
        let sys = reaction_system(interior, &mut rng);
        let u = cascade_solve(&sys).unwrap().u;
        worst = worst.max(rel_diff(&u, &sys.dense_solve().unwrap()));
        let mut order: Vec<usize> = (0..sys.updates.len()).collect();
        for i in (1..order.len()).rev() {
            order.swap(i, rng.random_range(0..=i));
        }
        let up = cascade_solve_ordered(&sys, &order).unwrap().u;
        worst_perm = worst_perm.max(rel_diff(&up, &u));
    }
    s.record(
        "5a",
        "cascade vs dense solve, 20 systems up to 20x20",
        worst <= 1e-8,
        format!("max relative gap {worst:e} (<= 1e-8)"),
    );
    s.record(
        "5b",
        "update-order invariance",
        worst_perm <= 1e-10,
        format!("max relative gap {worst_perm:e} (<= 1e-10)"),
    );
}

fn c6(s: &mut Suite) {
    let u = |x: f64, y: f64| (PI * x).sin() * (PI * y).sin();
    let pts: Vec<(f64, f64)> = [8, 16, 32, 64]
        .iter()
        .map(|&cells| {
            let g = Grid1D::uniform(0.0, 1.0, cells, false).unwrap();
            let g = Grid2D::new(g.clone(), g).unwrap();
            let a3 = sample_input_2d(|x, y| 1.0 + x * y, &g, Order::Linear).unwrap();
            let sys = assemble(
                &g,
                &Coefficients {
                    a3: Some(a3),
                    ..Default::default()
                },
                |x, y| (2.0 * PI * PI + 1.0 + x * y) * u(x, y),
                Boundary::Dirichlet,
            )
            .unwrap();
            let uh = sys.banded_solve().unwrap();
            let e = sup((0..sys.layout.len()).map(|k| {
                let (x, y) = sys.layout.point(k);
                (uh[k] - u(x, y)).abs()
            }));
            (1.0 / cells as f64, e)
        })
        .collect();
    let f = fit_slope(&pts).unwrap();
    s.record(
        "6",
        "finite-difference manufactured rate vs h",
        (f.slope - 2.0).abs() <= 0.15,
        format!("slope {:.4}, R^2 {:.4} (target 2.0 +- 0.15)", f.slope, f.r_squared),
    );
}

fn c7(s: &mut Suite) {
    let eps = 1e-6;
    let sizes = [(4, 16), (6, 36), (8, 64)];
    let seeds = [1u64, 2, 3];
    let systems: Vec<Vec<FdSystem>> = sizes
        .iter()
        .map(|&(interior, _)| {
            seeds
                .iter()
                .map(|&sd| reaction_system(interior, &mut ChaCha8Rng::seed_from_u64(sd)))
                .collect()
        })
        .collect();
    let mut rbox: Option<RationalBox> = None;
    for sys in systems.iter().flatten() {
        let b = system_box(sys).unwrap();
        rbox = Some(rbox.map_or(b, |r| union_box(r, b)));
    }
    let n_r = compile_rational_r_in(eps, rbox.unwrap()).unwrap();
    let mut growth = Vec::new();
    let mut width_ratio = Vec::new();
    let mut depth_ratio = Vec::new();
    for (row, &(_, m)) in systems.iter().zip(&sizes) {
        let mut worst = 0.0f64;
        for sys in row {
            let net = blessed_cascade_net_with(sys, n_r.clone(), eps).unwrap();
            let out = net.eval(&coefficient_vector(sys).unwrap()).unwrap();
            let exact = cascade_solve(sys).unwrap().u;
            worst = worst.max(sup(out.u.iter().zip(&exact).map(|(a, b)| (a - b).abs())));
            let cap = net.capacity();
            let mf = m as f64;
            width_ratio.push(cap.width as f64 / (mf * mf * mf.ln()));
            depth_ratio.push(cap.depth as f64 / (mf * mf.ln()));
        }
        growth.push((m as f64, worst / eps));
    }
    let f = fit_slope(&growth).unwrap();
    s.record(
        "7a",
        "blessed-net accumulation exponent in m",
        f.slope <= 1.2,
        format!(
            "exponent {:.4}, error/eps {:?} (<= 1.2)",
            f.slope,
            growth.iter().map(|g| g.1).collect::<Vec<_>>()
        ),
    );
    let spread = |v: &[f64]| sup(v.iter().copied()) / v.iter().copied().fold(f64::INFINITY, f64::min);
    let (sw, sd) = (spread(&width_ratio), spread(&depth_ratio));
    s.record(
        "7b",
        "capacity ratios width/(m^2 ln m), depth/(m ln m) bounded",
        sw <= 2.0 && sd <= 2.0,
        format!("max/min spread width {sw:.3}, depth {sd:.3} (<= 2)"),
    );
}

fn c8(s: &mut Suite) {
    let mut worst_sq = 0.0f64;
    for k in 1..=8 {
        let net = square_gadget(k).unwrap();
        let n = 1 << 14;
        let e = sup((0..=n).map(|i| {
            let x = i as f64 / n as f64;
            (net.eval_scalar(&[x]).unwrap() - x * x).abs()
        }));
        worst_sq = worst_sq.max(e / 0.25f64.powi(k as i32 + 1));
    }
    s.record(
        "8a",
        "square gadget error <= 2^(-2k-2), k <= 8",
        worst_sq <= 1.0 + 1e-12,
        format!("max error / bound {worst_sq:.6}"),
    );
    let b = RationalBox::default();
    let mut sizes = Vec::new();
    let mut ok = true;
    let mut detail = Vec::new();
    for (i, eps) in [1e-2, 1e-4, 1e-6].into_iter().enumerate() {
        let g = compile_rational_r(eps).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(80 + i as u64);
        let mut worst = 0.0f64;
        for _ in 0..100_000 {
            let x = [
                rng.random_range(-b.x1..=b.x1),
                rng.random_range(-b.t..=b.t),
                rng.random_range(-b.t..=b.t),
                rng.random_range(-b.t..=b.t),
                rng.random_range(-b.t..=b.t),
            ];
            let exact = rational_r(x[0], x[1], x[2], x[3], x[4]).unwrap();
            worst = worst.max((g.eval(&x).unwrap() - exact).abs());
        }
        ok &= worst <= eps;
        detail.push(format!("eps {eps:e}: {worst:.3e}"));
        sizes.push(g.net.size() as f64);
    }
    s.record(
        "8b",
        "compiled rational map error <= eps on 1e5 samples",
        ok,
        detail.join(", "),
    );
    let growth = sup(sizes.windows(2).map(|w| w[1] / w[0]));
    s.record(
        "8c",
        "size growth per 100x accuracy",
        growth <= 8.0,
        format!("max ratio {growth:.3}, sizes {sizes:?} (<= 8)"),
    );
}

fn c9(s: &mut Suite) {
    let g = Grid1D::from_nodes(vec![0.0, 0.1, 0.35, 0.4, 0.7, 1.0], false).unwrap();
    let mut worst = 0.0f64;
    for i in 0..g.value_count() {
        let net = hat_trunk(&g, i).unwrap();
        let mut e = vec![0.0; g.value_count()];
        e[i] = 1.0;
        let exact = PiecewiseFunction::new(g.clone(), e, Order::Linear).unwrap();
        for k in 0..=10_000 {
            let x = k as f64 / 10_000.0;
            worst = worst.max((net.eval_scalar(&[x]).unwrap() - exact.eval(x).unwrap()).abs());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst_lin = 0.0f64;
    for _ in 0..1000 {
        let c: Vec<f64> = (0..16).map(|_| rng.random_range(-1.0..1.0)).collect();
        let u: Vec<f64> = (0..16).map(|_| rng.random_range(-1.0..1.0)).collect();
        let net = linear_branch_net(&c).unwrap();
        let exact: f64 = c.iter().zip(&u).map(|(a, b)| a * b).sum();
        worst_lin = worst_lin.max((net.eval_scalar(&u).unwrap() - exact).abs());
    }
    // linear operator: branch values equal the discrete operator at the nodes
    let a = [0.5, -1.0, 2.0, 0.0, 1.0, 1.5, -0.5, 0.25];
    let model = advdiff_source_model(1.0, &a, 16).unwrap();
    let grid = Grid1D::uniform(0.0, 1.0, 8, false).unwrap();
    let fx = |x: f64| 1.0 + (3.0 * x).sin();
    let b = model
        .branch_values(&left_endpoint_samples(fx, 1.0, 8).unwrap())
        .unwrap();
    let solver = DiscreteSolver::new(&AdvDiffProblem1D::from_cells(grid, &a, Arc::new(fx)).unwrap());
    let worst_op = sup(model
        .domain_nodes()
        .iter()
        .zip(&b)
        .map(|(&y, v)| (v - solver.eval(y).unwrap()).abs()));
    s.record(
        "9",
        "exact hat trunks and linear branches",
        worst <= 1e-13 && worst_lin <= 1e-13 && worst_op <= 1e-13,
        format!("hat {worst:.2e}, linear net {worst_lin:.2e}, linear operator branches {worst_op:.2e} (<= 1e-13)"),
    );
}

fn c10(s: &mut Suite) {
    let g = Grid1D::uniform(-PI, PI, 64, true).unwrap();
    let u0 = sample_input(|x| 0.5 * x.sin(), &g, Order::Linear).unwrap();
    let forcing = Forcing::stationary(&g, |x| 0.2 * (2.0 * x).cos()).unwrap();
    let pts: Vec<(f64, f64)> = [1_000usize, 10_000, 100_000]
        .iter()
        .map(|&n| {
            let cfg = ForcedBurgersConfig::new(0.5, u0.clone(), n, 0.01, 7).with_forcing(forcing.clone());
            (n as f64, forced_burgers_mc(&cfg, 0.5, 0.25).unwrap().std_error)
        })
        .collect();
    let f = fit_slope(&pts).unwrap();
    s.record(
        "10a",
        "forced Burgers Monte Carlo standard-error slope",
        (f.slope + 0.5).abs() <= 0.1,
        format!("slope {:.4} (target -0.5 +- 0.1)", f.slope),
    );
    let cfg = ForcedBurgersConfig::new(0.5, u0.clone(), 100_000, 0.01, 11);
    let est = forced_burgers_mc(&cfg, 0.5, 0.25).unwrap();
    let p = BurgersProblem1D::new(0.5, u0).unwrap();
    let exact = SpectralColeHopf::new(&p, 1024).unwrap().eval(0.5, 0.25).unwrap();
    let z = (est.value - exact).abs() / est.std_error;
    s.record(
        "10b",
        "unforced estimate vs Cole-Hopf at N = 1e5",
        z <= 3.0,
        format!("|diff| = {z:.3} standard errors (<= 3)"),
    );
}

fn c11(s: &mut Suite) {
    let f = |x: f64| x.sin().abs();
    // 64 cells keep the 16-point rule per half cell resolving modes up to R = 32
    let dom = ErrorDomain::with_breakpoints(Grid1D::uniform(-PI, PI, 64, false).unwrap().nodes().to_vec()).unwrap();
    let mut errs = Vec::new();
    let mut ok = true;
    let mut detail = Vec::new();
    for r in [8.0, 16.0, 32.0] {
        let fe = FourierExpansion::from_callable_1d(f, r, Some(4096)).unwrap();
        let br = bochner_riesz(&fe, r, 1.0).unwrap();
        let e = error_norm(|x| Ok(f(x)), |x| Ok(br.eval_real(x)), &dom, Norm::L2).unwrap();
        let w = modulus_omega2(f, 1.0 / r, Norm::L2, (-PI, PI), true, 4096).unwrap();
        ok &= e <= 10.0 * w;
        detail.push(format!("R {r}: {e:.3e} vs 10 w2 {:.3e}", 10.0 * w));
        errs.push(e);
    }
    let decreasing = errs.windows(2).all(|w| w[1] < w[0]);
    s.record(
        "11",
        "Bochner-Riesz error bounded by w2 and decreasing",
        ok && decreasing,
        detail.join(", "),
    );
}

fn main() {
    let mut s = Suite { failed: Vec::new() };
    let start = Instant::now();
    let criteria: [fn(&mut Suite); 11] = [c1, c2, c3, c4, c5, c6, c7, c8, c9, c10, c11];
    for c in criteria {
        c(&mut s);
    }
    println!("acceptance finished in {:.1} s", start.elapsed().as_secs_f64());
    let unexpected: Vec<&String> = s
        .failed
        .iter()
        .filter(|id| !EXPECTED_FAIL.contains(&id.as_str()))
        .collect();
    for id in s.failed.iter().filter(|id| EXPECTED_FAIL.contains(&id.as_str())) {
        println!("note: criterion {id} fails as documented");
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
