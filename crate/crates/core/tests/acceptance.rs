//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria tagged `known` are implemented as stated and are expected to fail; the
//! process exits nonzero only when an untagged criterion fails.

use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use hermcurv::conformal::{
    conformal_oracle_check, factor_invariants, factor_jet, transformed_ric34, transformed_s2, transformed_s2_bismut,
    transformed_s2_chern, transformed_theta34_chern, LastTerm, SHIPPED,
};
use hermcurv::curvature::{
    classify, einstein_residual, gauduchon_ricci, scalar_comparison_defect, scalar_via_identity, torsion_diagnostics,
};
use hermcurv::expr::parse_expr;
use hermcurv::grid::{integrate, laplacian_duality_defect, GridMetric, Scheme, TorusGrid};
use hermcurv::metric::inverse_and_det;
use hermcurv::solvers::{
    bismut_yamabe_minimize, continuity_solve, solve_chern_negative, solve_chern_zero, solve_laplace, BismutOptions,
    ContinuityOptions, Start, YamabeConstants,
};
use hermcurv::{ChartPoint, ModelManifold, C64};

const GOLDEN_TOL: f64 = 1e-8;
const GOLDEN_BUDGET: f64 = 1.0;
const ORACLE_TOL: f64 = 1e-7;
const ORACLE_BUDGET: f64 = 30.0;
const COMPARISON_TOL: f64 = 1e-8;
const TWO_PATH_TOL: f64 = 1e-7;
const MIN_ORDER: f64 = 1.8;
const SOLVER_BUDGET: f64 = 120.0;
const PATH_RESIDUAL: f64 = 1e-8;
const UNIQUENESS_TOL: f64 = 1e-6;
const LAMBDA_REL_TOL: f64 = 1e-3;
const MU_FLAT_TOL: f64 = 1e-8;
const EL_TOL: f64 = 1e-6;
const CROSS_SOLVER_TOL: f64 = 1e-3;
const KAHLER_REJECT: f64 = 0.1;

const TS: [f64; 5] = [-1.0, 0.0, 0.3, 1.0, 2.0];
const TAU: &str = "6.283185307179586";

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

struct Criterion {
    id: &'static str,
    known: bool,
    budget: f64,
    run: fn() -> Outcome,
}

fn man(name: &str, n: Option<usize>, m: Option<f64>) -> ModelManifold {
    ModelManifold::named(name, n, m).unwrap()
}

fn grid_metric(m: &ModelManifold, nn: usize, active: Option<Vec<usize>>, scheme: Scheme) -> GridMetric {
    let active = active.unwrap_or_else(|| (0..2 * m.n).collect());
    GridMetric::new(m, Arc::new(TorusGrid::reduced(m.n, nn, None, active, scheme).unwrap())).unwrap()
}

fn max_abs(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, |a, b| a.max(b.abs()))
}

fn order(errs: &[f64]) -> f64 {
    errs.windows(2).map(|w| (w[0] / w[1]).log2()).fold(f64::INFINITY, f64::min)
}

/// Max deviation of `s1`, `s2` of the Chern connection from the given values.
fn scalar_golden(m: &ModelManifold, points: usize, s1: f64, s2: f64) -> (f64, f64) {
    let (mut d1, mut d2) = (0.0f64, 0.0f64);
    for p in m.sample_points(points, 42) {
        let r = gauduchon_ricci(&m.jet(&p).unwrap(), 0.0).unwrap();
        d1 = d1.max((r.s1 - s1).abs());
        d2 = d2.max((r.s2 - s2).abs());
    }
    (d1, d2)
}

fn golden_s1(name: &str, n: Option<usize>, m: Option<f64>, s1: f64, s2: f64) -> Outcome {
    let (d1, _) = scalar_golden(&man(name, n, m), 100, s1, s2);
    outcome(d1 < GOLDEN_TOL, format!("s_c1 = {s1}: max deviation {d1:.2e}"))
}

fn golden_s2(name: &str, n: Option<usize>, m: Option<f64>, s1: f64, s2: f64) -> Outcome {
    let (_, d2) = scalar_golden(&man(name, n, m), 100, s1, s2);
    outcome(d2 < GOLDEN_TOL, format!("s_c2 = {s2}: max deviation {d2:.2e}"))
}

// 1. Pointwise golden values

fn hopf2_scalars() -> Outcome {
    let (d1, d2) = scalar_golden(&man("hopf", Some(2), None), 100, 0.5, 0.25);
    outcome(d1.max(d2) < GOLDEN_TOL, format!("s_c1 = 1/2, s_c2 = 1/4 at 100 points: deviations {d1:.2e}, {d2:.2e}"))
}

fn hopf3_scalars() -> Outcome {
    let (d1, d2) = scalar_golden(&man("hopf", Some(3), None), 100, 1.5, 0.5);
    outcome(d1.max(d2) < GOLDEN_TOL, format!("s_c1 = 3/2, s_c2 = 1/2 at 100 points: deviations {d1:.2e}, {d2:.2e}"))
}

fn hopf_theta2() -> Outcome {
    let m = man("hopf", Some(2), None);
    let mut worst = 0.0f64;
    for p in m.sample_points(100, 42) {
        let jet = m.jet(&p).unwrap();
        let r = gauduchon_ricci(&jet, 0.0).unwrap();
        for ij in 0..4 {
            worst = worst.max((r.ric2[ij] - jet.h(ij / 2, ij % 2) * 0.25).norm());
        }
    }
    outcome(worst < GOLDEN_TOL, format!("Θ2 = ω/4: max entry deviation {worst:.2e}"))
}

/// `(δ_ij|z|² − z^i z̄^j)/|z|⁴` against `Θ3` and `Θ4`.
fn hopf_theta34(points: Vec<ChartPoint>) -> f64 {
    let m = man("hopf", Some(2), None);
    let mut worst = 0.0f64;
    for p in points {
        let z = &p.coords;
        let r2: f64 = z.iter().map(|v| v.norm_sqr()).sum();
        let r = gauduchon_ricci(&m.jet(&p).unwrap(), 0.0).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let d = if i == j { r2 } else { 0.0 };
                let want = (C64::new(d, 0.0) - z[i] * z[j].conj()) / (r2 * r2);
                worst = worst.max((r.ric3[i * 2 + j] - want).norm()).max((r.ric4[i * 2 + j] - want).norm());
            }
        }
    }
    worst
}

fn hopf_theta34_complex() -> Outcome {
    let worst = hopf_theta34(man("hopf", Some(2), None).sample_points(100, 42));
    outcome(worst < GOLDEN_TOL, format!("Θ3 = Θ4 display at 100 complex points: max deviation {worst:.2e}"))
}

fn hopf_theta34_real() -> Outcome {
    let pts = man("hopf", Some(2), None)
        .sample_points(100, 42)
        .into_iter()
        .map(|p| ChartPoint::new(p.coords.iter().map(|z| C64::new(z.re, 0.0)).collect()))
        .filter(|p| p.coords.iter().any(|z| z.re.abs() > 0.1))
        .collect();
    let worst = hopf_theta34(pts);
    outcome(worst < GOLDEN_TOL, format!("Θ3 = Θ4 display at real points: max deviation {worst:.2e}"))
}

fn elliptic_s1() -> Outcome {
    golden_s1("elliptic", None, None, -0.5, -1.5)
}

fn elliptic_s2() -> Outcome {
    golden_s2("elliptic", None, None, -0.5, -1.5)
}

fn elliptic_s2_oracle() -> Outcome {
    golden_s2("elliptic", None, None, -0.5, -0.75)
}

/// Max deviation of the `dz¹∧dz̄¹` coefficient of `Θ3` from `c/y²`, other entries from 0.
fn elliptic_theta3(c: f64) -> f64 {
    let m = man("elliptic", None, None);
    let mut worst = 0.0f64;
    for p in m.sample_points(100, 42) {
        let y = p.coords[0].im;
        let r = gauduchon_ricci(&m.jet(&p).unwrap(), 0.0).unwrap();
        for ij in 0..m.n * m.n {
            let want = if ij == 0 { c / (y * y) } else { 0.0 };
            worst = worst.max((r.ric3[ij] - want).norm());
        }
    }
    worst
}

fn elliptic_theta3_display() -> Outcome {
    let w = elliptic_theta3(-1.5);
    outcome(w < GOLDEN_TOL, format!("Θ3 = −3/(2y²) √−1dz¹∧dz̄¹: max deviation {w:.2e}"))
}

fn elliptic_theta3_oracle() -> Outcome {
    let w = elliptic_theta3(-0.75);
    outcome(w < GOLDEN_TOL, format!("Θ3 = −3/(4y²) √−1dz¹∧dz̄¹: max deviation {w:.2e}"))
}

fn inoue1_s1() -> Outcome {
    golden_s1("inoue1", None, None, -0.25, -1.25)
}

fn inoue1_s2() -> Outcome {
    golden_s2("inoue1", None, None, -0.25, -1.25)
}

fn inoue1_s2_oracle() -> Outcome {
    golden_s2("inoue1", None, None, -0.25, -0.5)
}

fn inoue1_ddstar(c: f64) -> f64 {
    let m = man("inoue1", None, None);
    let mut worst = 0.0f64;
    for p in m.sample_points(100, 42) {
        let y = p.coords[0].im;
        let d = torsion_diagnostics(&m.jet(&p).unwrap()).unwrap();
        for ij in 0..4 {
            let want = if ij == 0 { c / (y * y) } else { 0.0 };
            worst = worst.max((d.ddstar[ij] - want).norm());
        }
    }
    worst
}

fn inoue1_ddstar_display() -> Outcome {
    let w = inoue1_ddstar(1.0);
    outcome(w < GOLDEN_TOL, format!("∂∂*ω = √−1/y² dz¹∧dz̄¹: max deviation {w:.2e}"))
}

fn inoue1_ddstar_oracle() -> Outcome {
    let w = inoue1_ddstar(0.25);
    outcome(w < GOLDEN_TOL, format!("∂∂*ω = √−1/(4y²) dz¹∧dz̄¹: max deviation {w:.2e}"))
}

fn inoue2_s1() -> Outcome {
    let mut worst = 0.0f64;
    for m in [0.0, 1.0, 2.0] {
        worst = worst.max(scalar_golden(&man("inoue2", None, Some(m)), 100, -0.5, 0.0).0);
    }
    outcome(worst < GOLDEN_TOL, format!("s_c1 = −1/2 for m = 0, 1, 2: max deviation {worst:.2e}"))
}

fn inoue2_s2(paper: bool) -> Outcome {
    let mut worst = 0.0f64;
    for m in [0.0f64, 1.0, 2.0] {
        let want = if paper { -1.0 - m * m / 2.0 } else { -0.5 - (1.0 + m * m) / 4.0 };
        worst = worst.max(scalar_golden(&man("inoue2", None, Some(m)), 100, 0.0, want).1);
    }
    let shown = if paper { "−1 − m²/2" } else { "−1/2 − (1 + m²)/4" };
    outcome(worst < GOLDEN_TOL, format!("s_c2 = {shown} for m = 0, 1, 2: max deviation {worst:.2e}"))
}

fn inoue2_s2_display() -> Outcome {
    inoue2_s2(true)
}

fn inoue2_s2_oracle() -> Outcome {
    inoue2_s2(false)
}

// 2. Identity suites

const ORACLE_METRICS: [(&str, Option<usize>, Option<f64>); 5] = [
    ("hopf", Some(2), None),
    ("hopf", Some(3), None),
    ("inoue2", None, Some(1.0)),
    ("elliptic", None, None),
    ("torsion-strip", Some(2), None),
];

const FACTORS: [&str; 5] = [
    "0.3*re(z1)",
    "0.2*abs2(z2) - 0.1*im(z1)",
    "0.1*re(z1*zb2) + 0.05*abs2(z1)",
    "0.2*re(exp(0.5*z2))",
    "log(1 + 0.3*abs2(z1 - z2))",
];

fn oracle(last: LastTerm) -> (f64, usize) {
    let mut worst = 0.0f64;
    let mut rows = 0;
    for (name, n, m) in ORACLE_METRICS {
        let mf = man(name, n, m);
        let pts = mf.sample_points(20, 7);
        for src in FACTORS {
            let f = parse_expr(src).unwrap();
            for t in [0.0, 0.5, 1.0, -1.0] {
                let r = conformal_oracle_check(&mf, &f, t, &pts, last).unwrap();
                rows += r.rows.len();
                worst = worst.max(r.max_defect());
            }
        }
    }
    (worst, rows)
}

fn conformal_oracle() -> Outcome {
    let (worst, rows) = oracle(SHIPPED);
    outcome(worst < ORACLE_TOL, format!("{rows} rows, max defect of S2, Ric3, Ric4 {worst:.2e}"))
}

fn conformal_oracle_verbatim() -> Outcome {
    let (worst, rows) = oracle(LastTerm::Verbatim);
    outcome(worst < ORACLE_TOL, format!("last term −t²√−1∂̄*ω∧∂̄f: {rows} rows, max defect {worst:.2e}"))
}

fn specializations() -> Outcome {
    let mut same = true;
    let mut count = 0;
    for (name, n, m) in ORACLE_METRICS {
        let mf = man(name, n, m);
        for p in mf.sample_points(20, 9) {
            let jet = mf.jet(&p).unwrap();
            for src in FACTORS {
                let fj = factor_jet(&parse_expr(src).unwrap(), &p, &mf.params).unwrap();
                same &= transformed_s2_chern(&jet, &fj).unwrap() == transformed_s2(&jet, &fj, 0.0).unwrap();
                same &= transformed_s2_bismut(&jet, &fj).unwrap() == transformed_s2(&jet, &fj, 1.0).unwrap();
                let (th3, th4) = transformed_theta34_chern(&jet, &fj).unwrap();
                let r = transformed_ric34(&jet, &fj, 0.0).unwrap();
                same &= th3 == r.ric3 && th4 == r.ric4;
                count += 1;
            }
        }
    }
    outcome(same, format!("Chern and Bismut specializations bit-identical to the general law at {count} jets"))
}

fn comparison_identity() -> Outcome {
    let names: [(&str, Option<usize>, Option<f64>); 9] = [
        ("hopf", Some(2), None),
        ("hopf", Some(3), None),
        ("elliptic", None, None),
        ("inoue1", None, None),
        ("inoue2", None, Some(1.0)),
        ("flat-torus", Some(2), None),
        ("kaehler-bump", Some(2), None),
        ("kaehler-bump-scaled", Some(2), None),
        ("torsion-strip", Some(2), None),
    ];
    let mut worst = 0.0f64;
    let mut used = 0;
    for (name, n, m) in names {
        let mf = man(name, n, m);
        if !mf.declared_gauduchon {
            continue;
        }
        used += 1;
        for p in mf.sample_points(50, 3) {
            let jet = mf.jet(&p).unwrap();
            for t in TS {
                worst = worst.max(scalar_comparison_defect(&jet, t).unwrap().abs());
            }
        }
    }
    outcome(worst < COMPARISON_TOL, format!("{used} Gauduchon metrics × 50 points × 5 t: max defect {worst:.2e}"))
}

fn two_path_scalars() -> Outcome {
    let names = ["hopf", "elliptic", "inoue1", "inoue2", "flat-torus", "kaehler-bump", "kaehler-bump-scaled", "kaehler-strip", "torsion-strip"];
    let mut worst = 0.0f64;
    for name in names {
        let mf = man(name, None, None);
        for p in mf.sample_points(50, 5) {
            let jet = mf.jet(&p).unwrap();
            for t in TS {
                let r = gauduchon_ricci(&jet, t).unwrap();
                let (s1, s2) = scalar_via_identity(&jet, t).unwrap();
                worst = worst.max((r.s1 - s1).abs()).max((r.s2 - s2).abs());
            }
        }
    }
    outcome(worst < TWO_PATH_TOL, format!("9 metrics × 50 points × 5 t: max defect {worst:.2e}"))
}

fn laplacian_duality() -> Outcome {
    let base = man("torsion-strip", Some(2), None);
    let g = parse_expr(&format!("0.1*re(exp(i*{TAU}*re(z1)))")).unwrap();
    let mf = hermcurv::conformal::conformal_manifold(&base, &g).unwrap();
    let mut errs = vec![];
    for nn in [8, 16, 32] {
        let gm = grid_metric(&mf, nn, Some(vec![0, 1]), Scheme::Fd2);
        let tau = 2.0 * std::f64::consts::PI;
        let u = gm.grid.sample(|x| (tau * x[0]).sin() * (tau * x[1]).cos() + 0.3 * (tau * x[1]).sin());
        errs.push(laplacian_duality_defect(&gm, &u).unwrap());
    }
    let o = order(&errs);
    outcome(o >= MIN_ORDER, format!("defects {:.2e}, {:.2e}, {:.2e}: order {o:.2}", errs[0], errs[1], errs[2]))
}

// 3. Solvers

fn sampled(mf: &ModelManifold, gm: &GridMetric, src: &str) -> (Vec<f64>, Vec<f64>) {
    let e = parse_expr(src).unwrap();
    (0..gm.nodes())
        .map(|p| {
            let x = gm.grid.point(p);
            let fj = factor_jet(&e, &x, &mf.params).unwrap();
            (fj.f, factor_invariants(&mf.jet(&x).unwrap(), &fj).unwrap().laplacian)
        })
        .unzip()
}

fn manufactured_zero() -> Outcome {
    let mf = man("kaehler-strip", Some(2), None);
    let src = format!("0.3*re(exp(i*{TAU}*re(z1))) + 0.2*im(exp(i*{TAU}*(re(z1) + im(z1))))");
    let mut errs = vec![];
    for nn in [8, 16, 32] {
        let gm = grid_metric(&mf, nn, Some(vec![0, 1]), Scheme::Fd2);
        let (f, s) = sampled(&mf, &gm, &src);
        let (u, _) = solve_laplace(&gm, &s, 1e-13).unwrap();
        let mean = integrate(&gm, &f) / gm.volume();
        errs.push(max_abs(u.iter().zip(&f).map(|(a, b)| a - b + mean)));
    }
    let o = order(&errs);
    outcome(o >= MIN_ORDER, format!("L∞ errors {:.2e}, {:.2e}, {:.2e}: order {o:.2}", errs[0], errs[1], errs[2]))
}

fn manufactured_negative() -> Outcome {
    let mf = man("kaehler-bump", Some(2), None);
    let gm = grid_metric(&mf, 16, None, Scheme::Fd2);
    let lambda = -4.0;
    let src = format!(
        "0.2 + 0.05*re(exp(i*{TAU}*(re(z1) + im(z2)))) + 0.04*abs2(exp(i*{TAU}*im(z1)) - 1) + 0.03*abs2(exp(i*{TAU}*re(z2)) - 1)"
    );
    let (fstar, lap) = sampled(&mf, &gm, &src);
    let s: Vec<f64> = (0..gm.nodes()).map(|p| lap[p] + lambda * fstar[p].exp()).collect();
    if fstar.iter().any(|v| *v < 0.0) || s.iter().any(|v| *v >= 0.0) {
        let smax = s.iter().fold(f64::NEG_INFINITY, |a, b| a.max(*b));
        let fmin = fstar.iter().fold(f64::INFINITY, |a, b| a.min(*b));
        return outcome(false, format!("manufactured data violates f* ≥ 0 or S < 0: min f* {fmin:.3}, max S {smax:.3}"));
    }
    let r = match continuity_solve(&gm, &s, lambda, &ContinuityOptions::default()) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let reached = r.path_trace.last().map(|st| st.a) == Some(1.0);
    let path_ok = r.path_trace.iter().all(|st| st.residual < PATH_RESIDUAL);
    let b = r.bounds.unwrap();
    let f = r.solution.re();
    let err = max_abs(f.iter().zip(&fstar).map(|(a, b)| a - b));
    let f0: Vec<f64> = (0..f.len()).map(|p| 0.05 * (((p * 7919) % 101) as f64 / 101.0 - 0.5)).collect();
    let direct = continuity_solve(&gm, &s, lambda, &ContinuityOptions { start: Start::Direct(f0), ..Default::default() });
    let diff = match direct {
        Ok(d) => max_abs(d.solution.re().iter().zip(&f).map(|(a, b)| a - b)),
        Err(_) => f64::INFINITY,
    };
    let pass = reached && path_ok && r.residual_linf < PATH_RESIDUAL && b.max_violation <= b.slack && diff < UNIQUENESS_TOL;
    outcome(
        pass,
        format!(
            "{} steps to a = 1, final residual {:.2e}, bound excess {:.2e} (slack {:.2e}), two starts differ by {diff:.2e}, |f − f*| {err:.2e}",
            r.path_trace.len() - 1,
            r.residual_linf,
            b.max_violation,
            b.slack
        ),
    )
}

/// `Γ²/Vol` by trapezoidal quadrature of the analytic jets, independent of the grid metric.
fn quadrature_lambda(mf: &ModelManifold, nn: usize) -> f64 {
    let grid = TorusGrid::new(mf.n, nn, None, Scheme::Fd2).unwrap();
    let (mut g2, mut vol) = (0.0, 0.0);
    for p in 0..grid.nodes() {
        let jet = mf.jet(&grid.point(p)).unwrap();
        let det = inverse_and_det(&jet).unwrap().det;
        g2 += gauduchon_ricci(&jet, 0.0).unwrap().s2 * det;
        vol += det;
    }
    g2 / vol
}

fn end_to_end_negative() -> Outcome {
    let mf = man("kaehler-bump-scaled", Some(2), None);
    let gm = grid_metric(&mf, 16, None, Scheme::Spectral);
    let r = match solve_chern_negative(&gm, &ContinuityOptions::default()) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let reference = quadrature_lambda(&mf, 12);
    let rel = (r.achieved_constant - reference).abs() / reference.abs();
    let rel_target = (r.lambda - reference).abs() / reference.abs();
    outcome(
        rel < LAMBDA_REL_TOL && rel_target < LAMBDA_REL_TOL && r.accepted,
        format!(
            "achieved {:.10}, target {:.10}, quadrature at N = 12 {reference:.10}: relative {rel:.2e}",
            r.achieved_constant, r.lambda
        ),
    )
}

fn bismut_flat() -> Outcome {
    let mf = man("flat-torus", Some(2), None);
    let gm = grid_metric(&mf, 12, None, Scheme::Fd2);
    let yc = YamabeConstants::new(2).unwrap();
    let r = bismut_yamabe_minimize(&gm, &yc, &BismutOptions::default()).unwrap();
    let phi = r.auxiliary.unwrap().re();
    let spread = phi.iter().fold(f64::NEG_INFINITY, |a, b| a.max(*b)) - phi.iter().fold(f64::INFINITY, |a, b| a.min(*b));
    outcome(r.lambda.abs() < MU_FLAT_TOL && spread < 1e-12, format!("μ = {:.2e}, φ spread {spread:.2e}", r.lambda))
}

fn bismut_kaehler() -> Outcome {
    let mf = man("kaehler-bump", Some(2), None);
    let gm = grid_metric(&mf, 16, None, Scheme::Spectral);
    let yc = YamabeConstants::new(2).unwrap();
    let r = match bismut_yamabe_minimize(&gm, &yc, &BismutOptions::default()) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let b = r.yamabe.unwrap();
    let within = r.lambda <= b.upper && b.lower.is_none_or(|lo| r.lambda >= lo);
    outcome(
        r.residual_linf < EL_TOL && within,
        format!(
            "μ = {:.6}, EL residual {:.2e}, bounds [{:.3}, {:.3e}], {} descent steps",
            r.lambda,
            r.residual_linf,
            b.lower.unwrap_or(f64::NEG_INFINITY),
            b.upper,
            r.energy_trace.len() - 1
        ),
    )
}

fn bismut_vs_zero() -> Outcome {
    let mf = man("kaehler-bump", Some(2), None);
    let gm = grid_metric(&mf, 16, None, Scheme::Spectral);
    let yc = YamabeConstants::new(2).unwrap();
    let fb = match bismut_yamabe_minimize(&gm, &yc, &BismutOptions::default()) {
        Ok(r) => r.solution.re(),
        Err(e) => return outcome(false, e.to_string()),
    };
    let fc = solve_chern_zero(&gm, 1e-6).unwrap().solution.re();
    let vol = gm.volume();
    let (mb, mc) = (integrate(&gm, &fb) / vol, integrate(&gm, &fc) / vol);
    let a: Vec<f64> = fb.iter().map(|v| v - mb).collect();
    let c: Vec<f64> = fc.iter().map(|v| v - mc).collect();
    let diff = max_abs(a.iter().zip(&c).map(|(x, y)| x - y));
    let ratio = a.iter().zip(&c).map(|(x, y)| x * y).sum::<f64>() / c.iter().map(|y| y * y).sum::<f64>();
    outcome(
        diff < CROSS_SOLVER_TOL,
        format!("max |f_B − f_C| after mean alignment {diff:.2e}; least-squares ratio f_B/f_C = {ratio:.4}"),
    )
}

// 4. Negative controls

fn rejects_kaehler() -> Outcome {
    let mut least = f64::INFINITY;
    for (name, n, m) in [("hopf", Some(2), None), ("hopf", Some(3), None), ("inoue1", None, None), ("inoue2", None, Some(1.0))] {
        let mf = man(name, n, m);
        let flags = classify(&mf, &mf.sample_points(20, 1), 1e-8).unwrap();
        if flags.kahler.holds {
            return outcome(false, format!("{name} classified Kähler"));
        }
        least = least.min(flags.kahler.residual);
    }
    outcome(least > KAHLER_REJECT, format!("smallest Kähler residual {least:.3}"))
}

fn inoue1_not_einstein() -> Outcome {
    let mf = man("inoue1", None, None);
    let least = mf
        .sample_points(20, 1)
        .iter()
        .map(|p| einstein_residual(&mf.jet(p).unwrap()).unwrap().residual)
        .fold(f64::INFINITY, f64::min);
    outcome(least > 0.0, format!("smallest Einstein residual {least:.3}"))
}

fn cli_refuses_nonnegative_degree() -> Outcome {
    let out = Command::new(env!("CARGO_BIN_EXE_hermcurv"))
        .args(["solve", "chern-negative", "--manifold", "flat-torus", "--grid", "8"])
        .output()
        .unwrap();
    let code = out.status.code();
    outcome(code == Some(2), format!("exit code {code:?}"))
}

fn main() {
    let criteria = [
        Criterion { id: "1.hopf2-scalars", known: false, budget: GOLDEN_BUDGET, run: hopf2_scalars },
        Criterion { id: "1.hopf2-theta2", known: false, budget: GOLDEN_BUDGET, run: hopf_theta2 },
        Criterion { id: "1.hopf2-theta34", known: true, budget: GOLDEN_BUDGET, run: hopf_theta34_complex },
        Criterion { id: "1.hopf2-theta34-real-points", known: false, budget: GOLDEN_BUDGET, run: hopf_theta34_real },
        Criterion { id: "1.hopf3-scalars", known: false, budget: GOLDEN_BUDGET, run: hopf3_scalars },
        Criterion { id: "1.elliptic-s1", known: false, budget: GOLDEN_BUDGET, run: elliptic_s1 },
        Criterion { id: "1.elliptic-s2", known: true, budget: GOLDEN_BUDGET, run: elliptic_s2 },
        Criterion { id: "1.elliptic-s2-oracle", known: false, budget: GOLDEN_BUDGET, run: elliptic_s2_oracle },
        Criterion { id: "1.elliptic-theta3", known: true, budget: GOLDEN_BUDGET, run: elliptic_theta3_display },
        Criterion { id: "1.elliptic-theta3-oracle", known: false, budget: GOLDEN_BUDGET, run: elliptic_theta3_oracle },
        Criterion { id: "1.inoue1-s1", known: false, budget: GOLDEN_BUDGET, run: inoue1_s1 },
        Criterion { id: "1.inoue1-s2", known: true, budget: GOLDEN_BUDGET, run: inoue1_s2 },
        Criterion { id: "1.inoue1-s2-oracle", known: false, budget: GOLDEN_BUDGET, run: inoue1_s2_oracle },
        Criterion { id: "1.inoue1-ddstar", known: true, budget: GOLDEN_BUDGET, run: inoue1_ddstar_display },
        Criterion { id: "1.inoue1-ddstar-oracle", known: false, budget: GOLDEN_BUDGET, run: inoue1_ddstar_oracle },
        Criterion { id: "1.inoue2-s1", known: false, budget: GOLDEN_BUDGET, run: inoue2_s1 },
        Criterion { id: "1.inoue2-s2", known: true, budget: GOLDEN_BUDGET, run: inoue2_s2_display },
        Criterion { id: "1.inoue2-s2-oracle", known: false, budget: GOLDEN_BUDGET, run: inoue2_s2_oracle },
        Criterion { id: "2.conformal-oracle", known: false, budget: ORACLE_BUDGET, run: conformal_oracle },
        Criterion { id: "2.conformal-oracle-verbatim", known: true, budget: ORACLE_BUDGET, run: conformal_oracle_verbatim },
        Criterion { id: "2.specializations", known: false, budget: ORACLE_BUDGET, run: specializations },
        Criterion { id: "2.comparison-identity", known: false, budget: ORACLE_BUDGET, run: comparison_identity },
        Criterion { id: "2.two-path-scalars", known: false, budget: ORACLE_BUDGET, run: two_path_scalars },
        Criterion { id: "2.laplacian-duality-order", known: false, budget: SOLVER_BUDGET, run: laplacian_duality },
        Criterion { id: "3.manufactured-zero-order", known: false, budget: SOLVER_BUDGET, run: manufactured_zero },
        Criterion { id: "3.manufactured-negative", known: false, budget: SOLVER_BUDGET, run: manufactured_negative },
        Criterion { id: "3.end-to-end-negative", known: false, budget: SOLVER_BUDGET, run: end_to_end_negative },
        Criterion { id: "3.bismut-flat", known: false, budget: SOLVER_BUDGET, run: bismut_flat },
        Criterion { id: "3.bismut-kaehler", known: false, budget: SOLVER_BUDGET, run: bismut_kaehler },
        Criterion { id: "3.bismut-vs-zero-case", known: true, budget: SOLVER_BUDGET, run: bismut_vs_zero },
        Criterion { id: "4.rejects-kaehler", known: false, budget: GOLDEN_BUDGET, run: rejects_kaehler },
        Criterion { id: "4.inoue1-not-einstein", known: false, budget: GOLDEN_BUDGET, run: inoue1_not_einstein },
        Criterion { id: "4.cli-refuses-nonnegative-degree", known: false, budget: SOLVER_BUDGET, run: cli_refuses_nonnegative_degree },
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let (mut passed, mut failed, mut known_failed, mut surprises) = (0, 0, 0, vec![]);
    for c in &criteria {
        if !filter.is_empty() && !filter.iter().any(|f| c.id.contains(f.as_str())) {
            continue;
        }
        let t0 = Instant::now();
        let o = (c.run)();
        let secs = t0.elapsed().as_secs_f64();
        let in_time = secs < c.budget;
        let pass = o.pass && in_time;
        let budget = if in_time { String::new() } else { format!(", over the {:.0} s budget", c.budget) };
        let tag = if c.known { " [known]" } else { "" };
        println!("{} {}{tag}: {} ({secs:.2} s{budget})", if pass { "PASS" } else { "FAIL" }, c.id, o.detail);
        match (pass, c.known) {
            (true, _) => passed += 1,
            (false, true) => known_failed += 1,
            (false, false) => {
                failed += 1;
                surprises.push(c.id);
            }
        }
    }
    println!("\n{passed} passed, {known_failed} known failures, {failed} unexpected failures");
    if !surprises.is_empty() {
        println!("unexpected: {}", surprises.join(", "));
        std::process::exit(1);
    }
}
