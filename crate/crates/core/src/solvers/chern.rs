use std::time::Instant;

use serde::Serialize;

use super::{linf, rms, PathStep, SolverReport};
use crate::error::{Error, Result};
use crate::grid::{gauduchon_degrees, integrate, GridMetric, LaplaceOp, TorusField};
use crate::krylov::{cgls, gmres, KrylovStats};

/// Gauduchon residual above which the solvers refuse an input metric.
pub const GAUDUCHON_TOL: f64 = 1e-8;
/// `|Γ²|` allowed in the zero case, relative to `∫|S_C^{(2)}|`.
pub const COMPAT_TOL: f64 = 1e-6;

fn require_gauduchon(gm: &GridMetric) -> Result<()> {
    if !(gm.gauduchon_residual < GAUDUCHON_TOL) {
        return Err(Error::Precondition(format!(
            "'{}' is not Gauduchon at grid tolerance (residual {:.3e})",
            gm.name, gm.gauduchon_residual
        )));
    }
    Ok(())
}

/// Least-squares solution of `Δ^ℂ f = rhs` with zero weighted mean.
pub fn solve_laplace(gm: &GridMetric, rhs: &[f64], tol: f64) -> Result<(Vec<f64>, KrylovStats)> {
    let op = gm.laplace_op();
    let pre = op.frozen_inverse(0.0);
    // right-preconditioned: minimize ‖L P y − rhs‖, then f = P y
    let (y, stats) = cgls(|u| op.apply(&pre(u)), |v| pre(&op.apply_transpose(v)), rhs, 20_000, tol);
    let mut f = pre(&y);
    if !stats.converged {
        return Err(Error::NoConvergence(format!(
            "least-squares Laplace solve stagnated at relative normal residual {:.3e} after {} iterations",
            stats.relative_residual, stats.iterations
        )));
    }
    let mean = integrate(gm, &f) / gm.volume();
    f.iter_mut().for_each(|v| *v -= mean);
    Ok((f, stats))
}

/// Zero Gauduchon degree: `f` with `S_C^{(2)}(e^f ω) = 0`.
pub fn solve_chern_zero(gm: &GridMetric, tol: f64) -> Result<SolverReport> {
    let t0 = Instant::now();
    require_gauduchon(gm)?;
    let deg = gauduchon_degrees(gm, GAUDUCHON_TOL);
    let abs: Vec<f64> = gm.s_c2.iter().map(|v| v.abs()).collect();
    let scale = integrate(gm, &abs).max(1.0);
    if deg.gamma2.abs() > COMPAT_TOL * scale {
        return Err(Error::Precondition(format!(
            "second Gauduchon degree {:.6e} is not zero; the zero-case equation has no solution",
            deg.gamma2
        )));
    }
    let (f, stats) = solve_laplace(gm, &gm.s_c2, 1e-13)?;
    let lf = gm.laplace_op().apply(&f);
    let r: Vec<f64> = lf.iter().zip(&gm.s_c2).map(|(a, b)| a - b).collect();
    let out = gm.conformal(&f)?;
    let residual_l2 = rms(&r);
    let mut notes = vec![format!("Gamma2 = {:.6e}", deg.gamma2)];
    if residual_l2 >= tol {
        notes.push(format!("not accepted: residual_l2 {residual_l2:.3e} >= tol {tol:.1e}"));
    }
    Ok(SolverReport {
        solver: "chern-zero".into(),
        solution: TorusField::real(gm.grid.clone(), &f),
        lambda: 0.0,
        achieved_constant: integrate(&out, &out.s_c2) / out.volume(),
        residual_linf: linf(&r),
        residual_l2,
        accepted: residual_l2 < tol,
        curvature_deviation: linf(&out.s_c2),
        path_trace: vec![],
        energy_trace: vec![],
        bounds: None,
        auxiliary: None,
        yamabe: None,
        linear_iterations: stats.iterations,
        wall_time: t0.elapsed().as_secs_f64(),
        notes,
    })
}

/// `ω' = e^u ω_G` with pointwise negative second Chern scalar curvature.
#[derive(Clone, Debug)]
pub struct Normalized {
    pub u: Vec<f64>,
    pub metric: GridMetric,
    /// `Γ²/Vol`.
    pub lambda: f64,
    pub gamma2: f64,
    pub volume: f64,
}

pub fn normalize_to_negative(gm: &GridMetric) -> Result<Normalized> {
    require_gauduchon(gm)?;
    let deg = gauduchon_degrees(gm, GAUDUCHON_TOL);
    if deg.gamma2 >= 0.0 {
        return Err(Error::Precondition(format!(
            "second Gauduchon degree {:.6e} is not negative",
            deg.gamma2
        )));
    }
    let volume = gm.volume();
    let lambda = deg.gamma2 / volume;
    let rhs: Vec<f64> = gm.s_c2.iter().map(|s| s - lambda).collect();
    let (u, _) = solve_laplace(gm, &rhs, 1e-13)?;
    let metric = gm.conformal(&u)?;
    if let Some((p, s)) = metric.s_c2.iter().enumerate().find(|(_, s)| **s >= 0.0) {
        return Err(Error::Consistency(format!(
            "normalized metric has S_C2 = {s:.3e} >= 0 at node {p}"
        )));
    }
    Ok(Normalized { u, metric, lambda, gamma2: deg.gamma2, volume })
}

/// How the continuity solver starts.
#[derive(Clone, Debug, PartialEq)]
pub enum Start {
    /// Continuity in `a` from `f = 0` at `a = 0`.
    Continuity,
    /// Damped Newton directly at `a = 1` from the given field.
    Direct(Vec<f64>),
}

#[derive(Clone, Debug)]
pub struct ContinuityOptions {
    /// Newton acceptance, grid max of `F`.
    pub tol: f64,
    pub max_newton: usize,
    pub initial_step: f64,
    pub min_step: f64,
    pub start: Start,
}

impl Default for ContinuityOptions {
    fn default() -> Self {
        ContinuityOptions { tol: 1e-10, max_newton: 50, initial_step: 0.1, min_step: 1e-4, start: Start::Continuity }
    }
}

/// A-priori bound bookkeeping along the continuity path.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundCheck {
    pub slack: f64,
    /// Worst excess over the maximum-principle bounds at each `a`.
    pub max_violation: f64,
    /// Worst excess over `0 ≤ f ≤ log(1 + min S/λ)`.
    pub max_violation_uniform: f64,
}

struct Problem<'a> {
    op: LaplaceOp,
    s: &'a [f64],
    lambda: f64,
}

impl Problem<'_> {
    fn residual(&self, a: f64, f: &[f64]) -> Vec<f64> {
        let lf = self.op.apply(f);
        (0..f.len())
            .map(|p| lf[p] - a * self.s[p] + self.lambda * f[p].exp() - self.lambda * (1.0 - a))
            .collect()
    }

    /// Newton iteration for `F(a, ·) = 0`; `None` on failure.
    fn newton(&self, a: f64, f0: &[f64], opts: &ContinuityOptions, lin: &mut usize) -> Option<(Vec<f64>, usize, f64)> {
        let mut f = f0.to_vec();
        let mut r = self.residual(a, &f);
        let mut rn = linf(&r);
        for it in 0..=opts.max_newton {
            if rn < opts.tol {
                return Some((f, it, rn));
            }
            if it == opts.max_newton || !rn.is_finite() {
                break;
            }
            let ef: Vec<f64> = f.iter().map(|v| self.lambda * v.exp()).collect();
            let pre = self.op.frozen_inverse(ef.iter().sum::<f64>() / ef.len() as f64);
            let apply = |w: &[f64]| -> Vec<f64> {
                let mut out = self.op.apply(w);
                for p in 0..w.len() {
                    out[p] += ef[p] * w[p];
                }
                out
            };
            let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
            let (delta, st) = gmres(apply, &rhs, None, Some(&pre), 60, 3000, 1e-11);
            *lin += st.iterations;
            if !st.converged && st.relative_residual > 1e-6 {
                return None;
            }
            let mut step = 1.0;
            loop {
                let trial: Vec<f64> = f.iter().zip(&delta).map(|(x, d)| x + step * d).collect();
                let rt = self.residual(a, &trial);
                let rtn = linf(&rt);
                if rtn < rn || step < 1e-3 {
                    f = trial;
                    r = rt;
                    rn = rtn;
                    break;
                }
                step *= 0.5;
            }
        }
        None
    }
}

/// Continuity method for `Δ^ℂ f = a S − λe^f + λ(1 − a)` on `gm`, carried to `a = 1`.
pub fn continuity_solve(gm: &GridMetric, s: &[f64], lambda: f64, opts: &ContinuityOptions) -> Result<SolverReport> {
    let t0 = Instant::now();
    if !(lambda < 0.0) {
        return Err(Error::Precondition(format!("continuity needs lambda < 0, got {lambda}")));
    }
    if let Some(m) = s.iter().copied().reduce(f64::max) {
        if m >= 0.0 {
            return Err(Error::Precondition(format!("S must be negative everywhere (max {m:.3e})")));
        }
    }
    let prob = Problem { op: gm.laplace_op(), s, lambda };
    let nodes = gm.nodes();
    let s_min = s.iter().copied().fold(f64::INFINITY, f64::min);
    let s_max = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut lin = 0;
    let mut path = Vec::new();
    let mut bounds = BoundCheck { slack: 0.0, max_violation: 0.0, max_violation_uniform: 0.0 };
    let mut check_bounds = |a: f64, f: &[f64]| -> Result<()> {
        let slack = 1e-2 * linf(f) + 1e-6;
        let lo = (1.0 - a + a * s_max / lambda).ln();
        let hi = (1.0 - a + a * s_min / lambda).ln();
        let fmax = f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let fmin = f.iter().copied().fold(f64::INFINITY, f64::min);
        let v = (fmax - hi).max(lo - fmin).max(0.0);
        let vu = (fmax - (1.0 + s_min / lambda).ln()).max(-fmin).max(0.0);
        bounds.slack = bounds.slack.max(slack);
        bounds.max_violation = bounds.max_violation.max(v);
        bounds.max_violation_uniform = bounds.max_violation_uniform.max(vu);
        if v > slack {
            return Err(Error::Consistency(format!(
                "a-priori bound violated by {v:.3e} at a = {a} (slack {slack:.1e}); discretization too coarse"
            )));
        }
        Ok(())
    };
    let f = match &opts.start {
        Start::Direct(f0) => {
            if f0.len() != nodes {
                return Err(Error::Precondition("initial field has the wrong size".into()));
            }
            let (f, it, res) = prob.newton(1.0, f0, opts, &mut lin).ok_or_else(|| {
                Error::NoConvergence("Newton from the given start did not converge at a = 1".into())
            })?;
            path.push(PathStep { a: 1.0, newton_iters: it, residual: res });
            check_bounds(1.0, &f)?;
            f
        }
        Start::Continuity => {
            let mut f = vec![0.0; nodes];
            let r0 = linf(&prob.residual(0.0, &f));
            path.push(PathStep { a: 0.0, newton_iters: 0, residual: r0 });
            let (mut a, mut da, mut wins) = (0.0f64, opts.initial_step, 0);
            while a < 1.0 {
                let at = (a + da).min(1.0);
                match prob.newton(at, &f, opts, &mut lin) {
                    Some((fnew, it, res)) => {
                        check_bounds(at, &fnew)?;
                        f = fnew;
                        a = at;
                        path.push(PathStep { a, newton_iters: it, residual: res });
                        wins += 1;
                        if wins == 2 {
                            da *= 2.0;
                            wins = 0;
                        }
                    }
                    None => {
                        da *= 0.5;
                        wins = 0;
                        if da < opts.min_step {
                            return Err(Error::NoConvergence(format!(
                                "continuity stalled at a = {a}: step fell below {}",
                                opts.min_step
                            )));
                        }
                    }
                }
            }
            f
        }
    };
    let r = prob.residual(1.0, &f);
    let out = gm.conformal(&f)?;
    let dev: Vec<f64> = out.s_c2.iter().map(|v| v - lambda).collect();
    Ok(SolverReport {
        solver: "chern-negative".into(),
        solution: TorusField::real(gm.grid.clone(), &f),
        lambda,
        achieved_constant: integrate(&out, &out.s_c2) / out.volume(),
        residual_linf: linf(&r),
        residual_l2: rms(&r),
        accepted: linf(&r) < opts.tol,
        curvature_deviation: linf(&dev),
        path_trace: path,
        energy_trace: vec![],
        bounds: Some(bounds),
        auxiliary: None,
        yamabe: None,
        linear_iterations: lin,
        wall_time: t0.elapsed().as_secs_f64(),
        notes: vec![],
    })
}

/// Negative Gauduchon degree: normalize, then continue to `S_C^{(2)}(e^{f+u} ω_G) = Γ²/Vol`.
pub fn solve_chern_negative(gm: &GridMetric, opts: &ContinuityOptions) -> Result<SolverReport> {
    let t0 = Instant::now();
    let norm = normalize_to_negative(gm)?;
    let s = norm.metric.s_c2.clone();
    let mut rep = continuity_solve(&norm.metric, &s, norm.lambda, opts)?;
    rep.auxiliary = Some(TorusField::real(gm.grid.clone(), &norm.u));
    rep.notes.push(format!("Gamma2 = {:.6e}, Vol = {:.6e}", norm.gamma2, norm.volume));
    rep.wall_time = t0.elapsed().as_secs_f64();
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::conformal::{factor_invariants, factor_jet};
    use crate::expr::parse_expr;
    use crate::grid::{Scheme, TorusGrid};
    use crate::ModelManifold;

    fn strip(nn: usize) -> (ModelManifold, GridMetric) {
        let man = ModelManifold::named("kaehler-strip", Some(2), None).unwrap();
        let grid = Arc::new(TorusGrid::reduced(2, nn, None, vec![0, 1], Scheme::Fd2).unwrap());
        let gm = GridMetric::new(&man, grid).unwrap();
        (man, gm)
    }

    /// Nodal values and analytic `Δ^ℂ` of a factor expression.
    fn sampled(man: &ModelManifold, gm: &GridMetric, src: &str) -> (Vec<f64>, Vec<f64>) {
        let e = parse_expr(src).unwrap();
        (0..gm.nodes())
            .map(|p| {
                let x = gm.grid.point(p);
                let fj = factor_jet(&e, &x, &man.params).unwrap();
                (fj.f, factor_invariants(&man.jet(&x).unwrap(), &fj).unwrap().laplacian)
            })
            .unzip()
    }

    const ZERO_F: &str = "0.3*re(exp(i*6.283185307179586*re(z1))) + 0.2*im(exp(i*6.283185307179586*(re(z1) + im(z1))))";
    const NEG_F: &str = "0.2 + 0.05*re(exp(i*6.283185307179586*(re(z1) + im(z1)))) + 0.04*abs2(exp(i*6.283185307179586*im(z1)) - 1)";

    #[test]
    fn flat_zero_case_is_trivial() {
        let man = ModelManifold::named("flat-torus", Some(2), None).unwrap();
        let gm = GridMetric::new(&man, Arc::new(TorusGrid::new(2, 4, None, Scheme::Fd2).unwrap())).unwrap();
        let r = solve_chern_zero(&gm, 1e-12).unwrap();
        assert!(r.accepted);
        assert_eq!(linf(&r.solution.re()), 0.0);
    }

    #[test]
    fn manufactured_zero_case_is_second_order() {
        let mut errs = vec![];
        for nn in [8, 16, 32] {
            let (man, gm) = strip(nn);
            let (f, s) = sampled(&man, &gm, ZERO_F);
            let (u, _) = solve_laplace(&gm, &s, 1e-13).unwrap();
            let mean = integrate(&gm, &f) / gm.volume();
            errs.push(u.iter().zip(&f).map(|(a, b)| (a - b + mean).abs()).fold(0.0, f64::max));
        }
        for w in errs.windows(2) {
            assert!((w[0] / w[1]).log2() > 1.8, "{errs:?}");
        }
    }

    #[test]
    fn manufactured_negative_case() {
        let (man, gm) = strip(16);
        let lambda = -2.0;
        let (fstar, lap) = sampled(&man, &gm, NEG_F);
        assert!(fstar.iter().all(|v| *v >= 0.0));
        let s: Vec<f64> = (0..gm.nodes()).map(|p| lap[p] + lambda * fstar[p].exp()).collect();
        let r = continuity_solve(&gm, &s, lambda, &ContinuityOptions::default()).unwrap();
        assert_eq!(r.path_trace.last().unwrap().a, 1.0);
        assert!(r.path_trace.iter().all(|st| st.residual < 1e-10));
        assert!(r.accepted && r.residual_linf < 1e-10);
        let b = r.bounds.unwrap();
        assert!(b.max_violation <= b.slack);
        let f = r.solution.re();
        let err = f.iter().zip(&fstar).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 2e-3, "{err}");

        // a different start lands on the same solution
        let f0: Vec<f64> = (0..f.len()).map(|p| 0.05 * ((p * 7919) % 13) as f64 / 13.0).collect();
        let opts = ContinuityOptions { start: Start::Direct(f0), ..Default::default() };
        let d = continuity_solve(&gm, &s, lambda, &opts).unwrap();
        let diff = d.solution.re().iter().zip(&f).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-6, "{diff}");
    }

    #[test]
    fn continuity_starts_at_the_trivial_solution() {
        let (_, gm) = strip(8);
        let s = vec![-1.0; gm.nodes()];
        let prob = Problem { op: gm.laplace_op(), s: &s, lambda: -1.0 };
        assert_eq!(linf(&prob.residual(0.0, &vec![0.0; gm.nodes()])), 0.0);
        // S = λ: the solution is f = 0 for every a
        let r = continuity_solve(&gm, &s, -1.0, &ContinuityOptions::default()).unwrap();
        assert!(linf(&r.solution.re()) < 1e-12);
    }

    #[test]
    fn guards() {
        let (_, gm) = strip(8);
        let s = vec![-1.0; gm.nodes()];
        assert!(matches!(continuity_solve(&gm, &s, 0.5, &Default::default()), Err(Error::Precondition(_))));
        let mut t = s.clone();
        t[3] = 0.1;
        assert!(matches!(continuity_solve(&gm, &t, -1.0, &Default::default()), Err(Error::Precondition(_))));
        let flat = ModelManifold::named("flat-torus", Some(2), None).unwrap();
        let fm = GridMetric::new(&flat, Arc::new(TorusGrid::new(2, 4, None, Scheme::Fd2).unwrap())).unwrap();
        assert!(matches!(normalize_to_negative(&fm), Err(Error::Precondition(_))));
        assert!(matches!(solve_chern_negative(&fm, &Default::default()), Err(Error::Precondition(_))));
    }

    #[test]
    fn normalization_is_pointwise_negative() {
        let man = ModelManifold::named("kaehler-bump-scaled", Some(2), None).unwrap();
        let gm = GridMetric::new(&man, Arc::new(TorusGrid::new(2, 8, None, Scheme::Spectral).unwrap())).unwrap();
        let nz = normalize_to_negative(&gm).unwrap();
        assert!(nz.lambda < 0.0);
        assert!(nz.metric.s_c2.iter().all(|s| *s < 0.0));
        // S' = e^{−u} λ up to the solve's least-squares defect
        let dev = (0..gm.nodes()).map(|p| (nz.metric.s_c2[p] - (-nz.u[p]).exp() * nz.lambda).abs()).fold(0.0, f64::max);
        assert!(dev < 1e-6, "{dev}");
    }
}
