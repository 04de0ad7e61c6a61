use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;

use super::{TorusField, TorusGrid};
use crate::curvature::{class_residuals, gauduchon_ricci, torsion_diagnostics, chern_torsion};
use crate::error::{Error, Result};
use crate::krylov::cgls;
use crate::manifold::ModelManifold;
use crate::metric::{inverse_and_det, MetricJet, C64};

/// Imaginary residue allowed in the complex Laplacian of a real field.
pub const IMAG_RESIDUE_TOL: f64 = 1e-9;

/// A torus metric sampled at grid nodes, with the pointwise data the solvers need.
#[derive(Clone, Debug)]
pub struct GridMetric {
    pub grid: Arc<TorusGrid>,
    pub n: usize,
    pub name: String,
    /// `det h`.
    pub det: Vec<f64>,
    /// `h^{ij̄}`, `n²` per node.
    pub ginv: Vec<C64>,
    /// Chern torsion trace `σ_j`, `n` per node.
    pub sigma: Vec<C64>,
    /// Real Lee form `[x_1, y_1, …]`, `2n` per node.
    pub lee: Vec<f64>,
    /// Inverse Riemannian metric in real coordinates, `(2n)²` per node.
    pub riem_inv: Vec<f64>,
    /// `√det g = 2^n det h`.
    pub sqrt_g: Vec<f64>,
    pub s_c1: Vec<f64>,
    pub s_c2: Vec<f64>,
    pub s_b2: Vec<f64>,
    /// Max pointwise `|∂∂̄ω^{n−1}|` over a node subsample.
    pub gauduchon_residual: f64,
    /// Max pointwise Lee-form norm over a node subsample.
    pub balanced_residual: f64,
    /// Max pointwise `|∂∂̄ω|` over a node subsample.
    pub pluriclosed_residual: f64,
    pub declared_gauduchon: bool,
}

fn check_separable(man: &ModelManifold, grid: &TorusGrid) -> Result<()> {
    let inactive: Vec<usize> = (0..2 * grid.n).filter(|a| !grid.active.contains(a)).collect();
    if inactive.is_empty() {
        return Ok(());
    }
    if let Some(tm) = man.as_builtin().and_then(|b| b.torus()) {
        if tm.active_axes.iter().all(|a| grid.active.contains(a)) {
            return Ok(());
        }
    }
    let probes = [0.137, 0.42, 0.731];
    for node in [0, grid.nodes() / 3, grid.nodes() / 2] {
        let base = man.jet(&grid.point(node))?;
        for (m, &s) in probes.iter().enumerate() {
            let mut p = grid.point(node);
            for &a in &inactive {
                let shift = s * grid.periods[a] * (1.0 + m as f64 * 0.1);
                if a % 2 == 0 {
                    p.coords[a / 2].re += shift;
                } else {
                    p.coords[a / 2].im += shift;
                }
            }
            let j = man.jet(&p)?;
            if jet_distance(&base, &j) > 1e-12 {
                return Err(Error::Precondition(format!(
                    "metric '{}' depends on axes outside the reduced grid",
                    man.name
                )));
            }
        }
    }
    Ok(())
}

fn jet_distance(a: &MetricJet, b: &MetricJet) -> f64 {
    let n = a.n;
    let mut w: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            w = w.max((a.h(i, j) - b.h(i, j)).norm());
            for k in 0..n {
                w = w.max((a.dh(i, j, k) - b.dh(i, j, k)).norm());
                for l in 0..n {
                    w = w.max((a.ddh(i, j, k, l) - b.ddh(i, j, k, l)).norm());
                }
            }
        }
    }
    w
}

/// Riemannian metric of `h` in real coordinates `(x_1, y_1, …)`.
fn riemannian(jet: &MetricJet) -> DMatrix<f64> {
    let n = jet.n;
    let mut g = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        for l in 0..n {
            let h = jet.h(k, l);
            g[(2 * k, 2 * l)] = 2.0 * h.re;
            g[(2 * k + 1, 2 * l + 1)] = 2.0 * h.re;
            g[(2 * k, 2 * l + 1)] = 2.0 * h.im;
            g[(2 * k + 1, 2 * l)] = -2.0 * h.im;
        }
    }
    g
}

impl GridMetric {
    pub fn new(man: &ModelManifold, grid: Arc<TorusGrid>) -> Result<GridMetric> {
        let Some(periods) = &man.domain.periods else {
            return Err(Error::Precondition(format!(
                "'{}' is not a torus chart; grid operations need periodic coefficients",
                man.name
            )));
        };
        if man.n != grid.n {
            return Err(Error::Precondition(format!("grid n = {} but metric n = {}", grid.n, man.n)));
        }
        if periods.iter().zip(&grid.periods).any(|(a, b)| (a - b).abs() > 1e-12) {
            return Err(Error::Precondition("grid periods differ from the metric's periods".into()));
        }
        check_separable(man, &grid)?;
        let n = man.n;
        let nodes = grid.nodes();
        let mut gm = GridMetric {
            grid: grid.clone(),
            n,
            name: man.name.clone(),
            det: Vec::with_capacity(nodes),
            ginv: Vec::with_capacity(nodes * n * n),
            sigma: Vec::with_capacity(nodes * n),
            lee: Vec::with_capacity(nodes * 2 * n),
            riem_inv: Vec::with_capacity(nodes * 4 * n * n),
            sqrt_g: Vec::with_capacity(nodes),
            s_c1: Vec::with_capacity(nodes),
            s_c2: Vec::with_capacity(nodes),
            s_b2: Vec::with_capacity(nodes),
            gauduchon_residual: 0.0,
            balanced_residual: 0.0,
            pluriclosed_residual: 0.0,
            declared_gauduchon: man.declared_gauduchon,
        };
        let stride = (nodes / 64).max(1);
        for p in 0..nodes {
            let jet = man.jet(&grid.point(p))?;
            let inv = inverse_and_det(&jet)?;
            gm.det.push(inv.det);
            gm.sqrt_g.push(2f64.powi(n as i32) * inv.det);
            for i in 0..n {
                for j in 0..n {
                    gm.ginv.push(inv.g(i, j));
                }
            }
            gm.sigma.extend(chern_torsion(&jet)?.trace());
            gm.lee.extend(torsion_diagnostics(&jet)?.lee);
            let gi = riemannian(&jet)
                .try_inverse()
                .ok_or_else(|| Error::Singular("Riemannian metric not invertible".into()))?;
            gm.riem_inv.extend(gi.transpose().iter());
            let c = gauduchon_ricci(&jet, 0.0)?;
            gm.s_c1.push(c.s1);
            gm.s_c2.push(c.s2);
            gm.s_b2.push(gauduchon_ricci(&jet, 1.0)?.s2);
            if p % stride == 0 {
                let r = class_residuals(&jet)?;
                gm.balanced_residual = gm.balanced_residual.max(r[1]);
                gm.gauduchon_residual = gm.gauduchon_residual.max(r[2]);
                gm.pluriclosed_residual = gm.pluriclosed_residual.max(r[3]);
            }
        }
        Ok(gm)
    }

    pub fn nodes(&self) -> usize {
        self.grid.nodes()
    }

    #[inline]
    pub fn g(&self, p: usize, i: usize, j: usize) -> C64 {
        self.ginv[(p * self.n + i) * self.n + j]
    }

    #[inline]
    pub fn riem(&self, p: usize, a: usize, b: usize) -> f64 {
        let m = 2 * self.n;
        self.riem_inv[(p * m + a) * m + b]
    }

    /// Quadrature weights of `ω^n/n!`: `det h · 2^n` times the cell volume.
    pub fn weights(&self) -> Vec<f64> {
        let cell: f64 = self.grid.active.iter().map(|&a| self.grid.spacing(a)).product::<f64>()
            * self.grid.inactive_volume();
        let f = 2f64.powi(self.n as i32) * cell;
        self.det.iter().map(|d| d * f).collect()
    }

    pub fn volume(&self) -> f64 {
        self.weights().iter().sum()
    }

    pub fn laplace_op(&self) -> LaplaceOp {
        LaplaceOp::new(self)
    }

    /// `|∂u|²` for a real field.
    pub fn grad_sq(&self, u: &[f64]) -> Vec<f64> {
        let (du, _) = self.dz_all(u);
        let n = self.n;
        (0..self.nodes())
            .map(|p| {
                let mut s = C64::new(0.0, 0.0);
                for i in 0..n {
                    for j in 0..n {
                        s += self.g(p, i, j) * du[i][p] * du[j][p].conj();
                    }
                }
                s.re
            })
            .collect()
    }

    /// `Re⟨∂*ω, √−1 ∂̄u⟩` for a real field.
    pub fn torsion_pairing(&self, u: &[f64]) -> Vec<f64> {
        let (du, _) = self.dz_all(u);
        let n = self.n;
        (0..self.nodes())
            .map(|p| {
                let mut s = C64::new(0.0, 0.0);
                for k in 0..n {
                    for j in 0..n {
                        s -= self.g(p, k, j) * self.sigma[p * n + j].conj() * du[k][p];
                    }
                }
                s.re
            })
            .collect()
    }

    /// The grid metric of `e^u ω`, with scalar curvatures from the discrete conformal laws.
    pub fn conformal(&self, u: &[f64]) -> Result<GridMetric> {
        let n = self.n;
        let nf = n as f64;
        let m = 2 * n;
        let lap = complex_laplacian(self, u)?.re();
        let grad = self.grad_sq(u);
        let pair = self.torsion_pairing(u);
        let (du, _) = self.dz_all(u);
        let dr: Vec<Vec<f64>> = (0..m).map(|a| self.grid.d1(u, a)).collect();
        let mut out = self.clone();
        out.name = format!("exp(u)*{}", self.name);
        out.declared_gauduchon = false;
        out.gauduchon_residual = f64::NAN;
        out.pluriclosed_residual = f64::NAN;
        out.balanced_residual = 0.0;
        for p in 0..self.nodes() {
            let e = u[p].exp();
            out.det[p] *= e.powi(n as i32);
            out.sqrt_g[p] *= e.powi(n as i32);
            for v in &mut out.ginv[p * n * n..(p + 1) * n * n] {
                *v /= e;
            }
            for v in &mut out.riem_inv[p * m * m..(p + 1) * m * m] {
                *v /= e;
            }
            for j in 0..n {
                out.sigma[p * n + j] += du[j][p] * (nf - 1.0);
            }
            for a in 0..m {
                out.lee[p * m + a] += (nf - 1.0) * dr[a][p];
                out.balanced_residual = out.balanced_residual.max(out.lee[p * m + a].abs());
            }
            out.s_c1[p] = (self.s_c1[p] - nf * lap[p]) / e;
            out.s_c2[p] = (self.s_c2[p] - lap[p]) / e;
            out.s_b2[p] = (self.s_b2[p] - (2.0 * nf - 1.0) * lap[p] - (nf * nf - 1.0) * grad[p]
                + 2.0 * (nf + 1.0) * pair[p])
                / e;
        }
        Ok(out)
    }

    /// `(∂u/∂z^k)_k` and `(∂u/∂z̄^k)_k` for a real field.
    pub fn dz_all(&self, u: &[f64]) -> (Vec<Vec<C64>>, Vec<Vec<C64>>) {
        let g = &self.grid;
        let mut dz = Vec::with_capacity(self.n);
        let mut dzb = Vec::with_capacity(self.n);
        for k in 0..self.n {
            let (dx, dy) = (g.d1(u, 2 * k), g.d1(u, 2 * k + 1));
            dz.push(dx.iter().zip(&dy).map(|(a, b)| C64::new(*a, -*b) * 0.5).collect());
            dzb.push(dx.iter().zip(&dy).map(|(a, b)| C64::new(*a, *b) * 0.5).collect());
        }
        (dz, dzb)
    }
}

/// `Δ^ℂ = Σ_{ab} c_{ab} ∂_a∂_b` over real axes, with symmetric node coefficients.
#[derive(Clone, Debug)]
pub struct LaplaceOp {
    grid: Arc<TorusGrid>,
    /// `(a, b, coefficient per node)` for active `a ≤ b`; off-diagonal entries carry the factor 2.
    terms: Vec<(usize, usize, Vec<f64>)>,
}

impl LaplaceOp {
    fn new(gm: &GridMetric) -> LaplaceOp {
        let n = gm.n;
        let nodes = gm.nodes();
        let m = 2 * n;
        let mut c = vec![vec![0.0; nodes]; m * m];
        for p in 0..nodes {
            for i in 0..n {
                for j in 0..n {
                    let g = gm.g(p, i, j) * 0.25;
                    c[(2 * i) * m + 2 * j][p] += g.re;
                    c[(2 * i + 1) * m + 2 * j + 1][p] += g.re;
                    c[(2 * i) * m + 2 * j + 1][p] -= g.im;
                    c[(2 * i + 1) * m + 2 * j][p] += g.im;
                }
            }
        }
        let act = &gm.grid.active;
        let mut terms = Vec::new();
        for (ia, &a) in act.iter().enumerate() {
            for &b in &act[ia..] {
                let coef: Vec<f64> = if a == b {
                    c[a * m + a].clone()
                } else {
                    (0..nodes).map(|p| c[a * m + b][p] + c[b * m + a][p]).collect()
                };
                if coef.iter().any(|v| *v != 0.0) {
                    terms.push((a, b, coef));
                }
            }
        }
        LaplaceOp { grid: gm.grid.clone(), terms }
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        for (a, b, c) in &self.terms {
            let d = self.grid.d2(u, *a, *b);
            for p in 0..u.len() {
                out[p] += c[p] * d[p];
            }
        }
        out
    }

    pub fn apply_transpose(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for (a, b, c) in &self.terms {
            let cv: Vec<f64> = v.iter().zip(c).map(|(x, y)| x * y).collect();
            let d = self.grid.d2(&cv, *a, *b);
            for p in 0..v.len() {
                out[p] += d[p];
            }
        }
        out
    }


    /// The operator `w·Δ^ℂ` for a node weight `w`.
    /// `(L̄ + shift)⁻¹` by FFT, with `L̄` the operator at node-averaged coefficients.
    /// Modes where the symbol vanishes are dropped.
    pub fn frozen_inverse(&self, shift: f64) -> impl Fn(&[f64]) -> Vec<f64> + '_ {
        let mean: Vec<(usize, usize, f64)> = self
            .terms
            .iter()
            .map(|(a, b, c)| (*a, *b, c.iter().sum::<f64>() / c.len() as f64))
            .collect();
        move |u: &[f64]| {
            self.grid.fourier_multiply(u, |k| {
                let s: f64 = mean.iter().map(|(a, b, c)| c * self.grid.d2_symbol(*a, *b, k)).sum::<f64>() + shift;
                if s.abs() < 1e-12 {
                    0.0
                } else {
                    1.0 / s
                }
            })
        }
    }

    pub fn scaled(&self, w: &[f64]) -> LaplaceOp {
        LaplaceOp {
            grid: self.grid.clone(),
            terms: self
                .terms
                .iter()
                .map(|(a, b, c)| (*a, *b, c.iter().zip(w).map(|(x, y)| x * y).collect()))
                .collect(),
        }
    }
}

/// `Δ^ℂ u = h^{ij̄} ∂_i∂̄_j u` for a real field; errors when the imaginary residue exceeds tolerance.
pub fn complex_laplacian(gm: &GridMetric, u: &[f64]) -> Result<TorusField> {
    let g = &gm.grid;
    let n = gm.n;
    let nodes = gm.nodes();
    let mut out = vec![C64::new(0.0, 0.0); nodes];
    for i in 0..n {
        for j in 0..n {
            let xx = g.d2(u, 2 * i, 2 * j);
            let yy = g.d2(u, 2 * i + 1, 2 * j + 1);
            let xy = g.d2(u, 2 * i, 2 * j + 1);
            let yx = g.d2(u, 2 * i + 1, 2 * j);
            for p in 0..nodes {
                let dd = C64::new(xx[p] + yy[p], xy[p] - yx[p]) * 0.25;
                out[p] += gm.g(p, i, j) * dd;
            }
        }
    }
    let scale = out.iter().map(|v| v.re.abs()).fold(1.0, f64::max);
    let resid = out.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    if resid > IMAG_RESIDUE_TOL * scale {
        return Err(Error::Consistency(format!("complex Laplacian imaginary residue {resid:.3e}")));
    }
    Ok(TorusField::real(g.clone(), &out.iter().map(|v| v.re).collect::<Vec<_>>()))
}

/// Grid max of `−2Δ^ℂu − Δ_d u − ⟨du, η⟩`.
pub fn laplacian_duality_defect(gm: &GridMetric, u: &[f64]) -> Result<f64> {
    let g = &gm.grid;
    let nodes = gm.nodes();
    let m = 2 * gm.n;
    let lap = complex_laplacian(gm, u)?.re();
    let du: Vec<Vec<f64>> = (0..m).map(|a| g.d1(u, a)).collect();
    let mut hodge = vec![0.0; nodes];
    for a in 0..m {
        for b in 0..m {
            let d2 = g.d2(u, a, b);
            let flux: Vec<f64> = (0..nodes).map(|p| gm.sqrt_g[p] * gm.riem(p, a, b)).collect();
            let dflux = g.d1(&flux, a);
            for p in 0..nodes {
                hodge[p] -= gm.riem(p, a, b) * d2[p] + dflux[p] * du[b][p] / gm.sqrt_g[p];
            }
        }
    }
    let mut worst: f64 = 0.0;
    for p in 0..nodes {
        let mut pair = 0.0;
        for a in 0..m {
            for b in 0..m {
                pair += gm.riem(p, a, b) * du[a][p] * gm.lee[p * m + b];
            }
        }
        worst = worst.max((-2.0 * lap[p] - hodge[p] - pair).abs());
    }
    Ok(worst)
}

/// `∫ u ω^n/n!`.
pub fn integrate(gm: &GridMetric, u: &[f64]) -> f64 {
    gm.weights().iter().zip(u).map(|(w, v)| w * v).sum()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Degrees {
    pub gamma1: f64,
    pub gamma2: f64,
    pub gauduchon_residual: f64,
    /// False when the Gauduchon residual exceeds the tolerance used.
    pub reliable: bool,
}

/// `Γ^{(j)} = ∫ S_C^{(j)} ω^n/n!`.
pub fn gauduchon_degrees(gm: &GridMetric, tol: f64) -> Degrees {
    Degrees {
        gamma1: integrate(gm, &gm.s_c1),
        gamma2: integrate(gm, &gm.s_c2),
        gauduchon_residual: gm.gauduchon_residual,
        reliable: gm.gauduchon_residual < tol,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BalancedRepresentative {
    /// Potential with `du ≈ η`, weighted mean zero.
    pub u: Vec<f64>,
    /// Conformal factor `−u/(n−1)` of the balanced metric.
    pub factor: Vec<f64>,
    /// Grid max of `|η − du|`, the Lee form of the output metric.
    pub lee_residual: f64,
    /// Flat mean of each Lee-form component over the fundamental domain.
    pub harmonic_part: Vec<f64>,
}

/// Solve `min ‖du − η‖²` and return the balanced conformal representative.
pub fn balanced_representative(gm: &GridMetric, tol: f64) -> Result<BalancedRepresentative> {
    let g = &gm.grid;
    let m = 2 * gm.n;
    let nodes = gm.nodes();
    let harmonic: Vec<f64> =
        (0..m).map(|a| (0..nodes).map(|p| gm.lee[p * m + a]).sum::<f64>() / nodes as f64).collect();
    let eta_scale = gm.lee.iter().fold(0.0f64, |w, v| w.max(v.abs()));
    if let Some((a, v)) = harmonic.iter().enumerate().find(|(_, v)| v.abs() > tol.max(1e-12 * eta_scale)) {
        let axis = if a % 2 == 0 { format!("x{}", a / 2 + 1) } else { format!("y{}", a / 2 + 1) };
        return Err(Error::Precondition(format!(
            "Lee form is not exact: period {v:.3e} along {axis}; a balanced conformal representative needs b1 = 0"
        )));
    }
    let act = g.active.clone();
    let b: Vec<f64> = act.iter().flat_map(|&a| (0..nodes).map(move |p| (a, p))).map(|(a, p)| gm.lee[p * m + a]).collect();
    let apply = |u: &[f64]| -> Vec<f64> { act.iter().flat_map(|&a| g.d1(u, a)).collect() };
    let apply_t = |r: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; nodes];
        for (s, &a) in act.iter().enumerate() {
            let d = g.d1(&r[s * nodes..(s + 1) * nodes], a);
            for p in 0..nodes {
                out[p] -= d[p];
            }
        }
        out
    };
    let (mut u, _) = cgls(apply, apply_t, &b, 20 * nodes.max(100), 1e-13);
    let w = gm.weights();
    let mean = integrate(gm, &u) / w.iter().sum::<f64>();
    u.iter_mut().for_each(|v| *v -= mean);
    let du: Vec<Vec<f64>> = (0..m).map(|a| g.d1(&u, a)).collect();
    let lee_residual = (0..nodes)
        .flat_map(|p| (0..m).map(move |a| (p, a)))
        .map(|(p, a)| (gm.lee[p * m + a] - du[a][p]).abs())
        .fold(0.0, f64::max);
    if lee_residual > 10.0 * tol {
        return Err(Error::Precondition(format!(
            "Lee form is not d-exact on this grid: residual {lee_residual:.3e} exceeds 10x tolerance"
        )));
    }
    let factor = u.iter().map(|v| -v / (gm.n as f64 - 1.0)).collect();
    Ok(BalancedRepresentative { u, factor, lee_residual, harmonic_part: harmonic })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Builtin;
    use crate::grid::Scheme;
    use crate::conformal::{conformal_manifold, factor_invariants, factor_jet};
    use crate::expr::parse_expr;
    use std::f64::consts::PI;

    fn flat(nn: usize, scheme: Scheme) -> GridMetric {
        let man = ModelManifold::named("flat-torus", Some(2), None).unwrap();
        GridMetric::new(&man, Arc::new(TorusGrid::new(2, nn, None, scheme).unwrap())).unwrap()
    }

    #[test]
    fn flat_laplacian_of_wave() {
        let gm = flat(16, Scheme::Spectral);
        let u = gm.grid.sample(|x| (2.0 * PI * x[0]).sin());
        let l = complex_laplacian(&gm, &u).unwrap().re();
        for (p, v) in l.iter().enumerate() {
            assert!((v + PI * PI * u[p]).abs() < 1e-10);
        }
    }

    #[test]
    fn flat_volume_and_mean_zero() {
        let gm = flat(8, Scheme::Fd2);
        assert!((integrate(&gm, &vec![1.0; gm.nodes()]) - 4.0).abs() < 1e-12);
        let u = gm.grid.sample(|x| (2.0 * PI * x[0]).sin());
        assert!(integrate(&gm, &u).abs() < 1e-12);
    }

    #[test]
    fn flat_duality_exact() {
        let gm = flat(8, Scheme::Fd2);
        let u = gm.grid.sample(|x| (2.0 * PI * (x[0] + x[3])).sin() + (2.0 * PI * x[1]).cos() * x[2].sin());
        assert!(laplacian_duality_defect(&gm, &u).unwrap() < 1e-9);
    }

    #[test]
    fn operator_matches_direct_and_transpose() {
        let man = ModelManifold::builtin(Builtin::from_name("kaehler-bump-scaled", Some(2), None).unwrap());
        let gm = GridMetric::new(&man, Arc::new(TorusGrid::new(2, 6, None, Scheme::Fd2).unwrap())).unwrap();
        let op = gm.laplace_op();
        let u = gm.grid.sample(|x| (2.0 * PI * (x[0] - 2.0 * x[2])).cos() + (2.0 * PI * x[3]).sin());
        let v = gm.grid.sample(|x| (2.0 * PI * (x[1] + x[2])).sin());
        let a = op.apply(&u);
        let b = complex_laplacian(&gm, &u).unwrap().re();
        assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-10));
        let lhs: f64 = op.apply(&u).iter().zip(&v).map(|(x, y)| x * y).sum();
        let rhs: f64 = op.apply_transpose(&v).iter().zip(&u).map(|(x, y)| x * y).sum();
        assert!((lhs - rhs).abs() < 1e-9 * lhs.abs().max(1.0));
    }
    fn bump(name: &str, nn: usize) -> GridMetric {
        let man = ModelManifold::named(name, Some(2), None).unwrap();
        GridMetric::new(&man, Arc::new(TorusGrid::new(2, nn, None, Scheme::Spectral).unwrap())).unwrap()
    }

    #[test]
    fn kaehler_degrees_vanish() {
        let d = gauduchon_degrees(&bump("kaehler-bump", 16), 1e-8);
        assert!(d.reliable);
        assert!(d.gamma1.abs() < 1e-6 && d.gamma2.abs() < 1e-6, "{d:?}");
        assert!((d.gamma1 - d.gamma2).abs() < 1e-9);
    }

    #[test]
    fn torsion_degree_negative_and_scales() {
        let man = ModelManifold::named("kaehler-bump-scaled", Some(2), None).unwrap();
        let grid = Arc::new(TorusGrid::new(2, 8, None, Scheme::Spectral).unwrap());
        let d0 = gauduchon_degrees(&GridMetric::new(&man, grid.clone()).unwrap(), 1e-8);
        assert!(d0.gamma2 < -1e-4, "{d0:?}");
        let c: f64 = 0.3;
        let scaled = conformal_manifold(&man, &parse_expr("0.3").unwrap()).unwrap();
        let d1 = gauduchon_degrees(&GridMetric::new(&scaled, grid).unwrap(), 1e-8);
        assert!((d1.gamma2 - c.exp() * d0.gamma2).abs() < 1e-9 * d0.gamma2.abs());
        assert!((d1.gamma1 - c.exp() * d0.gamma1).abs() < 1e-9);
    }

    #[test]
    fn integral_of_laplacian_vanishes() {
        let gm = bump("kaehler-bump-scaled", 8);
        let u = gm.grid.sample(|x| (2.0 * PI * (x[0] + x[3])).sin() + (2.0 * PI * x[1]).cos());
        let l = complex_laplacian(&gm, &u).unwrap().re();
        assert!(integrate(&gm, &l).abs() < 1e-10);
    }

    #[test]
    fn duality_converges_on_torsion_metric() {
        let man = conformal_strip("torsion-strip");
        let mut defects = Vec::new();
        for nn in [16, 32, 64] {
            let grid = TorusGrid::reduced(2, nn, None, vec![0, 1], Scheme::Fd2).unwrap();
            let gm = GridMetric::new(&man, Arc::new(grid)).unwrap();
            let u = gm.grid.sample(|x| (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).cos() + 0.3 * (2.0 * PI * x[1]).sin());
            defects.push(laplacian_duality_defect(&gm, &u).unwrap());
        }
        assert!(defects[0] > 1e-6);
        for w in defects.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!((order - 2.0).abs() < 0.2, "{defects:?}");
        }
    }

    fn conformal_strip(base: &str) -> ModelManifold {
        let base = ModelManifold::named(base, Some(2), None).unwrap();
        let g = "0.1*re(exp(i*6.283185307179586*re(z1))) + 0.05*im(exp(i*6.283185307179586*(re(z1) + im(z1))))";
        conformal_manifold(&base, &parse_expr(g).unwrap()).unwrap()
    }

    #[test]
    fn balanced_representative_recovers_factor() {
        let man = conformal_strip("kaehler-strip");
        let grid = TorusGrid::reduced(2, 32, None, vec![0, 1], Scheme::Spectral).unwrap();
        let gm = GridMetric::new(&man, Arc::new(grid)).unwrap();
        let br = balanced_representative(&gm, 1e-9).unwrap();
        let g = gm.grid.sample(|x| {
            0.1 * (2.0 * PI * x[0]).cos() + 0.05 * (2.0 * PI * (x[0] + x[1])).sin()
        });
        let mean = g.iter().zip(gm.weights()).map(|(a, w)| a * w).sum::<f64>() / gm.volume();
        for (p, v) in br.u.iter().enumerate() {
            assert!((v - (g[p] - mean)).abs() < 1e-9);
        }
        assert!(br.lee_residual < 1e-9);
    }

    #[test]
    fn balanced_representative_of_kaehler_is_constant() {
        let man = ModelManifold::named("kaehler-strip", Some(2), None).unwrap();
        let grid = TorusGrid::reduced(2, 16, None, vec![0, 1], Scheme::Fd2).unwrap();
        let gm = GridMetric::new(&man, Arc::new(grid)).unwrap();
        let br = balanced_representative(&gm, 1e-9).unwrap();
        assert!(br.u.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn nonexact_lee_form_is_an_obstruction() {
        let man = ModelManifold::named("kaehler-strip", Some(2), None).unwrap();
        let grid = TorusGrid::reduced(2, 8, None, vec![0, 1], Scheme::Fd2).unwrap();
        let mut gm = GridMetric::new(&man, Arc::new(grid)).unwrap();
        for p in 0..gm.nodes() {
            gm.lee[p * 4 + 2] += 0.01;
        }
        let err = balanced_representative(&gm, 1e-9).unwrap_err().to_string();
        assert!(err.contains("b1 = 0") && err.contains("x2"), "{err}");
    }

    #[test]
    fn rejects_non_torus_and_inactive_dependence() {
        let hopf = ModelManifold::named("hopf", Some(2), None).unwrap();
        let grid = Arc::new(TorusGrid::reduced(2, 8, None, vec![0, 1], Scheme::Fd2).unwrap());
        assert!(GridMetric::new(&hopf, grid.clone()).is_err());
        let bump = ModelManifold::named("kaehler-bump", Some(2), None).unwrap();
        assert!(GridMetric::new(&bump, grid.clone()).is_err());
        assert!(GridMetric::new(&bump.dsl_twin().unwrap(), grid).is_err());
    }
    #[test]
    fn manufactured_laplacian_matches_symbolic() {
        let man = ModelManifold::named("torsion-strip", Some(2), None).unwrap();
        let f = parse_expr("re(exp(i*6.283185307179586*(re(z1) + 2*im(z1)))) + 0.5*im(exp(i*6.283185307179586*im(z1)))").unwrap();
        let mut errs = Vec::new();
        for nn in [16, 32, 64] {
            let grid = TorusGrid::reduced(2, nn, None, vec![0, 1], Scheme::Fd2).unwrap();
            let gm = GridMetric::new(&man, Arc::new(grid)).unwrap();
            let mut u = Vec::new();
            let mut exact = Vec::new();
            for p in 0..gm.nodes() {
                let pt = gm.grid.point(p);
                let fj = factor_jet(&f, &pt, &man.params).unwrap();
                u.push(fj.f);
                exact.push(factor_invariants(&man.jet(&pt).unwrap(), &fj).unwrap().laplacian);
            }
            let l = complex_laplacian(&gm, &u).unwrap().re();
            errs.push(l.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        }
        for w in errs.windows(2) {
            assert!(((w[0] / w[1]).log2() - 2.0).abs() < 0.2, "{errs:?}");
        }
    }
    #[test]
    fn conformal_grid_metric_matches_direct() {
        let base = ModelManifold::named("torsion-strip", Some(2), None).unwrap();
        let g = "0.1*re(exp(i*6.283185307179586*re(z1))) + 0.05*im(exp(i*6.283185307179586*(re(z1) + im(z1))))";
        let direct = conformal_manifold(&base, &parse_expr(g).unwrap()).unwrap();
        let grid = Arc::new(TorusGrid::reduced(2, 32, None, vec![0, 1], Scheme::Spectral).unwrap());
        let gm = GridMetric::new(&base, grid.clone()).unwrap();
        let u = grid.sample(|x| 0.1 * (2.0 * PI * x[0]).cos() + 0.05 * (2.0 * PI * (x[0] + x[1])).sin());
        let a = gm.conformal(&u).unwrap();
        let b = GridMetric::new(&direct, grid).unwrap();
        let close = |x: &[f64], y: &[f64]| x.iter().zip(y).all(|(p, q)| (p - q).abs() < 1e-8);
        assert!(close(&a.s_c1, &b.s_c1));
        assert!(close(&a.s_c2, &b.s_c2));
        assert!(close(&a.s_b2, &b.s_b2));
        assert!(close(&a.lee, &b.lee));
        assert!(close(&a.det, &b.det));
        assert!(a.sigma.iter().zip(&b.sigma).all(|(p, q)| (p - q).norm() < 1e-8));
    }
}
