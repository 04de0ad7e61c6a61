//! Torsion, Chern and Gauduchon curvature, Ricci traces and torsion diagnostics.
//!
//! Index conventions: `h[i][j] = h_{ij̄}`, `g[k][l] = h^{kl̄}`. A (1,1)-form
//! `√−1 Σ a_{ij̄} dz^i ∧ dz̄^j` is stored as its row-major coefficient matrix `a`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::{self, Form};
use crate::manifold::ModelManifold;
use crate::metric::{inverse_and_det, ChartPoint, MetricInverse, MetricJet, C64};

const ZERO: C64 = C64::new(0.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Tolerance on imaginary parts of quantities that must be real.
pub const REALITY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct TorsionTensor {
    pub n: usize,
    t: Vec<C64>,
}

impl TorsionTensor {
    /// `T_{ij}^k`.
    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> C64 {
        self.t[(i * self.n + j) * self.n + k]
    }

    /// `σ_j = Σ_q T_{jq}^q`.
    pub fn trace(&self) -> Vec<C64> {
        (0..self.n).map(|j| (0..self.n).map(|q| self.get(j, q, q)).sum()).collect()
    }

    /// `|T|² = Σ T_{ij}^k conj(T_{ab}^c) h^{iā} h^{jb̄} h_{kc̄}`.
    pub fn norm_sq(&self, jet: &MetricJet, inv: &MetricInverse) -> f64 {
        let n = self.n;
        let mut s = ZERO;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let t = self.get(i, j, k);
                    if t == ZERO {
                        continue;
                    }
                    for a in 0..n {
                        for b in 0..n {
                            for c in 0..n {
                                s += t * self.get(a, b, c).conj() * inv.g(i, a) * inv.g(j, b) * jet.h(k, c);
                            }
                        }
                    }
                }
            }
        }
        s.re
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Origin {
    Chern,
    Gauduchon(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureTensor {
    pub n: usize,
    pub t: f64,
    pub origin: Origin,
    r: Vec<C64>,
}

impl CurvatureTensor {
    /// `R_{ij̄kl̄}`.
    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> C64 {
        self.r[((i * self.n + j) * self.n + k) * self.n + l]
    }

    /// Largest `|conj(R_{ij̄kl̄}) − R_{jīlk̄}|` relative to the largest entry.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.n;
        let scale = self.r.iter().map(|v| v.norm()).fold(1.0, f64::max);
        let mut w: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        w = w.max((self.get(i, j, k, l).conj() - self.get(j, i, l, k)).norm());
                    }
                }
            }
        }
        w / scale
    }
}

/// `T_{ij}^k = h^{kl̄}(∂_i h_{jl̄} − ∂_j h_{il̄})`.
pub fn chern_torsion(jet: &MetricJet) -> Result<TorsionTensor> {
    let inv = inverse_and_det(jet)?;
    Ok(torsion_with(jet, &inv))
}

fn torsion_with(jet: &MetricJet, inv: &MetricInverse) -> TorsionTensor {
    let n = jet.n;
    let mut t = vec![ZERO; n * n * n];
    for i in 0..n {
        for j in i + 1..n {
            for k in 0..n {
                let v: C64 = (0..n).map(|l| inv.g(k, l) * (jet.dh(i, j, l) - jet.dh(j, i, l))).sum();
                t[(i * n + j) * n + k] = v;
                t[(j * n + i) * n + k] = -v;
            }
        }
    }
    TorsionTensor { n, t }
}

/// `Θ_{ij̄kl̄} = −∂_i∂̄_j h_{kl̄} + h^{pq̄} ∂̄_j h_{pl̄} ∂_i h_{kq̄}`.
pub fn chern_curvature(jet: &MetricJet) -> Result<CurvatureTensor> {
    let inv = inverse_and_det(jet)?;
    Ok(chern_with(jet, &inv))
}

fn chern_with(jet: &MetricJet, inv: &MetricInverse) -> CurvatureTensor {
    let n = jet.n;
    let mut r = vec![ZERO; n * n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut v = -jet.ddh(i, j, k, l);
                    for p in 0..n {
                        for q in 0..n {
                            v += inv.g(p, q) * jet.dbar(j, p, l) * jet.dh(i, k, q);
                        }
                    }
                    r[((i * n + j) * n + k) * n + l] = v;
                }
            }
        }
    }
    CurvatureTensor { n, t: 0.0, origin: Origin::Chern, r }
}

/// Curvature of the Gauduchon connection with parameter `t`.
pub fn gauduchon_curvature(jet: &MetricJet, t: f64) -> Result<CurvatureTensor> {
    let inv = inverse_and_det(jet)?;
    let theta = chern_with(jet, &inv);
    if t == 0.0 {
        return Ok(CurvatureTensor { origin: Origin::Gauduchon(0.0), ..theta });
    }
    let tor = torsion_with(jet, &inv);
    Ok(gauduchon_with(jet, &inv, &theta, &tor, t))
}

fn gauduchon_with(
    jet: &MetricJet,
    inv: &MetricInverse,
    th: &CurvatureTensor,
    tor: &TorsionTensor,
    t: f64,
) -> CurvatureTensor {
    let n = jet.n;
    // w[i][j][k][l] = Σ h^{pq̄} T_{ip}^m conj(T_{jq}^r) h_{ml̄} h_{kr̄}, built in stages.
    let mut a = vec![ZERO; n * n * n]; // a[i][p][l] = Σ_m T_{ip}^m h_{ml̄}
    for i in 0..n {
        for p in 0..n {
            for l in 0..n {
                a[(i * n + p) * n + l] = (0..n).map(|m| tor.get(i, p, m) * jet.h(m, l)).sum();
            }
        }
    }
    let mut r = vec![ZERO; n * n * n * n];
    let t2 = t * t;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let base = th.get(i, j, k, l);
                    let lin = th.get(i, l, k, j) + th.get(k, j, i, l) - base * 2.0;
                    let mut q1 = ZERO;
                    for p in 0..n {
                        for q in 0..n {
                            q1 += tor.get(i, k, p) * tor.get(j, l, q).conj() * jet.h(p, q);
                        }
                    }
                    let mut q2 = ZERO;
                    for p in 0..n {
                        for q in 0..n {
                            // conj(T_{jq}^r) h_{kr̄} = conj(Σ_r T_{jq}^r h_{rk̄}) = conj(a[j][q][k])
                            q2 += inv.g(p, q) * a[(i * n + p) * n + l] * a[(j * n + q) * n + k].conj();
                        }
                    }
                    r[((i * n + j) * n + k) * n + l] = base + lin * t + (q1 - q2) * t2;
                }
            }
        }
    }
    CurvatureTensor { n, t, origin: Origin::Gauduchon(t), r }
}

/// Four Ricci traces and two scalar curvatures.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RicciForms {
    pub n: usize,
    pub ric1: Vec<C64>,
    pub ric2: Vec<C64>,
    pub ric3: Vec<C64>,
    pub ric4: Vec<C64>,
    pub s1: f64,
    pub s2: f64,
}

impl RicciForms {
    pub fn ric(&self, which: usize) -> &[C64] {
        match which {
            1 => &self.ric1,
            2 => &self.ric2,
            3 => &self.ric3,
            _ => &self.ric4,
        }
    }
}

pub fn ricci_and_scalars(r: &CurvatureTensor, jet: &MetricJet) -> Result<RicciForms> {
    let inv = inverse_and_det(jet)?;
    ricci_with(r, &inv)
}

fn ricci_with(r: &CurvatureTensor, inv: &MetricInverse) -> Result<RicciForms> {
    let n = r.n;
    let mut ric = [vec![ZERO; n * n], vec![ZERO; n * n], vec![ZERO; n * n], vec![ZERO; n * n]];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let g = inv.g(k, l);
                    ric[0][i * n + j] += g * r.get(i, j, k, l);
                    ric[1][i * n + j] += g * r.get(k, l, i, j);
                    ric[2][i * n + j] += g * r.get(i, l, k, j);
                    ric[3][i * n + j] += g * r.get(k, j, i, l);
                }
            }
        }
    }
    let mut s1 = ZERO;
    let mut s2 = ZERO;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let v = r.get(i, j, k, l);
                    s1 += inv.g(i, j) * inv.g(k, l) * v;
                    s2 += inv.g(i, l) * inv.g(k, j) * v;
                }
            }
        }
    }
    let scale = 1.0 + s1.norm().max(s2.norm());
    if s1.im.abs() > REALITY_TOL * scale || s2.im.abs() > REALITY_TOL * scale {
        return Err(Error::Consistency(format!(
            "scalar curvature not real: Im s1 = {:.3e}, Im s2 = {:.3e}",
            s1.im, s2.im
        )));
    }
    let [ric1, ric2, ric3, ric4] = ric;
    Ok(RicciForms { n, ric1, ric2, ric3, ric4, s1: s1.re, s2: s2.re })
}

/// Gauduchon curvature of parameter `t` and its traces at one jet.
pub fn gauduchon_ricci(jet: &MetricJet, t: f64) -> Result<RicciForms> {
    let r = gauduchon_curvature(jet, t)?;
    ricci_and_scalars(&r, jet)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TorsionNorms {
    /// `|∂ω|²`
    pub del_omega: f64,
    /// `|∂*ω|²`
    pub del_star: f64,
    /// `|∂̄*ω|²`
    pub delbar_star: f64,
    /// `⟨∂∂*ω, ω⟩`
    pub ddstar_pair: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TorsionDiagnostics {
    /// `∂*ω = Σ c_j dz̄^j`
    pub del_star_omega: Vec<C64>,
    /// `∂̄*ω = Σ c_i dz^i`
    pub delbar_star_omega: Vec<C64>,
    /// Real Lee form `η = Σ η_{x_k} dx^k + η_{y_k} dy^k`, stored `[x_1, y_1, x_2, …]`.
    pub lee: Vec<f64>,
    /// `(1,0)` part of the Lee form.
    pub lee_10: Vec<C64>,
    /// Max coefficient of `dω^{n−1} − η ∧ ω^{n−1}`.
    pub lee_defect: f64,
    /// Coefficients of `∂∂*ω = √−1 Σ α_{ij̄} dz^i ∧ dz̄^j`.
    pub ddstar: Vec<C64>,
    /// Coefficients of `∂̄∂̄*ω`.
    pub dbar_dbar_star: Vec<C64>,
    pub norms: TorsionNorms,
}

/// `∂̄_i σ_j`, row-major in `(i, j)`.
fn dbar_sigma(jet: &MetricJet, inv: &MetricInverse) -> Vec<C64> {
    let n = jet.n;
    let mut out = vec![ZERO; n * n];
    for i in 0..n {
        // ∂̄_i g[q][l] = −Σ_{a,b} g[a][l] ∂̄_i h_{ab̄} g[q][b]
        let mut dg = vec![ZERO; n * n];
        for q in 0..n {
            for l in 0..n {
                let mut v = ZERO;
                for a in 0..n {
                    for b in 0..n {
                        v -= inv.g(a, l) * jet.dbar(i, a, b) * inv.g(q, b);
                    }
                }
                dg[q * n + l] = v;
            }
        }
        for j in 0..n {
            let mut v = ZERO;
            for q in 0..n {
                for l in 0..n {
                    let d = jet.dh(j, q, l) - jet.dh(q, j, l);
                    let dd = jet.ddh(j, i, q, l) - jet.ddh(q, i, j, l);
                    v += dg[q * n + l] * d + inv.g(q, l) * dd;
                }
            }
            out[i * n + j] = v;
        }
    }
    out
}

/// Solve `dω^{n−1} = η ∧ ω^{n−1}` for a complex 1-form `η`; returns `(a, b, defect)` with
/// `η = Σ a_i dz^i + b_i dz̄^i`.
fn lee_form(jet: &MetricJet) -> Result<(Vec<C64>, Vec<C64>, f64)> {
    let n = jet.n;
    let w = forms::kahler_form(jet).power(n - 1);
    let lhs = forms::d_omega_pow(jet);
    let full = (1u32 << (2 * n)) - 1;
    let rows: Vec<u32> = (0..2 * n).map(|b| full & !(1 << b)).collect();
    let mut m = DMatrix::from_element(2 * n, 2 * n, ZERO);
    for c in 0..2 * n {
        let mut e = Form::zero(n);
        e.add_term(&[1 << c], C64::new(1.0, 0.0));
        let col = e.wedge(&w);
        for (r, &mask) in rows.iter().enumerate() {
            m[(r, c)] = col.coeff(mask);
        }
    }
    let rhs = DVector::from_iterator(2 * n, rows.iter().map(|&mask| lhs.coeff(mask)));
    let sol = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Singular("Lee form system is singular".into()))?;
    let a: Vec<C64> = (0..n).map(|i| sol[i]).collect();
    let b: Vec<C64> = (0..n).map(|i| sol[n + i]).collect();
    let eta = forms::one_form(n, &a, &b);
    let defect = lhs.sub(&eta.wedge(&w)).max_abs();
    Ok((a, b, defect))
}

/// Norm of a (1,1)-form with coefficients `a`.
pub fn norm11(a: &[C64], inv: &MetricInverse) -> f64 {
    let n = inv.n;
    let mut s = ZERO;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    s += a[i * n + j] * a[k * n + l].conj() * inv.g(i, k) * inv.g(j, l).conj();
                }
            }
        }
    }
    s.re.max(0.0).sqrt()
}

/// `⟨α, ω⟩ = Σ h^{ij̄} α_{ij̄}`.
pub fn pair_omega(a: &[C64], inv: &MetricInverse) -> C64 {
    let n = inv.n;
    (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| inv.g(i, j) * a[i * n + j]).sum()
}

pub fn torsion_diagnostics(jet: &MetricJet) -> Result<TorsionDiagnostics> {
    let inv = inverse_and_det(jet)?;
    let tor = torsion_with(jet, &inv);
    diagnostics_with(jet, &inv, &tor)
}

fn diagnostics_with(jet: &MetricJet, inv: &MetricInverse, tor: &TorsionTensor) -> Result<TorsionDiagnostics> {
    let n = jet.n;
    let sigma = tor.trace();
    let del_star_omega: Vec<C64> = sigma.iter().map(|s| -I * s.conj()).collect();
    let delbar_star_omega: Vec<C64> = sigma.iter().map(|s| I * s).collect();
    let mut delbar_star = ZERO;
    for i in 0..n {
        for j in 0..n {
            delbar_star += inv.g(i, j) * sigma[i] * sigma[j].conj();
        }
    }
    let ds = dbar_sigma(jet, inv);
    let ddstar: Vec<C64> = (0..n * n).map(|ij| -ds[ij].conj()).collect();
    let mut dbar_dbar_star = vec![ZERO; n * n];
    for i in 0..n {
        for j in 0..n {
            dbar_dbar_star[i * n + j] = -ds[j * n + i];
        }
    }
    let pair = pair_omega(&ddstar, inv);
    if pair.im.abs() > REALITY_TOL * (1.0 + pair.norm()) {
        return Err(Error::Consistency(format!("<dd*w, w> not real: Im = {:.3e}", pair.im)));
    }
    let (a, b, lee_defect) = lee_form(jet)?;
    let mut lee = Vec::with_capacity(2 * n);
    for k in 0..n {
        let x = a[k] + b[k];
        let y = I * (a[k] - b[k]);
        lee.push(x.re);
        lee.push(y.re);
    }
    Ok(TorsionDiagnostics {
        del_star_omega,
        delbar_star_omega,
        lee,
        lee_10: a,
        lee_defect,
        ddstar,
        dbar_dbar_star,
        norms: TorsionNorms {
            del_omega: tor.norm_sq(jet, inv) / 2.0,
            del_star: delbar_star.re,
            delbar_star: delbar_star.re,
            ddstar_pair: pair.re,
        },
    })
}

/// `|∂ω|²` through the exterior-algebra norm, independent of the torsion tensor.
pub fn del_omega_norm_forms(jet: &MetricJet) -> Result<f64> {
    let inv = inverse_and_det(jet)?;
    Ok(forms::del_omega(jet).norm_sq(&inv))
}

/// Scalar curvatures of parameter `t` from the Chern scalar and torsion quantities.
pub fn scalar_via_identity(jet: &MetricJet, t: f64) -> Result<(f64, f64)> {
    let inv = inverse_and_det(jet)?;
    let sc1 = ricci_with(&chern_with(jet, &inv), &inv)?.s1;
    let d = diagnostics_with(jet, &inv, &torsion_with(jet, &inv))?.norms;
    let s1 = sc1 - 2.0 * t * d.ddstar_pair;
    let s2 = sc1 - (1.0 - 2.0 * t) * d.ddstar_pair - t * t * (2.0 * d.del_omega + d.del_star);
    Ok((s1, s2))
}

/// `S² − S¹ + (t²−4t+1)|∂̄*ω|² + 2t²|∂ω|²`; vanishes for Gauduchon metrics.
pub fn scalar_comparison_defect(jet: &MetricJet, t: f64) -> Result<f64> {
    let rf = gauduchon_ricci(jet, t)?;
    let d = torsion_diagnostics(jet)?.norms;
    Ok(rf.s2 - rf.s1 + (t * t - 4.0 * t + 1.0) * d.delbar_star + 2.0 * t * t * d.del_omega)
}

/// Surface form of the comparison defect, `S² − S¹ + (3t−1)(t−1)|∂ω|²`.
pub fn scalar_comparison_defect_surface(jet: &MetricJet, t: f64) -> Result<f64> {
    if jet.n != 2 {
        return Err(Error::Precondition("surface form needs n = 2".into()));
    }
    let rf = gauduchon_ricci(jet, t)?;
    let d = torsion_diagnostics(jet)?.norms;
    Ok(rf.s2 - rf.s1 + (3.0 * t - 1.0) * (t - 1.0) * d.del_omega)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EinsteinResidual {
    pub f_hat: f64,
    pub residual: f64,
    /// Norm of `Θ³ + Θ⁴ − 2Θ¹ + ∂∂*ω + ∂̄∂̄*ω`.
    pub identity_defect: f64,
    pub theta34: Vec<C64>,
}

/// Residual of `Θ³ + Θ⁴ = f ω` with `f` fixed by its trace.
pub fn einstein_residual(jet: &MetricJet) -> Result<EinsteinResidual> {
    let inv = inverse_and_det(jet)?;
    let th = chern_with(jet, &inv);
    let rf = ricci_with(&th, &inv)?;
    let d = diagnostics_with(jet, &inv, &torsion_with(jet, &inv))?;
    let n = jet.n;
    let f_hat = 2.0 / n as f64 * rf.s2;
    let theta34: Vec<C64> = (0..n * n).map(|ij| rf.ric3[ij] + rf.ric4[ij]).collect();
    let off: Vec<C64> = (0..n * n)
        .map(|ij| theta34[ij] - jet.h(ij / n, ij % n) * f_hat)
        .collect();
    let ident: Vec<C64> = (0..n * n)
        .map(|ij| theta34[ij] - rf.ric1[ij] * 2.0 + d.ddstar[ij] + d.dbar_dbar_star[ij])
        .collect();
    Ok(EinsteinResidual {
        f_hat,
        residual: norm11(&off, &inv),
        identity_defect: norm11(&ident, &inv),
        theta34,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassFlag {
    pub holds: bool,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassFlags {
    pub kahler: ClassFlag,
    pub balanced: ClassFlag,
    pub gauduchon: ClassFlag,
    pub pluriclosed: ClassFlag,
    /// Max over samples of `balanced / kahler` and `gauduchon / balanced` residual ratios.
    pub dominance: (f64, f64),
}

/// Pointwise class residuals at one jet: `(|dω|, |η|, |∂∂̄ω^{n−1}|, |∂∂̄ω|)`.
pub fn class_residuals(jet: &MetricJet) -> Result<[f64; 4]> {
    let inv = inverse_and_det(jet)?;
    let n = jet.n;
    let kahler = forms::d_omega(jet).norm_sq(&inv).max(0.0).sqrt();
    let (a, b, _) = lee_form(jet)?;
    let balanced = forms::one_form(n, &a, &b).norm_sq(&inv).max(0.0).sqrt();
    let gauduchon = forms::ddbar_omega_pow(jet).norm_sq(&inv).max(0.0).sqrt();
    let pluriclosed = forms::ddbar_omega(jet).norm_sq(&inv).max(0.0).sqrt();
    Ok([kahler, balanced, gauduchon, pluriclosed])
}

pub fn classify(man: &ModelManifold, points: &[ChartPoint], tol: f64) -> Result<ClassFlags> {
    if points.is_empty() {
        return Err(Error::Precondition("classify needs at least one sample point".into()));
    }
    let mut worst = [0.0f64; 4];
    let mut dom = (0.0f64, 0.0f64);
    for p in points {
        let r = class_residuals(&man.jet(p)?)?;
        for k in 0..4 {
            worst[k] = worst[k].max(r[k]);
        }
        if r[0] > 0.0 {
            dom.0 = dom.0.max(r[1] / r[0]);
        }
        if r[1] > 0.0 {
            dom.1 = dom.1.max(r[2] / r[1]);
        }
    }
    let flag = |r: f64| ClassFlag { holds: r < tol, residual: r };
    Ok(ClassFlags {
        kahler: flag(worst[0]),
        balanced: flag(worst[1]),
        gauduchon: flag(worst[2]),
        pluriclosed: flag(worst[3]),
        dominance: dom,
    })
}

/// Everything the pointwise engine reports at one point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvatureReport {
    pub point: ChartPoint,
    pub t: f64,
    pub s1: f64,
    pub s2: f64,
    pub ricci: RicciForms,
    pub torsion: TorsionNorms,
    pub lee: Vec<f64>,
    pub class_residuals: [f64; 4],
}

pub fn curvature_report(man: &ModelManifold, p: &ChartPoint, t: f64) -> Result<CurvatureReport> {
    let jet = man.jet(p)?;
    let ricci = gauduchon_ricci(&jet, t)?;
    let d = torsion_diagnostics(&jet)?;
    Ok(CurvatureReport {
        point: p.clone(),
        t,
        s1: ricci.s1,
        s2: ricci.s2,
        ricci,
        torsion: d.norms,
        lee: d.lee,
        class_residuals: class_residuals(&jet)?,
    })
}
