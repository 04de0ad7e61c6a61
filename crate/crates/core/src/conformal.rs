//! Conformal changes `ω_f = e^f ω`: transformation laws and a direct-recomputation oracle.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::curvature::{chern_torsion, gauduchon_ricci};
use crate::error::{Error, Result};
use crate::expr::{simplify, wirtinger, EvalEnv, Expr, Wrt};
use crate::manifold::ModelManifold;
use crate::metric::{inverse_and_det, ChartPoint, FactorJet, MetricInverse, MetricJet, C64};

pub type ConformalFactorJet = FactorJet;

const ZERO: C64 = C64::new(0.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

fn ensure_real(f: &Expr, man: &ModelManifold) -> Result<()> {
    if simplify(&f.conjugate()) == simplify(f) {
        return Ok(());
    }
    for p in man.sample_points(8, 0xf00d) {
        let v = f.eval(&EvalEnv { z: &p.coords, params: &man.params });
        if v.im.abs() > 1e-12 * (1.0 + v.re.abs()) {
            return Err(Error::Metric(format!("conformal factor is not real-valued: {f}")));
        }
    }
    Ok(())
}

/// The manifold carrying `e^f h`, built symbolically.
pub fn conformal_manifold(man: &ModelManifold, f: &Expr) -> Result<ModelManifold> {
    ensure_real(f, man)?;
    let m = man.metric_expr()?.conformal(f)?;
    let mut out = ModelManifold::from_expr(&format!("{}-conformal", man.name), m, man.params.clone(), man.domain.clone())?;
    out.declared_gauduchon = false;
    out.declared_balanced = false;
    Ok(out)
}

/// 2-jet of a real factor at a point.
pub fn factor_jet(f: &Expr, p: &ChartPoint, params: &BTreeMap<String, f64>) -> Result<FactorJet> {
    let n = p.n();
    let env = EvalEnv { z: &p.coords, params };
    let v = f.eval(&env);
    if !v.re.is_finite() || v.im.abs() > 1e-10 * (1.0 + v.re.abs()) {
        return Err(Error::Domain(format!("conformal factor not real and finite at this point: {v}")));
    }
    let mut df = Vec::with_capacity(n);
    let mut ddf = Vec::with_capacity(n * n);
    for i in 0..n {
        let d = wirtinger(f, Wrt::z(i));
        df.push(d.eval(&env));
        for j in 0..n {
            ddf.push(wirtinger(&d, Wrt::zb(j)).eval(&env));
        }
    }
    Ok(FactorJet { f: v.re, df, ddf })
}

/// `Δf`, `|∂f|²` and `⟨∂*ω, √−1 ∂̄f⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FactorInvariants {
    pub laplacian: f64,
    pub grad_sq: f64,
    pub pairing: C64,
}

fn invariants(inv: &MetricInverse, sigma: &[C64], fj: &FactorJet) -> FactorInvariants {
    let n = inv.n;
    let mut lap = ZERO;
    let mut grad = ZERO;
    let mut pair = ZERO;
    for k in 0..n {
        for j in 0..n {
            lap += inv.g(k, j) * fj.ddf(k, j);
            grad += inv.g(k, j) * fj.df[k] * fj.df[j].conj();
            pair -= inv.g(k, j) * sigma[j].conj() * fj.df[k];
        }
    }
    FactorInvariants { laplacian: lap.re, grad_sq: grad.re, pairing: pair }
}

pub fn factor_invariants(jet: &MetricJet, fj: &FactorJet) -> Result<FactorInvariants> {
    let inv = inverse_and_det(jet)?;
    let sigma = chern_torsion(jet)?.trace();
    Ok(invariants(&inv, &sigma, fj))
}

/// Second scalar curvature of `e^f ω` for the Gauduchon connection of parameter `t`.
pub fn transformed_s2(jet: &MetricJet, fj: &FactorJet, t: f64) -> Result<f64> {
    let n = jet.n as f64;
    let s2 = gauduchon_ricci(jet, t)?.s2;
    let q = factor_invariants(jet, fj)?;
    Ok((-fj.f).exp()
        * (s2 - (1.0 + 2.0 * (n - 1.0) * t) * q.laplacian - (n * n - 1.0) * t * t * q.grad_sq
            + 2.0 * (n + 1.0) * t * t * q.pairing.re))
}

/// Chern case: `e^{−f}(S_C² − Δf)`.
pub fn transformed_s2_chern(jet: &MetricJet, fj: &FactorJet) -> Result<f64> {
    let s2 = gauduchon_ricci(jet, 0.0)?.s2;
    let q = factor_invariants(jet, fj)?;
    Ok((-fj.f).exp() * (s2 - q.laplacian))
}

/// Bismut case: `e^{−f}(S_B² − (2n−1)Δf − (n²−1)|∂f|² + 2(n+1) Re⟨∂*ω, √−1∂̄f⟩)`.
pub fn transformed_s2_bismut(jet: &MetricJet, fj: &FactorJet) -> Result<f64> {
    let n = jet.n as f64;
    let s2 = gauduchon_ricci(jet, 1.0)?.s2;
    let q = factor_invariants(jet, fj)?;
    Ok((-fj.f).exp()
        * (s2 - (2.0 * n - 1.0) * q.laplacian - (n * n - 1.0) * q.grad_sq
            + 2.0 * (n + 1.0) * q.pairing.re))
}

/// Form of the `∂̄*ω ∧ ∂̄f` term in the Ricci law.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LastTerm {
    /// `−t²√−1 ∂̄*ω ∧ ∂̄f`, as printed.
    Verbatim,
    /// `−t² ∂̄*ω ∧ ∂̄f`, as the component computation gives.
    Component,
}

/// The variant that agrees with direct recomputation.
pub const SHIPPED: LastTerm = LastTerm::Component;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransformedCurvature {
    pub n: usize,
    pub t: f64,
    pub ric3: Vec<C64>,
    pub ric4: Vec<C64>,
    pub s2: f64,
}

/// Third and fourth Ricci forms of `e^f ω` for parameter `t`.
pub fn transformed_ric34(jet: &MetricJet, fj: &FactorJet, t: f64) -> Result<TransformedCurvature> {
    transformed_ric34_with(jet, fj, t, SHIPPED)
}

pub fn transformed_ric34_with(
    jet: &MetricJet,
    fj: &FactorJet,
    t: f64,
    last: LastTerm,
) -> Result<TransformedCurvature> {
    let n = jet.n;
    let nf = n as f64;
    let inv = inverse_and_det(jet)?;
    let tor = chern_torsion(jet)?;
    let sigma = tor.trace();
    let q = invariants(&inv, &sigma, fj);
    let rf = gauduchon_ricci(jet, t)?;
    let t2 = t * t;
    // V^p = h^{pq̄} ∂̄_q f
    let v: Vec<C64> = (0..n).map(|p| (0..n).map(|q| inv.g(p, q) * fj.df[q].conj()).sum()).collect();
    // A_{il̄} = Σ h_{kl̄} T_{pi}^k V^p, the coefficient of √−1 T(V)
    let mut a = vec![ZERO; n * n];
    for i in 0..n {
        for l in 0..n {
            let mut s = ZERO;
            for k in 0..n {
                for p in 0..n {
                    s += jet.h(k, l) * tor.get(p, i, k) * v[p];
                }
            }
            a[i * n + l] = s;
        }
    }
    let last_c = match last {
        LastTerm::Verbatim => -I * t2,
        LastTerm::Component => C64::new(-t2, 0.0),
    };
    let mut ric3 = vec![ZERO; n * n];
    for i in 0..n {
        for l in 0..n {
            let h = jet.h(i, l);
            ric3[i * n + l] = rf.ric3[i * n + l]
                - fj.ddf(i, l) * (1.0 + (nf - 2.0) * t)
                - h * (t * q.laplacian)
                - h * (nf * t2 * q.grad_sq)
                + fj.df[i] * fj.df[l].conj() * t2
                - a[i * n + l] * (nf * t2)
                - a[l * n + i].conj() * t2
                + h * q.pairing * t2
                + last_c * sigma[i] * fj.df[l].conj();
        }
    }
    let mut ric4 = vec![ZERO; n * n];
    for i in 0..n {
        for j in 0..n {
            ric4[i * n + j] = ric3[j * n + i].conj();
        }
    }
    let s2 = transformed_s2(jet, fj, t)?;
    Ok(TransformedCurvature { n, t, ric3, ric4, s2 })
}

/// Chern case of the Ricci law: `Θ³(ω_f) = Θ³(ω) − √−1∂∂̄f`, and likewise for `Θ⁴`.
pub fn transformed_theta34_chern(jet: &MetricJet, fj: &FactorJet) -> Result<(Vec<C64>, Vec<C64>)> {
    let n = jet.n;
    let rf = gauduchon_ricci(jet, 0.0)?;
    let th3: Vec<C64> = (0..n * n).map(|ij| rf.ric3[ij] - fj.ddf(ij / n, ij % n)).collect();
    let th4 = (0..n * n).map(|ij| th3[(ij % n) * n + ij / n].conj()).collect();
    Ok((th3, th4))
}

/// Ricci forms of `e^f ω` by direct recomputation from the transformed jet.
pub fn direct_ric34(jet_f: &MetricJet, t: f64) -> Result<TransformedCurvature> {
    let rf = gauduchon_ricci(jet_f, t)?;
    Ok(TransformedCurvature { n: jet_f.n, t, ric3: rf.ric3, ric4: rf.ric4, s2: rf.s2 })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleRow {
    pub point: ChartPoint,
    pub t: f64,
    pub formula_s2: f64,
    pub direct_s2: f64,
    pub defect: f64,
    /// Max entry defect of `Ric³` and `Ric⁴`.
    pub ricci_defect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleReport {
    pub rows: Vec<OracleRow>,
    pub max_s2_defect: f64,
    pub max_ricci_defect: f64,
}

impl OracleReport {
    pub fn max_defect(&self) -> f64 {
        self.max_s2_defect.max(self.max_ricci_defect)
    }
}

/// Compare the transformation laws with direct recomputation on `e^f h`.
pub fn conformal_oracle_check(
    man: &ModelManifold,
    f: &Expr,
    t: f64,
    points: &[ChartPoint],
    last: LastTerm,
) -> Result<OracleReport> {
    let man_f = conformal_manifold(man, f)?;
    let mut rows = Vec::with_capacity(points.len());
    for p in points {
        let jet = man.jet(p)?;
        let fj = factor_jet(f, p, &man.params)?;
        let formula = transformed_ric34_with(&jet, &fj, t, last)?;
        let direct = direct_ric34(&man_f.jet(p)?, t)?;
        let ricci_defect = formula
            .ric3
            .iter()
            .zip(&direct.ric3)
            .chain(formula.ric4.iter().zip(&direct.ric4))
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        rows.push(OracleRow {
            point: p.clone(),
            t,
            formula_s2: formula.s2,
            direct_s2: direct.s2,
            defect: (formula.s2 - direct.s2).abs(),
            ricci_defect,
        });
    }
    let max_s2_defect = rows.iter().map(|r| r.defect).fold(0.0, f64::max);
    let max_ricci_defect = rows.iter().map(|r| r.ricci_defect).fold(0.0, f64::max);
    Ok(OracleReport { rows, max_s2_defect, max_ricci_defect })
}
