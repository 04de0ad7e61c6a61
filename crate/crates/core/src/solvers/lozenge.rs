use std::sync::Arc;

use serde::Serialize;

use super::linf;
use crate::curvature::{chern_torsion, einstein_residual};
use crate::error::{Error, Result};
use crate::grid::{complex_laplacian, integrate, GridMetric, TorusGrid};
use crate::manifold::ModelManifold;
use crate::metric::{inverse_and_det, FactorJet, MetricJet, C64};

/// `◊f = nΔ^ℂf + 2Re⟨√−1∂f, ∂̄*ω⟩` on the grid.
pub fn lozenge(gm: &GridMetric, f: &[f64]) -> Result<Vec<f64>> {
    lozenge_with(gm, f, gm.n as f64)
}

/// The operator obtained by contracting `√−1∂∂̄(fω)` with `ω^{n−2}`:
/// `(n−1)Δ^ℂf + 2Re⟨√−1∂f, ∂̄*ω⟩`.
pub fn lozenge_contracted(gm: &GridMetric, f: &[f64]) -> Result<Vec<f64>> {
    lozenge_with(gm, f, gm.n as f64 - 1.0)
}

fn lozenge_with(gm: &GridMetric, f: &[f64], c: f64) -> Result<Vec<f64>> {
    let lap = complex_laplacian(gm, f)?.re();
    // Re⟨√−1∂f, ∂̄*ω⟩ = −Re⟨∂*ω, √−1∂̄f⟩
    let pair = gm.torsion_pairing(f);
    Ok((0..f.len()).map(|p| c * lap[p] - 2.0 * pair[p]).collect())
}

/// Pointwise `(Δ^ℂf, Re⟨√−1∂f, ∂̄*ω⟩)` from analytic jets.
pub fn lozenge_parts(jet: &MetricJet, fj: &FactorJet) -> Result<(f64, f64)> {
    let inv = inverse_and_det(jet)?;
    let sigma = chern_torsion(jet)?.trace();
    let n = jet.n;
    let (mut lap, mut pair) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
    for i in 0..n {
        for j in 0..n {
            lap += inv.g(i, j) * fj.ddf(i, j);
            pair += inv.g(i, j) * fj.df[i] * sigma[j].conj();
        }
    }
    Ok((lap.re, pair.re))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LozengeReport {
    pub manifold: String,
    pub gauduchon_residual: f64,
    pub pluriclosed_residual: f64,
    /// Grid max of `◊f̂` with `f̂ = (2/n)S_C^{(2)}`.
    pub lozenge_linf: f64,
    /// Same for the contracted operator.
    pub contracted_linf: f64,
    /// Grid max of the weak second Hermitian–Einstein residual.
    pub einstein_linf: f64,
    /// Volume variance of `S_C^{(2)}`.
    pub s_c2_variance: f64,
    pub s_c2_spread: f64,
    /// `S_C^{(2)}` was asserted constant because the Einstein residual vanished.
    pub constancy_asserted: bool,
}

/// Extract `f̂`, apply `◊` and assert constancy of `S_C^{(2)}` when the metric is weak
/// second Hermitian–Einstein.
pub fn lozenge_constancy_check(man: &ModelManifold, grid: Arc<TorusGrid>, tol: f64) -> Result<LozengeReport> {
    let gm = GridMetric::new(man, grid.clone())?;
    if !(gm.gauduchon_residual < tol && gm.pluriclosed_residual < tol) {
        return Err(Error::Precondition(format!(
            "'{}' is not pluriclosed and Gauduchon (residuals {:.3e}, {:.3e})",
            man.name, gm.pluriclosed_residual, gm.gauduchon_residual
        )));
    }
    let nf = gm.n as f64;
    let f_hat: Vec<f64> = gm.s_c2.iter().map(|s| 2.0 / nf * s).collect();
    let lz = lozenge(&gm, &f_hat)?;
    let lc = lozenge_contracted(&gm, &f_hat)?;
    let mut einstein: f64 = 0.0;
    for p in 0..gm.nodes() {
        let e = einstein_residual(&man.jet(&grid.point(p))?)?;
        einstein = einstein.max(e.residual);
    }
    let vol = gm.volume();
    let mean = integrate(&gm, &gm.s_c2) / vol;
    let dev: Vec<f64> = gm.s_c2.iter().map(|s| (s - mean) * (s - mean)).collect();
    let s_max = gm.s_c2.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let s_min = gm.s_c2.iter().copied().fold(f64::INFINITY, f64::min);
    let constancy_asserted = einstein < tol;
    if constancy_asserted && s_max - s_min > tol * mean.abs().max(1.0) {
        return Err(Error::Consistency(format!(
            "weak second Hermitian-Einstein metric with non-constant S_C2 (spread {:.3e})",
            s_max - s_min
        )));
    }
    Ok(LozengeReport {
        manifold: man.name.clone(),
        gauduchon_residual: gm.gauduchon_residual,
        pluriclosed_residual: gm.pluriclosed_residual,
        lozenge_linf: linf(&lz),
        contracted_linf: linf(&lc),
        einstein_linf: einstein,
        s_c2_variance: integrate(&gm, &dev) / vol,
        s_c2_spread: s_max - s_min,
        constancy_asserted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::factor_jet;
    use crate::expr::parse_expr;
    use crate::forms::{ddbar_omega, del_omega, delbar_omega, kahler_form, one_form, Form};
    use crate::grid::Scheme;

    const F: &str = "re(exp(i*6.283185307179586*(re(z1) + 2*im(z1)))) + 0.5*im(exp(i*6.283185307179586*(im(z1) + re(z2))))";

    // √−1∂∂̄(fω) = √−1(∂∂̄f∧ω − ∂̄f∧∂ω + ∂f∧∂̄ω + f∂∂̄ω)
    fn ddbar_f_omega(jet: &MetricJet, fj: &FactorJet) -> Form {
        let n = jet.n;
        let zero = vec![C64::new(0.0, 0.0); n];
        let mut ddf = Form::zero(n);
        for i in 0..n {
            for j in 0..n {
                let g = [ddf.dz(i), ddf.dzb(j)];
                ddf.add_term(&g, fj.ddf(i, j));
            }
        }
        let dbf: Vec<C64> = fj.df.iter().map(|v| v.conj()).collect();
        ddf.wedge(&kahler_form(jet))
            .sub(&one_form(n, &zero, &dbf).wedge(&del_omega(jet)))
            .add(&one_form(n, &fj.df, &zero).wedge(&delbar_omega(jet)))
            .add(&ddbar_omega(jet).scale(C64::new(fj.f, 0.0)))
            .scale(C64::new(0.0, 1.0))
    }

    #[test]
    fn contraction_of_ddbar_f_omega() {
        let f = parse_expr(F).unwrap();
        for name in ["torsion-strip", "kaehler-bump-scaled"] {
            let man = ModelManifold::named(name, Some(2), None).unwrap();
            for p in man.sample_points(5, 11) {
                let jet = man.jet(&p).unwrap();
                let fj = factor_jet(&f, &p, &man.params).unwrap();
                let top = (1u32 << 4) - 1;
                let w2 = kahler_form(&jet).power(2).coeff(top);
                let ratio = ddbar_f_omega(&jet, &fj).coeff(top) / w2;
                let (lap, pair) = lozenge_parts(&jet, &fj).unwrap();
                // n(n−1) = 2
                let contracted = lap + 2.0 * pair;
                assert!((ratio.re - contracted / 2.0).abs() < 1e-10 * contracted.abs().max(1.0));
                assert!(ratio.im.abs() < 1e-10);
                let paper = 2.0 * lap + 2.0 * pair;
                assert!((ratio.re - paper / 2.0).abs() > 1e-3);
            }
        }
    }

    #[test]
    fn constants_in_kernel_and_flat_check() {
        let man = ModelManifold::named("kaehler-bump-scaled", Some(2), None).unwrap();
        let grid = Arc::new(TorusGrid::new(2, 6, None, Scheme::Fd2).unwrap());
        let gm = GridMetric::new(&man, grid).unwrap();
        assert!(linf(&lozenge(&gm, &vec![3.0; gm.nodes()]).unwrap()) < 1e-10);
        let flat = ModelManifold::named("flat-torus", Some(2), None).unwrap();
        let grid = Arc::new(TorusGrid::new(2, 4, None, Scheme::Fd2).unwrap());
        let r = lozenge_constancy_check(&flat, grid, 1e-8).unwrap();
        assert!(r.constancy_asserted);
        assert_eq!((r.lozenge_linf, r.einstein_linf, r.s_c2_spread), (0.0, 0.0, 0.0));
    }

    #[test]
    fn generic_torus_is_a_negative_control() {
        let man = ModelManifold::named("kaehler-bump-scaled", Some(2), None).unwrap();
        let grid = Arc::new(TorusGrid::new(2, 6, None, Scheme::Fd2).unwrap());
        let r = lozenge_constancy_check(&man, grid, 1e-8).unwrap();
        assert!(!r.constancy_asserted);
        assert!(r.einstein_linf > 1e-3 && r.s_c2_spread > 1e-3);
    }

    #[test]
    fn rejects_non_pluriclosed() {
        let flat = ModelManifold::named("flat-torus", Some(2), None).unwrap();
        let g = parse_expr("0.2*re(exp(i*6.283185307179586*re(z1)))").unwrap();
        let man = crate::conformal::conformal_manifold(&flat, &g).unwrap();
        let grid = Arc::new(TorusGrid::reduced(2, 8, None, vec![0], Scheme::Fd2).unwrap());
        let err = lozenge_constancy_check(&man, grid, 1e-8).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }
}
