//! A metric sampled on a torus grid: Laplacian, quadrature, degrees and the duality defect.

use std::f64::consts::PI;
use std::sync::Arc;

use hermcurv::grid::{
    complex_laplacian, gauduchon_degrees, integrate, laplacian_duality_defect, GridMetric, Scheme, TorusGrid,
};
use hermcurv::ModelManifold;

fn main() -> hermcurv::Result<()> {
    let man = ModelManifold::named("kaehler-bump", Some(2), None)?;
    for scheme in [Scheme::Fd2, Scheme::Spectral] {
        let grid = Arc::new(TorusGrid::new(2, 8, None, scheme)?);
        let gm = GridMetric::new(&man, grid)?;
        let u = gm.grid.sample(|x| (2.0 * PI * (x[0] + x[3])).sin() + (2.0 * PI * x[1]).cos());
        let lap = complex_laplacian(&gm, &u)?.re();
        let deg = gauduchon_degrees(&gm, 1e-6);
        println!("{scheme:?}");
        println!("  volume                {:.10}", gm.volume());
        println!("  ∫ Δu                  {:.2e}", integrate(&gm, &lap));
        println!("  Γ1, Γ2                {:.6e}, {:.6e}", deg.gamma1, deg.gamma2);
        println!("  Gauduchon residual    {:.2e}", deg.gauduchon_residual);
        println!("  duality defect        {:.2e}", laplacian_duality_defect(&gm, &u)?);
    }

    // second order convergence of the duality defect on a conformally rescaled strip
    let base = ModelManifold::named("torsion-strip", Some(2), None)?;
    let g = hermcurv::expr::parse_expr("0.1*re(exp(i*6.283185307179586*re(z1)))").unwrap();
    let man = hermcurv::conformal::conformal_manifold(&base, &g)?;
    let mut last: Option<f64> = None;
    for nn in [8, 16, 32, 64] {
        let grid = Arc::new(TorusGrid::reduced(2, nn, None, vec![0, 1], Scheme::Fd2)?);
        let gm = GridMetric::new(&man, grid)?;
        let u = gm.grid.sample(|x| (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).cos() + 0.3 * (2.0 * PI * x[1]).sin());
        let d = laplacian_duality_defect(&gm, &u)?;
        let order = last.map(|l| format!("{:.2}", (l / d).log2())).unwrap_or_default();
        println!("N = {nn:>2}: defect {d:.3e} {order}");
        last = Some(d);
    }
    Ok(())
}
