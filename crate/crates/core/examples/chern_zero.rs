//! Zero second Gauduchon degree: find `f` with constant Chern scalar curvature by one linear solve.

use std::sync::Arc;

use hermcurv::grid::{GridMetric, Scheme, TorusGrid};
use hermcurv::solvers::solve_chern_zero;
use hermcurv::ModelManifold;

fn main() -> hermcurv::Result<()> {
    let man = ModelManifold::named("kaehler-bump", Some(2), None)?;
    for scheme in [Scheme::Fd2, Scheme::Spectral] {
        let grid = Arc::new(TorusGrid::new(2, 12, None, scheme)?);
        let gm = GridMetric::new(&man, grid)?;
        let r = solve_chern_zero(&gm, 1e-6)?;
        let f = r.solution.re();
        let span = f.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - f.iter().cloned().fold(f64::INFINITY, f64::min);
        println!(
            "{scheme:?}: residual {:.2e}, curvature deviation {:.2e}, osc f {span:.4}, {} iterations, {:.2} s, accepted {}",
            r.residual_linf, r.curvature_deviation, r.linear_iterations, r.wall_time, r.accepted
        );
        for note in &r.notes {
            println!("  {note}");
        }
    }
    Ok(())
}
