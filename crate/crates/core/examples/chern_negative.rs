//! Negative second Gauduchon degree: normalize, then run the continuity method.

use std::sync::Arc;

use hermcurv::grid::{GridMetric, Scheme, TorusGrid};
use hermcurv::solvers::{solve_chern_negative, ContinuityOptions};
use hermcurv::ModelManifold;

fn main() -> hermcurv::Result<()> {
    let man = ModelManifold::named("kaehler-bump-scaled", Some(2), None)?;
    let gm = GridMetric::new(&man, Arc::new(TorusGrid::new(2, 8, None, Scheme::Spectral)?))?;
    let r = solve_chern_negative(&gm, &ContinuityOptions::default())?;
    println!("λ = Γ2/Vol           {:.10}", r.lambda);
    println!("achieved constant    {:.10}", r.achieved_constant);
    println!("residual             {:.2e}", r.residual_linf);
    println!("curvature deviation  {:.2e}", r.curvature_deviation);
    println!("accepted             {}", r.accepted);
    println!("\n{:>8} {:>8} {:>12}", "a", "newton", "residual");
    for st in &r.path_trace {
        println!("{:>8.4} {:>8} {:>12.2e}", st.a, st.newton_iters, st.residual);
    }
    if let Some(b) = r.bounds {
        println!("\nbound excess {:.2e} (slack {:.2e}), uniform bound excess {:.2e}", b.max_violation, b.slack, b.max_violation_uniform);
    }

    // the flat torus has zero degree, so this problem does not apply
    let flat = ModelManifold::named("flat-torus", Some(2), None)?;
    let gm = GridMetric::new(&flat, Arc::new(TorusGrid::new(2, 4, None, Scheme::Fd2)?))?;
    if let Err(e) = solve_chern_negative(&gm, &ContinuityOptions::default()) {
        println!("\nflat torus: {e}");
    }
    Ok(())
}
