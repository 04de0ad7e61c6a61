//! Minimize the Bismut Yamabe-type functional on a balanced torus metric.

use std::sync::Arc;

use hermcurv::grid::{GridMetric, Scheme, TorusGrid};
use hermcurv::solvers::{bismut_yamabe_minimize, BismutOptions, YamabeConstants};
use hermcurv::ModelManifold;

fn main() -> hermcurv::Result<()> {
    let yc = YamabeConstants::new(2)?;
    println!("N1 = {:.4}, N2 = {:.4}, q = {:.4}", yc.n1, yc.n2, yc.q);
    for (name, nn) in [("flat-torus", 8), ("kaehler-bump", 8)] {
        let man = ModelManifold::named(name, Some(2), None)?;
        let gm = GridMetric::new(&man, Arc::new(TorusGrid::new(2, nn, None, Scheme::Spectral)?))?;
        let r = bismut_yamabe_minimize(&gm, &yc, &BismutOptions::default())?;
        let b = r.yamabe.unwrap();
        println!("\n{name}");
        println!("  μ                 {:.8}", r.lambda);
        println!("  EL residual       {:.2e}", r.residual_linf);
        println!("  upper bound       {:.6e}", b.upper);
        println!("  lower bound       {}", b.lower.map_or("none".into(), |l| format!("{l:.4}")));
        println!("  descent steps     {}", r.energy_trace.len() - 1);
        if let Some(e) = r.energy_trace.last() {
            println!("  final energy      {:.10}", e.energy);
        }
    }
    Ok(())
}
