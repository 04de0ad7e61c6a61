//! Parse a metric from the DSL, differentiate an entry and evaluate a 2-jet.

use std::collections::BTreeMap;

use hermcurv::expr::{parse_expr, simplify, wirtinger, Wrt};
use hermcurv::manifold::ChartDomain;
use hermcurv::{ChartPoint, ModelManifold, C64};

fn main() -> hermcurv::Result<()> {
    // Hopf-type metric on C² \ {0}
    let src = "h[1][1] = 4/(abs2(z1) + abs2(z2)); h[2][2] = 4/(abs2(z1) + abs2(z2))";
    let domain = ChartDomain { exclude_origin: true, ..Default::default() };
    let man = ModelManifold::from_dsl("hopf-dsl", src, 2, BTreeMap::new(), domain)?;

    let h11 = parse_expr("4/(abs2(z1) + abs2(z2))").unwrap();
    println!("h11          = {h11}");
    println!("d/dz1 h11    = {}", simplify(&wirtinger(&h11, Wrt::z(0))));
    println!("d/dzb2 h11   = {}", simplify(&wirtinger(&h11, Wrt::zb(1))));

    let p = ChartPoint::new(vec![C64::new(0.6, -0.2), C64::new(0.1, 0.5)]);
    let jet = man.jet(&p)?;
    println!("\nat z = {:?}", p.coords);
    for i in 0..2 {
        println!("  h[{}][.] = {:.6} {:.6}", i + 1, jet.h(i, 0), jet.h(i, 1));
    }
    println!("  d1 h11    = {:.6}", jet.dh(0, 0, 0));
    println!("  d1db2 h11 = {:.6}", jet.ddh(0, 1, 0, 0));

    // the builtin evaluates the same jet in closed form
    let hopf = ModelManifold::named("hopf", Some(2), None)?;
    println!("\nbuiltin source: {}", hopf.metric_expr()?.to_source());
    let builtin = hopf.jet(&p)?;
    let mut gap = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            gap = gap.max((jet.h(i, j) - builtin.h(i, j)).norm());
            for k in 0..2 {
                gap = gap.max((jet.dh(i, j, k) - builtin.dh(i, j, k)).norm());
                for l in 0..2 {
                    gap = gap.max((jet.ddh(i, j, k, l) - builtin.ddh(i, j, k, l)).norm());
                }
            }
        }
    }
    println!("max difference from the builtin jet: {gap:.2e}");

    // outside the chart domain
    match man.jet(&ChartPoint::new(vec![C64::new(0.0, 0.0); 2])) {
        Err(e) => println!("origin rejected: {e}"),
        Ok(_) => println!("origin accepted"),
    }
    Ok(())
}
