//! Torsion, Gauduchon Ricci forms and scalar curvatures across the builtin catalogue.

use hermcurv::curvature::{chern_torsion, classify, gauduchon_ricci, torsion_diagnostics};
use hermcurv::metric::inverse_and_det;
use hermcurv::ModelManifold;

fn main() -> hermcurv::Result<()> {
    let catalogue = [
        ("hopf", Some(2), None),
        ("hopf", Some(3), None),
        ("elliptic", None, None),
        ("inoue1", None, None),
        ("inoue2", None, Some(1.0)),
        ("kaehler-bump", Some(2), None),
        ("torsion-strip", Some(2), None),
    ];
    println!("{:<16} {:>4} {:>10} {:>10} {:>10} {:>10} {:>10}", "metric", "t", "s1", "s2", "|T|²", "kahler", "balanced");
    for (name, n, m) in catalogue {
        let man = ModelManifold::named(name, n, m)?;
        let pts = man.sample_points(8, 1);
        let flags = classify(&man, &pts, 1e-8)?;
        let jet = man.jet(&pts[0])?;
        let tor = chern_torsion(&jet)?.norm_sq(&jet, &inverse_and_det(&jet)?);
        for t in [0.0, 0.5, 1.0] {
            let r = gauduchon_ricci(&jet, t)?;
            println!(
                "{:<16} {t:>4} {:>10.6} {:>10.6} {tor:>10.6} {:>10.2e} {:>10.2e}",
                format!("{name}{}", n.map(|n| format!("/{n}")).unwrap_or_default()),
                r.s1,
                r.s2,
                flags.kahler.residual,
                flags.balanced.residual
            );
        }
    }

    // ∂∂*ω on the Inoue surface
    let man = ModelManifold::named("inoue1", None, None)?;
    let p = &man.sample_points(1, 3)[0];
    let d = torsion_diagnostics(&man.jet(p)?)?;
    let y = p.coords[0].im;
    println!("\ninoue1 at y = {y:.4}: ∂∂*ω coefficient {:.6}, times y² {:.6}", d.ddstar[0], d.ddstar[0] * y * y);
    Ok(())
}
