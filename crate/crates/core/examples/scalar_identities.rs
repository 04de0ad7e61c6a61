//! Scalar curvatures two ways, and the comparison identity on Gauduchon metrics.

use hermcurv::curvature::{gauduchon_ricci, scalar_comparison_defect, scalar_via_identity};
use hermcurv::ModelManifold;

fn main() -> hermcurv::Result<()> {
    let ts = [-1.0, 0.0, 0.3, 1.0, 2.0];
    for name in ["hopf", "elliptic", "inoue1", "inoue2", "kaehler-bump", "torsion-strip"] {
        let man = ModelManifold::named(name, None, None)?;
        let (mut two_path, mut comparison) = (0.0f64, 0.0f64);
        for p in man.sample_points(25, 11) {
            let jet = man.jet(&p)?;
            for t in ts {
                let r = gauduchon_ricci(&jet, t)?;
                let (s1, s2) = scalar_via_identity(&jet, t)?;
                two_path = two_path.max((r.s1 - s1).abs()).max((r.s2 - s2).abs());
                if man.declared_gauduchon {
                    comparison = comparison.max(scalar_comparison_defect(&jet, t)?.abs());
                }
            }
        }
        let cmp = if man.declared_gauduchon { format!("{comparison:.2e}") } else { "n/a".into() };
        println!("{name:<14} two-path {two_path:.2e}   comparison {cmp}");
    }
    Ok(())
}
