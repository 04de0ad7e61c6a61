//! Conformal transformation laws of scalar and Ricci curvature against direct recomputation.

use hermcurv::conformal::{conformal_oracle_check, LastTerm, SHIPPED};
use hermcurv::expr::parse_expr;
use hermcurv::ModelManifold;

fn main() -> hermcurv::Result<()> {
    let f = parse_expr("0.2*re(z1) - 0.1*im(z2) + 0.05*abs2(z1)").unwrap();
    for (name, n) in [("hopf", Some(2)), ("hopf", Some(3)), ("torsion-strip", Some(2)), ("elliptic", None)] {
        let man = ModelManifold::named(name, n, None)?;
        let pts = man.sample_points(10, 5);
        for t in [0.0, 0.5, 1.0, -1.0] {
            let shipped = conformal_oracle_check(&man, &f, t, &pts, SHIPPED)?;
            let verbatim = conformal_oracle_check(&man, &f, t, &pts, LastTerm::Verbatim)?;
            println!(
                "{name:<14} t = {t:>4}: defect {:.2e}   (with the √−1 last term: {:.2e})",
                shipped.max_defect(),
                verbatim.max_defect()
            );
        }
    }
    Ok(())
}
