//! Builtin metrics with closed-form jets and matching DSL definitions.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{ChartPoint, MetricJet, C64};
use crate::sjet::SJet;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Plane wave `c·exp(2πi ξ·X)` with `X = (x1, y1, x2, y2, …)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Wave {
    pub xi: Vec<i32>,
    pub c: C64,
}

impl Wave {
    fn a(&self, i: usize) -> C64 {
        c(PI * self.xi[2 * i + 1] as f64, PI * self.xi[2 * i] as f64)
    }
    fn b(&self, i: usize) -> C64 {
        c(-PI * self.xi[2 * i + 1] as f64, PI * self.xi[2 * i] as f64)
    }
    fn phase(&self, z: &[C64]) -> C64 {
        let s: f64 = z
            .iter()
            .enumerate()
            .map(|(k, zk)| self.xi[2 * k] as f64 * zk.re + self.xi[2 * k + 1] as f64 * zk.im)
            .sum();
        c(0.0, 2.0 * PI * s).exp()
    }
    fn conj(&self) -> Wave {
        Wave { xi: self.xi.iter().map(|x| -x).collect(), c: self.c.conj() }
    }
    fn with(&self, f: C64) -> Wave {
        Wave { xi: self.xi.clone(), c: self.c * f }
    }
}

/// Torus metric `s·(I + ∂∂̄φ + ∂̄γ + ∂γ̄)` with `φ = Σ Re(c e^{2πiξ·X})` and
/// `γ_k` a sum of complex waves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusMetric {
    pub n: usize,
    pub phi: Vec<Wave>,
    pub gamma: Vec<Vec<Wave>>,
    pub scale: f64,
    /// Real axes (`2k` for `x_k`, `2k+1` for `y_k`) the coefficients depend on.
    pub active_axes: Vec<usize>,
}

impl TorusMetric {
    fn terms(&self) -> Vec<Vec<Wave>> {
        let n = self.n;
        let mut out = vec![Vec::new(); n * n];
        let phi: Vec<Wave> = self
            .phi
            .iter()
            .flat_map(|w| [w.with(c(0.5, 0.0)), w.conj().with(c(0.5, 0.0))])
            .collect();
        for k in 0..n {
            for l in 0..n {
                let t = &mut out[k * n + l];
                for w in &phi {
                    t.push(w.with(w.a(k) * w.b(l)));
                }
                for w in self.gamma.get(k).into_iter().flatten() {
                    t.push(w.with(c(0.0, 1.0) * w.b(l)));
                }
                for w in self.gamma.get(l).into_iter().flatten() {
                    let wc = w.conj();
                    t.push(wc.with(c(0.0, -1.0) * wc.a(k)));
                }
            }
        }
        out
    }

    pub fn jet(&self, z: &[C64]) -> MetricJet {
        let n = self.n;
        let mut jet = MetricJet::zeros(n);
        let terms = self.terms();
        for k in 0..n {
            for l in 0..n {
                let mut h = if k == l { c(1.0, 0.0) } else { c(0.0, 0.0) };
                let mut d = vec![c(0.0, 0.0); n];
                let mut dd = vec![c(0.0, 0.0); n * n];
                for w in &terms[k * n + l] {
                    let e = w.c * w.phase(z);
                    h += e;
                    for i in 0..n {
                        d[i] += e * w.a(i);
                        for j in 0..n {
                            dd[i * n + j] += e * w.a(i) * w.b(j);
                        }
                    }
                }
                jet.set_h(k, l, h * self.scale);
                for i in 0..n {
                    jet.set_dh(i, k, l, d[i] * self.scale);
                    for j in 0..n {
                        jet.set_ddh(i, j, k, l, dd[i * n + j] * self.scale);
                    }
                }
            }
        }
        jet
    }

    pub fn dsl(&self) -> String {
        let n = self.n;
        let terms = self.terms();
        let mut s = String::new();
        for k in 0..n {
            for l in 0..n {
                let mut e = String::from(if k == l { "1" } else { "0" });
                for w in &terms[k * n + l] {
                    let mut arg = String::new();
                    for (a, x) in w.xi.iter().enumerate() {
                        if *x == 0 {
                            continue;
                        }
                        let f = if a % 2 == 0 { "re" } else { "im" };
                        arg.push_str(&format!(" + ({:?})*{}(z{})", 2.0 * PI * *x as f64, f, a / 2 + 1));
                    }
                    if arg.is_empty() {
                        arg.push_str(" + 0");
                    }
                    e.push_str(&format!(
                        " + (({:?}) + ({:?})*i)*exp(i*(0{}))",
                        w.c.re, w.c.im, arg
                    ));
                }
                s.push_str(&format!("h[{}][{}] = ({:?})*({})\n", k + 1, l + 1, self.scale, e));
            }
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TorusKind {
    Flat,
    KaehlerBump,
    KaehlerBumpScaled,
    KaehlerStrip,
    TorsionStrip,
}

fn wave(xi: [i32; 4], re: f64, im: f64) -> Wave {
    Wave { xi: xi.to_vec(), c: c(re, im) }
}

impl TorusKind {
    pub fn name(self) -> &'static str {
        match self {
            TorusKind::Flat => "flat-torus",
            TorusKind::KaehlerBump => "kaehler-bump",
            TorusKind::KaehlerBumpScaled => "kaehler-bump-scaled",
            TorusKind::KaehlerStrip => "kaehler-strip",
            TorusKind::TorsionStrip => "torsion-strip",
        }
    }

    pub fn metric(self, n: usize) -> TorusMetric {
        let all: Vec<usize> = (0..2 * n).collect();
        let bump = vec![
            wave([1, 0, 0, 0], 0.02, 0.0),
            wave([0, 1, 1, 0], 0.012, 0.009),
            wave([0, 0, 0, 1], 0.0, 0.02),
        ];
        match self {
            TorusKind::Flat => {
                TorusMetric { n, phi: vec![], gamma: vec![], scale: 1.0, active_axes: vec![] }
            }
            TorusKind::KaehlerBump => {
                TorusMetric { n: 2, phi: bump, gamma: vec![], scale: 1.0, active_axes: all }
            }
            TorusKind::KaehlerBumpScaled => TorusMetric {
                n: 2,
                phi: bump,
                gamma: vec![
                    vec![wave([0, 0, 1, 0], 0.015, 0.0)],
                    vec![wave([1, 0, 0, 0], 0.02, 0.01), wave([0, 1, 0, 0], 0.0, 0.015)],
                ],
                scale: 1.5,
                active_axes: all,
            },
            TorusKind::KaehlerStrip => TorusMetric {
                n: 2,
                phi: vec![wave([1, 0, 0, 0], 0.02, 0.0), wave([1, 1, 0, 0], 0.0, 0.01)],
                gamma: vec![],
                scale: 1.0,
                active_axes: vec![0, 1],
            },
            TorusKind::TorsionStrip => TorusMetric {
                n: 2,
                phi: vec![wave([1, 1, 0, 0], 0.01, 0.0)],
                gamma: vec![
                    vec![],
                    vec![wave([1, 0, 0, 0], 0.04, 0.0), wave([0, 1, 0, 0], 0.0, 0.03)],
                ],
                scale: 1.0,
                active_axes: vec![0, 1],
            },
        }
    }
}

/// The builtin catalogue.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Builtin {
    /// `h = 4δ/|z|²` on `ℂⁿ∖{0}`.
    Hopf { n: usize },
    /// Elliptic surface metric in coordinates `(z, w)`, `Im z > 0`, `w ≠ 0`.
    Elliptic,
    /// Inoue surface `S₁` (Tricerri metric): `h_zz̄ = 1/y²`, `h_ww̄ = y`.
    Inoue1,
    /// Inoue surface `S₂` (Vaisman metric) with parameter `m`.
    Inoue2 { m: f64 },
    Torus { kind: TorusKind, n: usize },
}

/// Paper values attached to a builtin, checked by `inspect --golden`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Golden {
    pub quantity: &'static str,
    pub value: f64,
}

impl Builtin {
    pub fn from_name(name: &str, n: Option<usize>, m: Option<f64>) -> Result<Builtin> {
        let dim = n.unwrap_or(2);
        let b = match name {
            "hopf" => Builtin::Hopf { n: dim },
            "elliptic" => Builtin::Elliptic,
            "inoue1" | "tricerri" => Builtin::Inoue1,
            "inoue2" | "vaisman" => Builtin::Inoue2 { m: m.unwrap_or(1.0) },
            "flat-torus" => Builtin::Torus { kind: TorusKind::Flat, n: dim },
            "kaehler-bump" => Builtin::Torus { kind: TorusKind::KaehlerBump, n: 2 },
            "kaehler-bump-scaled" => Builtin::Torus { kind: TorusKind::KaehlerBumpScaled, n: 2 },
            "kaehler-strip" => Builtin::Torus { kind: TorusKind::KaehlerStrip, n: 2 },
            "torsion-strip" => Builtin::Torus { kind: TorusKind::TorsionStrip, n: 2 },
            other => return Err(Error::Manifest(format!("unknown builtin manifold '{other}'"))),
        };
        if b.n() < 2 {
            return Err(Error::Metric(format!("complex dimension n >= 2 required, got {}", b.n())));
        }
        Ok(b)
    }

    pub fn name(&self) -> String {
        match self {
            Builtin::Hopf { .. } => "hopf".into(),
            Builtin::Elliptic => "elliptic".into(),
            Builtin::Inoue1 => "inoue1".into(),
            Builtin::Inoue2 { .. } => "inoue2".into(),
            Builtin::Torus { kind, .. } => kind.name().into(),
        }
    }

    pub fn n(&self) -> usize {
        match self {
            Builtin::Hopf { n } | Builtin::Torus { n, .. } => *n,
            _ => 2,
        }
    }

    pub fn torus(&self) -> Option<TorusMetric> {
        match self {
            Builtin::Torus { kind, n } => Some(kind.metric(*n)),
            _ => None,
        }
    }

    pub fn check_domain(&self, p: &ChartPoint) -> Result<()> {
        if p.n() != self.n() {
            return Err(Error::Domain(format!("expected {} coordinates, got {}", self.n(), p.n())));
        }
        let z = &p.coords;
        let bad = match self {
            Builtin::Hopf { .. } => z.iter().all(|v| v.norm_sqr() == 0.0).then_some("z = 0"),
            Builtin::Elliptic => (z[0].im <= 0.0)
                .then_some("Im z1 must be positive")
                .or((z[1].norm_sqr() == 0.0).then_some("z2 must be nonzero")),
            Builtin::Inoue1 | Builtin::Inoue2 { .. } => {
                (z[0].im <= 0.0).then_some("Im z1 must be positive")
            }
            Builtin::Torus { .. } => None,
        };
        match bad {
            Some(msg) => Err(Error::Domain(msg.into())),
            None => Ok(()),
        }
    }

    /// Closed-form jet.
    pub fn jet(&self, p: &ChartPoint) -> Result<MetricJet> {
        self.check_domain(p)?;
        let z = &p.coords;
        Ok(match self {
            Builtin::Hopf { n } => hopf_jet(*n, z),
            Builtin::Inoue1 => inoue1_jet(z),
            Builtin::Elliptic => elliptic_jet(z),
            Builtin::Inoue2 { m } => inoue2_jet(*m, z),
            Builtin::Torus { kind, n } => kind.metric(*n).jet(z),
        })
    }

    /// The same metric in the coefficient DSL.
    pub fn dsl(&self) -> String {
        match self {
            Builtin::Hopf { n } => {
                let r: Vec<String> = (1..=*n).map(|k| format!("abs2(z{k})")).collect();
                let r = r.join(" + ");
                (1..=*n).map(|k| format!("h[{k}][{k}] = 4/({r})\n")).collect()
            }
            Builtin::Elliptic => concat!(
                "h[1][1] = 2/pow(im(z1), 2)\n",
                "h[1][2] = -2*i/(im(z1)*zb2)\n",
                "h[2][1] = 2*i/(z2*im(z1))\n",
                "h[2][2] = 4/abs2(z2)\n"
            )
            .into(),
            Builtin::Inoue1 => "h[1][1] = 1/pow(im(z1), 2)\nh[2][2] = im(z1)\n".into(),
            Builtin::Inoue2 { .. } => concat!(
                "h[1][1] = (1 + pow(im(z2) - m*log(im(z1)), 2))/pow(im(z1), 2)\n",
                "h[1][2] = -(im(z2) - m*log(im(z1)))/im(z1)\n",
                "h[2][1] = -(im(z2) - m*log(im(z1)))/im(z1)\n",
                "h[2][2] = 1\n"
            )
            .into(),
            Builtin::Torus { kind, n } => kind.metric(*n).dsl(),
        }
    }

    pub fn params(&self) -> Vec<(String, f64)> {
        match self {
            Builtin::Inoue2 { m } => vec![("m".into(), *m)],
            _ => vec![],
        }
    }

    /// Declared (Gauduchon, balanced) flags; `classify` re-verifies them.
    pub fn declared_flags(&self) -> (bool, bool) {
        match self {
            Builtin::Hopf { .. } | Builtin::Inoue1 | Builtin::Inoue2 { .. } => (true, false),
            Builtin::Elliptic => (true, false),
            Builtin::Torus { kind, .. } => match kind {
                TorusKind::Flat | TorusKind::KaehlerBump | TorusKind::KaehlerStrip => (true, true),
                TorusKind::KaehlerBumpScaled | TorusKind::TorsionStrip => (true, false),
            },
        }
    }

    /// Pointwise values stated for the builtin.
    pub fn golden(&self) -> Vec<Golden> {
        let g = |quantity, value| Golden { quantity, value };
        match self {
            Builtin::Hopf { n } => {
                let n = *n as f64;
                vec![g("s_c1", n * (n - 1.0) / 4.0), g("s_c2", (n - 1.0) / 4.0)]
            }
            Builtin::Elliptic => vec![g("s_c1", -0.5), g("s_c2", -1.5)],
            Builtin::Inoue1 => vec![g("s_c1", -0.25), g("s_c2", -1.25)],
            Builtin::Inoue2 { m } => vec![g("s_c1", -0.5), g("s_c2", -1.0 - m * m / 2.0)],
            Builtin::Torus { kind: TorusKind::Flat, .. } => vec![g("s_c1", 0.0), g("s_c2", 0.0)],
            Builtin::Torus { .. } => vec![],
        }
    }
}

fn hopf_jet(n: usize, z: &[C64]) -> MetricJet {
    let r: f64 = z.iter().map(|v| v.norm_sqr()).sum();
    let mut jet = MetricJet::zeros(n);
    for k in 0..n {
        jet.set_h(k, k, c(4.0 / r, 0.0));
        for i in 0..n {
            jet.set_dh(i, k, k, -4.0 * z[i].conj() / (r * r));
            for j in 0..n {
                let dij = if i == j { 1.0 } else { 0.0 };
                let v = -4.0 * (c(dij / (r * r), 0.0) - 2.0 * z[i].conj() * z[j] / (r * r * r));
                jet.set_ddh(i, j, k, k, v);
            }
        }
    }
    jet
}

fn inoue1_jet(z: &[C64]) -> MetricJet {
    let y = z[0].im;
    let mut jet = MetricJet::zeros(2);
    jet.set_h(0, 0, c(1.0 / (y * y), 0.0));
    jet.set_h(1, 1, c(y, 0.0));
    jet.set_dh(0, 0, 0, c(0.0, 1.0 / (y * y * y)));
    jet.set_dh(0, 1, 1, c(0.0, -0.5));
    jet.set_ddh(0, 0, 0, 0, c(1.5 / (y * y * y * y), 0.0));
    jet
}

fn from_entries(entries: [[SJet; 2]; 2]) -> MetricJet {
    let mut jet = MetricJet::zeros(2);
    for k in 0..2 {
        for l in 0..2 {
            let e = &entries[k][l];
            jet.set_h(k, l, e.v);
            for i in 0..2 {
                jet.set_dh(i, k, l, e.d[i]);
                for j in 0..2 {
                    jet.set_ddh(i, j, k, l, e.ddb(i, j));
                }
            }
        }
    }
    jet
}

fn elliptic_jet(z: &[C64]) -> MetricJet {
    let y = SJet::im(2, 0, z[0]);
    let w = SJet::coord(2, 1, z[1]);
    let wb = SJet::coord_bar(2, 1, z[1]);
    let yi = y.recip();
    let h00 = y.powi(-2).scale(c(2.0, 0.0));
    let h01 = (&yi * &wb.recip()).scale(c(0.0, -2.0));
    let h10 = (&w.recip() * &yi).scale(c(0.0, 2.0));
    let h11 = (&w.recip() * &wb.recip()).scale(c(4.0, 0.0));
    from_entries([[h00, h01], [h10, h11]])
}

fn inoue2_jet(m: f64, z: &[C64]) -> MetricJet {
    let y = SJet::im(2, 0, z[0]);
    let v = SJet::im(2, 1, z[1]);
    let l = &v - &y.ln().scale(c(m, 0.0));
    let one = SJet::real(2, 1.0);
    let h00 = &(&one + &(&l * &l)) * &y.powi(-2);
    let h01 = (&l * &y.recip()).scale(c(-1.0, 0.0));
    from_entries([[h00, h01.clone()], [h01, one]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric_expr::parse_metric;
    use std::collections::BTreeMap;

    fn p(a: (f64, f64), b: (f64, f64)) -> ChartPoint {
        ChartPoint::new(vec![c(a.0, a.1), c(b.0, b.1)])
    }

    #[test]
    fn hopf_at_unit_point() {
        let j = Builtin::Hopf { n: 2 }.jet(&p((1.0, 0.0), (0.0, 0.0))).unwrap();
        assert!((j.h(0, 0) - c(4.0, 0.0)).norm() < 1e-15);
        assert!((j.h(1, 1) - c(4.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn tricerri_at_unit_height() {
        let j = Builtin::Inoue1.jet(&p((0.3, 1.0), (0.1, 0.4))).unwrap();
        assert!((j.h(0, 0) - c(1.0, 0.0)).norm() < 1e-15);
        assert!((j.h(1, 1) - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn vaisman_inverse_at_v_zero() {
        let j = Builtin::Inoue2 { m: 0.0 }.jet(&p((0.2, 1.7), (0.4, 0.0))).unwrap();
        let inv = crate::metric::inverse_and_det(&j).unwrap();
        assert!((inv.g(1, 1) - c(1.0, 0.0)).norm() < 1e-12);
        assert!(inv.g(0, 1).norm() < 1e-12);
        assert!((inv.g(0, 0) - c(1.7 * 1.7, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn flat_torus_has_zero_derivatives() {
        let j = Builtin::Torus { kind: TorusKind::Flat, n: 2 }.jet(&p((0.3, 0.1), (0.2, 0.9))).unwrap();
        assert_eq!(j, MetricJet::flat(2));
    }

    #[test]
    fn outside_domain() {
        assert!(Builtin::Inoue1.jet(&p((0.0, -1.0), (0.0, 0.0))).is_err());
        assert!(Builtin::Hopf { n: 2 }.jet(&p((0.0, 0.0), (0.0, 0.0))).is_err());
    }

    #[test]
    fn dsl_definitions_parse() {
        for b in all_builtins() {
            let m = parse_metric(&b.dsl(), b.n());
            assert!(m.is_ok(), "{}: {:?}", b.name(), m.err());
        }
    }

    pub(crate) fn all_builtins() -> Vec<Builtin> {
        vec![
            Builtin::Hopf { n: 2 },
            Builtin::Hopf { n: 3 },
            Builtin::Elliptic,
            Builtin::Inoue1,
            Builtin::Inoue2 { m: 0.0 },
            Builtin::Inoue2 { m: 1.0 },
            Builtin::Inoue2 { m: 2.0 },
            Builtin::Torus { kind: TorusKind::Flat, n: 2 },
            Builtin::Torus { kind: TorusKind::KaehlerBump, n: 2 },
            Builtin::Torus { kind: TorusKind::KaehlerBumpScaled, n: 2 },
            Builtin::Torus { kind: TorusKind::KaehlerStrip, n: 2 },
            Builtin::Torus { kind: TorusKind::TorsionStrip, n: 2 },
        ]
    }

    #[test]
    fn closed_form_matches_dsl() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for b in all_builtins() {
            let m = parse_metric(&b.dsl(), b.n()).unwrap();
            let params: BTreeMap<String, f64> = b.params().into_iter().collect();
            for _ in 0..20 {
                let pt = ChartPoint::new(
                    (0..b.n()).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(0.3..2.0))).collect(),
                );
                let a = b.jet(&pt).unwrap();
                let s = m.jet(&pt, &params).unwrap();
                let n = b.n();
                let scale = 1.0 + a.h(0, 0).norm();
                for i in 0..n {
                    for j in 0..n {
                        assert!((a.h(i, j) - s.h(i, j)).norm() < 1e-12 * scale, "{} h", b.name());
                        for l in 0..n {
                            assert!(
                                (a.dh(i, j, l) - s.dh(i, j, l)).norm() < 1e-10 * scale,
                                "{} dh[{i}][{j}][{l}] {} vs {}",
                                b.name(),
                                a.dh(i, j, l),
                                s.dh(i, j, l)
                            );
                            for k in 0..n {
                                assert!(
                                    (a.ddh(i, j, k, l) - s.ddh(i, j, k, l)).norm() < 1e-9 * scale,
                                    "{} ddh[{i}][{j}][{k}][{l}] {} vs {}",
                                    b.name(),
                                    a.ddh(i, j, k, l),
                                    s.ddh(i, j, k, l)
                                );
                            }
                        }
                    }
                }
            }
        }
    }
}
