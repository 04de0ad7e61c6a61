//! Model manifolds: a metric on a chart plus its domain and declared class.
//!
//! Manifest files are TOML:
//!
//! ```toml
//! name = "tricerri"
//! n = 2
//! [params]
//! [metric]
//! source = "h[1][1] = 1/pow(im(z1), 2); h[2][2] = im(z1)"
//! gauduchon = true
//! [domain]
//! im_positive = [1]
//! ```
//!
//! `metric.builtin = "<name>"` may replace `metric.source`. `domain` accepts
//! `im_positive`, `nonzero` (1-based coordinate lists), `exclude_origin` and
//! `periods` (one period per real axis; marks the chart as a torus).

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::catalog::Builtin;
use crate::error::{Error, Result};
use crate::metric::{inverse_and_det, ChartPoint, MetricJet, C64};
use crate::metric_expr::{parse_metric, MetricExpr};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ChartDomain {
    #[serde(default)]
    pub im_positive: Vec<usize>,
    #[serde(default)]
    pub nonzero: Vec<usize>,
    #[serde(default)]
    pub exclude_origin: bool,
    #[serde(default)]
    pub periods: Option<Vec<f64>>,
}

impl ChartDomain {
    fn check(&self, p: &ChartPoint) -> Result<()> {
        for &k in &self.im_positive {
            match p.coords.get(k - 1) {
                Some(v) if v.im > 0.0 => {}
                _ => return Err(Error::Domain(format!("Im z{k} must be positive"))),
            }
        }
        for &k in &self.nonzero {
            match p.coords.get(k - 1) {
                Some(v) if v.norm_sqr() > 0.0 => {}
                _ => return Err(Error::Domain(format!("z{k} must be nonzero"))),
            }
        }
        if self.exclude_origin && p.coords.iter().all(|v| v.norm_sqr() == 0.0) {
            return Err(Error::Domain("origin excluded".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub enum Source {
    Builtin(Builtin),
    Parsed(Arc<MetricExpr>),
}

#[derive(Clone, Debug)]
pub struct ModelManifold {
    pub name: String,
    pub n: usize,
    pub params: BTreeMap<String, f64>,
    pub source: Source,
    pub domain: ChartDomain,
    pub declared_gauduchon: bool,
    pub declared_balanced: bool,
}

fn builtin_domain(b: &Builtin) -> ChartDomain {
    match b {
        Builtin::Hopf { .. } => ChartDomain { exclude_origin: true, ..Default::default() },
        Builtin::Elliptic => {
            ChartDomain { im_positive: vec![1], nonzero: vec![2], ..Default::default() }
        }
        Builtin::Inoue1 | Builtin::Inoue2 { .. } => {
            ChartDomain { im_positive: vec![1], ..Default::default() }
        }
        Builtin::Torus { n, .. } => {
            ChartDomain { periods: Some(vec![1.0; 2 * n]), ..Default::default() }
        }
    }
}

#[derive(Deserialize)]
struct Manifest {
    name: String,
    n: usize,
    #[serde(default)]
    params: BTreeMap<String, f64>,
    metric: MetricSection,
    #[serde(default)]
    domain: ChartDomain,
}

#[derive(Deserialize)]
struct MetricSection {
    source: Option<String>,
    builtin: Option<String>,
    #[serde(default)]
    gauduchon: bool,
    #[serde(default)]
    balanced: bool,
}

impl ModelManifold {
    pub fn builtin(b: Builtin) -> ModelManifold {
        let (g, bal) = b.declared_flags();
        ModelManifold {
            name: b.name(),
            n: b.n(),
            params: b.params().into_iter().collect(),
            domain: builtin_domain(&b),
            source: Source::Builtin(b),
            declared_gauduchon: g,
            declared_balanced: bal,
        }
    }

    /// Builtin by name, e.g. `hopf`, `inoue2`, `kaehler-bump`.
    pub fn named(name: &str, n: Option<usize>, m: Option<f64>) -> Result<ModelManifold> {
        Ok(Self::builtin(Builtin::from_name(name, n, m)?))
    }

    pub fn from_dsl(
        name: &str,
        text: &str,
        n: usize,
        params: BTreeMap<String, f64>,
        domain: ChartDomain,
    ) -> Result<ModelManifold> {
        let m = parse_metric(text, n)?;
        Self::from_expr(name, m, params, domain)
    }

    pub fn from_expr(
        name: &str,
        m: MetricExpr,
        params: BTreeMap<String, f64>,
        domain: ChartDomain,
    ) -> Result<ModelManifold> {
        for p in m.params() {
            if !params.contains_key(&p) {
                return Err(Error::Metric(format!("parameter '{p}' has no value")));
            }
        }
        Ok(ModelManifold {
            name: name.to_string(),
            n: m.n,
            params,
            source: Source::Parsed(Arc::new(m)),
            domain,
            declared_gauduchon: false,
            declared_balanced: false,
        })
    }

    pub fn load_manifest(path: &Path) -> Result<ModelManifold> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_manifest(&text)
    }

    pub fn parse_manifest(text: &str) -> Result<ModelManifold> {
        let m: Manifest = toml::from_str(text).map_err(|e| Error::Manifest(e.to_string()))?;
        let mut man = match (m.metric.source, m.metric.builtin) {
            (Some(src), None) => {
                Self::from_dsl(&m.name, &src, m.n, m.params.clone(), m.domain.clone())?
            }
            (None, Some(b)) => {
                let mut man = Self::named(&b, Some(m.n), m.params.get("m").copied())?;
                man.name = m.name.clone();
                man
            }
            _ => {
                return Err(Error::Manifest(
                    "metric needs exactly one of 'source' or 'builtin'".into(),
                ))
            }
        };
        if man.n != m.n {
            return Err(Error::Manifest(format!("declared n = {} but metric has n = {}", m.n, man.n)));
        }
        man.declared_gauduchon |= m.metric.gauduchon;
        man.declared_balanced |= m.metric.balanced;
        Ok(man)
    }

    pub fn as_builtin(&self) -> Option<&Builtin> {
        match &self.source {
            Source::Builtin(b) => Some(b),
            Source::Parsed(_) => None,
        }
    }

    /// DSL form of the metric; builtins return their textual twin.
    pub fn metric_expr(&self) -> Result<MetricExpr> {
        match &self.source {
            Source::Builtin(b) => parse_metric(&b.dsl(), b.n()),
            Source::Parsed(m) => Ok((**m).clone()),
        }
    }

    /// The same metric evaluated through the symbolic differentiator.
    pub fn dsl_twin(&self) -> Result<ModelManifold> {
        let mut m = Self::from_expr(
            &format!("{}-dsl", self.name),
            self.metric_expr()?,
            self.params.clone(),
            self.domain.clone(),
        )?;
        m.declared_gauduchon = self.declared_gauduchon;
        m.declared_balanced = self.declared_balanced;
        Ok(m)
    }

    pub fn is_torus(&self) -> bool {
        self.domain.periods.is_some()
    }

    /// Metric 2-jet at a chart point; verifies the domain and positive-definiteness.
    pub fn jet(&self, p: &ChartPoint) -> Result<MetricJet> {
        if p.n() != self.n {
            return Err(Error::Domain(format!("expected {} coordinates, got {}", self.n, p.n())));
        }
        self.domain.check(p)?;
        let jet = match &self.source {
            Source::Builtin(b) => b.jet(p)?,
            Source::Parsed(m) => m.jet(p, &self.params)?,
        };
        inverse_and_det(&jet)?;
        Ok(jet)
    }

    /// Deterministic sample points inside the chart domain.
    pub fn sample_points(&self, count: usize, seed: u64) -> Vec<ChartPoint> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let coords: Vec<C64> = (0..self.n)
                .map(|k| {
                    if let Some(per) = &self.domain.periods {
                        C64::new(rng.gen_range(0.0..per[2 * k]), rng.gen_range(0.0..per[2 * k + 1]))
                    } else if self.domain.im_positive.contains(&(k + 1)) {
                        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(0.3..3.0))
                    } else {
                        C64::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5))
                    }
                })
                .collect();
            let p = ChartPoint::new(coords);
            if self.jet(&p).is_ok() {
                out.push(p);
            }
        }
        out
    }
}

/// Public entry point matching the operation name used throughout the docs.
pub fn evaluate_metric_jet(man: &ModelManifold, p: &ChartPoint) -> Result<MetricJet> {
    man.jet(p)
}
