//! Metrics written in the coefficient DSL.
//!
//! ```text
//! h[1][1] = 1/pow(im(z1), 2); h[2][2] = im(z1)
//! ```
//!
//! Statements are separated by newlines, `;` or top-level commas. Indices are 1-based.
//! An entry that is not written is the conjugate of its mirror entry, or zero when both
//! are missing.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};
use crate::expr::{parse::Parser, simplify, wirtinger, EvalEnv, Expr, ParseError, Wrt};
use crate::metric::{ChartPoint, MetricJet, C64};

#[derive(Clone, Debug)]
pub struct MetricExpr {
    pub n: usize,
    entries: Vec<Expr>,
    d: Vec<Expr>,
    dd: Vec<Expr>,
}

fn split_statements(text: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in text.char_indices() {
        match ch {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            ';' | '\n' => {
                out.push((start, &text[start..i]));
                start = i + 1;
            }
            ',' if depth == 0 => {
                out.push((start, &text[start..i]));
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push((start, &text[start..]));
    out.into_iter().filter(|(_, s)| !s.trim().is_empty() && !s.trim_start().starts_with('#')).collect()
}

fn index(p: &mut Parser<'_>) -> std::result::Result<usize, ParseError> {
    p.expect(b'[')?;
    let Some(c) = p.peek() else { return p.err("expected index") };
    if !c.is_ascii_digit() {
        return p.err("expected index");
    }
    let mut v = 0usize;
    while let Some(c) = p.peek().filter(|c| c.is_ascii_digit()) {
        v = v * 10 + (c - b'0') as usize;
        p.pos += 1;
    }
    p.expect(b']')?;
    if v == 0 {
        return p.err("indices are 1-based");
    }
    Ok(v - 1)
}

/// Parse `h[i][j] = <expr>` assignments for a metric of complex dimension `n`.
pub fn parse_metric(text: &str, n: usize) -> Result<MetricExpr> {
    if n < 2 {
        return Err(Error::Metric(format!("complex dimension n >= 2 required, got {n}")));
    }
    let mut slots: Vec<Option<Expr>> = vec![None; n * n];
    for (base, stmt) in split_statements(text) {
        let mut p = Parser::new(stmt, base);
        match p.ident() {
            Some(ref s) if s == "h" => {}
            _ => return Err(p.err::<()>("expected 'h[i][j] ='").unwrap_err().into()),
        }
        let i = index(&mut p)?;
        let j = index(&mut p)?;
        p.expect(b'=')?;
        let e = p.expr()?;
        if !p.at_end() {
            return Err(p.err::<()>("trailing input").unwrap_err().into());
        }
        if i >= n || j >= n {
            return Err(Error::Metric(format!(
                "entry h[{}][{}] outside dimension {n}",
                i + 1,
                j + 1
            )));
        }
        if e.max_var() > n {
            return Err(Error::Metric(format!(
                "entry h[{}][{}] uses coordinate z{} beyond dimension {n}",
                i + 1,
                j + 1,
                e.max_var()
            )));
        }
        if slots[i * n + j].is_some() {
            return Err(Error::Metric(format!("entry h[{}][{}] assigned twice", i + 1, j + 1)));
        }
        slots[i * n + j] = Some(e);
    }
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let e = match (&slots[i * n + j], &slots[j * n + i]) {
                (Some(e), _) => e.clone(),
                (None, Some(m)) => m.conjugate(),
                (None, None) => Expr::Num(0.0),
            };
            entries.push(e);
        }
    }
    MetricExpr::new(n, entries)
}

fn hermitian_pair_ok(a: &Expr, b: &Expr, params: &[String]) -> bool {
    let ca = simplify(&a.conjugate());
    let sb = simplify(b);
    if ca == sb {
        return true;
    }
    let n = a.max_var().max(b.max_var()).max(1);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
    let mut checked = 0;
    for _ in 0..32 {
        let z: Vec<C64> = (0..n)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(0.3..2.0)))
            .collect();
        let pm: BTreeMap<String, f64> =
            params.iter().map(|p| (p.clone(), rng.gen_range(0.5..1.5))).collect();
        let env = EvalEnv { z: &z, params: &pm };
        let (va, vb) = (a.eval(&env), b.eval(&env));
        if !(va.re.is_finite() && va.im.is_finite() && vb.re.is_finite() && vb.im.is_finite()) {
            continue;
        }
        if (va.conj() - vb).norm() > 1e-9 * (1.0 + va.norm() + vb.norm()) {
            return false;
        }
        checked += 1;
    }
    checked >= 4
}

impl MetricExpr {
    /// Build from a row-major `n×n` list of entries, checking Hermitian symmetry.
    pub fn new(n: usize, entries: Vec<Expr>) -> Result<MetricExpr> {
        if n < 2 {
            return Err(Error::Metric(format!("complex dimension n >= 2 required, got {n}")));
        }
        if entries.len() != n * n {
            return Err(Error::Metric(format!("expected {} entries, got {}", n * n, entries.len())));
        }
        let entries: Vec<Expr> = entries.iter().map(simplify).collect();
        let mut params = Vec::new();
        for e in &entries {
            e.params(&mut params);
        }
        for i in 0..n {
            for j in i..n {
                if !hermitian_pair_ok(&entries[i * n + j], &entries[j * n + i], &params) {
                    return Err(Error::Metric(format!(
                        "non-Hermitian entries: h[{}][{}] is not the conjugate of h[{}][{}]",
                        j + 1,
                        i + 1,
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        let mut d = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for jl in 0..n * n {
                d.push(wirtinger(&entries[jl], Wrt::z(i)));
            }
        }
        let mut dd = Vec::with_capacity(n * n * n * n);
        for i in 0..n {
            for j in 0..n {
                for kl in 0..n * n {
                    dd.push(wirtinger(&d[i * n * n + kl], Wrt::zb(j)));
                }
            }
        }
        Ok(MetricExpr { n, entries, d, dd })
    }

    pub fn entry(&self, i: usize, j: usize) -> &Expr {
        &self.entries[i * self.n + j]
    }

    pub fn params(&self) -> Vec<String> {
        let mut out = Vec::new();
        for e in &self.entries {
            e.params(&mut out);
        }
        out
    }

    /// Source text that parses back to the same entries.
    pub fn to_source(&self) -> String {
        let n = self.n;
        let mut s = String::new();
        for i in 0..n {
            for j in 0..n {
                s.push_str(&format!("h[{}][{}] = {}\n", i + 1, j + 1, self.entry(i, j)));
            }
        }
        s
    }

    /// Entries multiplied by `exp(f)`.
    pub fn conformal(&self, f: &Expr) -> Result<MetricExpr> {
        let e = Expr::call(crate::expr::Func::Exp, f.clone());
        MetricExpr::new(self.n, self.entries.iter().map(|h| e.clone().mul(h.clone())).collect())
    }

    pub fn jet(&self, p: &ChartPoint, params: &BTreeMap<String, f64>) -> Result<MetricJet> {
        let n = self.n;
        if p.n() != n {
            return Err(Error::Domain(format!("point has {} coordinates, metric needs {n}", p.n())));
        }
        let env = EvalEnv { z: &p.coords, params };
        let mut jet = MetricJet::zeros(n);
        let mut bad = false;
        let mut ev = |e: &Expr| {
            let v = e.eval(&env);
            if !(v.re.is_finite() && v.im.is_finite()) {
                bad = true;
            }
            v
        };
        for k in 0..n {
            for l in 0..n {
                jet.set_h(k, l, ev(&self.entries[k * n + l]));
                for i in 0..n {
                    jet.set_dh(i, k, l, ev(&self.d[i * n * n + k * n + l]));
                    for j in 0..n {
                        jet.set_ddh(i, j, k, l, ev(&self.dd[(i * n + j) * n * n + k * n + l]));
                    }
                }
            }
        }
        if bad {
            return Err(Error::Domain("metric jet not finite at this point".into()));
        }
        Ok(jet)
    }
}
