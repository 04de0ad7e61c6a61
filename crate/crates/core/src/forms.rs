//! Pointwise exterior algebra on `dz^1..dz^n, dz̄^1..dz̄^n`.
//!
//! Monomials are bitmasks: bit `i` is `dz^{i+1}`, bit `n+i` is `dz̄^{i+1}`, and the
//! wedge order is increasing bit order.

use nalgebra::DMatrix;

use crate::metric::{MetricInverse, MetricJet, C64};

const I: C64 = C64::new(0.0, 1.0);

#[derive(Clone, Debug, PartialEq)]
pub struct Form {
    pub n: usize,
    c: Vec<C64>,
}

fn mono_wedge(a: u32, b: u32) -> Option<(u32, f64)> {
    if a & b != 0 {
        return None;
    }
    let mut swaps = 0u32;
    let mut bb = b;
    while bb != 0 {
        let j = bb.trailing_zeros();
        swaps += (a >> (j + 1)).count_ones();
        bb &= bb - 1;
    }
    Some((a | b, if swaps.is_multiple_of(2) { 1.0 } else { -1.0 }))
}

impl Form {
    pub fn zero(n: usize) -> Form {
        Form { n, c: vec![C64::new(0.0, 0.0); 1 << (2 * n)] }
    }

    pub fn one(n: usize) -> Form {
        let mut f = Form::zero(n);
        f.c[0] = C64::new(1.0, 0.0);
        f
    }

    pub fn dz(&self, i: usize) -> u32 {
        1 << i
    }
    pub fn dzb(&self, i: usize) -> u32 {
        1 << (self.n + i)
    }

    pub fn coeff(&self, mask: u32) -> C64 {
        self.c[mask as usize]
    }

    /// Add `v · e_{g_1} ∧ … ∧ e_{g_k}` for generator bits listed in wedge order.
    pub fn add_term(&mut self, gens: &[u32], v: C64) {
        let mut m = 0u32;
        let mut s = 1.0;
        for &g in gens {
            match mono_wedge(m, g) {
                Some((mm, sg)) => {
                    m = mm;
                    s *= sg;
                }
                None => return,
            }
        }
        self.c[m as usize] += v * s;
    }

    pub fn wedge(&self, o: &Form) -> Form {
        let mut out = Form::zero(self.n);
        for (a, &x) in self.c.iter().enumerate() {
            if x == C64::new(0.0, 0.0) {
                continue;
            }
            for (b, &y) in o.c.iter().enumerate() {
                if y == C64::new(0.0, 0.0) {
                    continue;
                }
                if let Some((m, s)) = mono_wedge(a as u32, b as u32) {
                    out.c[m as usize] += x * y * s;
                }
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> Form {
        Form { n: self.n, c: self.c.iter().map(|v| v * s).collect() }
    }

    pub fn sub(&self, o: &Form) -> Form {
        Form { n: self.n, c: self.c.iter().zip(&o.c).map(|(a, b)| a - b).collect() }
    }

    pub fn add(&self, o: &Form) -> Form {
        Form { n: self.n, c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn power(&self, k: usize) -> Form {
        let mut out = Form::one(self.n);
        for _ in 0..k {
            out = out.wedge(self);
        }
        out
    }

    /// Squared pointwise norm induced by the metric, `⟨e_I, e_J⟩ = det ⟨e_{I_a}, e_{J_b}⟩`.
    pub fn norm_sq(&self, inv: &MetricInverse) -> f64 {
        let n = self.n;
        let gen_ip = |a: u32, b: u32| -> C64 {
            let (a, b) = (a as usize, b as usize);
            match (a < n, b < n) {
                (true, true) => inv.g(a, b),
                (false, false) => inv.g(a - n, b - n).conj(),
                _ => C64::new(0.0, 0.0),
            }
        };
        let bits = |m: u32| -> Vec<u32> { (0..2 * n as u32).filter(|b| m >> b & 1 == 1).collect() };
        let nz: Vec<(u32, C64)> = self
            .c
            .iter()
            .enumerate()
            .filter(|(_, v)| v.norm() > 0.0)
            .map(|(m, v)| (m as u32, *v))
            .collect();
        let type_of = |m: u32| ((m & ((1 << n) - 1)).count_ones(), (m >> n).count_ones());
        let mut s = C64::new(0.0, 0.0);
        for &(a, x) in &nz {
            let ba = bits(a);
            for &(b, y) in &nz {
                if type_of(a) != type_of(b) {
                    continue;
                }
                let bb = bits(b);
                let gram = DMatrix::from_fn(ba.len(), bb.len(), |r, c| gen_ip(ba[r], bb[c]));
                let det = if ba.is_empty() { C64::new(1.0, 0.0) } else { gram.determinant() };
                s += x * y.conj() * det;
            }
        }
        s.re
    }
}

/// `ω = √−1 Σ h_{ij̄} dz^i ∧ dz̄^j`.
pub fn kahler_form(jet: &MetricJet) -> Form {
    let n = jet.n;
    let mut f = Form::zero(n);
    for i in 0..n {
        for j in 0..n {
            let (a, b) = (f.dz(i), f.dzb(j));
            f.add_term(&[a, b], I * jet.h(i, j));
        }
    }
    f
}

/// `∂ω`.
pub fn del_omega(jet: &MetricJet) -> Form {
    let n = jet.n;
    let mut f = Form::zero(n);
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let g = [f.dz(k), f.dz(i), f.dzb(j)];
                f.add_term(&g, I * jet.dh(k, i, j));
            }
        }
    }
    f
}

/// `∂̄ω`.
pub fn delbar_omega(jet: &MetricJet) -> Form {
    let n = jet.n;
    let mut f = Form::zero(n);
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let g = [f.dzb(k), f.dz(i), f.dzb(j)];
                f.add_term(&g, I * jet.dbar(k, i, j));
            }
        }
    }
    f
}

/// `∂∂̄ω`.
pub fn ddbar_omega(jet: &MetricJet) -> Form {
    let n = jet.n;
    let mut f = Form::zero(n);
    for a in 0..n {
        for b in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let g = [f.dz(a), f.dzb(b), f.dz(i), f.dzb(j)];
                    f.add_term(&g, I * jet.ddh(a, b, i, j));
                }
            }
        }
    }
    f
}

pub fn d_omega(jet: &MetricJet) -> Form {
    del_omega(jet).add(&delbar_omega(jet))
}

/// `d(ω^{n−1}) = (n−1) dω ∧ ω^{n−2}`.
pub fn d_omega_pow(jet: &MetricJet) -> Form {
    let n = jet.n;
    let w = kahler_form(jet);
    d_omega(jet).wedge(&w.power(n - 2)).scale(C64::new((n - 1) as f64, 0.0))
}

/// `∂∂̄(ω^{n−1}) = (n−1)[∂∂̄ω ∧ ω^{n−2} − (n−2) ∂̄ω ∧ ∂ω ∧ ω^{n−3}]`.
pub fn ddbar_omega_pow(jet: &MetricJet) -> Form {
    let n = jet.n;
    let w = kahler_form(jet);
    let mut out = ddbar_omega(jet).wedge(&w.power(n - 2));
    if n >= 3 {
        let t = delbar_omega(jet).wedge(&del_omega(jet)).wedge(&w.power(n - 3));
        out = out.sub(&t.scale(C64::new((n - 2) as f64, 0.0)));
    }
    out.scale(C64::new((n - 1) as f64, 0.0))
}

/// 1-form `Σ a_i dz^i + b_i dz̄^i`.
pub fn one_form(n: usize, a: &[C64], b: &[C64]) -> Form {
    let mut f = Form::zero(n);
    for i in 0..n {
        let (p, q) = (f.dz(i), f.dzb(i));
        f.add_term(&[p], a[i]);
        f.add_term(&[q], b[i]);
    }
    f
}
