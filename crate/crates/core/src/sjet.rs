//! Exact 2-jets of scalar functions of the chart coordinates: value, `∂_i`, `∂̄_i`
//! and the mixed `∂_i∂̄_j`, combined with product and chain rules.

use std::ops::{Add, Mul, Neg, Sub};

use crate::metric::C64;

#[derive(Clone, Debug, PartialEq)]
pub struct SJet {
    pub v: C64,
    pub d: Vec<C64>,
    pub db: Vec<C64>,
    pub ddb: Vec<C64>,
}

fn zero(n: usize) -> Vec<C64> {
    vec![C64::new(0.0, 0.0); n]
}

impl SJet {
    pub fn n(&self) -> usize {
        self.d.len()
    }

    pub fn constant(n: usize, v: C64) -> SJet {
        SJet { v, d: zero(n), db: zero(n), ddb: zero(n * n) }
    }

    pub fn real(n: usize, v: f64) -> SJet {
        Self::constant(n, C64::new(v, 0.0))
    }

    /// `z_k` at the value `z`.
    pub fn coord(n: usize, k: usize, z: C64) -> SJet {
        let mut s = Self::constant(n, z);
        s.d[k] = C64::new(1.0, 0.0);
        s
    }

    /// `z̄_k` at the value `z`.
    pub fn coord_bar(n: usize, k: usize, z: C64) -> SJet {
        let mut s = Self::constant(n, z.conj());
        s.db[k] = C64::new(1.0, 0.0);
        s
    }

    /// `Im z_k`.
    pub fn im(n: usize, k: usize, z: C64) -> SJet {
        let mut s = Self::constant(n, C64::new(z.im, 0.0));
        s.d[k] = C64::new(0.0, -0.5);
        s.db[k] = C64::new(0.0, 0.5);
        s
    }

    pub fn ddb(&self, i: usize, j: usize) -> C64 {
        self.ddb[i * self.n() + j]
    }

    /// `φ(self)` for a holomorphic `φ` with derivatives `p1 = φ'(v)`, `p2 = φ''(v)`.
    pub fn compose(&self, p0: C64, p1: C64, p2: C64) -> SJet {
        let n = self.n();
        let mut ddb = zero(n * n);
        for i in 0..n {
            for j in 0..n {
                ddb[i * n + j] = p2 * self.d[i] * self.db[j] + p1 * self.ddb(i, j);
            }
        }
        SJet {
            v: p0,
            d: self.d.iter().map(|x| p1 * x).collect(),
            db: self.db.iter().map(|x| p1 * x).collect(),
            ddb,
        }
    }

    pub fn powi(&self, p: i32) -> SJet {
        let v = self.v;
        let pf = p as f64;
        self.compose(v.powi(p), pf * v.powi(p - 1), pf * (pf - 1.0) * v.powi(p - 2))
    }

    pub fn recip(&self) -> SJet {
        self.powi(-1)
    }

    pub fn ln(&self) -> SJet {
        let v = self.v;
        self.compose(v.ln(), v.inv(), -(v * v).inv())
    }

    pub fn scale(&self, c: C64) -> SJet {
        SJet {
            v: self.v * c,
            d: self.d.iter().map(|x| x * c).collect(),
            db: self.db.iter().map(|x| x * c).collect(),
            ddb: self.ddb.iter().map(|x| x * c).collect(),
        }
    }
}

impl Add for &SJet {
    type Output = SJet;
    fn add(self, o: &SJet) -> SJet {
        SJet {
            v: self.v + o.v,
            d: self.d.iter().zip(&o.d).map(|(a, b)| a + b).collect(),
            db: self.db.iter().zip(&o.db).map(|(a, b)| a + b).collect(),
            ddb: self.ddb.iter().zip(&o.ddb).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &SJet {
    type Output = SJet;
    fn sub(self, o: &SJet) -> SJet {
        self + &(-o)
    }
}

impl Neg for &SJet {
    type Output = SJet;
    fn neg(self) -> SJet {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl Mul for &SJet {
    type Output = SJet;
    fn mul(self, o: &SJet) -> SJet {
        let n = self.n();
        let mut ddb = zero(n * n);
        for i in 0..n {
            for j in 0..n {
                ddb[i * n + j] = self.ddb(i, j) * o.v
                    + self.d[i] * o.db[j]
                    + self.db[j] * o.d[i]
                    + self.v * o.ddb(i, j);
            }
        }
        SJet {
            v: self.v * o.v,
            d: (0..n).map(|i| self.d[i] * o.v + self.v * o.d[i]).collect(),
            db: (0..n).map(|i| self.db[i] * o.v + self.v * o.db[i]).collect(),
            ddb,
        }
    }
}
