//! Pointwise 2-jets of Hermitian metrics and their inverses.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const PIVOT_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub coords: Vec<C64>,
}

impl ChartPoint {
    pub fn new(coords: Vec<C64>) -> Self {
        ChartPoint { coords }
    }
    pub fn n(&self) -> usize {
        self.coords.len()
    }
}

/// `h[i][j] = h_{ij̄}`, `dh[i][j][l] = ∂_i h_{jl̄}`, `ddh[i][j][k][l] = ∂_i ∂̄_j h_{kl̄}`.
///
/// Antiholomorphic first derivatives are recovered by conjugation, see [`MetricJet::dbar`].
#[derive(Clone, Debug, PartialEq)]
pub struct MetricJet {
    pub n: usize,
    h: Vec<C64>,
    dh: Vec<C64>,
    ddh: Vec<C64>,
}

impl MetricJet {
    pub fn zeros(n: usize) -> Self {
        let z = C64::new(0.0, 0.0);
        MetricJet { n, h: vec![z; n * n], dh: vec![z; n * n * n], ddh: vec![z; n * n * n * n] }
    }

    pub fn flat(n: usize) -> Self {
        let mut j = Self::zeros(n);
        for i in 0..n {
            j.set_h(i, i, C64::new(1.0, 0.0));
        }
        j
    }

    #[inline]
    pub fn h(&self, i: usize, j: usize) -> C64 {
        self.h[i * self.n + j]
    }
    #[inline]
    pub fn dh(&self, i: usize, j: usize, l: usize) -> C64 {
        self.dh[(i * self.n + j) * self.n + l]
    }
    #[inline]
    pub fn ddh(&self, i: usize, j: usize, k: usize, l: usize) -> C64 {
        self.ddh[((i * self.n + j) * self.n + k) * self.n + l]
    }
    /// `∂̄_i h_{jl̄} = conj(∂_i h_{lj̄})`.
    #[inline]
    pub fn dbar(&self, i: usize, j: usize, l: usize) -> C64 {
        self.dh(i, l, j).conj()
    }

    pub fn set_h(&mut self, i: usize, j: usize, v: C64) {
        self.h[i * self.n + j] = v;
    }
    pub fn set_dh(&mut self, i: usize, j: usize, l: usize, v: C64) {
        self.dh[(i * self.n + j) * self.n + l] = v;
    }
    pub fn set_ddh(&mut self, i: usize, j: usize, k: usize, l: usize, v: C64) {
        self.ddh[((i * self.n + j) * self.n + k) * self.n + l] = v;
    }

    pub fn h_matrix(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.h(i, j))
    }

    /// Multiply the metric by a positive constant.
    pub fn scaled(&self, c: f64) -> MetricJet {
        MetricJet {
            n: self.n,
            h: self.h.iter().map(|v| v * c).collect(),
            dh: self.dh.iter().map(|v| v * c).collect(),
            ddh: self.ddh.iter().map(|v| v * c).collect(),
        }
    }

    /// Largest violation of the Hermitian and conjugation invariants.
    pub fn invariant_defect(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.h(i, j) - self.h(j, i).conj()).norm());
                for k in 0..n {
                    for l in 0..n {
                        let a = self.ddh(i, j, k, l).conj();
                        worst = worst.max((a - self.ddh(j, i, l, k)).norm());
                    }
                }
            }
        }
        worst
    }

    /// Jet of `e^f h` from the jet of `h` and the 2-jet of a real function `f`.
    pub fn conformal(&self, f: &FactorJet) -> MetricJet {
        let n = self.n;
        let ef = f.f.exp();
        let mut out = MetricJet::zeros(n);
        for k in 0..n {
            for l in 0..n {
                let h = self.h(k, l);
                out.set_h(k, l, h * ef);
                for i in 0..n {
                    out.set_dh(i, k, l, ef * (f.df[i] * h + self.dh(i, k, l)));
                    for j in 0..n {
                        let dbf = f.df[j].conj();
                        let v = f.df[i] * dbf * h
                            + f.ddf[i * n + j] * h
                            + dbf * self.dh(i, k, l)
                            + f.df[i] * self.dbar(j, k, l)
                            + self.ddh(i, j, k, l);
                        out.set_ddh(i, j, k, l, ef * v);
                    }
                }
            }
        }
        out
    }
}

/// 2-jet of a real function: `f`, `∂_i f`, `∂_i∂̄_j f` (row-major).
#[derive(Clone, Debug, PartialEq)]
pub struct FactorJet {
    pub f: f64,
    pub df: Vec<C64>,
    pub ddf: Vec<C64>,
}

impl FactorJet {
    pub fn constant(n: usize, c: f64) -> Self {
        FactorJet { f: c, df: vec![C64::new(0.0, 0.0); n], ddf: vec![C64::new(0.0, 0.0); n * n] }
    }
    pub fn ddf(&self, i: usize, j: usize) -> C64 {
        self.ddf[i * self.df.len() + j]
    }
}

/// `g[k][l] = h^{kl̄}`, so that `Σ_l g[k][l] h[j][l] = δ_kj`.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricInverse {
    pub n: usize,
    g: Vec<C64>,
    pub det: f64,
}

impl MetricInverse {
    #[inline]
    pub fn g(&self, k: usize, l: usize) -> C64 {
        self.g[k * self.n + l]
    }
}

/// Real pivots of the `LDLᴴ` factorisation of a Hermitian matrix.
fn ldl_pivots(h: &DMatrix<C64>) -> Vec<f64> {
    let n = h.nrows();
    let mut a = h.clone();
    let mut d = vec![0.0; n];
    for k in 0..n {
        d[k] = a[(k, k)].re;
        if !(d[k] > 0.0) {
            let bad = d[k].min(0.0);
            d[k..].iter_mut().for_each(|v| *v = bad);
            return d;
        }
        for i in k + 1..n {
            let lik = a[(i, k)] / d[k];
            for j in k + 1..n {
                let v = lik * a[(k, j)];
                a[(i, j)] -= v;
            }
        }
    }
    d
}

/// Inverse and determinant through an `LDLᴴ` factorisation.
///
/// Fails when the smallest pivot drops below `1e-10` times the largest diagonal entry.
pub fn inverse_and_det(jet: &MetricJet) -> Result<MetricInverse> {
    let n = jet.n;
    let h = jet.h_matrix();
    if !h.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
        return Err(Error::Singular("non-finite metric coefficients".into()));
    }
    let herm = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (h[(i, j)] - h[(j, i)].conj()).norm())
        .fold(0.0, f64::max);
    let maxdiag = (0..n).map(|i| h[(i, i)].re).fold(f64::MIN, f64::max);
    if herm > 1e-12 * maxdiag.abs().max(1.0) {
        return Err(Error::Singular(format!("metric matrix not Hermitian (defect {herm:.3e})")));
    }
    let pivots = ldl_pivots(&h);
    let minpiv = pivots.iter().cloned().fold(f64::MAX, f64::min);
    if !(minpiv > PIVOT_TOL * maxdiag) {
        return Err(Error::Singular(format!(
            "metric not positive definite: pivot {minpiv:.3e} against diagonal {maxdiag:.3e}"
        )));
    }
    let det = pivots.iter().product();
    let inv = h.try_inverse().ok_or_else(|| Error::Singular("metric matrix not invertible".into()))?;
    let g = (0..n).flat_map(|k| (0..n).map(move |l| (k, l))).map(|(k, l)| inv[(l, k)]).collect();
    Ok(MetricInverse { n, g, det })
}
