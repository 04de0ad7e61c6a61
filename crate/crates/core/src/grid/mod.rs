//! Periodic grids on complex-torus charts.
//!
//! Real axes are numbered `2k` for `x_{k+1}` and `2k+1` for `y_{k+1}`. A grid may be
//! *reduced*: only the listed active axes are sampled and fields are constant along the
//! others. Nodes are ordered lexicographically over the active axes, first axis slowest.

mod metric;

pub use metric::{
    balanced_representative, complex_laplacian, gauduchon_degrees, integrate,
    laplacian_duality_defect, BalancedRepresentative, Degrees, GridMetric, LaplaceOp,
};

use std::sync::Arc;

use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{ChartPoint, C64};

/// Byte budget for per-node grid data.
pub const MEMORY_BUDGET: usize = 2 << 30;
/// Rough per-node footprint of a cached grid metric.
const BYTES_PER_NODE: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    /// Second-order centred differences.
    Fd2,
    /// Fourier collocation.
    Spectral,
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Scheme> {
        match s {
            "fd2" => Ok(Scheme::Fd2),
            "spectral" => Ok(Scheme::Spectral),
            _ => Err(Error::Precondition(format!("unknown scheme '{s}' (fd2 | spectral)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusGrid {
    pub n: usize,
    /// Points per real axis.
    pub npts: usize,
    pub periods: Vec<f64>,
    /// Sampled real axes, increasing.
    pub active: Vec<usize>,
    pub scheme: Scheme,
}

impl TorusGrid {
    pub fn new(n: usize, npts: usize, periods: Option<Vec<f64>>, scheme: Scheme) -> Result<TorusGrid> {
        Self::reduced(n, npts, periods, (0..2 * n).collect(), scheme)
    }

    /// Grid sampling only `active` real axes.
    pub fn reduced(
        n: usize,
        npts: usize,
        periods: Option<Vec<f64>>,
        active: Vec<usize>,
        scheme: Scheme,
    ) -> Result<TorusGrid> {
        if npts < 4 || !npts.is_multiple_of(2) {
            return Err(Error::Precondition(format!("grid size N = {npts} must be even and at least 4")));
        }
        let periods = periods.unwrap_or_else(|| vec![1.0; 2 * n]);
        if periods.len() != 2 * n || periods.iter().any(|p| !(*p > 0.0)) {
            return Err(Error::Precondition(format!("need {} positive periods", 2 * n)));
        }
        let mut active = active;
        active.sort_unstable();
        active.dedup();
        if active.iter().any(|&a| a >= 2 * n) {
            return Err(Error::Precondition("active axis out of range".into()));
        }
        let nodes = (npts as f64).powi(active.len() as i32);
        if nodes * BYTES_PER_NODE as f64 > MEMORY_BUDGET as f64 {
            return Err(Error::Precondition(format!(
                "{nodes:.0} nodes exceed the {} GiB memory budget",
                MEMORY_BUDGET >> 30
            )));
        }
        Ok(TorusGrid { n, npts, periods, active, scheme })
    }

    pub fn nodes(&self) -> usize {
        self.npts.pow(self.active.len() as u32)
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.periods[axis] / self.npts as f64
    }

    /// Position of a real axis among the active ones.
    fn slot(&self, axis: usize) -> Option<usize> {
        self.active.iter().position(|&a| a == axis)
    }

    fn stride(&self, slot: usize) -> usize {
        self.npts.pow((self.active.len() - 1 - slot) as u32)
    }

    fn index_along(&self, node: usize, slot: usize) -> usize {
        node / self.stride(slot) % self.npts
    }

    fn shift(&self, node: usize, slot: usize, by: isize) -> usize {
        let s = self.stride(slot);
        let i = self.index_along(node, slot) as isize;
        let j = (i + by).rem_euclid(self.npts as isize) as usize;
        node + j * s - (i as usize) * s
    }

    /// Real coordinates `[x_1, y_1, …]` of a node; inactive axes sit at 0.
    pub fn real_coords(&self, node: usize) -> Vec<f64> {
        let mut x = vec![0.0; 2 * self.n];
        for (m, &a) in self.active.iter().enumerate() {
            x[a] = self.index_along(node, m) as f64 * self.spacing(a);
        }
        x
    }

    pub fn point(&self, node: usize) -> ChartPoint {
        let x = self.real_coords(node);
        ChartPoint::new((0..self.n).map(|k| C64::new(x[2 * k], x[2 * k + 1])).collect())
    }

    /// Volume of the inactive directions, which quadrature folds in.
    pub fn inactive_volume(&self) -> f64 {
        (0..2 * self.n).filter(|a| self.slot(*a).is_none()).map(|a| self.periods[a]).product()
    }

    /// Sample a function of the real coordinates.
    pub fn sample(&self, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        (0..self.nodes()).map(|p| f(&self.real_coords(p))).collect()
    }

    /// First derivative along a real axis.
    pub fn d1(&self, u: &[f64], axis: usize) -> Vec<f64> {
        let Some(m) = self.slot(axis) else { return vec![0.0; u.len()] };
        match self.scheme {
            Scheme::Fd2 => {
                let h2 = 2.0 * self.spacing(axis);
                (0..u.len()).map(|p| (u[self.shift(p, m, 1)] - u[self.shift(p, m, -1)]) / h2).collect()
            }
            Scheme::Spectral => self.spectral(u, m, axis, 1),
        }
    }

    /// Second derivative along a pair of real axes.
    pub fn d2(&self, u: &[f64], a: usize, b: usize) -> Vec<f64> {
        let (Some(ma), Some(mb)) = (self.slot(a), self.slot(b)) else { return vec![0.0; u.len()] };
        match self.scheme {
            Scheme::Fd2 if a == b => {
                let h = self.spacing(a);
                (0..u.len())
                    .map(|p| (u[self.shift(p, ma, 1)] - 2.0 * u[p] + u[self.shift(p, ma, -1)]) / (h * h))
                    .collect()
            }
            Scheme::Fd2 => {
                let den = 4.0 * self.spacing(a) * self.spacing(b);
                (0..u.len())
                    .map(|p| {
                        let (pp, pm) = (self.shift(p, ma, 1), self.shift(p, ma, -1));
                        (u[self.shift(pp, mb, 1)] - u[self.shift(pp, mb, -1)] - u[self.shift(pm, mb, 1)]
                            + u[self.shift(pm, mb, -1)])
                            / den
                    })
                    .collect()
            }
            Scheme::Spectral if a == b => self.spectral(u, ma, a, 2),
            Scheme::Spectral => self.spectral(&self.spectral(u, mb, b, 1), ma, a, 1),
        }
    }

    fn spectral(&self, u: &[f64], slot: usize, axis: usize, order: u32) -> Vec<f64> {
        let nn = self.npts;
        let mut planner = FftPlanner::<f64>::new();
        let fwd = planner.plan_fft_forward(nn);
        let inv = planner.plan_fft_inverse(nn);
        let s = self.stride(slot);
        let w = 2.0 * std::f64::consts::PI / self.periods[axis];
        let mult: Vec<Complex<f64>> = (0..nn)
            .map(|k| {
                let kk = if k <= nn / 2 { k as f64 } else { k as f64 - nn as f64 };
                match order {
                    1 if k == nn / 2 => Complex::new(0.0, 0.0),
                    1 => Complex::new(0.0, w * kk),
                    _ => Complex::new(-(w * kk).powi(2), 0.0),
                }
            })
            .collect();
        let mut out = vec![0.0; u.len()];
        let mut line = vec![Complex::new(0.0, 0.0); nn];
        for base in 0..u.len() {
            if self.index_along(base, slot) != 0 {
                continue;
            }
            for (i, v) in line.iter_mut().enumerate() {
                *v = Complex::new(u[base + i * s], 0.0);
            }
            fwd.process(&mut line);
            for (v, m) in line.iter_mut().zip(&mult) {
                *v *= m;
            }
            inv.process(&mut line);
            for (i, v) in line.iter().enumerate() {
                out[base + i * s] = v.re / nn as f64;
            }
        }
        out
    }

    /// Fourier symbol of [`d2`](Self::d2) at integer wavenumbers `k` (one per active axis).
    pub fn d2_symbol(&self, a: usize, b: usize, k: &[isize]) -> f64 {
        let (Some(ma), Some(mb)) = (self.slot(a), self.slot(b)) else { return 0.0 };
        let nyq = (self.npts / 2) as isize;
        let theta = |m: usize, axis: usize| 2.0 * std::f64::consts::PI * k[m] as f64 / self.periods[axis];
        match self.scheme {
            Scheme::Fd2 if a == b => {
                let h = self.spacing(a);
                -(2.0 * (0.5 * theta(ma, a) * h).sin() / h).powi(2)
            }
            Scheme::Fd2 => {
                let (ha, hb) = (self.spacing(a), self.spacing(b));
                -(theta(ma, a) * ha).sin() * (theta(mb, b) * hb).sin() / (ha * hb)
            }
            Scheme::Spectral if a == b => -theta(ma, a).powi(2),
            Scheme::Spectral if k[ma] == nyq || k[mb] == nyq => 0.0,
            Scheme::Spectral => -theta(ma, a) * theta(mb, b),
        }
    }

    /// Apply the Fourier multiplier `m(k)` to a real field; `k` holds signed wavenumbers
    /// per active axis.
    pub fn fourier_multiply(&self, u: &[f64], m: impl Fn(&[isize]) -> f64) -> Vec<f64> {
        let nn = self.npts;
        let dims = self.active.len();
        let mut planner = FftPlanner::<f64>::new();
        let fwd = planner.plan_fft_forward(nn);
        let inv = planner.plan_fft_inverse(nn);
        let mut data: Vec<Complex<f64>> = u.iter().map(|v| Complex::new(*v, 0.0)).collect();
        let pass = |data: &mut Vec<Complex<f64>>, plan: &std::sync::Arc<dyn rustfft::Fft<f64>>| {
            let mut line = vec![Complex::new(0.0, 0.0); nn];
            for slot in 0..dims {
                let s = self.stride(slot);
                for base in 0..data.len() {
                    if self.index_along(base, slot) != 0 {
                        continue;
                    }
                    for (i, v) in line.iter_mut().enumerate() {
                        *v = data[base + i * s];
                    }
                    plan.process(&mut line);
                    for (i, v) in line.iter().enumerate() {
                        data[base + i * s] = *v;
                    }
                }
            }
        };
        pass(&mut data, &fwd);
        let mut k = vec![0isize; dims];
        for (p, v) in data.iter_mut().enumerate() {
            for (slot, kk) in k.iter_mut().enumerate() {
                let i = self.index_along(p, slot);
                *kk = if i <= nn / 2 { i as isize } else { i as isize - nn as isize };
            }
            *v *= m(&k);
        }
        pass(&mut data, &inv);
        let scale = (nn as f64).powi(dims as i32);
        data.iter().map(|v| v.re / scale).collect()
    }
}

/// A sampled field, real or complex.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusField {
    pub grid: Arc<TorusGrid>,
    pub values: Vec<C64>,
    pub real: bool,
}

impl TorusField {
    pub fn real(grid: Arc<TorusGrid>, values: &[f64]) -> TorusField {
        TorusField { grid, values: values.iter().map(|v| C64::new(*v, 0.0)).collect(), real: true }
    }

    pub fn complex(grid: Arc<TorusGrid>, values: Vec<C64>) -> TorusField {
        TorusField { grid, values, real: false }
    }

    pub fn re(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn im(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.im).collect()
    }

    pub fn conj(&self) -> TorusField {
        TorusField { grid: self.grid.clone(), values: self.values.iter().map(|v| v.conj()).collect(), real: self.real }
    }

    /// CSV rows `node, x_1, y_1, …, re, im`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let n = self.grid.n;
        let mut header = vec!["node".to_string()];
        for k in 1..=n {
            header.push(format!("x{k}"));
            header.push(format!("y{k}"));
        }
        header.push("re".into());
        header.push("im".into());
        w.write_record(&header).map_err(|e| Error::Io(e.into()))?;
        for (p, v) in self.values.iter().enumerate() {
            let mut row = vec![p.to_string()];
            row.extend(self.grid.real_coords(p).iter().map(|x| format!("{x:.17e}")));
            row.push(format!("{:.17e}", v.re));
            row.push(format!("{:.17e}", v.im));
            w.write_record(&row).map_err(|e| Error::Io(e.into()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

impl Serialize for TorusField {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("TorusField", if self.real { 3 } else { 4 })?;
        st.serialize_field("grid", &*self.grid)?;
        st.serialize_field("real", &self.real)?;
        st.serialize_field("re", &self.re())?;
        if !self.real {
            st.serialize_field("im", &self.im())?;
        }
        st.end()
    }
}

fn wirtinger(u: &TorusField, k: usize, sign: f64) -> TorusField {
    let g = &u.grid;
    let (re, im) = (u.re(), u.im());
    let (rx, ry) = (g.d1(&re, 2 * k), g.d1(&re, 2 * k + 1));
    let (ix, iy) = (g.d1(&im, 2 * k), g.d1(&im, 2 * k + 1));
    let values = (0..re.len())
        .map(|p| {
            // ½(∂_x ∓ i∂_y)(re + i im)
            let dx = C64::new(rx[p], ix[p]);
            let dy = C64::new(ry[p], iy[p]);
            (dx + C64::new(0.0, sign) * dy) * 0.5
        })
        .collect();
    TorusField::complex(g.clone(), values)
}

/// Discrete `∂u/∂z^k`.
pub fn dz(u: &TorusField, k: usize) -> TorusField {
    wirtinger(u, k, -1.0)
}

/// Discrete `∂u/∂z̄^k`.
pub fn dzbar(u: &TorusField, k: usize) -> TorusField {
    wirtinger(u, k, 1.0)
}
