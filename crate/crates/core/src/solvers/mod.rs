//! Constant second scalar curvature solvers on torus grids.

mod bismut;
mod chern;
mod lozenge;

pub use bismut::{BOUND_TOL, bismut_yamabe_minimize, yamabe_bounds, BismutOptions, YamabeBounds};
pub use chern::{
    continuity_solve, normalize_to_negative, solve_chern_negative, solve_chern_zero, solve_laplace,
    BoundCheck, ContinuityOptions, Normalized, Start,
};
pub use lozenge::{lozenge, lozenge_constancy_check, lozenge_contracted, lozenge_parts, LozengeReport};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::TorusField;

/// One accepted continuity step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PathStep {
    pub a: f64,
    pub newton_iters: usize,
    pub residual: f64,
}

/// One accepted descent step of the variational solver.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnergyStep {
    pub iter: usize,
    pub energy: f64,
    pub constraint_defect: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolverReport {
    pub solver: String,
    pub solution: TorusField,
    /// The target constant.
    pub lambda: f64,
    /// Volume mean of the output metric's scalar curvature.
    pub achieved_constant: f64,
    pub residual_linf: f64,
    pub residual_l2: f64,
    /// Residuals below the configured tolerance.
    pub accepted: bool,
    /// Sup-deviation of the output metric's scalar curvature from `lambda`.
    pub curvature_deviation: f64,
    pub path_trace: Vec<PathStep>,
    pub energy_trace: Vec<EnergyStep>,
    pub bounds: Option<BoundCheck>,
    pub yamabe: Option<YamabeBounds>,
    /// Normalizing factor `u` (negative case) or minimizer `φ` (Bismut case).
    pub auxiliary: Option<TorusField>,
    pub linear_iterations: usize,
    /// Seconds; left out of serialized reports so they are reproducible byte for byte.
    #[serde(skip_serializing)]
    pub wall_time: f64,
    pub notes: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct YamabeConstants {
    pub n: usize,
    pub n1: f64,
    pub n2: f64,
    pub q: f64,
}

impl YamabeConstants {
    /// Geometric exponent `q = N₂`.
    pub fn new(n: usize) -> Result<YamabeConstants> {
        let (n1, n2) = Self::ns(n)?;
        Self::with_q(n, n2).map(|y| YamabeConstants { n1, n2, ..y })
    }

    pub fn with_q(n: usize, q: f64) -> Result<YamabeConstants> {
        let (n1, n2) = Self::ns(n)?;
        let top = 2.0 * n as f64 / (n as f64 - 1.0);
        if !(q > 2.0 && q < top) {
            return Err(Error::Precondition(format!("exponent q = {q} outside (2, {top})")));
        }
        Ok(YamabeConstants { n, n1, n2, q })
    }

    fn ns(n: usize) -> Result<(f64, f64)> {
        if n < 2 {
            return Err(Error::Precondition("n >= 2 required".into()));
        }
        let nf = n as f64;
        let d = 2.0 * nf - 1.0;
        Ok(((nf * nf - 1.0) / (d * d), 2.0 + d / (nf * nf - 1.0)))
    }

    /// Exponent `a` in `φ = e^{a f}`.
    pub fn phi_exponent(&self) -> f64 {
        let nf = self.n as f64;
        (nf * nf - 1.0) / (2.0 * nf - 1.0)
    }
}

pub(crate) fn linf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub(crate) fn rms(v: &[f64]) -> f64 {
    (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn yamabe_constants() {
        let y = YamabeConstants::new(2).unwrap();
        assert!((y.n1 - 1.0 / 3.0).abs() < 1e-15);
        assert!((y.n2 - 3.0).abs() < 1e-15);
        assert_eq!(y.q, y.n2);
        for n in 2..8 {
            let y = YamabeConstants::new(n).unwrap();
            assert!(y.n2 < 2.0 * n as f64 / (n as f64 - 1.0));
        }
        assert!(YamabeConstants::with_q(2, 4.0).is_err());
        assert!(YamabeConstants::with_q(2, 2.0).is_err());
    }
}
